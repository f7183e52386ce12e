"""Gaussian likelihood and BIC of ancestral graphs.

Parameters are fitted by residual iterative conditional fitting (RICF).
The sample covariance ``S`` is the unbiased (N - 1) estimate, and the
log-likelihood of a fitted ``Sigma`` is the Gaussian likelihood of the
centred data::

    l = -N/2 * (V ln 2pi + ln|Sigma| + (N-1)/N tr(Sigma^-1 S))

The same quantity decomposes over c-components, which is what the
:class:`BicScorer` caches during search.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .graphs import MixedGraph, c_components
from .simulate import CovarianceMatrix

LOG_2PI = math.log(2 * math.pi)


class RicfConvergenceWarning(RuntimeWarning):
    pass


@dataclass
class RicfResult:
    """Fitted ``B`` (``B[i, j]`` is the coefficient of ``j -> i``), ``Omega``, and ``Sigma``.

    ``trace`` holds, per sweep, the Gaussian log-likelihood with ``S``
    itself as the target covariance (the quantity RICF increases
    monotonically); ``loglik`` is the final value of the likelihood
    described in the module docstring.
    """

    names: tuple[str, ...]
    B: np.ndarray
    Omega: np.ndarray
    Sigma: np.ndarray
    loglik: float
    iterations: int
    converged: bool
    trace: list[float] = field(default_factory=list)


def implied_covariance(B: np.ndarray, Omega: np.ndarray) -> np.ndarray:
    inv = np.linalg.inv(np.eye(len(B)) - B)
    return inv @ Omega @ inv.T


def gaussian_loglik(Sigma: np.ndarray, S: np.ndarray, n: int, trace_factor: float | None = None) -> float:
    """Log-likelihood of ``n`` centred rows with sample covariance ``S`` under ``Sigma``."""
    p = len(S)
    if trace_factor is None:
        trace_factor = (n - 1) / n
    sign, logdet = np.linalg.slogdet(Sigma)
    if sign <= 0:
        return -math.inf
    tr = float(np.trace(np.linalg.solve(Sigma, S)))
    return -0.5 * n * (p * LOG_2PI + logdet + trace_factor * tr)


def _components(p, spouses):
    parent = list(range(p))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i in range(p):
        for j in spouses[i]:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    comp = {}
    for i in range(p):
        comp.setdefault(find(i), []).append(i)
    return {i: comp[find(i)] for i in range(p)}


def ricf(S, parents, spouses, tol=1e-8, max_iter=200, B0=None, Omega0=None, record=False):
    """Core RICF over index lists.

    Returns ``(B, Omega, iterations, converged, trace)``. With no
    bidirected edges the single sweep is the per-node least-squares fit
    and the loop stops there.
    """
    S = np.asarray(S, dtype=float)
    p = len(S)
    B = np.zeros((p, p)) if B0 is None else np.array(B0, dtype=float)
    Omega = np.diag(np.diag(S)).astype(float) if Omega0 is None else np.array(Omega0, dtype=float)
    has_spouses = any(spouses[i] for i in range(p))
    comp_of = _components(p, spouses)
    trace = []
    eye = np.eye(p)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        B_old = B.copy()
        Om_old = Omega.copy()
        for i in range(p):
            pa = list(parents[i])
            sp = list(spouses[i])
            if not pa and not sp:
                Omega[i, i] = S[i, i]
                continue
            rows = [np.eye(p)[pa]] if pa else []
            if sp:
                others = [j for j in comp_of[i] if j != i]
                om_inv = np.linalg.inv(Omega[np.ix_(others, others)])
                pos = [others.index(j) for j in sp]
                A = om_inv[pos] @ (eye - B)[others]
                rows.append(A)
            M = np.vstack(rows)
            MS = M @ S
            cov_r = MS @ M.T
            c = MS[:, i]
            theta = np.linalg.solve(cov_r, c)
            resvar = S[i, i] - theta @ c
            npa = len(pa)
            B[i, :] = 0.0
            if pa:
                B[i, pa] = theta[:npa]
            if sp:
                w = theta[npa:]
                Omega[i, :] = 0.0
                Omega[:, i] = 0.0
                Omega[i, sp] = w
                Omega[sp, i] = w
                Omega[i, i] = resvar + w @ om_inv[np.ix_(pos, pos)] @ w
            else:
                Omega[i, i] = resvar
        if record:
            trace.append(gaussian_loglik(implied_covariance(B, Omega), S, 1, trace_factor=1.0))
        if not has_spouses:
            converged = True
            break
        delta = max(np.abs(B - B_old).max(), np.abs(Omega - Om_old).max())
        if delta < tol:
            converged = True
            break
    return B, Omega, it, converged, trace


def _index_structure(mag: MixedGraph, names):
    idx = {v: i for i, v in enumerate(names)}
    parents = [[idx[u] for u in mag.parents(v)] for v in names]
    spouses = [[idx[u] for u in mag.spouses(v)] for v in names]
    return parents, spouses


def _check_cov(mag: MixedGraph, cov: CovarianceMatrix) -> tuple[tuple[str, ...], np.ndarray]:
    names = mag.nodes
    S = cov.submatrix(names)
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        raise ValueError("covariance is not positive definite on the graph's nodes") from None
    return names, S


def ricf_fit(mag: MixedGraph, cov: CovarianceMatrix, n: int | None = None, tol: float = 1e-8, max_iter: int = 200) -> RicfResult:
    """Maximum-likelihood fit of the linear Gaussian model of an ancestral graph."""
    n = cov.n if n is None else n
    names, S = _check_cov(mag, cov)
    parents, spouses = _index_structure(mag, names)
    B, Omega, iters, converged, trace = ricf(S, parents, spouses, tol, max_iter, record=True)
    if not converged:
        warnings.warn(f"RICF stopped after {iters} sweeps without converging", RicfConvergenceWarning, stacklevel=2)
    Sigma = implied_covariance(B, Omega)
    loglik = gaussian_loglik(Sigma, S, n)
    trace = [n * t for t in trace]
    return RicfResult(names, B, Omega, Sigma, loglik, iters, converged, trace)


def log_likelihood(mag: MixedGraph, cov: CovarianceMatrix, n: int | None = None, **kw) -> float:
    return ricf_fit(mag, cov, n, **kw).loglik


def component_score(S_local: np.ndarray, n_comp: int, B: np.ndarray, Omega: np.ndarray, n: int) -> float:
    """Per-component term of the decomposed likelihood, ``l = -N/2 * sum_k score_k``.

    ``S_local`` and the fitted ``B``, ``Omega`` cover the component's nodes
    first (``n_comp`` of them) followed by their outside parents, which are
    exogenous with variances equal to their sample variances.
    """
    Sigma_g = implied_covariance(B, Omega)
    n_par = len(S_local) - n_comp
    sign, logdet = np.linalg.slogdet(Sigma_g)
    if sign <= 0:
        return math.inf
    par_var = np.diag(Sigma_g)[n_comp:]
    log_ratio = logdet - float(np.sum(np.log(par_var)))
    tr = float(np.trace(np.linalg.solve(Sigma_g, S_local)))
    return n_comp * LOG_2PI + log_ratio + (n - 1) / n * (tr - n_par)


def _local_problem(S, comp, parents, spouses):
    outside = sorted({p for i in comp for p in parents[i]} - set(comp))
    local = list(comp) + outside
    pos = {v: k for k, v in enumerate(local)}
    lp = [[pos[p] for p in parents[v]] if k < len(comp) else [] for k, v in enumerate(local)]
    ls = [[pos[s] for s in spouses[v]] if k < len(comp) else [] for k, v in enumerate(local)]
    return local, S[np.ix_(local, local)], lp, ls


def log_likelihood_decomposed(mag: MixedGraph, cov: CovarianceMatrix, n: int | None = None, tol=1e-8, max_iter=200) -> float:
    """Same value as :func:`log_likelihood`, summed over c-components."""
    n = cov.n if n is None else n
    names, S = _check_cov(mag, cov)
    parents, spouses = _index_structure(mag, names)
    idx = {v: i for i, v in enumerate(names)}
    total = 0.0
    for comp in c_components(mag):
        comp_idx = sorted(idx[v] for v in comp)
        _, S_loc, lp, ls = _local_problem(S, comp_idx, parents, spouses)
        B, Om, _, _, _ = ricf(S_loc, lp, ls, tol, max_iter)
        total += component_score(S_loc, len(comp_idx), B, Om, n)
    return -0.5 * n * total


def bic_penalty(n: int, num_nodes: int, num_edges: int) -> float:
    return math.log(n) * (2 * num_nodes + num_edges)


def bic(mag: MixedGraph, cov: CovarianceMatrix, n: int | None = None, **kw) -> float:
    """``-2 l + ln(N) (2|V| + |E|)``; lower is better."""
    n = cov.n if n is None else n
    return -2.0 * log_likelihood(mag, cov, n, **kw) + bic_penalty(n, len(mag.nodes), mag.num_edges())


class BicScorer:
    """BIC of ancestral graphs over a fixed covariance, cached per c-component.

    Structures are given by index: ``parents[i]`` and ``spouses[i]`` list
    the parents and bidirected neighbours of variable ``i`` of ``cov``.
    A component whose RICF fit does not converge scores ``+inf``.
    """

    def __init__(self, cov: CovarianceMatrix, n: int | None = None, tol: float = 1e-8, max_iter: int = 200, fast_singletons: bool = True):
        self.cov = cov
        self.S = cov.matrix
        self.n = cov.n if n is None else n
        self.tol = tol
        self.max_iter = max_iter
        self.fast_singletons = fast_singletons
        self.cache: dict = {}
        self.fits = 0

    def component(self, comp: tuple[int, ...], parents, spouses) -> float:
        key = (
            comp,
            tuple(tuple(sorted(parents[i])) for i in comp),
            tuple(tuple(sorted(spouses[i])) for i in comp),
        )
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        self.fits += 1
        if len(comp) == 1 and self.fast_singletons:
            i = comp[0]
            pa = list(parents[i])
            omega = self.S[i, i]
            if pa:
                s = self.S[pa, i]
                omega = omega - s @ np.linalg.solve(self.S[np.ix_(pa, pa)], s)
            score = LOG_2PI + math.log(omega) + (self.n - 1) / self.n if omega > 0 else math.inf
        else:
            _, S_loc, lp, ls = _local_problem(self.S, list(comp), parents, spouses)
            B, Om, _, converged, _ = ricf(S_loc, lp, ls, self.tol, self.max_iter)
            score = component_score(S_loc, len(comp), B, Om, self.n) if converged else math.inf
        self.cache[key] = score
        return score

    def score(self, parents, spouses) -> float:
        p = len(parents)
        comp_of = _components(p, spouses)
        total = 0.0
        seen = set()
        for i in range(p):
            comp = tuple(comp_of[i])
            if comp in seen:
                continue
            seen.add(comp)
            total += self.component(comp, parents, spouses)
        num_edges = sum(len(pa) for pa in parents) + sum(len(sp) for sp in spouses) // 2
        return self.n * total + bic_penalty(self.n, p, num_edges)

    def score_graph(self, mag: MixedGraph) -> float:
        names = self.cov.names
        if set(mag.nodes) != set(names):
            raise ValueError("graph and covariance cover different variables")
        return self.score(*_index_structure(mag, names))
