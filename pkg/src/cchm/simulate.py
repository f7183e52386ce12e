"""Random Gaussian DAG models, sampling, latent hiding and covariances.

Randomness comes from ``numpy.random.Generator`` over the PCG64 bit
generator; :data:`RNG_ALGORITHM` is written to metadata sidecars so runs can
be replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graphs import ARROW, DAG, TAIL, GraphError, MixedGraph, is_dag

RNG_ALGORITHM = f"numpy.random.PCG64 (numpy {np.__version__})"


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def node_names(v: int) -> list[str]:
    """``X1..Xv`` zero-padded so lexicographic order equals numeric order."""
    width = len(str(v))
    return [f"X{i:0{width}d}" for i in range(1, v + 1)]


@dataclass
class SemParams:
    """Linear Gaussian SEM parameters: ``X_c = mu_c + sum_p beta_pc X_p + eps_c``."""

    coefficients: dict[tuple[str, str], float]
    error_variances: dict[str, float]
    means: dict[str, float] = field(default_factory=dict)

    def check(self, dag: MixedGraph) -> None:
        if set(self.coefficients) != set(dag.directed_edges()):
            raise GraphError("coefficient support does not match the DAG's edges")
        for v in dag.nodes:
            if self.error_variances.get(v, 0.0) <= 0:
                raise GraphError(f"error variance of {v} must be positive")

    def matrices(self, order: list[str]) -> tuple[np.ndarray, np.ndarray]:
        """``(B, Omega)`` with ``B[child, parent] = beta``."""
        idx = {v: i for i, v in enumerate(order)}
        B = np.zeros((len(order), len(order)))
        for (p, c), beta in self.coefficients.items():
            B[idx[c], idx[p]] = beta
        Omega = np.diag([self.error_variances[v] for v in order])
        return B, Omega

    def population_covariance(self, order: list[str]) -> np.ndarray:
        B, Omega = self.matrices(order)
        inv = np.linalg.inv(np.eye(len(order)) - B)
        return inv @ Omega @ inv.T


@dataclass
class Dataset:
    columns: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        self.columns = tuple(self.columns)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.columns):
            raise ValueError("values must be an N x V matrix matching the column names")
        if np.isnan(self.values).any():
            raise ValueError("dataset contains missing values")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.columns.index(name)]

    def select(self, names) -> Dataset:
        idx = [self.columns.index(c) for c in names]
        return Dataset(tuple(names), self.values[:, idx])

    def standardized(self) -> Dataset:
        sd = self.values.std(axis=0, ddof=1)
        sd[sd == 0] = 1.0
        return Dataset(self.columns, (self.values - self.values.mean(axis=0)) / sd)


@dataclass
class CovarianceMatrix:
    """Symmetric V x V matrix over named variables.

    ``degenerate`` lists zero-variance variables. The same container holds
    raw (uncentred) second moments when built by :func:`second_moments`.
    """

    names: tuple[str, ...]
    matrix: np.ndarray
    n: int
    degenerate: tuple[str, ...] = ()
    centred: bool = True

    def __post_init__(self):
        self.names = tuple(self.names)
        self._index = {v: i for i, v in enumerate(self.names)}

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown variable {name!r}") from None

    def submatrix(self, names) -> np.ndarray:
        idx = [self.index(v) for v in names]
        return self.matrix[np.ix_(idx, idx)]

    def correlation(self) -> np.ndarray:
        d = np.sqrt(np.diag(self.matrix))
        return self.matrix / np.outer(d, d)


# ----------------------------------------------------------------------


def random_dag(v: int, max_in_degree: int, seed) -> MixedGraph:
    """Random DAG over ``X1..Xv`` with every in-degree at most ``max_in_degree``.

    A uniformly random order is drawn; each node then takes an in-degree
    uniform in ``0..max_in_degree`` (capped by the number of predecessors)
    and picks its parents uniformly among its predecessors.
    """
    if v < 2 or max_in_degree < 1:
        raise ValueError("need v >= 2 and max_in_degree >= 1")
    rng = _rng(seed)
    names = node_names(v)
    order = rng.permutation(v)
    edges = []
    for pos in range(1, v):
        k = int(rng.integers(0, max_in_degree + 1))
        k = min(k, pos)
        if k == 0:
            continue
        preds = rng.choice(pos, size=k, replace=False)
        child = names[order[pos]]
        for p in sorted(int(q) for q in preds):
            edges.append((names[order[p]], child, TAIL, ARROW))
    return MixedGraph(names, edges, DAG)


def random_params(dag: MixedGraph, seed, low: float = 0.1, high: float = 0.9) -> SemParams:
    """Coefficients with ``|beta| ~ U[low, high]`` and random sign; unit noise, zero means."""
    rng = _rng(seed)
    coefs = {}
    for p, c in dag.directed_edges():
        mag = rng.uniform(low, high)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        coefs[(p, c)] = float(sign * mag)
    return SemParams(
        coefficients=coefs,
        error_variances=dict.fromkeys(dag.nodes, 1.0),
        means=dict.fromkeys(dag.nodes, 0.0),
    )


def topological_order(dag: MixedGraph) -> list[str]:
    indeg = {v: len(dag.parents(v)) for v in dag.nodes}
    ready = sorted(v for v, d in indeg.items() if d == 0)
    order = []
    while ready:
        v = ready.pop(0)
        order.append(v)
        for w in dag.children(v):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(w)
        ready.sort()
    if len(order) != len(dag.nodes):
        raise GraphError("graph has a directed cycle")
    return order


def sample_sem(dag: MixedGraph, params: SemParams, n: int, seed) -> Dataset:
    """Draw ``n`` rows from the linear Gaussian SEM, columns in node order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not is_dag(dag):
        raise GraphError("sample_sem needs a DAG")
    params.check(dag)
    rng = _rng(seed)
    idx = {v: i for i, v in enumerate(dag.nodes)}
    noise = rng.standard_normal((n, len(dag.nodes)))
    X = np.zeros((n, len(dag.nodes)))
    for v in topological_order(dag):
        i = idx[v]
        col = params.means.get(v, 0.0) + math.sqrt(params.error_variances[v]) * noise[:, i]
        for p in dag.parents(v):
            col = col + params.coefficients[(p, v)] * X[:, idx[p]]
        X[:, i] = col
    return Dataset(dag.nodes, X)


def hide_latents(dataset: Dataset, rate: float, seed) -> tuple[Dataset, frozenset[str]]:
    """Drop ``round(rate * V)`` uniformly chosen columns; return data and hidden set."""
    if not 0 <= rate < 1:
        raise ValueError("rate must be in [0, 1)")
    v = len(dataset.columns)
    k = int(math.floor(rate * v + 0.5))
    if v - k < 2:
        raise ValueError("hiding would leave fewer than 2 columns")
    if k == 0:
        return dataset, frozenset()
    rng = _rng(seed)
    hidden = frozenset(dataset.columns[i] for i in rng.choice(v, size=k, replace=False))
    keep = [c for c in dataset.columns if c not in hidden]
    return dataset.select(keep), hidden


def covariance(dataset: Dataset) -> CovarianceMatrix:
    """Unbiased (N - 1) sample covariance."""
    if dataset.n < 2:
        raise ValueError("need at least 2 rows")
    S = np.cov(dataset.values, rowvar=False, ddof=1)
    S = np.atleast_2d(S)
    S = (S + S.T) / 2
    degenerate = tuple(c for c, d in zip(dataset.columns, np.diag(S)) if d <= 0)
    return CovarianceMatrix(dataset.columns, S, dataset.n, degenerate)


def second_moments(dataset: Dataset, centred: bool = False) -> CovarianceMatrix:
    """``E[X_i X_j]`` estimated by ``X^T X / N`` (or the centred version)."""
    X = dataset.values
    if centred:
        X = X - X.mean(axis=0)
    M = X.T @ X / dataset.n
    degenerate = tuple(c for c, d in zip(dataset.columns, np.diag(M)) if d <= 0)
    return CovarianceMatrix(dataset.columns, M, dataset.n, degenerate, centred=centred)


# ----------------------------------------------------------------------
# files


def write_csv(dataset: Dataset, path: str | Path) -> None:
    lines = [",".join(dataset.columns)]
    lines.extend(",".join(f"{x:.17g}" for x in row) for row in dataset.values)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_csv(path: str | Path) -> Dataset:
    text = Path(path).read_text(encoding="utf-8")
    rows = [ln for ln in text.split("\n") if ln.strip()]
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = rows[0].strip().split(",")
    try:
        values = np.array([[float(x) for x in ln.split(",")] for ln in rows[1:]], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if values.size == 0:
        values = values.reshape(0, len(header))
    return Dataset(tuple(header), values)


def write_meta(meta: dict, path: str | Path) -> None:
    lines = [f"{k}={meta[k]}" for k in meta]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_meta(path: str | Path) -> dict[str, str]:
    out = {}
    for ln in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in ln:
            k, v = ln.split("=", 1)
            out[k] = v
    return out


def read_coefficients(path: str | Path) -> dict[tuple[str, str], float]:
    """``parent,child,beta`` lines (an optional header row is skipped)."""
    coefs = {}
    for ln in Path(path).read_text(encoding="utf-8").splitlines():
        parts = [p.strip() for p in ln.split(",")]
        if len(parts) != 3:
            continue
        try:
            coefs[(parts[0], parts[1])] = float(parts[2])
        except ValueError:
            continue
    return coefs
