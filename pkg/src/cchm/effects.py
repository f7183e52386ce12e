"""Pairwise direct-effect estimates used to orient score-equivalent edges.

For a pair ``(a, b)`` the effect of intervening on ``a`` is estimated as
``E[AB] / E[A^2]`` and the effect of intervening on ``b`` as
``E[AB] / E[B^2]``. Under unit-variance noise and a zero-mean unit-variance
cause, the true direction has the larger absolute effect:
``beta_a / beta_b = beta_a**2 + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .simulate import CovarianceMatrix


class DegenerateEffectError(ValueError):
    pass


def direct_effect(moments: CovarianceMatrix, a: str, b: str) -> float:
    """``E[BA] / E[A^2]`` from a second-moment matrix (see :func:`second_moments`)."""
    i, j = moments.index(a), moments.index(b)
    denom = moments.matrix[i, i]
    if denom <= 0:
        raise DegenerateEffectError(f"E[{a}^2] is zero")
    return float(moments.matrix[i, j] / denom)


@dataclass(frozen=True)
class EffectPair:
    a: str
    b: str
    beta_a: float
    beta_b: float
    chosen: tuple[str, str] | None  # (cause, effect), None on a tie

    @property
    def is_tie(self) -> bool:
        return self.chosen is None


def orient_pair(moments: CovarianceMatrix, a: str, b: str) -> EffectPair:
    """Pick the direction with the larger absolute direct effect."""
    i, j = moments.index(a), moments.index(b)
    if moments.matrix[i, i] <= 0 and moments.matrix[j, j] <= 0:
        raise DegenerateEffectError(f"both {a} and {b} are degenerate")
    beta_a = direct_effect(moments, a, b) if moments.matrix[i, i] > 0 else 0.0
    beta_b = direct_effect(moments, b, a) if moments.matrix[j, j] > 0 else 0.0
    if abs(beta_a) > abs(beta_b):
        chosen = (a, b)
    elif abs(beta_b) > abs(beta_a):
        chosen = (b, a)
    else:
        chosen = None
    return EffectPair(a, b, beta_a, beta_b, chosen)
