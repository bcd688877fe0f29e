"""Explicit point-evaluation bounds.

Two kinds of constants are computed:

* the norm of ``f -> f(z)`` on ``S_nu``, i.e. the reproducing-kernel norm
  ``(sum (n+1)^(-2 nu) |z|^(2n))^(1/2)``, which gives ``|f(z)| <= K * ||f||``;
* the circle-average constant ``C(r)`` on ``D^p_{p-1}`` (``p > 2``), giving
  ``int_0^{2 pi} |f(r e^{it})| dt <= C(r) * ||f||``.

The average bound uses the unnormalized angular measure ``dt``; divide by
``2 pi`` (see :func:`c_of_r_normalized`) for the probability measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import RangeError
from .series import DEFAULT_PRECISION, PowerSeries, grid_values, to_mpf
from .spaces import QuadratureConfig, SpaceSpec, norm_report

__all__ = [
    "EvalBound",
    "KERNEL_TERM_CAP",
    "L1BoundReport",
    "c_k_over_disc",
    "c_of_r",
    "c_of_r_normalized",
    "kernel_bound",
    "kernel_norm",
    "kernel_norm_polylog",
    "kernel_truncation",
    "l_of_r",
    "l1_bound",
    "verify_l1_bound",
]

KERNEL_TERM_CAP = 10**7
DEFAULT_KERNEL_TOLERANCE = 1e-12


@dataclass
class EvalBound:
    """A point-evaluation constant and the ingredients it was built from."""

    kind: str  # "kernel" or "l1-average"
    gap: object
    value: object
    parameters: dict
    components: dict = field(default_factory=dict)
    truncation: int | None = None

    def __post_init__(self):
        if self.kind not in ("kernel", "l1-average"):
            raise ValueError(f"unknown bound kind {self.kind!r}")
        if not self.value > 0:
            raise ValueError("bound value must be positive")

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            **{k: str(v) for k, v in self.parameters.items()},
            "r": {"gap": str(self.gap)},
            "value": _num(self.value),
            "components": {k: _num(v) for k, v in self.components.items()},
            "truncation": self.truncation,
        }


def _num(x) -> str:
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 30, strip_zeros=False)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _tail_bound(s: float, log_x: float, n: int) -> float:
    """Bound on ``sum_{m>n} (m+1)^s x^m`` (``s = -2 nu``), from a ratio test."""
    ratio = math.exp(log_x) * max(((n + 3) / (n + 2)) ** s, 1.0)
    if ratio >= 1:
        return math.inf
    return math.exp(s * math.log(n + 2) + (n + 1) * log_x) / (1 - ratio)


def kernel_truncation(nu, gap, tolerance: float = DEFAULT_KERNEL_TOLERANCE) -> int:
    """Smallest ``N`` whose tail bound is below ``tolerance**2`` (may exceed the cap)."""
    s = -2.0 * float(nu)
    g = float(gap)
    if g >= 1:
        return 0
    log_x = 2.0 * math.log1p(-g)
    target = tolerance * tolerance
    hi = 1
    while _tail_bound(s, log_x, hi) > target:
        hi *= 2
        if hi > 1 << 62:
            raise RangeError("kernel truncation index overflows")
    lo = hi // 2
    while lo < hi:
        mid = (lo + hi) // 2
        if _tail_bound(s, log_x, mid) > target:
            lo = mid + 1
        else:
            hi = mid
    return hi


def kernel_norm(nu, gap, tolerance: float = DEFAULT_KERNEL_TOLERANCE,
                cap: int = KERNEL_TERM_CAP) -> float:
    """Norm of evaluation at any point of modulus ``1 - gap`` on ``S_nu``.

    Direct truncated summation; the truncation index is chosen so that the
    tail of the squared kernel norm is below ``tolerance**2``. Raises
    :class:`RangeError` (with the capped partial value) when more than
    ``cap`` terms would be needed.
    """
    if not tolerance > 0:
        raise ValueError("tolerance must be positive")
    g = float(gap)
    if not 0 < g <= 1:
        raise ValueError(f"gap must lie in (0, 1], got {gap!r}")
    if g == 1:
        return 1.0
    n_terms = kernel_truncation(nu, g, tolerance)
    s = -2.0 * float(nu)
    log_x = 2.0 * math.log1p(-g)
    if n_terms > cap:
        n = np.arange(cap + 1, dtype=float)
        partial = math.sqrt(math.fsum(np.exp(s * np.log1p(n) + n * log_x)))
        raise RangeError(f"kernel needs {n_terms} terms (cap {cap})", partial=partial)
    n = np.arange(n_terms + 1, dtype=float)
    return math.sqrt(math.fsum(np.exp(s * np.log1p(n) + n * log_x)))


def kernel_norm_polylog(nu, gap, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Closed form ``sqrt(Li_{2 nu}(r^2) / r^2)`` for the same kernel norm.

    Independent of the summation route and usable for gaps far below the
    summation cap (``gap ~ 1e-20`` is routine for constructed witnesses).
    """
    with mpmath.workprec(precision + 20):
        g = to_mpf(gap)
        if not 0 < g <= 1:
            raise ValueError(f"gap must lie in (0, 1], got {gap!r}")
        if g == 1:
            return mpmath.mpf(1)
        x = mpmath.exp(2 * mpmath.log1p(-g))
        out = mpmath.sqrt(mpmath.polylog(2 * to_mpf(nu), x) / x)
    with mpmath.workprec(precision):
        return +out


def c_k_over_disc(nu, gap, tolerance: float = DEFAULT_KERNEL_TOLERANCE) -> float:
    """Sharp ``C_K`` for ``S_nu`` on the closed disc of radius ``1 - gap``.

    The kernel norm increases with the radius, so the supremum over the disc
    is the kernel norm on its boundary circle. When summation would exceed
    the term cap the polylogarithm closed form is used instead.
    """
    try:
        return kernel_norm(nu, gap, tolerance)
    except RangeError:
        return float(kernel_norm_polylog(nu, gap))


def kernel_bound(nu, gap, tolerance: float = DEFAULT_KERNEL_TOLERANCE) -> EvalBound:
    try:
        value = kernel_norm(nu, gap, tolerance)
        truncation = kernel_truncation(nu, gap, tolerance)
        method = "summation"
    except RangeError:
        value = float(kernel_norm_polylog(nu, gap))
        truncation = None
        method = "polylog"
    return EvalBound("kernel", gap, value, {"nu": nu},
                     {"tolerance": tolerance, "method": method}, truncation)


def _conjugate(p):
    p = to_mpf(p)
    if not p > 2:
        raise ValueError(f"the circle-average bound needs p > 2, got {p}")
    return p / (p - 1)


def l_of_r(p, gap, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Hoelder factor ``(int_0^{2pi} int_0^r s^(-q/p) ds dt)^(1/q)``, closed form."""
    with mpmath.workprec(precision + 20):
        q = _conjugate(p)
        a = q / to_mpf(p)
        r = 1 - to_mpf(gap)
        if not 0 <= r < 1:
            raise ValueError("radius must lie in [0, 1)")
        out = (2 * mpmath.pi * r ** (1 - a) / (1 - a)) ** (1 / q)
    with mpmath.workprec(precision):
        return +out


def c_of_r(p, gap, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """``C(r) = 2 pi + L(r) (1/(1-r^2))^(1/q) (pi/p)^(1/p)`` with ``1/p + 1/q = 1``."""
    with mpmath.workprec(precision + 20):
        q = _conjugate(p)
        pp = to_mpf(p)
        g = to_mpf(gap)
        one_minus_r2 = g * (2 - g)
        out = (2 * mpmath.pi
               + l_of_r(p, gap, precision + 20) * (1 / one_minus_r2) ** (1 / q)
               * (mpmath.pi / pp) ** (1 / pp))
    with mpmath.workprec(precision):
        return +out


def c_of_r_normalized(p, gap, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """``C(r) / 2 pi``: the constant for the normalized measure ``dm``."""
    with mpmath.workprec(precision):
        return c_of_r(p, gap, precision) / (2 * mpmath.pi)


def l1_bound(p, gap, precision: int = DEFAULT_PRECISION) -> EvalBound:
    q = float(p) / (float(p) - 1)
    return EvalBound("l1-average", gap, c_of_r(p, gap, precision), {"p": p},
                     {"L": l_of_r(p, gap, precision), "q": q})


@dataclass
class L1BoundReport:
    lhs: float
    rhs: float
    margin: float
    norm: float
    constant: float

    def to_json(self) -> dict:
        return {k: repr(float(getattr(self, k)))
                for k in ("lhs", "rhs", "margin", "norm", "constant")}


def verify_l1_bound(f: PowerSeries, p, gap, grid: int,
                    q: QuadratureConfig | None = None, norm_value=None) -> L1BoundReport:
    """Compare ``int |f(r e^{it})| dt`` with ``C(r) * ||f||_{D^p_{p-1}}``.

    A negative margin beyond quadrature error would contradict the bound.
    ``norm_value`` reuses a precomputed norm when sweeping several radii.
    """
    if grid < 2:
        raise ValueError("grid must contain at least two angles")
    constant = float(c_of_r(p, gap))
    lhs = 2 * math.pi * float(np.mean(np.abs(grid_values(f.terms(), gap, grid))))
    if norm_value is None:
        norm_value = norm_report(f, SpaceSpec.dirichlet(float(p), float(p) - 1), q).value
    nrm = float(norm_value)
    rhs = constant * nrm
    return L1BoundReport(lhs, rhs, rhs - lhs, nrm, constant)
