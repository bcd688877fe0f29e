"""Norms on weighted Hardy, Hardy, weighted Bergman and Dirichlet-type spaces.

* ``S_nu`` (weighted Hardy, weights ``(n+1)**nu``): coefficient formula.
* ``A^p_alpha``: area quadrature of ``(alpha+1)(1-|z|^2)^alpha |f|^p dA``.
* ``D^p_alpha``: ``|f(0)| + ||f'||_{A^p_alpha}``.
* ``H^p``: integral means on explicit circles only; the boundary limit is
  never taken.

The area quadrature is tensor-product: trapezoid in the angle and
Gauss-type panels in the radius. Panels accumulate geometrically toward
``r = 1``; the panel touching the boundary uses Gauss-Jacobi nodes so the
``(1 - r)^alpha`` factor is integrated exactly, including ``-1 < alpha < 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import RangeError, ToleranceNotMet
from .series import (
    DEFAULT_PRECISION,
    LacunarySeries,
    PowerSeries,
    derivative,
    grid_values,
    to_mpc,
    to_mpf,
)

__all__ = [
    "NormReport",
    "QuadratureConfig",
    "SpaceSpec",
    "bergman_norm",
    "circle_mean",
    "dirichlet_norm",
    "norm",
    "norm_report",
    "s_nu_norm",
    "s_nu_norm_lacunary",
]

# log2 of the largest weight (n+1)**(2 nu) accepted before reporting a range error
MAX_WEIGHT_BITS = 1 << 24


@dataclass(frozen=True)
class SpaceSpec:
    """Tagged choice of norm."""

    kind: str
    nu: float | None = None
    p: float | None = None
    alpha: float | None = None

    KINDS = ("weighted-hardy", "hardy", "bergman", "dirichlet")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "weighted-hardy":
            if self.nu is None:
                raise ValueError("weighted Hardy space needs nu")
            return
        if self.p is None or self.p < 1:
            raise ValueError("p must be >= 1")
        if self.kind == "hardy":
            return
        if self.alpha is None or self.alpha <= -1:
            raise ValueError("alpha must be > -1")
        if self.kind == "dirichlet" and self.alpha > self.p + 1:
            raise ValueError("Dirichlet-type spaces need alpha <= p + 1")

    @classmethod
    def weighted_hardy(cls, nu) -> "SpaceSpec":
        return cls("weighted-hardy", nu=nu)

    @classmethod
    def hardy(cls, p) -> "SpaceSpec":
        return cls("hardy", p=p)

    @classmethod
    def bergman(cls, p, alpha) -> "SpaceSpec":
        return cls("bergman", p=p, alpha=alpha)

    @classmethod
    def dirichlet(cls, p, alpha) -> "SpaceSpec":
        return cls("dirichlet", p=p, alpha=alpha)

    def parameters(self) -> dict:
        if self.kind == "weighted-hardy":
            return {"nu": self.nu}
        if self.kind == "hardy":
            return {"p": self.p}
        return {"p": self.p, "alpha": self.alpha}

    def to_json(self) -> dict:
        return {"kind": self.kind, **self.parameters()}

    @classmethod
    def from_json(cls, data: dict) -> "SpaceSpec":
        return cls(data["kind"], nu=data.get("nu"), p=data.get("p"), alpha=data.get("alpha"))


@dataclass(frozen=True)
class QuadratureConfig:
    radial_nodes: int = 24
    angular_nodes: int = 64
    refinement_limit: int = 10
    tolerance: float = 1e-10

    def __post_init__(self):
        if self.radial_nodes < 1 or self.angular_nodes < 1 or self.refinement_limit < 0:
            raise ValueError("node counts must be positive")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


@dataclass
class NormReport:
    space: SpaceSpec
    value: float
    error_estimate: float
    nodes: int = 0
    refinements: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "space": self.space.kind,
            "parameters": self.space.parameters(),
            "value": repr(float(self.value)),
            "error_estimate": repr(float(self.error_estimate)),
            "quadrature": {"nodes": self.nodes, "refinements": self.refinements},
        }


def s_nu_norm(f: PowerSeries, nu) -> mpmath.mpf:
    """``(sum |a_n|^2 (n+1)^(2 nu))^(1/2)``."""
    with mpmath.workprec(f.precision + 10):
        two_nu = 2 * to_mpf(nu)
        acc = mpmath.mpf(0)
        for n, a in enumerate(f.coefficients):
            if a != 0:
                acc += abs(to_mpc(a)) ** 2 * mpmath.mpf(n + 1) ** two_nu
        out = mpmath.sqrt(acc)
    with mpmath.workprec(f.precision):
        return +out


def s_nu_norm_lacunary(f: LacunarySeries, nu, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """Weighted Hardy norm of a sparse series, weights ``(n_j+1)^nu`` with ``nu`` signed.

    Weights are formed in the log domain so exponents of any size are fine;
    a weight whose binary exponent exceeds ``MAX_WEIGHT_BITS`` is a range error.
    """
    with mpmath.workprec(precision + 20):
        two_nu = 2 * to_mpf(nu)
        acc = mpmath.mpf(0)
        for c, n in f.terms():
            log_w = two_nu * mpmath.log(n + 1)
            if abs(log_w) / mpmath.log(2) > MAX_WEIGHT_BITS:
                raise RangeError(f"weight (n+1)^(2 nu) out of range at a {int(n).bit_length()}-bit exponent",
                                 partial=mpmath.sqrt(acc))
            acc += to_mpf(c) ** 2 * mpmath.exp(log_w)
        out = mpmath.sqrt(acc)
    with mpmath.workprec(precision):
        return +out


@lru_cache(maxsize=64)
def _jacobi(n: int, alpha: float):
    return roots_jacobi(n, alpha, 0.0)


@lru_cache(maxsize=16)
def _legendre(n: int):
    return roots_legendre(n)


def _radial_rule(alpha: float, depth: int, splits: int, m: int):
    """Nodes/weights on [0, 1] for ``int (1-r^2)^alpha 2r phi(r) dr``.

    Interior panels ``[1-2^-i, 1-2^-(i+1)]`` (each split ``splits`` ways)
    use Gauss-Legendre; the last panel ``[1-2^-depth, 1]`` uses
    Gauss-Jacobi with weight ``(1-r)^alpha``.
    """
    xl, wl = _legendre(m)
    nodes, weights = [], []
    edges = [1.0 - 2.0 ** (-i) for i in range(depth + 1)]
    for a, b in zip(edges, edges[1:]):
        sub = np.linspace(a, b, splits + 1)
        for lo, hi in zip(sub, sub[1:]):
            r = 0.5 * (hi - lo) * xl + 0.5 * (hi + lo)
            nodes.append(r)
            weights.append(0.5 * (hi - lo) * wl * (1 - r * r) ** alpha * 2 * r)
    a = edges[-1]
    xj, wj = _jacobi(m, alpha)
    r = a + (1 - a) * (1 + xj) / 2
    scale = ((1 - a) / 2) ** (alpha + 1)
    nodes.append(r)
    weights.append(scale * wj * (1 + r) ** alpha * 2 * r)
    return np.concatenate(nodes), np.concatenate(weights)


def _angular_means(coeffs: np.ndarray, radii: np.ndarray, p: float, count: int) -> np.ndarray:
    theta = 2 * np.pi * np.arange(count) / count
    z = radii[:, None] * np.exp(1j * theta)[None, :]
    vals = np.zeros_like(z)
    for a in coeffs[::-1]:
        vals = vals * z + a
    return np.mean(np.abs(vals) ** p, axis=1)


def _area_integral(coeffs: np.ndarray, p: float, alpha: float, q: QuadratureConfig):
    """``(alpha+1) int (1-|z|^2)^alpha |g|^p dA`` with an a-posteriori error estimate.

    Returns ``(value, error_estimate, nodes, refinements)``.
    """
    degree = len(coeffs) - 1
    count = max(q.angular_nodes, 4 * int(math.ceil(p)) * (degree + 1))
    # angular resolution first, at the coarse radial rule
    r0, w0 = _radial_rule(alpha, 3, 1, q.radial_nodes)
    prev = (alpha + 1) * np.dot(w0, _angular_means(coeffs, r0, p, count))
    ang_err = math.inf
    refinements = 0
    for _ in range(q.refinement_limit):
        count *= 2
        refinements += 1
        cur = (alpha + 1) * np.dot(w0, _angular_means(coeffs, r0, p, count))
        ang_err = abs(cur - prev)
        prev = cur
        if ang_err <= 0.1 * q.tolerance * abs(cur):
            break
    # radial refinement at fixed angular resolution
    rad_err = math.inf
    r = r0
    for level in range(1, q.refinement_limit + 1):
        depth, splits = 3 + level, 1 + level
        r, w = _radial_rule(alpha, depth, splits, q.radial_nodes)
        cur = (alpha + 1) * np.dot(w, _angular_means(coeffs, r, p, count))
        rad_err = abs(cur - prev)
        prev = cur
        refinements += 1
        if rad_err <= q.tolerance * abs(cur):
            break
    err = rad_err + ang_err
    nodes = len(r) * count
    if not err <= q.tolerance * abs(prev) * 1.1 + 1e-300:
        raise ToleranceNotMet(
            f"area quadrature did not reach relative tolerance {q.tolerance:g}",
            estimate=prev, error_estimate=err)
    return float(prev), float(err), nodes, refinements


def _bergman(f: PowerSeries, p, alpha, q: QuadratureConfig, space: SpaceSpec) -> NormReport:
    coeffs = f.as_array()
    if not np.any(coeffs):
        return NormReport(space, 0.0, 0.0)
    try:
        integral, err, nodes, refinements = _area_integral(coeffs, float(p), float(alpha), q)
    except ToleranceNotMet as exc:
        value = exc.estimate ** (1 / p)
        raise ToleranceNotMet(str(exc), estimate=value,
                              error_estimate=exc.error_estimate / (p * value ** (p - 1))) from None
    value = integral ** (1 / p)
    return NormReport(space, value, err / (p * value ** (p - 1)), nodes, refinements)


def bergman_norm(f: PowerSeries, p, alpha, q: QuadratureConfig | None = None) -> float:
    """Weighted Bergman ``A^p_alpha`` norm by adaptive area quadrature."""
    return norm_report(f, SpaceSpec.bergman(p, alpha), q).value


def dirichlet_norm(f: PowerSeries, p, alpha, q: QuadratureConfig | None = None) -> float:
    """Dirichlet-type norm ``|f(0)| + ||f'||_{A^p_alpha}``."""
    return norm_report(f, SpaceSpec.dirichlet(p, alpha), q).value


def circle_mean(f, p, gap, grid: int, precision: int = DEFAULT_PRECISION) -> float:
    """Integral mean ``(int |f(r e^{it})|^p dm)^(1/p)`` at ``r = 1 - gap``.

    Trapezoid rule on ``grid`` equally spaced angles; exact for ``p = 2``
    once ``grid > 2 * degree``. Accepts dense or lacunary series.
    """
    if grid < 2:
        raise ValueError("circle_mean needs at least two angles")
    if p < 1:
        raise ValueError("p must be >= 1")
    vals = np.abs(grid_values(f.terms(), gap, grid, precision))
    if not np.any(vals):
        return 0.0
    return float(np.mean(vals ** p) ** (1 / p))


def norm_report(f: PowerSeries, space: SpaceSpec, q: QuadratureConfig | None = None,
                gap=None, grid: int = 1024) -> NormReport:
    """Norm of ``f`` in ``space`` as a serializable report.

    Hardy norms need an explicit ``gap`` (circle ``r = 1 - gap``).
    """
    q = q or QuadratureConfig()
    if space.kind == "weighted-hardy":
        return NormReport(space, float(s_nu_norm(f, space.nu)), 0.0)
    if space.kind == "hardy":
        if gap is None:
            raise ValueError("Hardy norms are only available as circle means at an explicit gap")
        return NormReport(space, circle_mean(f, space.p, gap, grid), 0.0, nodes=grid,
                          extra={"gap": str(gap)})
    if space.kind == "bergman":
        return _bergman(f, space.p, space.alpha, q, space)
    head = abs(complex(f.coefficients[0]))
    rep = _bergman(derivative(f), space.p, space.alpha, q, space)
    return NormReport(space, head + rep.value, rep.error_estimate, rep.nodes, rep.refinements)


def norm(f: PowerSeries, space: SpaceSpec, q: QuadratureConfig | None = None, **kw) -> float:
    return float(norm_report(f, space, q, **kw).value)
