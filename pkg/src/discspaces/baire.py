"""Finite, grid-level versions of the ball/measure estimates behind the residuality results.

A *cell* ``(n, k)`` is the ball centred at ``P_n + f/k`` (``P_n`` the n-th
dyadic polynomial, ``f`` a blow-up witness) with radius
``eps = min(1/k, 1/C)``, ``C`` a point-evaluation constant. For finitely many
sampled members ``g`` of the ball we estimate on a uniform angular grid

* ``A`` -- angles where ``|g| >= k`` at some schedule radius ``r <= r_M``
  (kernel constants, continuous point evaluations);
* ``H`` -- angles where ``|g(r_p e^{it})| / phi(r_p) < M``
  (circle-average constants).

Nothing here says anything about residual sets: only finitely many cells
and finitely many members of each ball are ever examined.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import mpmath
import numpy as np

from .bounds import EvalBound, kernel_bound, l1_bound
from .construction import LacunaryWitness, WeightFunction, min_modulus_lower_bound
from .errors import NotFoundError, PreconditionError
from .series import LacunarySeries, PowerSeries, grid_values, to_mpf
from .spaces import QuadratureConfig, SpaceSpec, norm

__all__ = [
    "BaireBall",
    "BallMember",
    "BoundaryGrid",
    "MeasureEstimate",
    "SUP_NORM_INFLATION",
    "WeightFunction",
    "a_set_measure",
    "dyadic_polynomials",
    "find_r_M",
    "h_set_measure",
    "hypothesis_ratio",
    "make_ball",
    "required_M",
    "run_average_cells",
    "run_experiment",
    "run_kernel_cells",
    "sample_ball",
    "select_step",
    "sup_norm",
]

SUP_NORM_INFLATION = 1.01
INTERIOR_FACTOR = 1 - 1e-6


@dataclass(frozen=True)
class BoundaryGrid:
    count: int
    gaps: tuple = ()

    def __post_init__(self):
        if self.count < 2:
            raise ValueError("grid needs at least two angles")
        gaps = tuple(self.gaps)
        object.__setattr__(self, "gaps", gaps)
        for a, b in zip(gaps, gaps[1:]):
            if not to_mpf(b) < to_mpf(a):
                raise ValueError("radius schedule gaps must strictly decrease")

    @classmethod
    def for_witness(cls, w: LacunaryWitness, count: int) -> "BoundaryGrid":
        return cls(count, tuple(s.gap for s in w.steps))


@dataclass
class MeasureEstimate:
    set_tag: str  # "F_M", "A", "H"
    grid: int
    fraction: float
    threshold: float
    bound: float
    mask: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if not 0 <= self.fraction <= 1:
            raise ValueError("fraction must lie in [0, 1]")

    def to_json(self) -> dict:
        return {"set": self.set_tag, "grid": self.grid, "fraction": repr(self.fraction),
                "threshold": repr(float(self.threshold)), "bound": repr(float(self.bound))}


# --- dense polynomial family --------------------------------------------------

def _dyadic_height(x: Fraction) -> int:
    e = x.denominator.bit_length() - 1
    return max(abs(x.numerator), e)


def _dyadics_up_to(h: int) -> list:
    vals = set()
    for e in range(h + 1):
        for m in range(-h, h + 1):
            vals.add(Fraction(m, 2 ** e))
    return sorted(v for v in vals if _dyadic_height(v) <= h)


def _coefficients(d: int, h: int):
    parts = _dyadics_up_to(h)
    values = [complex(float(a), float(b)) for a in parts for b in parts]
    heights = {complex(float(a), float(b)): max(_dyadic_height(a), _dyadic_height(b))
               for a in parts for b in parts}
    for combo in itertools.product(values, repeat=d + 1):
        if d > 0 and combo[-1] == 0:
            continue
        if max(heights[c] for c in combo) != h:
            continue
        yield combo


def dyadic_polynomials():
    """Enumerate polynomials with dyadic-rational coefficient parts.

    Level ``L = degree + height`` runs through 0, 1, 2, ...; within a level
    lower degree comes first, and within ``(degree, height)`` polynomials are
    ordered by coefficient energy then lexicographically. Every polynomial
    with dyadic coefficients appears exactly once.
    """
    for level in itertools.count():
        for d in range(level + 1):
            h = level - d
            batch = sorted(_coefficients(d, h),
                           key=lambda cs: (sum(abs(c) ** 2 for c in cs),
                                           [(c.real, c.imag) for c in cs]))
            for cs in batch:
                yield PowerSeries(cs)


def sup_norm(P: PowerSeries) -> float:
    """Grid maximum of ``|P|`` on the unit circle, inflated by ``SUP_NORM_INFLATION``."""
    count = max(64, 8 * max(P.degree, 1))
    theta = 2 * np.pi * np.arange(count) / count
    vals = np.polyval(P.as_array()[::-1], np.exp(1j * theta))
    return float(np.max(np.abs(vals))) * SUP_NORM_INFLATION


# --- balls ----------------------------------------------------------------------

@dataclass(frozen=True)
class BallMember:
    """``dense + scale * lacunary``; ``perturbation`` is ``dense - P``."""

    dense: PowerSeries
    lacunary: LacunarySeries
    scale: Fraction
    perturbation: PowerSeries

    def terms(self):
        return self.dense.terms() + [(self.scale * Fraction(str(c)), n)
                                     for c, n in self.lacunary.terms()]


@dataclass(frozen=True)
class BaireBall:
    center: PowerSeries
    k: int
    witness: LacunaryWitness
    radius: mpmath.mpf
    bound: EvalBound
    M: int
    sup_norm: float

    def center_member(self) -> BallMember:
        zero = PowerSeries((0,))
        return BallMember(self.center, self.witness.series(), Fraction(1, self.k), zero)

    def to_json(self) -> dict:
        return {"k": self.k, "M": self.M, "epsilon": mpmath.nstr(self.radius, 30),
                "sup_norm": repr(self.sup_norm), "bound": self.bound.to_json()}


def required_M(P: PowerSeries, k: int, kind: str) -> int:
    """Threshold ``M`` for a cell.

    ``kernel``: least integer with ``M/k > k + ||P|| + 1``.
    ``l1-average``: least integer with ``M >= ||P|| + k``.
    """
    sup = sup_norm(P) if any(P.coefficients) else 0.0
    if kind == "kernel":
        return math.floor(k * (k + sup + 1)) + 1
    if kind == "l1-average":
        return math.ceil(sup + k)
    raise ValueError(f"unknown bound kind {kind!r}")


def make_ball(P: PowerSeries, k: int, f: LacunaryWitness, bound: EvalBound,
              precision: int = 256) -> BaireBall:
    """Ball centred at ``P + f/k`` with radius ``min(1/k, 1/bound)``."""
    if k < 1:
        raise ValueError("k must be a positive integer")
    M = required_M(P, k, bound.kind)
    sup = sup_norm(P) if any(P.coefficients) else 0.0
    with mpmath.workprec(precision):
        eps = min(mpmath.mpf(1) / k, 1 / to_mpf(bound.value))
    return BaireBall(P, k, f, eps, bound, M, sup)


def sample_ball(ball: BaireBall, space: SpaceSpec, count: int, seed: int,
                q: QuadratureConfig | None = None, include_center: bool = False) -> list:
    """``count`` members ``P + f/k + h`` with ``||h||_space < eps``.

    ``h`` is a random polynomial of degree ``<= max(2 deg P, 2)`` rescaled to
    norm ``(1 - 1e-6) * eps * u``, ``u ~ U(0, 1)``. Sample ``i`` draws from
    its own stream derived from ``(seed, i)``, so results do not depend on
    evaluation order.
    """
    eps = float(ball.radius)
    degree = max(2 * ball.center.degree, 2)
    lac = ball.witness.series()
    scale = Fraction(1, ball.k)
    out = []
    for i in range(count):
        if include_center and i == 0:
            out.append(ball.center_member())
            continue
        rng = np.random.default_rng([seed, i])
        raw = rng.standard_normal(degree + 1) + 1j * rng.standard_normal(degree + 1)
        u = rng.uniform(0.0, 1.0)
        h = PowerSeries(tuple(complex(c) for c in raw))
        target = INTERIOR_FACTOR * eps * u
        h = h * (target / norm(h, space, q, gap=_hardy_gap(space)))
        out.append(BallMember(ball.center + h, lac, scale, h))
    return out


def _hardy_gap(space: SpaceSpec):
    # Hardy norms of polynomials are continuous up to the circle; a tiny gap
    # stands in for the boundary
    return Decimal("1e-12") if space.kind == "hardy" else None


# --- measure estimates ------------------------------------------------------------

def _running_max(g, gaps, count):
    best = np.zeros(count)
    for gap in gaps:
        best = np.maximum(best, np.abs(grid_values(g.terms(), gap, count)))
        yield gap, best


def find_r_M(f, M, grid: BoundaryGrid, target=None):
    """Largest schedule gap ``delta`` with ``|F_M| >= target`` on the grid.

    ``F_M`` is the set of grid angles where ``max |f(r e^{it})| >= M`` over
    schedule radii ``r <= 1 - delta``. ``target`` defaults to ``1 - 1/M``;
    ``F_M`` must also be non-empty.
    Returns ``(gap, MeasureEstimate)``.
    """
    if target is None:
        target = 1 - 1 / M
    series = f.series() if isinstance(f, LacunaryWitness) else f
    gaps = grid.gaps
    if not gaps and isinstance(f, LacunaryWitness):
        gaps = tuple(s.gap for s in f.steps)
    for gap, best in _running_max(series, gaps, grid.count):
        mask = best >= M
        frac = float(np.mean(mask))
        # an empty F_M is never useful, even when M = 1 makes the target 0
        if frac >= target and frac > 0:
            return gap, MeasureEstimate("F_M", grid.count, frac, M, target, mask)
    raise NotFoundError(f"no schedule radius reaches |F_M| >= {target} for M={M}")


def a_set_measure(g, k, gap_M, grid: BoundaryGrid) -> MeasureEstimate:
    """Fraction of angles where ``|g| >= k`` at some schedule radius with gap ``>= gap_M``."""
    gaps = [gap for gap in grid.gaps if to_mpf(gap) >= to_mpf(gap_M)]
    best = np.zeros(grid.count)
    for _, best in _running_max(g, gaps, grid.count):
        pass
    mask = best >= k
    return MeasureEstimate("A", grid.count, float(np.mean(mask)), k, math.nan, mask)


def hypothesis_ratio(w: LacunaryWitness, p: int, phi: WeightFunction) -> mpmath.mpf:
    """``min_modulus_lower_bound(w, p) / phi(r_p)``: a certified lower bound on ``min |f| / phi``."""
    return min_modulus_lower_bound(w, p) / phi(w.steps[p - 1].gap)


def select_step(w: LacunaryWitness, k: int, M: int, phi: WeightFunction) -> int:
    """Least step ``p`` with ``phi(r_p) > 2`` and ``2 k M^2 < min |f| / phi(r_p)``."""
    for p in range(1, len(w.steps) + 1):
        if phi(w.steps[p - 1].gap) > 2 and hypothesis_ratio(w, p, phi) > 2 * k * M * M:
            return p
    best = max(hypothesis_ratio(w, p, phi) for p in range(1, len(w.steps) + 1))
    raise PreconditionError(
        f"no witness step satisfies 2kM^2 < min|f|/phi (need > {2 * k * M * M}, "
        f"best {mpmath.nstr(best, 8)})", deficit=float(2 * k * M * M - best))


def h_set_measure(g, M, phi: WeightFunction, gap_p, grid: BoundaryGrid,
                  witness: LacunaryWitness | None = None, p: int | None = None,
                  k: int | None = None) -> MeasureEstimate:
    """Fraction of angles with ``|g(r_p e^{it})| / phi(r_p) < M``.

    When ``witness``, ``p`` and ``k`` are given the hypothesis
    ``2 k M^2 < min|f| / phi(r_p)`` is checked first (via the certified
    lower bound) together with ``phi(r_p) > 2``.
    """
    weight = phi(gap_p)
    if witness is not None:
        if not weight > 2:
            raise PreconditionError(f"phi(r_p) = {mpmath.nstr(weight, 8)} is not > 2",
                                    deficit=float(2 - weight))
        ratio = hypothesis_ratio(witness, p, phi)
        need = 2 * k * M * M
        if not ratio > need:
            raise PreconditionError(
                f"hypothesis ratio {mpmath.nstr(ratio, 8)} does not exceed 2kM^2 = {need}",
                deficit=float(need - ratio))
    vals = np.abs(grid_values(g.terms(), gap_p, grid.count)) / float(weight)
    mask = vals < M
    return MeasureEstimate("H", grid.count, float(np.mean(mask)), M, 1 / M, mask)


# --- experiments -------------------------------------------------------------------

def _polynomials(indices):
    wanted = sorted(set(indices))
    found = {}
    for i, P in enumerate(dyadic_polynomials()):
        if i in wanted:
            found[i] = P
        if i >= wanted[-1]:
            break
    return found


def run_kernel_cells(w: LacunaryWitness, space: SpaceSpec, n_values, k_values, grid_count: int,
                     samples: int, seed: int, q: QuadratureConfig | None = None) -> list:
    """Continuous point-evaluation cells: ``|A(n, k)| >= 1 - 1/M`` and ``F_M`` inside ``A``."""
    if space.kind != "weighted-hardy":
        raise ValueError("kernel cells need a weighted Hardy space (explicit kernel constants)")
    grid = BoundaryGrid.for_witness(w, grid_count)
    polys = _polynomials(n_values)
    cells = []
    for n in n_values:
        P = polys[n]
        for k in k_values:
            M = required_M(P, k, "kernel")
            cell = {"n": n, "k": k, "M": M, "center": [repr(complex(c)) for c in P.coefficients]}
            try:
                gap_M, F = find_r_M(w, M, grid)
            except NotFoundError as exc:
                cell.update(passed=False, error=str(exc))
                cells.append(cell)
                continue
            bound = kernel_bound(space.nu, gap_M)
            ball = make_ball(P, k, w, bound)
            members = sample_ball(ball, space, samples, seed * 1_000_003 + 7919 * n + k, q)
            fractions, contained = [], True
            for g in members:
                A = a_set_measure(g, k, gap_M, grid)
                fractions.append(A.fraction)
                contained &= bool(np.all(A.mask[F.mask]))
            min_a = min(fractions)
            cell.update(
                gap_M=str(gap_M), F_M=F.fraction, epsilon=mpmath.nstr(ball.radius, 20),
                constant=repr(float(bound.value)), samples=len(members), min_fraction_A=min_a,
                containment=contained, passed=bool(contained and min_a >= 1 - 1 / M))
            cells.append(cell)
    return cells


def run_average_cells(w: LacunaryWitness, space: SpaceSpec, n_values, k_values, grid_count: int,
                      samples: int, seed: int, phi: WeightFunction | None = None,
                      q: QuadratureConfig | None = None) -> list:
    """Circle-average cells: ``|H(n, k)| <= 1/M + 2/G`` for sampled ball members."""
    if space.kind != "dirichlet" or not space.p > 2 or space.alpha != space.p - 1:
        raise ValueError("average cells need the space D^p_{p-1} with p > 2")
    phi = phi or w.phi or WeightFunction()
    grid = BoundaryGrid.for_witness(w, grid_count)
    polys = _polynomials(n_values)
    cells = []
    for n in n_values:
        P = polys[n]
        for k in k_values:
            M = required_M(P, k, "l1-average")
            cell = {"n": n, "k": k, "M": M, "center": [repr(complex(c)) for c in P.coefficients]}
            try:
                p = select_step(w, k, M, phi)
            except PreconditionError as exc:
                cell.update(passed=False, error=str(exc))
                cells.append(cell)
                continue
            gap_p = w.steps[p - 1].gap
            bound = l1_bound(space.p, gap_p)
            ball = make_ball(P, k, w, bound)
            members = sample_ball(ball, space, samples, seed * 1_000_003 + 7919 * n + k, q)
            fractions = [h_set_measure(g, M, phi, gap_p, grid, w, p, k).fraction for g in members]
            max_h = max(fractions)
            cell.update(
                step=p, gap_p=str(gap_p), ratio=mpmath.nstr(hypothesis_ratio(w, p, phi), 12),
                epsilon=mpmath.nstr(ball.radius, 20), constant=mpmath.nstr(bound.value, 20),
                samples=len(members), max_fraction_H=max_h,
                passed=bool(max_h <= 1 / M + 2 / grid_count))
            cells.append(cell)
    return cells


def run_experiment(descriptor: dict, w: LacunaryWitness) -> dict:
    """Run the cells described by a JSON descriptor (see the CLI ``baire-a``/``baire-h``)."""
    space = SpaceSpec.from_json(descriptor["space"])
    n_values = list(descriptor.get("n_range", [0, 1, 2, 3, 4]))
    k_values = list(descriptor.get("k_range", [2, 3, 4]))
    grid = int(descriptor.get("grid", 8192))
    seed = int(descriptor.get("seed", 0))
    samples = int(descriptor.get("samples", 20))
    mode = descriptor.get("mode", "kernel")
    if mode == "kernel":
        cells = run_kernel_cells(w, space, n_values, k_values, grid, samples, seed)
    elif mode == "l1-average":
        phi = WeightFunction.parse(descriptor["phi"]) if descriptor.get("phi") else None
        cells = run_average_cells(w, space, n_values, k_values, grid, samples, seed, phi)
    else:
        raise ValueError(f"unknown experiment mode {mode!r}")
    return {"mode": mode, "space": space.to_json(), "grid": grid, "seed": seed,
            "samples": samples, "cells": cells, "passed": all(c["passed"] for c in cells)}
