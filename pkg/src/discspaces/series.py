"""Finite Taylor series on the unit disc and their extended-precision evaluation.

Two representations are provided. :class:`PowerSeries` is a dense list of
coefficients ``a_0 .. a_N``; :class:`LacunarySeries` is a sparse list of
``(c_k, n_k)`` pairs whose exponents may be far too large to expand densely.

Radii close to 1 are always carried as a gap ``delta = 1 - r`` and powers are
formed as ``exp(n * log1p(-delta))``; with ``delta ~ 1e-20`` and ``n ~ 1e20``
the naive ``(1 - delta) ** n`` in floating point is meaningless.

Points on a uniform angular grid carry their angle as an exact fraction of a
turn, so that the phase ``n * theta`` can be reduced modulo one turn with
integer arithmetic no matter how large ``n`` is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
import numpy as np

DEFAULT_PRECISION = 256

__all__ = [
    "DEFAULT_PRECISION",
    "DiscPoint",
    "LacunarySeries",
    "LacunaryTerm",
    "PowerSeries",
    "circle_profile",
    "csv_digits",
    "derivative",
    "evaluate",
    "evaluate_lacunary",
    "grid_values",
    "profile_csv",
    "radial_power",
    "to_mpf",
    "to_mpc",
]


def to_mpf(x) -> mpmath.mpf:
    """Convert ints, floats, Fractions, Decimals and strings to ``mpf``.

    Rounding happens once, at the precision active in the caller.
    """
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, Decimal):
        return mpmath.mpf(str(x))
    return mpmath.mpf(x)


def to_mpc(x) -> mpmath.mpc:
    if isinstance(x, (Fraction, Decimal, str)):
        return mpmath.mpc(to_mpf(x))
    return mpmath.mpc(x)


def csv_digits(precision: int) -> int:
    """Decimal digits used when rendering a ``precision``-bit value."""
    return math.ceil(precision * 0.302)


@dataclass(frozen=True)
class DiscPoint:
    """The point ``(1 - gap) * exp(i * angle)`` of the closed unit disc.

    ``turn`` optionally gives the angle exactly as a fraction of a full turn;
    when present it takes priority over ``angle``.
    """

    gap: object
    angle: object = 0.0
    turn: Fraction | None = None

    def __post_init__(self):
        g = to_mpf(self.gap)
        if not g > 0:
            raise ValueError(f"gap must be positive, got {self.gap!r}")
        if g > 1:
            raise ValueError(f"gap must be at most 1, got {self.gap!r}")

    @classmethod
    def on_grid(cls, gap, j: int, count: int) -> "DiscPoint":
        turn = Fraction(j % count, count)
        return cls(gap=gap, angle=2 * math.pi * float(turn), turn=turn)

    def radius(self) -> mpmath.mpf:
        return 1 - to_mpf(self.gap)


@dataclass(frozen=True)
class PowerSeries:
    """Dense truncated Taylor series ``sum a_n z**n`` for ``n = 0..N``.

    The degree is an upper bound: trailing zeros are kept. An empty
    coefficient list is the zero polynomial.
    """

    coefficients: tuple = (0,)
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        if not coeffs:
            coeffs = (0,)
        object.__setattr__(self, "coefficients", coeffs)
        if self.precision < 2:
            raise ValueError("precision must be at least 2 bits")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def terms(self):
        return [(a, n) for n, a in enumerate(self.coefficients) if a != 0]

    def as_array(self) -> np.ndarray:
        return np.array([complex(a) for a in self.coefficients], dtype=complex)

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        if not isinstance(other, PowerSeries):
            return NotImplemented
        n = max(len(self.coefficients), len(other.coefficients))
        a = list(self.coefficients) + [0] * (n - len(self.coefficients))
        b = list(other.coefficients) + [0] * (n - len(other.coefficients))
        return PowerSeries(tuple(x + y for x, y in zip(a, b)),
                           max(self.precision, other.precision))

    def __neg__(self) -> "PowerSeries":
        return PowerSeries(tuple(-a for a in self.coefficients), self.precision)

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        return self + (-other)

    def __mul__(self, scalar) -> "PowerSeries":
        if isinstance(scalar, PowerSeries):
            return NotImplemented
        return PowerSeries(tuple(scalar * a for a in self.coefficients), self.precision)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LacunaryTerm:
    coefficient: object
    exponent: int

    def __post_init__(self):
        if not to_mpf(self.coefficient) > 0:
            raise ValueError("lacunary coefficients must be positive")
        if int(self.exponent) != self.exponent or self.exponent < 0:
            raise ValueError("lacunary exponents must be nonnegative integers")


@dataclass(frozen=True)
class LacunarySeries:
    """Sparse series ``sum c_k z**n_k`` with strictly increasing ``n_k``."""

    terms_: tuple = field(default_factory=tuple)

    def __post_init__(self):
        terms = tuple(self.terms_)
        object.__setattr__(self, "terms_", terms)
        for a, b in zip(terms, terms[1:]):
            if not b.exponent > a.exponent:
                raise ValueError("lacunary exponents must strictly increase")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "LacunarySeries":
        return cls(tuple(LacunaryTerm(c, int(n)) for c, n in pairs))

    def terms(self):
        return [(t.coefficient, t.exponent) for t in self.terms_]

    def __len__(self):
        return len(self.terms_)


def _check_gap(gap):
    g = to_mpf(gap)
    if not g > 0:
        raise ValueError(f"gap must be positive, got {gap!r}")
    if g > 1:
        raise ValueError(f"gap must be at most 1, got {gap!r}")
    return g


def radial_power(gap, n: int, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """``(1 - gap) ** n`` computed as ``exp(n * log1p(-gap))``.

    ``gap == 1`` (the origin) gives ``0 ** n`` with ``0 ** 0 == 1``.
    """
    with mpmath.workprec(precision + 20):
        g = _check_gap(gap)
        if g == 1:
            return mpmath.mpf(1) if n == 0 else mpmath.mpf(0)
        return mpmath.exp(mpmath.mpf(n) * mpmath.log1p(-g))


def _phase(n: int, z: DiscPoint, precision: int) -> mpmath.mpc:
    """``exp(i * n * theta)`` with the phase reduced accurately for huge ``n``."""
    if z.turn is not None:
        m = (n * z.turn.numerator) % z.turn.denominator
        with mpmath.workprec(precision + 20):
            return mpmath.expjpi(mpmath.mpf(2 * m) / z.turn.denominator)
    with mpmath.workprec(precision + int(n).bit_length() + 64):
        t = mpmath.mpf(n) * to_mpf(z.angle)
        t = mpmath.fmod(t, 2 * mpmath.pi)
    with mpmath.workprec(precision + 20):
        return mpmath.expj(t)


def evaluate(f: PowerSeries, z: DiscPoint, precision: int | None = None) -> mpmath.mpc:
    """Horner evaluation of a dense series at ``z``.

    The relative rounding error is bounded by ``2**-precision * (N + 2)``
    (a few guard bits are added internally).
    """
    prec = precision or f.precision
    if z.turn is None:
        with mpmath.workprec(prec + 20):
            w = z.radius() * mpmath.expj(to_mpf(z.angle))
    else:
        with mpmath.workprec(prec + 20):
            w = z.radius() * _phase(1, z, prec)
    with mpmath.workprec(prec + 8):
        acc = mpmath.mpc(0)
        for a in reversed(f.coefficients):
            acc = acc * w + to_mpc(a)
    with mpmath.workprec(prec):
        return +acc


def evaluate_lacunary(f, z: DiscPoint, precision: int = DEFAULT_PRECISION) -> mpmath.mpc:
    """Evaluate ``sum c_k z**n_k`` for exponents of any size.

    Accepts a :class:`LacunarySeries` or any object with a ``terms()``
    method returning ``(coefficient, exponent)`` pairs.
    """
    _check_gap(z.gap)
    with mpmath.workprec(precision + 20):
        acc = mpmath.mpc(0)
        for c, n in f.terms():
            acc += to_mpc(c) * radial_power(z.gap, n, precision) * _phase(n, z, precision)
    with mpmath.workprec(precision):
        return +acc


def derivative(f: PowerSeries) -> PowerSeries:
    coeffs = f.coefficients
    if len(coeffs) <= 1:
        return PowerSeries((0,), f.precision)
    return PowerSeries(tuple((n + 1) * coeffs[n + 1] for n in range(len(coeffs) - 1)),
                       f.precision)


@lru_cache(maxsize=16)
def _roots_of_unity(count: int, precision: int) -> tuple:
    with mpmath.workprec(precision + 20):
        return tuple(mpmath.expjpi(mpmath.mpf(2 * m) / count) for m in range(count))


def circle_profile(f, gap, grid: int, precision: int | None = None) -> list:
    """Moduli ``|f(r e^{i theta_j})|`` at ``theta_j = 2 pi j / grid``, ``r = 1 - gap``.

    Works for dense and lacunary series alike; phases are reduced exactly
    modulo the grid so arbitrarily large exponents are handled.
    """
    if grid < 1:
        raise ValueError("grid must contain at least one angle")
    prec = precision or getattr(f, "precision", DEFAULT_PRECISION)
    _check_gap(gap)
    roots = _roots_of_unity(grid, prec)
    with mpmath.workprec(prec + 20):
        weighted = [(to_mpc(c) * radial_power(gap, n, prec), n % grid) for c, n in f.terms()]
        out = []
        for j in range(grid):
            acc = mpmath.mpc(0)
            for a, step in weighted:
                acc += a * roots[(step * j) % grid]
            out.append(abs(acc))
    with mpmath.workprec(prec):
        return [+v for v in out]


def profile_csv(moduli: Sequence, precision: int = DEFAULT_PRECISION) -> str:
    """Render a circle profile as ``theta,modulus`` CSV text."""
    digits = csv_digits(precision)
    grid = len(moduli)
    lines = ["theta,modulus"]
    with mpmath.workprec(precision):
        for j, v in enumerate(moduli):
            theta = 2 * mpmath.pi * j / grid
            lines.append(f"{mpmath.nstr(theta, digits, strip_zeros=False)},"
                         f"{mpmath.nstr(v, digits, strip_zeros=False)}")
    return "\n".join(lines) + "\n"


def grid_values(terms, gap, grid: int, precision: int = DEFAULT_PRECISION) -> np.ndarray:
    """Double-precision values of ``sum a z**n`` on the uniform ``grid`` at radius ``1 - gap``.

    Each radial factor ``a * r**n`` is formed in extended precision and then
    rounded once; phases use exact integer reduction modulo ``grid``.
    Intended for large grid experiments where mpmath per point is too slow.
    """
    if grid < 1:
        raise ValueError("grid must contain at least one angle")
    roots = np.exp(2j * np.pi * np.arange(grid) / grid)
    idx = np.arange(grid, dtype=np.int64)
    out = np.zeros(grid, dtype=complex)
    for c, n in terms:
        with mpmath.workprec(precision + 20):
            a = complex(to_mpc(c) * radial_power(gap, n, precision))
        if a == 0:
            continue
        out += a * roots[(idx * (n % grid)) % grid]
    return out
