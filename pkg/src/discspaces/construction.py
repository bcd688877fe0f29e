"""Greedy construction of a lacunary series that blows up on circles.

The witness is ``f(z) = sum_k c_k z**n_k`` together with radii
``r_k = 1 - gap_k``. A prefix of ``K`` steps is *valid* when the following
families of strict inequalities hold (``S_k = c_1 + ... + c_{k-1}``,
``t_k`` the growth target, ``t_k = k`` unless a weight ``phi`` is attached,
in which case ``t_k = k * phi(r_k)``):

``coefficient-growth``  ``c_1 > 1`` and ``c_k - S_k > k``
``weighted-decay``      ``c_k / (n_k+1)**nu_k < 2**(-k/2)``
``first-circle``        ``c_1 r_1**n_1 - sum_{j>1} c_j r_1**n_j > t_1``
``inner-circle``        ``c_p r_p**n_p - S_p - sum_{j>p} c_j r_p**n_j > t_p``, ``1 < p < K``
``newest-circle``       ``c_k r_k**n_k - S_k > t_k`` for every ``k``

Together they force ``min |f| >= t_p`` on ``|z| = r_p`` and, through the
decay family, membership of the infinite continuation in every ``S_{-nu}``
with ``nu > nu_k`` for some ``k``.

Every margin is evaluated at the working precision and again at twice that
precision; a sign is *certified* only when both agree. Radii are stored as
decimal gaps with 30 significant digits, so a serialized witness denotes
exactly the same numbers at every precision.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction

import mpmath

from .errors import InfeasibleError, NotApplicableError
from .series import DEFAULT_PRECISION, LacunarySeries, to_mpf

log = logging.getLogger(__name__)

__all__ = [
    "BuildConfig",
    "INEQUALITIES",
    "LacunaryWitness",
    "Margin",
    "MembershipTail",
    "VerificationReport",
    "WeightFunction",
    "WitnessStep",
    "build",
    "dump_witness",
    "load_witness",
    "membership_tail",
    "min_modulus_lower_bound",
    "parse_nu_schedule",
    "verify",
    "witness_from_json",
    "witness_to_json",
]

INEQUALITIES = ("coefficient-growth", "weighted-decay", "first-circle",
                "inner-circle", "newest-circle")

GAP_DIGITS = 30
WITNESS_FORMAT = "discspaces-witness/1"


@dataclass(frozen=True)
class WeightFunction:
    """Increasing weight ``phi`` with ``phi(r) -> inf`` as ``r -> 1``.

    ``log-reciprocal``: ``phi(r) = log(1/(1-r))``;
    ``power-gap``: ``phi(r) = (1-r)**(-s)`` with ``s > 0``.
    """

    family: str = "log-reciprocal"
    s: Fraction | None = None

    def __post_init__(self):
        if self.family not in ("log-reciprocal", "power-gap"):
            raise ValueError(f"unknown weight family {self.family!r}")
        if self.family == "power-gap" and not (self.s is not None and self.s > 0):
            raise ValueError("power-gap weight needs s > 0")

    def __call__(self, gap, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
        with mpmath.workprec(precision + 10):
            g = to_mpf(gap)
            if self.family == "log-reciprocal":
                out = -mpmath.log(g)
            else:
                out = g ** (-to_mpf(self.s))
        with mpmath.workprec(precision):
            return +out

    def to_json(self) -> dict:
        return {"family": self.family, "s": None if self.s is None else str(self.s)}

    @classmethod
    def from_json(cls, data: dict | None) -> "WeightFunction | None":
        if data is None:
            return None
        s = data.get("s")
        return cls(data["family"], None if s is None else Fraction(s))

    @classmethod
    def parse(cls, text: str) -> "WeightFunction":
        """``log`` or ``power:<s>``."""
        if text in ("log", "log-reciprocal"):
            return cls("log-reciprocal")
        if text.startswith("power:"):
            return cls("power-gap", Fraction(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse weight {text!r}")


@dataclass(frozen=True)
class WitnessStep:
    c: Decimal
    n: int
    gap: Decimal
    nu: Fraction


@dataclass(frozen=True)
class LacunaryWitness:
    steps: tuple
    mode: str = "all-nu"
    phi: WeightFunction | None = None
    config: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.mode not in ("all-nu", "single-nu"):
            raise ValueError(f"unknown mode {self.mode!r}")

    def __len__(self):
        return len(self.steps)

    def series(self) -> LacunarySeries:
        return LacunarySeries.from_pairs((s.c, s.n) for s in self.steps)

    def target(self, k: int, precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
        """Growth target ``t_k`` (1-based ``k``)."""
        if self.phi is None:
            return mpmath.mpf(k)
        with mpmath.workprec(precision):
            return k * self.phi(self.steps[k - 1].gap, precision)


def parse_nu_schedule(text: str):
    """Parse ``"c/k"`` or ``"c/k^e"`` into a function of the (1-based) step."""
    m = re.fullmatch(r"\s*([0-9]+(?:/[0-9]+)?)\s*/\s*k(?:\s*\^\s*([0-9]+))?\s*", text)
    if not m:
        raise ValueError(f"cannot parse nu schedule {text!r}; expected e.g. '1/k' or '1/k^2'")
    scale = Fraction(m.group(1))
    power = int(m.group(2) or 1)
    if scale <= 0:
        raise ValueError("nu schedule must be positive")
    return lambda k: scale / Fraction(k) ** power


@dataclass(frozen=True)
class BuildConfig:
    """Knobs of the greedy builder.

    ``nu`` switches to single-nu mode (every ``nu_k`` equal); otherwise
    ``nu_schedule`` gives ``nu_k``. ``gap_resolution`` is the number of
    logarithmic gap candidates per decade.
    """

    steps: int = 6
    nu_schedule: str = "1/k"
    nu: Fraction | None = None
    gap_resolution: int = 32
    precision: int = DEFAULT_PRECISION
    phi: WeightFunction | None = None
    escalation_limit: int = 60
    exponent_bits_cap: int = 1 << 13  # keeps str(n) under the int-to-str digit limit
    gap_floor_exponent: int = -100000

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.precision < 128:
            raise ValueError("precision must be at least 128 bits")
        if self.gap_resolution < 1:
            raise ValueError("gap_resolution must be positive")
        if self.nu is not None and not self.nu > 0:
            raise ValueError("nu must be positive")
        if self.nu is None:
            parse_nu_schedule(self.nu_schedule)

    def nu_at(self, k: int) -> Fraction:
        if self.nu is not None:
            return Fraction(self.nu)
        return parse_nu_schedule(self.nu_schedule)(k)

    def to_json(self) -> dict:
        return {
            "steps": self.steps,
            "nu_schedule": None if self.nu is not None else self.nu_schedule,
            "nu": None if self.nu is None else str(self.nu),
            "gap_resolution": self.gap_resolution,
            "precision": self.precision,
            "phi": None if self.phi is None else self.phi.to_json(),
        }


# --- margin arithmetic ----------------------------------------------------

class _Numbers:
    """Witness quantities converted once at a fixed precision."""

    def __init__(self, steps, phi, precision):
        self.prec = precision
        with mpmath.workprec(precision + 20):
            self.c = [to_mpf(s.c) for s in steps]
            self.g = [to_mpf(s.gap) for s in steps]
            self.logr = [mpmath.log1p(-g) for g in self.g]
            self.n = [s.n for s in steps]
            self.nu = [to_mpf(s.nu) for s in steps]
            self.prefix = [mpmath.mpf(0)]
            for c in self.c:
                self.prefix.append(self.prefix[-1] + c)
            if phi is None:
                self.t = [mpmath.mpf(k + 1) for k in range(len(steps))]
            else:
                self.t = [(k + 1) * phi(steps[k].gap, precision + 20)
                          for k in range(len(steps))]

    def term(self, p, j):
        """``c_j r_p**n_j`` (0-based indices)."""
        return self.c[j] * mpmath.exp(self.n[j] * self.logr[p])

    def circle_bound(self, p, upto=None):
        """``c_p r_p**n_p - S_p - sum_{p<j<upto} c_j r_p**n_j``."""
        upto = len(self.c) if upto is None else upto
        with mpmath.workprec(self.prec + 20):
            acc = self.term(p, p) - self.prefix[p]
            for j in range(p + 1, upto):
                acc -= self.term(p, j)
            return acc

    def growth(self, k):
        with mpmath.workprec(self.prec + 20):
            if k == 0:
                return self.c[0] - 1
            return self.c[k] - self.prefix[k] - (k + 1)

    def decay(self, k):
        with mpmath.workprec(self.prec + 20):
            return (mpmath.mpf(2) ** (-mpmath.mpf(k + 1) / 2)
                    - self.c[k] * mpmath.exp(-self.nu[k] * mpmath.log(self.n[k] + 1)))

    def newest(self, k):
        with mpmath.workprec(self.prec + 20):
            return self.term(k, k) - self.prefix[k] - self.t[k]


def _margins(steps, phi, precision):
    """All inequality margins as ``{(name, step): mpf}`` (1-based steps)."""
    num = _Numbers(steps, phi, precision)
    K = len(steps)
    out = {}
    for k in range(K):
        out[("coefficient-growth", k + 1)] = num.growth(k)
        out[("weighted-decay", k + 1)] = num.decay(k)
    if K:
        with mpmath.workprec(precision + 20):
            out[("first-circle", 1)] = num.circle_bound(0) - num.t[0]
    for p in range(1, K - 1):
        with mpmath.workprec(precision + 20):
            out[("inner-circle", p + 1)] = num.circle_bound(p) - num.t[p]
    for k in range(K):
        out[("newest-circle", k + 1)] = num.newest(k)
    with mpmath.workprec(precision):
        return {key: +v for key, v in out.items()}


def _structure_failures(steps):
    bad = []
    for k, s in enumerate(steps, start=1):
        if not s.nu > 0:
            bad.append((k, "nu must be positive"))
        if not 0 < s.gap < 1:
            bad.append((k, "gap must lie in (0, 1)"))
        if not s.c > 0:
            bad.append((k, "coefficient must be positive"))
        if k > 1:
            prev = steps[k - 2]
            if not s.gap < prev.gap:
                bad.append((k, "gaps must strictly decrease"))
            if not s.n > prev.n:
                bad.append((k, "exponents must strictly increase"))
            if not s.nu <= prev.nu:
                bad.append((k, "nu must not increase"))
    return bad


@dataclass(frozen=True)
class Margin:
    inequality: str
    step: int
    value: mpmath.mpf
    check: mpmath.mpf

    @property
    def certified(self) -> bool:
        return self.value > 0 and self.check > 0


@dataclass
class VerificationReport:
    margins: list
    structure: list
    precision: int

    @property
    def passed(self) -> bool:
        return not self.structure and all(m.certified for m in self.margins)

    @property
    def failures(self) -> list:
        return [m for m in self.margins if not m.certified]

    def margin(self, inequality: str, step: int) -> mpmath.mpf:
        for m in self.margins:
            if m.inequality == inequality and m.step == step:
                return m.value
        raise KeyError((inequality, step))

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "precisions": [self.precision, 2 * self.precision],
            "margins": [
                {"inequality": m.inequality, "step": m.step,
                 "value": mpmath.nstr(m.value, 20),
                 "check": mpmath.nstr(m.check, 20),
                 "certified": m.certified}
                for m in self.margins
            ],
            "structure": [{"step": k, "problem": msg} for k, msg in self.structure],
        }


def verify(w: LacunaryWitness, precision: int = DEFAULT_PRECISION) -> VerificationReport:
    """Evaluate every inequality at ``precision`` and ``2 * precision``."""
    lo = _margins(w.steps, w.phi, precision)
    hi = _margins(w.steps, w.phi, 2 * precision)
    margins = [Margin(name, k, lo[(name, k)], hi[(name, k)])
               for name in INEQUALITIES for (nm, k) in lo if nm == name]
    return VerificationReport(margins, _structure_failures(w.steps), precision)


def min_modulus_lower_bound(w: LacunaryWitness, p: int,
                            precision: int = DEFAULT_PRECISION) -> mpmath.mpf:
    """``c_p r_p^n_p - sum_{j<p} c_j - sum_{j>p} c_j r_p^n_j`` for the built prefix.

    By the triangle inequality this bounds ``|f|`` from below on ``|z| = r_p``.
    """
    if not 1 <= p <= len(w.steps):
        raise IndexError(f"step {p} out of range 1..{len(w.steps)}")
    num = _Numbers(w.steps, None, precision)
    val = num.circle_bound(p - 1)
    with mpmath.workprec(precision):
        return +val


@dataclass
class MembershipTail:
    nu: Fraction
    k: int
    partial: mpmath.mpf
    tail: mpmath.mpf
    total: mpmath.mpf

    def to_json(self) -> dict:
        return {"nu": str(self.nu), "k": self.k,
                "partial": mpmath.nstr(self.partial, 30),
                "tail": mpmath.nstr(self.tail, 30),
                "total": mpmath.nstr(self.total, 30)}


def membership_tail(w: LacunaryWitness, nu, precision: int = DEFAULT_PRECISION) -> MembershipTail:
    """Certified bound on ``sum_j (c_j / (n_j+1)^nu)^2`` over the whole continuation.

    Terms from the first step ``k`` with ``nu_k < nu`` onward are dominated
    by ``2^-j`` (in single-nu mode, ``nu >= nu_1`` suffices and ``k = 1``).
    """
    nu = Fraction(nu)
    if w.mode == "single-nu":
        if not nu >= w.steps[0].nu:
            raise NotApplicableError(f"nu={nu} is below the witness exponent {w.steps[0].nu}")
        k = 1
    else:
        ks = [i for i, s in enumerate(w.steps, start=1) if s.nu < nu]
        if not ks:
            raise NotApplicableError(f"no built step has nu_k < {nu}")
        k = ks[0]
    with mpmath.workprec(precision + 20):
        v = to_mpf(nu)
        partial = mpmath.mpf(0)
        for s in w.steps[: k - 1]:
            partial += (to_mpf(s.c) * mpmath.exp(-v * mpmath.log(s.n + 1))) ** 2
        tail = mpmath.mpf(2) ** (1 - k)
        total = partial + tail
    with mpmath.workprec(precision):
        return MembershipTail(nu, k, +partial, +tail, +total)


# --- builder ----------------------------------------------------------------

def _certified(fn, precision):
    """True when ``fn(prec) > 0`` at both ``precision`` and ``2 * precision``."""
    return fn(precision) > 0 and fn(2 * precision) > 0


def _gap_candidate(start: Decimal, j: int, resolution: int) -> Decimal:
    with localcontext() as ctx:
        ctx.prec = GAP_DIGITS
        return +(start * Decimal(10) ** (Decimal(-j) / resolution))


def _minimal_exponent(c: Decimal, k: int, nu: Fraction, floor: int, cfg: BuildConfig) -> int:
    """Least ``n >= floor`` with ``c / (n+1)^nu < 2^(-k/2)``, by doubling then bisection."""

    def ok(n):
        def margin(prec):
            with mpmath.workprec(prec):
                return nu_m(prec) * mpmath.log(n + 1) - mpmath.log(to_mpf(c)) - k * mpmath.log(2) / 2
        return _certified(margin, cfg.precision)

    def nu_m(prec):
        with mpmath.workprec(prec):
            return to_mpf(nu)

    hi = max(floor, 1)
    while not ok(hi):
        hi *= 2
        if hi.bit_length() > cfg.exponent_bits_cap:
            raise InfeasibleError(f"exponent cap reached at step {k}", k, "weighted-decay")
    lo = max(floor, hi // 2)
    if ok(lo):
        return lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _inner_ok(steps, phi, precision) -> tuple:
    """Check first/inner circle margins of ``steps`` for every ``p`` except the last."""
    K = len(steps)
    for prec in (precision, 2 * precision):
        num = _Numbers(steps, phi, prec)
        for p in range(K - 1):
            if not num.circle_bound(p) - num.t[p] > 0:
                return False, p + 1
    return True, None


def _choose_gap(steps, c, n, nu, prev_gap, k, cfg):
    """Largest grid gap below ``prev_gap / 2`` meeting the newest-circle inequality.

    Returns ``None`` when no admissible gap exists (with a weight attached the
    target grows as the gap shrinks, so the feasible set can be empty).
    """
    start = prev_gap / 2

    def passes(gap):
        trial = steps + [WitnessStep(c, n, gap, nu)]
        return _certified(lambda prec: _Numbers(trial, cfg.phi, prec).newest(k - 1), cfg.precision)

    def saturated(gap):
        # c (1 - r^n) is negligible: shrinking the gap cannot help any more
        with mpmath.workprec(cfg.precision):
            return n * to_mpf(gap) < mpmath.mpf(10) ** -12

    def below_floor(gap):
        return gap.adjusted() < cfg.gap_floor_exponent

    if cfg.phi is None:
        # margin is monotone in the gap: gallop then bisect on the grid index
        if passes(_gap_candidate(start, 0, cfg.gap_resolution)):
            return _gap_candidate(start, 0, cfg.gap_resolution)
        lo, hi = 0, 1
        while True:
            gap = _gap_candidate(start, hi, cfg.gap_resolution)
            if below_floor(gap):
                return None
            if passes(gap):
                break
            if saturated(gap):
                return None
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if passes(_gap_candidate(start, mid, cfg.gap_resolution)):
                hi = mid
            else:
                lo = mid
        return _gap_candidate(start, hi, cfg.gap_resolution)

    j = 0
    while True:
        gap = _gap_candidate(start, j, cfg.gap_resolution)
        if below_floor(gap):
            return None
        if passes(gap):
            return gap
        if saturated(gap):
            return None
        j += 1


def build(cfg: BuildConfig) -> LacunaryWitness:
    """Build a ``cfg.steps``-step witness that passes :func:`verify`.

    At step ``k``: ``c_k = S_k + k + 1`` (doubled on infeasibility), then the
    least ``n_k`` satisfying the decay inequality, doubled until every earlier
    circle inequality survives the new term, then the largest logarithmic-grid
    gap meeting the newest-circle inequality.
    """
    steps: list = []
    mode = "single-nu" if cfg.nu is not None else "all-nu"
    for k in range(1, cfg.steps + 1):
        nu = cfg.nu_at(k)
        prefix = sum((s.c for s in steps), Decimal(0))
        c = prefix + k + 1
        prev_gap = steps[-1].gap if steps else Decimal(1)
        floor = steps[-1].n + 1 if steps else 0
        failure = "newest-circle"
        for _ in range(cfg.escalation_limit + 1):
            n = _minimal_exponent(c, k, nu, floor, cfg)
            ok, _bad = _inner_ok(steps + [WitnessStep(c, n, prev_gap, nu)], cfg.phi, cfg.precision)
            while not ok:
                n *= 2
                if n.bit_length() > cfg.exponent_bits_cap:
                    failure = "inner-circle"
                    break
                ok, _bad = _inner_ok(steps + [WitnessStep(c, n, prev_gap, nu)],
                                     cfg.phi, cfg.precision)
            if ok:
                gap = _choose_gap(steps, c, n, nu, prev_gap, k, cfg)
                if gap is not None:
                    break
                failure = "newest-circle"
            c *= 2
        else:
            raise InfeasibleError(f"step {k}: {failure} infeasible after "
                                  f"{cfg.escalation_limit} escalations of c_k", k, failure)
        steps.append(WitnessStep(c, n, gap, nu))
        log.info("step %d: c=%s n has %d bits, gap=%s nu=%s", k, c, n.bit_length(), gap, nu)
    w = LacunaryWitness(tuple(steps), mode, cfg.phi, cfg.to_json())
    report = verify(w, cfg.precision)
    if not report.passed:
        bad = report.failures[0] if report.failures else None
        raise InfeasibleError("built witness failed verification",
                              bad.step if bad else len(steps),
                              bad.inequality if bad else "structure")
    return w


# --- serialization ----------------------------------------------------------

def witness_to_json(w: LacunaryWitness) -> dict:
    return {
        "format": WITNESS_FORMAT,
        "mode": w.mode,
        "phi": None if w.phi is None else w.phi.to_json(),
        "config": w.config,
        "steps": [{"c": str(s.c), "n": str(s.n), "gap": str(s.gap), "nu": str(s.nu)}
                  for s in w.steps],
    }


def witness_from_json(data: dict) -> LacunaryWitness:
    if data.get("format") != WITNESS_FORMAT:
        raise ValueError(f"not a witness document (format {data.get('format')!r})")
    steps = tuple(WitnessStep(Decimal(s["c"]), int(s["n"]), Decimal(s["gap"]), Fraction(s["nu"]))
                  for s in data["steps"])
    return LacunaryWitness(steps, data["mode"], WeightFunction.from_json(data.get("phi")),
                           data.get("config") or {})


def dump_witness(w: LacunaryWitness) -> str:
    return json.dumps(witness_to_json(w), indent=2, sort_keys=True) + "\n"


def load_witness(text: str) -> LacunaryWitness:
    return witness_from_json(json.loads(text))
