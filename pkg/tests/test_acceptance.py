"""Acceptance criteria AC1..AC9, each reported as one PASS/FAIL line."""

import json
import math
import time
from decimal import Decimal
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from discspaces.baire import hypothesis_ratio, run_average_cells, run_kernel_cells, sample_ball, make_ball
from discspaces.bounds import kernel_bound, kernel_norm, kernel_truncation, verify_l1_bound
from discspaces.cli import main
from discspaces.construction import (BuildConfig, build, dump_witness, load_witness, membership_tail,
                                     min_modulus_lower_bound, verify)
from discspaces.series import DiscPoint, PowerSeries, circle_profile, evaluate
from discspaces.spaces import (QuadratureConfig, SpaceSpec, bergman_norm, dirichlet_norm, s_nu_norm,
                               s_nu_norm_lacunary)


def record(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def cli(capsys, *argv):
    code = main(list(argv))
    out, _ = capsys.readouterr()
    return code, out


def random_poly(rng, max_degree=20):
    d = int(rng.integers(0, max_degree + 1))
    return PowerSeries(tuple(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)))


def test_ac1_construction_certified(tmp_path, capsys):
    out = str(tmp_path / "w6.json")
    t0 = time.perf_counter()
    code, _ = cli(capsys, "construct", "--steps", "6", "--nu-schedule", "1/k", "--out", out)
    elapsed = time.perf_counter() - t0
    code_v, report = cli(capsys, "verify", "--witness", out)
    report = json.loads(report)
    w = load_witness(open(out).read())
    last = w.steps[-1]
    certified = all(m["certified"] and mpmath.mpf(m["value"]) > 0 for m in report["margins"])
    ok = (code == 0 and code_v == 0 and report["passed"] and certified
          and report["precisions"] == [256, 512] and last.gap < Decimal("1e-10") and last.n > 10**10
          and elapsed < 60)
    record("AC1", ok, f"{len(report['margins'])} margins certified at 256/512 bits in {elapsed:.2f}s; "
                      f"n_6={last.n}, gap_6={last.gap}")


def test_ac2_blow_up_on_grid(witness6):
    lac = witness6.series()
    violations, worst = 0, math.inf
    for p in range(1, 7):
        grid_min = min(circle_profile(lac, witness6.steps[p - 1].gap, 4096))
        bound = min_modulus_lower_bound(witness6, p)
        violations += (grid_min < p) + (grid_min < bound)
        worst = min(worst, float(grid_min - p))
    record("AC2", violations == 0, f"{violations} violations over p=1..6, smallest excess of min|f| over p: {worst:.4f}")


def test_ac3_membership(witness6):
    lac = witness6.series()
    totals, ok = [], True
    for nu in (Fraction(1), Fraction(1, 2), Fraction(1, 3)):
        t = membership_tail(witness6, nu)
        ok &= mpmath.isfinite(t.total) and t.tail == mpmath.mpf(2) ** (1 - t.k)
        ok &= s_nu_norm_lacunary(lac, -nu) ** 2 <= t.total
        totals.append(t.total)
    ok &= totals[0] < totals[1] < totals[2]
    record("AC3", bool(ok), "totals at nu=1,1/2,1/3: " + ", ".join(mpmath.nstr(x, 8) for x in totals))


def test_ac4_l1_average_bound():
    q = QuadratureConfig(tolerance=1e-8)
    t0 = time.perf_counter()
    violations, checks, least = 0, 0, math.inf
    for i in range(100):
        f = random_poly(np.random.default_rng([2024, i]))
        for p in (2.5, 3, 4):
            nrm = dirichlet_norm(f, p, p - 1, q)
            for r in ("0.5", "0.9", "0.99"):
                rep = verify_l1_bound(f, p, Decimal(1) - Decimal(r), 2 * f.degree + 64, q, norm_value=nrm)
                checks += 1
                violations += rep.margin < 0
                least = min(least, rep.margin / rep.rhs)
    elapsed = time.perf_counter() - t0
    record("AC4", violations == 0 and elapsed < 30,
           f"{violations}/{checks} violations, smallest relative margin {least:.3e}, {elapsed:.2f}s")


def test_ac5_kernel_bounds():
    rng = np.random.default_rng(5)
    nus = (-0.5, 0.0, 0.5)
    violations = 0
    for i in range(1000):
        nu = nus[i % 3]
        f = random_poly(rng)
        gap = 10 ** rng.uniform(-3, 0)
        z = DiscPoint(gap, rng.uniform(0, 2 * math.pi))
        lhs = abs(complex(evaluate(f, z, 64)))
        violations += lhs > kernel_norm(nu, gap) * float(s_nu_norm(f, nu)) * (1 + 1e-12)
    worst = math.inf
    for nu in nus:
        for gap in (0.5, 0.1, 0.01):
            r = 1 - gap
            kern = PowerSeries(tuple((k + 1) ** (-2 * nu) * r**k for k in range(kernel_truncation(nu, gap) + 1)))
            ratio = abs(complex(evaluate(kern, DiscPoint(gap), 64))) / (kernel_norm(nu, gap) * float(s_nu_norm(kern, nu)))
            worst = min(worst, ratio)
    record("AC5", violations == 0 and worst >= 1 - 1e-6,
           f"{violations}/1000 violations, worst truncated-kernel sharpness ratio {worst:.12f}")


def test_ac6_closed_forms():
    kernel_err = abs(kernel_norm(0, 0.5) - math.sqrt(4 / 3))
    berg_err = 0.0
    for n in range(9):
        for p in (2, 3):
            for alpha in (0, 1, 2):
                with mpmath.workprec(200):
                    exact = ((alpha + 1) * mpmath.beta(alpha + 1, mpmath.mpf(n) * p / 2 + 1)) ** (mpmath.mpf(1) / p)
                f = PowerSeries((0,) * n + (1,))
                berg_err = max(berg_err, abs(bergman_norm(f, p, alpha) - float(exact)))
    # the polar integral 4 n^2 int_0^1 (1 - r^2) r^(2n-1) dr equals 2n/(n+1)
    dir_err = 0.0
    for n in range(1, 9):
        with mpmath.workprec(120):
            polar = 4 * n**2 * mpmath.quad(lambda r: (1 - r**2) * r ** (2 * n - 1), [0, 1])
            assert abs(polar - mpmath.mpf(2 * n) / (n + 1)) < 1e-30
        val = dirichlet_norm(PowerSeries((0,) * n + (1,)), 2, 1)
        dir_err = max(dir_err, abs(val - float(mpmath.sqrt(polar))))
    ok = kernel_err <= 1e-12 and berg_err <= 1e-8 and dir_err <= 1e-8
    record("AC6", ok, f"kernel err {kernel_err:.1e}, Bergman Beta err {berg_err:.1e}, "
                      f"Dirichlet polar-integral err {dir_err:.1e}")


def test_ac7_kernel_cells(witness6):
    t0 = time.perf_counter()
    cells = run_kernel_cells(witness6, SpaceSpec.weighted_hardy(-0.5), range(5), (2, 3, 4), 8192, 20, seed=0)
    elapsed = time.perf_counter() - t0
    ok = len(cells) == 15 and elapsed < 120
    for c in cells:
        ok &= c["passed"] and c["containment"] and c["min_fraction_A"] >= 1 - 1 / c["M"]
    worst = min(c.get("min_fraction_A", 0) - (1 - 1 / c["M"]) for c in cells)
    record("AC7", bool(ok), f"{sum(c['passed'] for c in cells)}/15 cells, F_M inside A everywhere, "
                            f"smallest |A| excess over 1-1/M {worst:.4f}, {elapsed:.1f}s")


def test_ac8_average_cells(witness_phi):
    G = 8192
    phi = witness_phi.phi
    cells = run_average_cells(witness_phi, SpaceSpec.dirichlet(3, 2), range(5), (1, 2, 3), G, 20, seed=0)
    ok = len(cells) == 15
    for c in cells:
        ok &= c["passed"]
        if "step" in c:
            ok &= hypothesis_ratio(witness_phi, c["step"], phi) > 2 * c["k"] * c["M"] ** 2
            ok &= c["max_fraction_H"] <= 1 / c["M"] + 2 / G
    worst = max(c.get("max_fraction_H", 1) for c in cells)
    record("AC8", bool(ok), f"{sum(c['passed'] for c in cells)}/15 cells with hypothesis ratio met, "
                            f"largest |H| fraction {worst}")


def test_ac9_determinism(tmp_path, capsys, witness3):
    w = str(tmp_path / "w.json")
    open(w, "w").write(dump_witness(witness3))
    commands = [
        ["construct", "--steps", "4"],
        ["verify", "--witness", w],
        ["norm", "--space", "dirichlet", "--p", "3", "--coeffs", "1,0.5j,-2"],
        ["kernel-bound", "--nu=-1/2", "--gap", "0.01"],
        ["cr-bound", "--p", "3", "--gap", "0.1"],
        ["radial-profile", "--witness", w, "--step", "3", "--grid", "512"],
        ["membership", "--witness", w, "--nu", "1/2"],
        ["baire-a", "--witness", w, "--n-range", "0-1", "--k-range", "1", "--grid", "256", "--samples", "2"],
        ["load", "--witness", w],
    ]
    same = 0
    for argv in commands:
        a, b = cli(capsys, *argv), cli(capsys, *argv)
        same += a == b and a[0] == 0
    text = dump_witness(witness3)
    lossless = load_witness(text) == witness3 and dump_witness(load_witness(text)) == text
    ball = make_ball(PowerSeries((0.5,)), 2, witness3, kernel_bound(-0.5, 0.5))
    space = SpaceSpec.weighted_hardy(-0.5)
    seeded = sample_ball(ball, space, 5, seed=1) == sample_ball(ball, space, 5, seed=1)
    record("AC9", same == len(commands) and lossless and seeded,
           f"{same}/{len(commands)} commands byte-identical on rerun, witness round trip lossless={lossless}")
