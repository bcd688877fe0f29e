import itertools
import math
from decimal import Decimal
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from discspaces.baire import (BoundaryGrid, MeasureEstimate, a_set_measure, dyadic_polynomials,
                              find_r_M, h_set_measure, hypothesis_ratio, make_ball, required_M,
                              run_experiment, sample_ball, select_step, sup_norm)
from discspaces.bounds import EvalBound, kernel_bound
from discspaces.construction import WeightFunction
from discspaces.errors import NotFoundError, PreconditionError
from discspaces.series import PowerSeries, grid_values
from discspaces.spaces import SpaceSpec, norm

ZERO = PowerSeries((0,))
S_HALF = SpaceSpec.weighted_hardy(-0.5)


def test_first_enumerated_polynomials():
    first = [P.coefficients for P in itertools.islice(dyadic_polynomials(), 5)]
    assert first == [(0j,), (-0.5 + 0j,), (-0.5j,), (0.5j,), (0.5 + 0j,)]


def test_enumeration_has_no_repeats_and_reaches_targets():
    seen = [P.coefficients for P in itertools.islice(dyadic_polynomials(), 800)]
    assert len(set(seen)) == len(seen)
    assert (0.5 + 0j, -1j) in seen and (2 + 0.25j,) in seen


@pytest.mark.parametrize("coeffs, k, expected", [
    ((0,), 2, 7),
    ((0, 1), 3, 16),
])
def test_kernel_threshold_examples(coeffs, k, expected):
    assert required_M(PowerSeries(coeffs), k, "kernel") == expected


def test_thresholds_satisfy_their_defining_inequalities():
    for P in itertools.islice(dyadic_polynomials(), 40):
        s = sup_norm(P)
        for k in (1, 2, 5):
            M = required_M(P, k, "kernel")
            assert M / k > k + s + 1 and (M - 1) / k <= k + s + 1
            assert required_M(P, k, "l1-average") >= s + k


def test_sup_norm_dominates_fine_grid_max():
    rng = np.random.default_rng(2)
    for d in (1, 5, 20):
        P = PowerSeries(tuple(rng.standard_normal(d + 1) + 1j * rng.standard_normal(d + 1)))
        fine = np.max(np.abs(np.polyval(P.as_array()[::-1], np.exp(2j * np.pi * np.arange(65536) / 65536))))
        assert sup_norm(P) >= fine


def test_radius_is_exact_minimum(witness6):
    bound = EvalBound("kernel", Decimal("0.5"), 0.5, {"nu": 0})
    ball = make_ball(ZERO, 1, witness6, bound)
    assert ball.radius == 1
    big = kernel_bound(-0.5, witness6.steps[3].gap)
    ball = make_ball(ZERO, 2, witness6, big)
    with mpmath.workprec(256):
        assert ball.radius == 1 / mpmath.mpf(big.value)


def test_center_sample_is_exact(witness6):
    ball = make_ball(PowerSeries((0.5, 0.5j)), 3, witness6, kernel_bound(-0.5, 0.5))
    [g] = sample_ball(ball, S_HALF, 1, seed=0, include_center=True)
    assert g.dense == ball.center and g.scale == Fraction(1, 3)
    assert g.lacunary == witness6.series()


@pytest.mark.parametrize("space", [S_HALF, SpaceSpec.dirichlet(3, 2), SpaceSpec.hardy(2)])
def test_samples_stay_inside_ball(witness6, space):
    ball = make_ball(PowerSeries((0.5,)), 2, witness6, kernel_bound(-0.5, 0.5))
    for g in sample_ball(ball, space, 10, seed=4):
        h = g.dense - ball.center
        assert norm(h, space, gap=Decimal("1e-12") if space.kind == "hardy" else None) < float(ball.radius)


def test_squeezed_ball_barely_moves_center(witness6):
    ball = make_ball(ZERO, 2, witness6, kernel_bound(-0.5, witness6.steps[-1].gap))
    for g in sample_ball(ball, S_HALF, 5, seed=1):
        assert max(abs(complex(c)) for c in g.perturbation.coefficients) < 1e-15


def test_samples_are_order_independent(witness6):
    ball = make_ball(ZERO, 2, witness6, kernel_bound(-0.5, 0.5))
    a = sample_ball(ball, S_HALF, 6, seed=9)
    b = sample_ball(ball, S_HALF, 3, seed=9)
    assert a[:3] == b


def test_threshold_three_reached_by_third_radius(witness6):
    grid = BoundaryGrid.for_witness(witness6, 4096)
    gap, F = find_r_M(witness6, 3, grid, target=1.0)
    assert F.fraction == 1.0 and gap >= witness6.steps[2].gap


def test_large_constant_uses_first_radius():
    grid = BoundaryGrid(64, (Decimal("0.5"), Decimal("0.1")))
    gap, F = find_r_M(PowerSeries((5,)), 3, grid)
    assert gap == Decimal("0.5") and F.fraction == 1.0


def test_zero_function_never_reaches_threshold():
    with pytest.raises(NotFoundError):
        find_r_M(ZERO, 1, BoundaryGrid(64, (Decimal("0.5"), Decimal("0.1"))))


def test_zero_function_has_empty_a_set():
    assert a_set_measure(ZERO, 2, Decimal("0.1"), BoundaryGrid(64, (Decimal("0.5"), Decimal("0.1")))).fraction == 0


def test_scaled_witness_covers_threshold_angles(witness6):
    k = 2
    M = required_M(ZERO, k, "kernel")
    grid = BoundaryGrid.for_witness(witness6, 2048)
    gap_M, F = find_r_M(witness6, M, grid)
    ball = make_ball(ZERO, k, witness6, kernel_bound(-0.5, gap_M))
    A = a_set_measure(ball.center_member(), k, gap_M, grid)
    assert np.all(A.mask[F.mask]) and A.fraction >= F.fraction


def test_h_set_empty_for_scaled_weighted_witness(witness_phi):
    phi = witness_phi.phi
    k, M = 1, 1
    p = select_step(witness_phi, k, M, phi)
    assert hypothesis_ratio(witness_phi, p, phi) > 2 * k * M * M
    ball = make_ball(ZERO, k, witness_phi, kernel_bound(0, 0.5))
    H = h_set_measure(ball.center_member(), M, phi, witness_phi.steps[p - 1].gap,
                      BoundaryGrid.for_witness(witness_phi, 1024), witness_phi, p, k)
    assert H.fraction == 0


def test_h_set_full_for_zero_function():
    H = h_set_measure(ZERO, 3, WeightFunction(), Decimal("0.01"), BoundaryGrid(128))
    assert H.fraction == 1


def test_h_set_precondition_reports_deficit(witness_phi):
    phi = witness_phi.phi
    with pytest.raises(PreconditionError) as info:
        h_set_measure(ZERO, 50, phi, witness_phi.steps[-1].gap, BoundaryGrid(64), witness_phi,
                      len(witness_phi.steps), 5)
    assert info.value.deficit > 0
    with pytest.raises(PreconditionError):
        select_step(witness_phi, 5, 50, phi)


@pytest.mark.parametrize("kwargs", [{"count": 1}, {"count": 8, "gaps": (Decimal("0.1"), Decimal("0.2"))}])
def test_grid_validation(kwargs):
    with pytest.raises(ValueError):
        BoundaryGrid(**kwargs)


def test_measure_fraction_range():
    with pytest.raises(ValueError):
        MeasureEstimate("A", 8, 1.5, 1, 0)


def test_small_experiment_is_reproducible(witness6):
    desc = {"space": S_HALF.to_json(), "n_range": [0, 1], "k_range": [2], "grid": 512,
            "samples": 3, "seed": 5, "mode": "kernel"}
    a = run_experiment(desc, witness6)
    assert a == run_experiment(desc, witness6)
    assert a["passed"] and len(a["cells"]) == 2


def test_average_cells_need_matching_space(witness_phi):
    desc = {"space": SpaceSpec.bergman(3, 2).to_json(), "mode": "l1-average", "grid": 64, "samples": 1}
    with pytest.raises(ValueError):
        run_experiment(desc, witness_phi)
