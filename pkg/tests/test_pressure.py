import math

import numpy as np
import pytest

from fiberdyn.counting import max_separated_set
from fiberdyn.drivers import DrivingSystem
from fiberdyn.observables import Observable, birkhoff_sum
from fiberdyn.pressure import (legendre_conjugate, level_set_rate,
                               partition_sum, pressure_curve,
                               pressure_estimate, spectrum_crosscheck,
                               PressureCurve)
from fiberdyn.systems import FourierMap, SkewSystem

LAM = (3 + math.sqrt(5)) / 2
LOG_LAM = math.log(LAM)


def H(a):
    return -a * math.log(a) - (1 - a) * math.log(1 - a)


@pytest.fixture(scope="module")
def doubling():
    return SkewSystem(DrivingSystem("point"), "doubling")


@pytest.fixture(scope="module")
def cat():
    return SkewSystem(DrivingSystem("rotation"), "affine_torus",
                      matrix=np.array([[2, 1], [1, 1]]),
                      forcing=FourierMap(((0.3,), (0.0,)), ((), (0.2,))))


@pytest.fixture(scope="module")
def digit():
    return Observable("digit")


@pytest.fixture(scope="module")
def wpt(doubling):
    return doubling.driving.point()


def test_birkhoff_examples(doubling, cat, digit, wpt):
    c = Observable("constant", value=1.7)
    x = doubling.fiber_point(0.2)
    assert birkhoff_sum(doubling, c, wpt, x, 9) == pytest.approx(9 * 1.7)
    assert birkhoff_sum(doubling, digit, wpt, x, 1) == digit.evaluate(
        np.array([x]))[0]
    third = doubling.fiber_point(1.0 / 3.0)
    assert birkhoff_sum(doubling, digit, wpt, third, 10) == pytest.approx(5.0)


def test_birkhoff_additivity(cat):
    from fiberdyn.drivers import base_step
    from fiberdyn.systems import fiber_step
    phi = Observable("trig", terms=((1, 0, 0.5, 0.0), (0, 1, 0.0, 0.3)))
    rng = np.random.default_rng(0)
    for _ in range(20):
        w = cat.driving.point(rng.random())
        x = cat.fiber_point(rng.random(2))
        m = int(rng.integers(1, 8))
        n = int(rng.integers(1, 8))
        whole = birkhoff_sum(cat, phi, w, x, m + n)
        parts = birkhoff_sum(cat, phi, w, x, m) + birkhoff_sum(
            cat, phi, base_step(cat.driving, w, m), fiber_step(cat, w, x, m), n)
        assert whole == pytest.approx(parts, abs=1e-9)


def test_partition_sum_zero_observable(doubling, wpt):
    Q = max_separated_set(doubling, wpt, 6, 0.4)
    z = partition_sum(doubling, Observable("zero"), wpt, Q, 6)
    assert z == Q.cardinality


def test_partition_sum_binomial_oracle(doubling, digit, wpt):
    # Z_n(q digit) = (1 + e^q)^n exactly; brute force over all words confirms
    for n in (6, 10):
        Q = max_separated_set(doubling, wpt, n, 0.4)
        for q in (-1.0, 0.5, 2.0):
            z = partition_sum(doubling, digit.scaled(q), wpt, Q, n)
            assert z == pytest.approx((1 + math.exp(q))**n, rel=1e-12)
            brute = sum(math.exp(q * bin(word).count("1"))
                        for word in range(2**n))
            assert z == pytest.approx(brute, rel=1e-12)


def test_partition_sum_single_point(doubling, digit, wpt):
    Q = max_separated_set(doubling, wpt, 8, 0.4)
    from dataclasses import replace
    single = replace(Q, points=Q.points[:1])
    z = partition_sum(doubling, digit, wpt, single, 8)
    s = birkhoff_sum(doubling, digit, wpt, Q.points[0], 8)
    assert z == pytest.approx(math.exp(s), rel=1e-12)


def test_pressure_estimate_oracle(doubling, digit, wpt):
    est0 = pressure_estimate(doubling, digit.scaled(0.0), 0.4, range(8, 17))
    assert est0.slope == pytest.approx(math.log(2), abs=0.01)
    est1 = pressure_estimate(doubling, digit, 0.4, range(8, 17))
    assert est1.slope == pytest.approx(math.log(1 + math.e), abs=0.01)


def test_pressure_estimate_cat_entropy(cat):
    est = pressure_estimate(cat, Observable("zero"), 0.05, range(6, 13),
                            omega_samples=3, seed=1, budget=10**7)
    assert est.slope == pytest.approx(LOG_LAM, rel=0.05)
    assert est.lemma_consistency <= 0.05


def test_pressure_curve_matches_closed_form(doubling, digit):
    qs = np.arange(-3.0, 3.01, 1.0)
    curve = pressure_curve(doubling, digit, qs, 0.4, range(8, 17))
    for q, p in zip(curve.q, curve.pressure):
        assert p == pytest.approx(math.log(1 + math.exp(q)), abs=0.02)
    assert curve.convexity_defect <= 1e-2


def test_pressure_curve_constant_phi(doubling):
    curve = pressure_curve(doubling, Observable("zero"), [-2, 0, 2], 0.4,
                           range(8, 17))
    assert np.ptp(curve.pressure) <= 1e-9
    assert curve.pressure[1] == pytest.approx(math.log(2), abs=0.01)


def test_pressure_curve_reflection_symmetry(doubling, digit):
    qs = [-3, -1.5, 0.0, 1.5, 3]
    plus = pressure_curve(doubling, digit, qs, 0.4, range(8, 15))
    minus = pressure_curve(doubling, digit.scaled(-1.0), qs, 0.4, range(8, 15))
    # pi_{-phi}(q) = pi_phi(-q): relabeling the digits
    assert np.allclose(minus.pressure, plus.pressure[::-1], atol=1e-9)


def test_pressure_monotone_and_translation(doubling, digit, wpt):
    # phi <= psi pointwise => pressure ordered; translation by c shifts by c
    est = pressure_estimate(doubling, digit, 0.4, range(8, 15))
    est_shift = pressure_estimate(doubling, digit.shifted(0.7), 0.4, range(8, 15))
    assert est_shift.slope == pytest.approx(est.slope + 0.7,
                                            abs=2 * (est.stderr + est_shift.stderr) + 1e-9)
    est_half = pressure_estimate(doubling, digit.scaled(0.5), 0.4, range(8, 15))
    assert est_half.slope <= est.slope + 2 * (est.stderr + est_half.stderr) + 1e-12


def test_legendre_constant_curve():
    qs = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
    c = 0.83
    curve = PressureCurve(q=qs, pressure=np.full(5, c), stderr=np.zeros(5),
                          eps=0.4, n_min=8, n_max=16, convexity_defect=0.0)
    spec = legendre_conjugate(curve, [-0.5, 0.0, 0.5])
    # constant curve: pi*(alpha) = c - Q|alpha| on the symmetric grid
    assert spec.legendre[1] == pytest.approx(c)
    assert spec.legendre[0] == pytest.approx(c - 2.0 * 0.5)
    assert spec.legendre[2] == pytest.approx(c - 2.0 * 0.5)
    assert not spec.boundary_flag[1]       # tie broken toward q = 0
    assert spec.boundary_flag[0] and spec.boundary_flag[2]


def test_legendre_oracle_values(doubling, digit):
    qs = np.arange(-6.0, 6.001, 0.25)
    curve = pressure_curve(doubling, digit, qs, 0.4, range(8, 15), q_max=6.0)
    spec = legendre_conjugate(curve, [0.3, 0.5])
    assert spec.legendre[1] == pytest.approx(math.log(2), abs=5e-3)
    assert spec.legendre[0] == pytest.approx(H(0.3), abs=5e-3)
    assert spec.concavity_defect <= 1e-2


def test_level_set_rate_oracle(doubling, digit, wpt):
    r5 = level_set_rate(doubling, digit, wpt, 0.5, [0.1, 0.05], 0.4,
                        range(20, 41))
    assert abs(r5.rate - math.log(2)) <= 0.05
    # short-range variant: binomial counts already carry the rate by n <= 20
    r5s = level_set_rate(doubling, digit, wpt, 0.5, [0.1, 0.05], 0.4,
                         range(10, 21))
    assert abs(r5s.rate - math.log(2)) <= 0.05
    r3 = level_set_rate(doubling, digit, wpt, 0.3, [0.1, 0.05], 0.4,
                        range(20, 41))
    assert abs(r3.rate - H(0.3)) <= 0.05
    rimp = level_set_rate(doubling, digit, wpt, 1.5, [0.1, 0.05], 0.4,
                          range(20, 41))
    assert rimp.rate == 0.0
    assert rimp.outside_range


def test_level_set_rate_counts_recorded(doubling, digit, wpt):
    r = level_set_rate(doubling, digit, wpt, 0.5, [0.1, 0.05], 0.4, range(10, 16))
    csv = r.counts.to_csv()
    assert csv.startswith("n,epsilon,alpha,delta,count,method")
    assert csv.count("cylinder") >= 12


def test_crosscheck_oracle(doubling, digit):
    rep = spectrum_crosscheck(doubling, digit, [0.3, 0.4, 0.5, 0.6, 0.7],
                              q_grid=[-3, -2, -1, 0, 1, 2, 3], eps=0.4,
                              n_range=range(20, 41), delta_schedule=[0.1, 0.05],
                              curve_n_range=range(8, 17))
    assert rep.max_interior_discrepancy <= 0.05
    assert rep.observed_interval == (0.3, 0.7)
    # Legendre upper bound: counting rate below the conjugate + tolerance
    for i in range(len(rep.alpha)):
        assert rep.rates[i].mean() <= rep.legendre[i] + 0.05


def test_crosscheck_constant_phi(doubling):
    c = 0.7
    rep = spectrum_crosscheck(doubling, Observable("constant", value=c),
                              [c], q_grid=[-2, -1, 0, 1, 2], eps=0.4,
                              n_range=range(8, 15), delta_schedule=[0.1, 0.05],
                              curve_n_range=range(8, 15))
    # level set at alpha = c is everything: both sides near the entropy
    assert rep.legendre[0] == pytest.approx(math.log(2), abs=0.05)
    assert rep.rates[0, 0] == pytest.approx(math.log(2), abs=0.05)
    assert rep.max_interior_discrepancy <= 0.05


def test_crosscheck_cat_omega_agreement(cat):
    phi = Observable("trig", terms=((1, 0, 0.4, 0.0),))
    rep = spectrum_crosscheck(cat, phi, [0.0], q_grid=[-1, 0, 1], eps=0.05,
                              n_range=range(6, 13), delta_schedule=[0.2, 0.1],
                              omega_samples=2, seed=2, curve_n_range=range(6, 13))
    assert rep.max_omega_spread <= 0.05


def test_spectrum_bounded_by_entropy(doubling, digit):
    qs = np.arange(-3.0, 3.01, 0.5)
    curve = pressure_curve(doubling, digit, qs, 0.4, range(8, 17))
    spec = legendre_conjugate(curve, np.arange(0.15, 0.86, 0.05))
    entropy = float(curve.pressure[np.argmin(np.abs(curve.q))])
    assert np.all(spec.legendre <= entropy + 1e-9)
    assert np.all(spec.legendre >= -1e-9)     # nonnegative on the observed range


def test_pressure_curve_threads_deterministic(doubling, digit):
    qs = [-2, -1, 0, 1, 2]
    a = pressure_curve(doubling, digit, qs, 0.4, range(8, 15), threads=1)
    b = pressure_curve(doubling, digit, qs, 0.4, range(8, 15), threads=3)
    assert np.array_equal(a.pressure, b.pressure)
    assert np.array_equal(a.stderr, b.stderr)


def test_observable_norm_bounds(cat):
    phi = Observable("trig", terms=((1, 0, 0.5, 0.2), (2, 1, 0.0, 0.3)),
                     const=0.1)
    rng = np.random.default_rng(9)
    X = rng.random((2000, 2))
    vals = phi.evaluate(X)
    assert np.max(np.abs(vals)) <= phi.sup_norm_bound + 1e-12
    # empirical difference quotient stays below the Lipschitz bound
    Y = (X + 1e-4 * rng.standard_normal((2000, 2)))
    dv = np.abs(phi.evaluate(Y) - vals)
    dx = np.linalg.norm(Y - X, axis=1)
    assert np.max(dv / dx) <= phi.lipschitz_bound + 1e-9
    prod = Observable("product", terms=((1, 0, 0.5, 0.0),),
                      base_terms=((1, 0.4, 0.0),), base_const=0.2)
    assert math.isfinite(prod.sup_norm_bound)
    assert math.isfinite(prod.lipschitz_bound)
    assert Observable("digit").lipschitz_bound is None


def test_spectrum_max_equals_entropy(doubling, digit):
    qs = np.arange(-3.0, 3.01, 0.5)
    curve = pressure_curve(doubling, digit, qs, 0.4, range(8, 17))
    alphas = np.arange(0.1, 0.91, 0.05)
    spec = legendre_conjugate(curve, alphas)
    i0 = int(np.argmin(np.abs(curve.q)))
    assert float(np.max(spec.legendre)) == pytest.approx(
        float(curve.pressure[i0]), abs=1e-6)
