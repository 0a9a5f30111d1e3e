"""Conjugation, the convolution rate, inverses, and the finite-m tail rate,
each checked against independent brute-force oracles."""

import math

import numpy as np
import pytest

from redem import (ConvolutionRate, DomainError, EnergyConjugate,
                   LengthConjugate, OutOfRangeError, PreconditionError,
                   conjugate, conjugate_detail, energy_law, length_law, nu,
                   nu_detail, psi, rate_inverse, tail_rate)

GAUSS = energy_law("gaussian")
RAD = energy_law("rademacher")
SHEXP = energy_law("shifted_exponential")
DET = length_law("deterministic")
POI = length_law("poisson")
SYMBIN = length_law("symmetric_binomial")

PHI_G = EnergyConjugate(GAUSS)
PHI_R = EnergyConjugate(RAD)
PHI_SE = EnergyConjugate(SHEXP)
PSI_DET = LengthConjugate(DET)
PSI_POI = LengthConjugate(POI)
PSI_SB = LengthConjugate(SYMBIN)
NU_PG = ConvolutionRate(PSI_POI, PHI_G)
NU_DG = ConvolutionRate(PSI_DET, PHI_G)


def poisson_psi(y):
    y = np.asarray(y, dtype=float)
    return np.where(y <= 1.0, 0.0, y * (np.log(np.maximum(y, 1e-300)) - 1.0) + 1.0)


def nu_oracle_gauss_poisson(x, step=1e-5, y_hi=8.0):
    ys = np.arange(step, y_hi, step)
    return float(np.min(poisson_psi(ys) + x * x / (2.0 * ys)))


def test_conjugate_gaussian():
    assert conjugate(GAUSS._cgf, 1.0) == pytest.approx(0.5, abs=1e-9)
    assert conjugate(GAUSS._cgf, 0.0) == 0.0


def test_conjugate_rademacher_boundary():
    # sup of t - log cosh t is approached as t grows; grid oracle per the
    # dense scan on [0, 50].
    ts = np.arange(0.0, 50.0, 1e-4)
    oracle = float(np.max(ts - RAD._cgf(ts)))
    got = conjugate(RAD._cgf, 1.0)
    assert got == pytest.approx(math.log(2.0), abs=1e-6)
    assert got == pytest.approx(oracle, abs=1e-6)


def test_conjugate_shifted_exponential():
    ts = np.arange(0.0, 1.0, 1e-6)
    oracle = float(np.max(ts - SHEXP._cgf(ts)))
    got = conjugate(SHEXP._cgf, 1.0, domain_sup=SHEXP.cgf_domain_sup)
    assert got == pytest.approx(1.0 - math.log(2.0), abs=1e-9)
    assert got == pytest.approx(oracle, abs=1e-9)


def test_conjugate_saturation_flag_and_overflow():
    d = PHI_R.detail(1.5)
    assert d.saturated_at_cap
    assert math.isfinite(d.value)
    # far beyond the support the reported value crosses the overflow
    # threshold and becomes a clean +inf
    assert math.isinf(PHI_R.value(200.0))
    with pytest.raises(DomainError):
        conjugate(GAUSS._cgf, -0.5)


def test_conjugate_vector_matches_scalar():
    xs = np.array([0.0, 0.3, 0.9, 1.7, 4.0])
    vec = PHI_G.values(xs)
    sca = [PHI_G.value(float(x)) for x in xs]
    assert np.allclose(vec, sca, atol=1e-9)


def test_gaussian_self_dual_round_trip():
    # the conjugate of x^2/2, treated as a cgf, is t^2/2 again
    for t in np.arange(0.0, 3.01, 0.25):
        back = conjugate(lambda u: 0.5 * u * u, float(t))
        assert back == pytest.approx(0.5 * t * t, abs=1e-8)


def test_psi_closed_forms():
    assert psi(POI, 0.5) == 0.0
    assert psi(POI, 1.0) == 0.0
    assert psi(POI, 2.0) == pytest.approx(2.0 * math.log(2.0) - 1.0, abs=1e-12)
    assert psi(DET, 0.5) == 0.0
    assert psi(DET, 1.0) == 0.0
    assert math.isinf(psi(DET, 1.5))
    with pytest.raises(DomainError):
        psi(POI, -0.1)


def test_psi_symmetric_binomial_against_closed_form():
    # Derived form for Binomial(2m, 1/2)/m: s log s + (2-s) log(2-s) on [1, 2].
    for s in np.arange(0.0, 2.0001, 0.1):
        s = float(s)
        if s <= 1.0:
            want = 0.0
        elif s < 2.0:
            want = s * math.log(s) + (2.0 - s) * math.log(2.0 - s)
        else:
            want = 2.0 * math.log(2.0)
        assert psi(SYMBIN, s) == pytest.approx(want, abs=1e-6)
    assert math.isinf(psi(SYMBIN, 2.5))


@pytest.mark.parametrize("rate", [PHI_G, PHI_SE, PSI_POI, PSI_SB])
def test_conjugates_convex_midpoint(rate):
    grid = np.linspace(0.0, min(rate.x_sup, 2.0) * 0.95, 9)
    for a, b in zip(grid[:-2], grid[2:]):
        mid = 0.5 * (a + b)
        assert rate.value(mid) <= 0.5 * (rate.value(a) + rate.value(b)) + 1e-9


@pytest.mark.parametrize("rate", [PHI_G, PHI_R, PHI_SE, NU_PG, NU_DG])
def test_rates_nonnegative_nondecreasing(rate):
    assert rate.value(0.0) == 0.0
    prev = 0.0
    for x in np.arange(0.0, 0.95 * min(rate.x_sup, 2.5), 0.1):
        v = rate.value(float(x))
        assert v >= 0.0
        assert v >= prev - 1e-9
        prev = v


def test_nu_deterministic_length_reduces_to_phi():
    assert nu(PSI_DET, PHI_G, 1.2) == pytest.approx(PHI_G.value(1.2), abs=1e-9)
    assert nu(PSI_DET, PHI_G, 1.2) == pytest.approx(0.72, abs=1e-8)


def test_nu_values_against_oracle():
    assert nu(PSI_POI, PHI_G, 0.0) == 0.0
    assert nu(PSI_POI, PHI_G, 1.0) == pytest.approx(0.425225, abs=1e-4)
    assert nu(PSI_POI, PHI_G, 1.0) == pytest.approx(nu_oracle_gauss_poisson(1.0), abs=1e-6)


def test_nu_detail_flags():
    res = nu_detail(PSI_POI, PHI_G, 1.0)
    assert not res.boundary_attained
    assert res.minimizer_y == pytest.approx(1.3279, abs=1e-3)
    # with a bounded energy law and x above its support the rate saturates
    nu_dr = ConvolutionRate(PSI_DET, EnergyConjugate(RAD))
    assert nu_dr.x_sup == 1.0


def test_nu_certificate_upper_bound():
    # every probed y certifies an upper bound; the reported infimum must not
    # exceed any of them
    for x in (0.3, 0.9, 1.7):
        v = NU_PG.value(x)
        for y in np.geomspace(1e-3, 12.0, 40):
            p = PSI_POI.value(float(y))
            u = PHI_G.value(x / float(y))
            bound = math.inf if math.isinf(p) or math.isinf(u) else p + y * u
            assert v <= bound + 1e-9


def test_nu_monotone_and_vanishes_at_zero():
    xs = np.arange(0.0, 2.51, 0.25)
    vals = [NU_PG.value(float(x)) for x in xs]
    for a, b in zip(vals[:-1], vals[1:]):
        assert b >= a - 1e-9
    assert NU_PG.value(1e-4) <= 1e-6


def test_nu_below_phi_and_inverse_ordering():
    for x in np.arange(0.1, 2.01, 0.2):
        assert NU_PG.value(float(x)) <= PHI_G.value(float(x)) + 1e-9
    for q in (0.1, 0.3):
        assert rate_inverse(NU_PG, q) >= rate_inverse(PHI_G, q) - 1e-6


def test_rate_inverse():
    assert rate_inverse(PHI_G, 0.5) == pytest.approx(1.0, abs=1e-8)
    assert rate_inverse(PHI_G, 1e-8) == pytest.approx(math.sqrt(2e-8), abs=1e-7)
    with pytest.raises(OutOfRangeError):
        rate_inverse(PHI_R, math.log(2.0) + 0.1)
    with pytest.raises(PreconditionError):
        rate_inverse(PHI_G, 0.0)


def test_rate_inverse_identity():
    for x in (0.3, 0.7, 1.5):
        q = PHI_G.value(x)
        assert rate_inverse(PHI_G, q) == pytest.approx(x, abs=2e-9)


def test_tail_rate_deterministic_single_term():
    assert tail_rate(DET, PHI_G, 1.0, 10) == pytest.approx(PHI_G.value(1.0), abs=1e-12)
    with pytest.raises(DomainError):
        tail_rate(DET, PHI_G, 0.0, 10)


def test_tail_rate_poisson_converges_to_nu():
    oracle = nu_oracle_gauss_poisson(1.0)
    assert tail_rate(POI, PHI_G, 1.0, 200) == pytest.approx(oracle, abs=0.05)
    errs = [abs(tail_rate(POI, PHI_G, 1.0, m) - oracle) for m in (50, 100, 200, 400)]
    assert all(b < a for a, b in zip(errs[:-1], errs[1:]))


def test_tail_rate_symmetric_binomial_finite_support():
    # bounded support: the rate is finite below 2 and the sum never leaves
    # log space
    v = tail_rate(SYMBIN, PHI_G, 1.0, 12)
    assert math.isfinite(v) and v > 0
