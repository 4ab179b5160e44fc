import math

import numpy as np
import pytest
from scipy.integrate import quad

from driftnet.fields import (EnvironmentProfile, Family, FieldDomainError,
                             ScaledField, constant_profile)


def recip_profile(window=((0.5, 5.0), (-0.2, 0.2))):
    (x1lo, x1hi), (x2lo, x2hi) = window
    return EnvironmentProfile(Family.RECIPROCAL_LINEAR, {},
                              lower_bound=1.0 / (x1hi + x2hi),
                              upper_bound=1.0 / (x1lo + x2lo),
                              lipschitz=1.0 / (x1lo + x2lo) ** 2,
                              window=window)


def expdecay_profile(window=((0.0, 3.0), (-0.5, 0.5))):
    (x1lo, x1hi), (x2lo, x2hi) = window
    hi = math.exp(-x1lo - x2lo)
    return EnvironmentProfile(Family.EXPONENTIAL_DECAY, {},
                              lower_bound=math.exp(-x1hi - x2hi),
                              upper_bound=hi, lipschitz=hi, window=window)


def test_constant_eval():
    f = ScaledField(constant_profile(1.0), ell=10.0)
    assert f.eval(3, -7.2) == 1.0


def test_reciprocal_eval_at_anchor():
    f = ScaledField(recip_profile(), ell=10.0, anchor=(1.0, 0.0))
    assert f.eval(0, 0.0) == pytest.approx(1.0)


def test_expdecay_eval():
    prof = expdecay_profile()
    f = ScaledField(prof, ell=4.0, anchor=(0.0, 0.0))
    assert f.eval(16, 0.0) == pytest.approx(math.exp(-1.0))  # i = ell^2


def test_vertical_mass_constant_and_empty():
    f = ScaledField(constant_profile(2.0), ell=1.0)
    assert f.vertical_mass(0, 0.0, 3.0) == pytest.approx(6.0)
    assert f.vertical_mass(5, 1.2, 1.2) == 0.0


def test_vertical_mass_expdecay_closed_form():
    f = ScaledField(expdecay_profile(), ell=1.0)
    assert f.vertical_mass(0, 0.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)


@pytest.mark.parametrize("make", [recip_profile, expdecay_profile])
def test_integral_matches_quadrature(make):
    prof = make()
    x1 = 1.0
    a, b = -0.1, 0.15
    ref, _ = quad(lambda s: prof.value(x1, s), a, b, epsrel=1e-12)
    assert prof.integral_x2(x1, a, b) == pytest.approx(ref, rel=1e-9)


def test_affine_clamped_integral_matches_quadrature():
    prof = EnvironmentProfile(
        Family.AFFINE_CLAMPED,
        {"a0": 1.0, "ax": 0.0, "ay": 3.0, "clamp_lo": 0.5, "clamp_hi": 1.8},
        lower_bound=0.5, upper_bound=1.8, lipschitz=3.0,
        window=((0.0, 1.0), (-1.0, 1.0)))
    ref, _ = quad(lambda s: prof.value(0.0, s), -0.9, 0.9, epsrel=1e-12, limit=200)
    assert prof.integral_x2(0.0, -0.9, 0.9) == pytest.approx(ref, rel=1e-9)


def test_tabulated_integral_exact():
    prof = EnvironmentProfile(
        Family.TABULATED,
        {"knots_x2": [-1.0, 0.0, 1.0], "values": [1.0, 2.0, 0.5]},
        lower_bound=0.5, upper_bound=2.0, lipschitz=1.5,
        window=((0.0, 1.0), (-1.0, 1.0)))
    # trapezoid on the knot partition is exact for piecewise-linear data
    assert prof.integral_x2(0.0, -1.0, 1.0) == pytest.approx(1.5 + 1.25)
    assert prof.integral_x2(0.0, -0.5, 0.5) == pytest.approx(0.5 * (1.5 + 2) / 2 + 0.5 * (2 + 1.25) / 2)


def test_mass_additivity_and_sandwich():
    f = ScaledField(expdecay_profile(), ell=2.0)
    a, b, c = -0.5, 0.3, 1.4
    whole = f.vertical_mass(1, a, c)
    assert whole == pytest.approx(f.vertical_mass(1, a, b) + f.vertical_mass(1, b, c), rel=1e-12)
    prof = f.profile
    assert (c - a) * prof.lower_bound <= whole <= (c - a) * prof.upper_bound


def test_mass_inverse_roundtrip():
    f = ScaledField(recip_profile(), ell=3.0, anchor=(1.0, 0.0))
    for mass in (0.3, 1.7, 4.0):
        g = f.mass_inverse(2, 0.5, mass, +1)
        assert f.vertical_mass(2, 0.5, 0.5 + g) == pytest.approx(mass, abs=1e-9)
        g = f.mass_inverse(2, 0.5, mass, -1)
        assert f.vertical_mass(2, 0.5 - g, 0.5) == pytest.approx(mass, abs=1e-9)


def test_reciprocal_rejects_bad_window():
    with pytest.raises(FieldDomainError):
        EnvironmentProfile(Family.RECIPROCAL_LINEAR, {}, lower_bound=0.1,
                           upper_bound=10.0, window=((-1.0, 1.0), (0.0, 1.0)))


def test_bounds_violation_detected():
    with pytest.raises(FieldDomainError):
        EnvironmentProfile(Family.CONSTANT, {"c": 5.0}, lower_bound=0.0,
                           upper_bound=1.0)


def test_lipschitz_violation_detected():
    with pytest.raises(FieldDomainError):
        EnvironmentProfile(
            Family.TABULATED,
            {"knots_x2": [-1.0, 1.0], "values": [0.0, 2.0]},
            lower_bound=0.0, upper_bound=2.0, lipschitz=0.1,
            window=((0.0, 1.0), (-1.0, 1.0)))


def test_scaled_field_is_plain_profile_at_matching_scale():
    prof = expdecay_profile()
    f = ScaledField(prof, ell=1.0)
    assert f.eval(0.5, 0.25) == pytest.approx(prof.value(0.5, 0.25))
