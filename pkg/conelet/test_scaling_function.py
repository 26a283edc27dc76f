import numpy as np
import pytest

from conelet.errors import HypothesisError, ParameterError
from conelet.filter_design import FilterParams, eval_m1_sq, lower_product
from conelet.frame_certification import linf_bound
from conelet.scaling_function import (
    cascade_phi,
    cascade_table,
    envelope_table,
    make_profile,
    phi_hat,
    phi_hat_sq,
    phi_lower_bound,
    phi_upper_envelope,
    psi_hat_sq,
    psi_upper_envelope,
    riesz_band,
)


@pytest.fixture(scope="module")
def profile_39_18():
    return make_profile(FilterParams(39, 18))


@pytest.fixture(scope="module")
def profile_39_27():
    return make_profile(FilterParams(39, 18, 27))


def test_phi_hat_sq_at_zero(profile_39_18):
    assert phi_hat_sq(profile_39_18, 0.0) == 1.0


def test_phi_hat_sq_haar_closed_form():
    # prod_{j>=0} cos^2(pi 2^-j xi) = (sin(2 pi xi) / (2 pi xi))^2
    value = phi_hat_sq(make_profile(FilterParams(1, 1)), 0.3)
    expected = (np.sin(2 * np.pi * 0.3) / (2 * np.pi * 0.3)) ** 2
    assert value == pytest.approx(expected, abs=1e-9)


def test_phi_hat_sq_truncation_converged(profile_39_18):
    xi = np.linspace(-2 ** 10, 2 ** 10, 4001)
    deeper = make_profile(FilterParams(39, 18), J_trunc=50)
    assert np.allclose(phi_hat_sq(profile_39_18, xi), phi_hat_sq(deeper, xi), rtol=1e-12, atol=0)


def test_phi_hat_sq_is_even_and_bounded(profile_39_18):
    xi = np.linspace(0, 50, 1001)
    values = phi_hat_sq(profile_39_18, xi)
    assert np.array_equal(values, phi_hat_sq(profile_39_18, -xi))
    assert np.all(values <= 1.0)


def test_phi_hat_sq_far_out_is_small(profile_39_18):
    assert phi_hat_sq(profile_39_18, 2.0 ** 20 + 0.3) < 1e-100


def test_make_profile_rejects_depth():
    with pytest.raises(ParameterError):
        make_profile(FilterParams(2, 2), J_trunc=0)


def test_phi_lower_bound_below_product(profile_39_18):
    J0 = 12
    bound = phi_lower_bound(FilterParams(39, 18), J0)
    assert 0 < bound <= 1
    xi = np.linspace(-1 / 6, 1 / 6, 1000)
    assert np.all(phi_hat_sq(profile_39_18, xi) >= bound)


def test_phi_lower_bound_monotone_and_converged():
    params = FilterParams(39, 18)
    bounds = [phi_lower_bound(params, J0) for J0 in range(2, 41)]
    assert all(b >= a * (1 - 1e-15) for a, b in zip(bounds, bounds[1:]))
    assert abs(bounds[-1] - phi_lower_bound(params, 45)) <= 1e-6 * bounds[-1]


def test_phi_lower_bound_haar():
    C1 = 1 - np.cos(np.pi / 6) ** 2
    expected = np.prod(np.cos(np.pi * 2.0 ** -np.arange(30) / 6) ** 2) * np.exp(-(2.0 ** -28) * C1)
    assert phi_lower_bound(FilterParams(1, 1), 30) == pytest.approx(expected, rel=1e-12)


def test_phi_lower_bound_hypotheses():
    with pytest.raises(HypothesisError) as excinfo:
        phi_lower_bound(FilterParams(39, 6), 20)
    assert "(L-1)/(K+L-2) >= 1/4" in str(excinfo.value)

    with pytest.raises(HypothesisError):
        phi_lower_bound(FilterParams(39, 18), 0)


def test_lower_product_matches_bound():
    params = FilterParams(27, 18)
    assert phi_lower_bound(params, 20) == lower_product(make_profile(params).poly, 20)


def test_upper_envelope_saturates(envelope_39_27):
    assert phi_upper_envelope(FilterParams(39, 18, 27), envelope_39_27, 0.0) == 1.0


def test_upper_envelope_dominates(profile_39_27, envelope_39_27):
    xi = np.logspace(-2, 3, 2000)
    upper = phi_upper_envelope(FilterParams(39, 18, 27), envelope_39_27, xi)
    assert np.all(phi_hat_sq(profile_39_27, xi) <= upper)


def test_upper_envelope_decay_rate(envelope_39_27):
    params = FilterParams(39, 18, 27)
    xi = np.array([10.0, 40.0, 300.0])
    ratio = phi_upper_envelope(params, envelope_39_27, 2 * xi) / phi_upper_envelope(params, envelope_39_27, xi)
    assert np.allclose(ratio, 2.0 ** (-2 * envelope_39_27.gamma), rtol=1e-10)


def test_upper_envelope_rejects_mismatch(envelope_39_27):
    with pytest.raises(ParameterError):
        phi_upper_envelope(FilterParams(39, 18, 15), envelope_39_27, 1.0)
    with pytest.raises(HypothesisError):
        phi_upper_envelope(FilterParams(3, 18, 0), envelope_39_27, 1.0)


def test_phi_hat_modulus_matches_product(db4):
    profile = make_profile(FilterParams(4, 4))
    xi = np.linspace(-20, 20, 801)
    assert np.allclose(np.abs(phi_hat(db4, xi)) ** 2, phi_hat_sq(profile, xi), atol=1e-12)
    assert phi_hat(db4, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_cascade_haar_is_box(haar):
    samples = cascade_phi(haar, 4)
    assert samples.x[-1] == 1.0
    assert np.array_equal(samples.values, np.r_[np.ones(16), 0.0])


def test_cascade_db2_support_and_integral(db2):
    samples = cascade_phi(db2, 10)
    assert samples.x[0] == 0.0
    assert samples.x[-1] == 3.0
    assert abs(samples.values[0]) < 1e-12
    assert abs(samples.values[-1]) < 1e-12
    assert samples.values.sum() * 2.0 ** -10 == pytest.approx(1.0, abs=1e-8)


def test_cascade_matches_frequency_product(db4):
    # refinement with sum h = 1 produces the function whose spectrum is phi^(xi/2)
    levels = 8
    samples = cascade_phi(db4, levels)
    xi = np.linspace(-2, 2, 41)
    spectrum = np.exp(-2j * np.pi * np.outer(xi, samples.x)) @ samples.values * 2.0 ** -levels
    assert np.max(np.abs(spectrum - phi_hat(db4, xi / 2))) < 1e-6


def test_cascade_rejects_levels(db2):
    with pytest.raises(ParameterError):
        cascade_phi(db2, 0)


def test_riesz_band_is_positive():
    low, high = riesz_band(make_profile(FilterParams(4, 4)))
    assert 0 < low <= high


def test_tables(db2, profile_39_27, envelope_39_27):
    table = cascade_table(db2, 3)
    assert list(table.columns) == ["x", "phi"]
    assert len(table) == 3 * 8 + 1

    xi = np.array([0.0, 0.1, 1.0, 10.0])
    table = envelope_table(profile_39_27, envelope_39_27, xi)
    assert list(table.columns) == ["xi", "phi_hat_sq", "lower", "upper"]
    assert table["lower"].iloc[2] == 0.0
    assert table["lower"].iloc[1] <= table["phi_hat_sq"].iloc[1] <= table["upper"].iloc[1]


def test_phi_hat_sq_never_exceeds_one(profile_39_18):
    # the factors round above 1 near the origin before clipping
    xi = np.linspace(0.0, 0.06, 20001)
    assert phi_hat_sq(profile_39_18, xi).max() <= 1.0


def test_psi_hat_sq_factors(profile_39_18):
    value = psi_hat_sq(profile_39_18, 0.2, 0.05)
    expected = (
        eval_m1_sq(profile_39_18.poly, 0.8) * phi_hat_sq(profile_39_18, 0.2) * phi_hat_sq(profile_39_18, 0.1)
    )
    assert value == pytest.approx(expected, rel=1e-14)
    assert psi_hat_sq(profile_39_18, 0.0, 0.3) < 1e-30
    assert psi_hat_sq(profile_39_18, np.array([0.2, -0.2]), 0.05)[1] == pytest.approx(value, rel=1e-14)


def test_psi_envelope_dominates(profile_39_27, envelope_39_27):
    half = np.unique(np.r_[np.geomspace(1e-4, 1e3, 128), np.linspace(0.0, 4.0, 128)])
    axis = np.r_[-half[::-1], half]
    xi1, xi2 = np.meshgrid(axis, axis, indexing="ij")
    modulus = np.sqrt(psi_hat_sq(profile_39_27, xi1, xi2))
    upper = psi_upper_envelope(envelope_39_27, xi1, xi2)
    assert modulus.shape == (axis.size, axis.size)
    assert np.count_nonzero(modulus > upper * (1 + 1e-12) + 1e-12) == 0


def test_psi_upper_envelope_saturates(envelope_39_27):
    assert psi_upper_envelope(envelope_39_27, 0.0, 0.3) == 0.0
    xi1 = 1 / envelope_39_27.q
    assert psi_upper_envelope(envelope_39_27, xi1, 0.0) == pytest.approx(1.0, rel=1e-12)


def test_psi_hat_sq_above_lower_bound_on_omega(profile_39_18, envelope_39_27):
    side = np.linspace(1 / 12, 1 / 6, 128)
    xi1, xi2 = np.meshgrid(np.r_[-side[::-1], side], np.linspace(-1 / 12, 1 / 12, 257), indexing="ij")
    linf = linf_bound(FilterParams(39, 18), envelope_39_27.J0)
    assert np.count_nonzero(psi_hat_sq(profile_39_18, xi1, xi2) < linf - 1e-12) == 0
