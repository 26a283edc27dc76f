import math

import numpy as np
import pandas as pd
import pytest

from conelet.cartoon_bench import (
    CartoonSpec,
    WaveletSystem,
    make_cartoon,
    n_term_error,
    run_bench,
    slope_fit,
    summarize_slopes,
)
from conelet.errors import InsufficientPointsError, ParameterError
from conelet.filter_design import FilterParams
from conelet.shearlet_transform import adjoint, analyze


@pytest.fixture(scope="module")
def db4_wavelets():
    return WaveletSystem(FilterParams(4, 4), 64)


@pytest.fixture(scope="module")
def cartoon_64():
    return make_cartoon(CartoonSpec(size=64, nu=10.0, rho0=0.8, seed=3)).image


def test_disc_has_no_curvature():
    cartoon = make_cartoon(CartoonSpec(size=32, nu=0.5, rho0=0.5, seed=0, modes=0))
    assert cartoon.metadata["max_curvature"] == 0.0
    assert cartoon.metadata["rho_cos"] == []


@pytest.mark.parametrize("nu", [0.1, 1.0, 10.0, 100.0])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_curvature_budget(nu, seed):
    cartoon = make_cartoon(CartoonSpec(size=16, nu=nu, rho0=0.8, seed=seed))
    theta = np.linspace(0, 2 * np.pi, 20000)
    order = np.arange(1, len(cartoon.metadata["rho_cos"]) + 1)
    angles = np.outer(theta, order)
    second = -(np.cos(angles) * order ** 2) @ cartoon.metadata["rho_cos"] - (
        np.sin(angles) * order ** 2
    ) @ cartoon.metadata["rho_sin"]
    assert np.abs(second).max() <= nu * (1 + 1e-9)
    rho = cartoon.metadata["rho_mean"] + np.cos(angles) @ cartoon.metadata["rho_cos"] + np.sin(angles) @ cartoon.metadata["rho_sin"]
    assert rho.max() <= 0.8 + 1e-12
    assert rho.min() > 0


def test_cartoon_is_deterministic():
    spec = CartoonSpec(size=32, nu=5.0, rho0=0.7, seed=11)
    assert np.array_equal(make_cartoon(spec).image, make_cartoon(spec).image)
    assert not np.array_equal(make_cartoon(spec).image, make_cartoon(spec._replace(seed=12)).image)


def test_cartoon_support():
    image = make_cartoon(CartoonSpec(size=32, nu=5.0, rho0=0.9, seed=4, smooth_amplitude=0.0)).image
    assert image[0, 0] == 0.0
    assert image.max() > 0.5
    assert np.all(image >= 0)


def test_cartoon_rejects_parameters():
    with pytest.raises(ParameterError):
        make_cartoon(CartoonSpec(size=16, nu=0.0, rho0=0.5, seed=0))
    with pytest.raises(ParameterError):
        make_cartoon(CartoonSpec(size=16, nu=1.0, rho0=1.0, seed=0))


def test_wavelet_system_is_orthonormal(db4_wavelets, cartoon_64):
    coeffs = analyze(db4_wavelets, cartoon_64)
    assert coeffs.count == 64 * 64
    assert np.allclose(adjoint(db4_wavelets, coeffs), cartoon_64, atol=1e-10)
    assert np.sum(coeffs.flatten() ** 2) == pytest.approx(np.sum(cartoon_64 ** 2), rel=1e-10)


def test_wavelet_system_layout(db4_wavelets):
    assert len(db4_wavelets) == 1 + 3 * 3
    assert db4_wavelets.index[0] == ("lowpass", 3, 0)
    assert db4_wavelets.shapes[0] == (8, 8)
    with pytest.raises(ParameterError):
        WaveletSystem(FilterParams(4, 4), 48, levels=5)


def test_slope_fit_power_law():
    N = 2.0 ** np.arange(4, 14)
    fit = slope_fit(pd.DataFrame({"N": N, "err": N ** -2.0}))
    assert fit.slope == pytest.approx(-2.0, abs=1e-9)
    assert fit.points == 10


def test_slope_fit_deflated():
    N = 2.0 ** np.arange(4, 14)
    fit = slope_fit(pd.DataFrame({"N": N, "err": np.log(N) ** 3 * N ** -2.0}))
    assert fit.deflated_slope == pytest.approx(0.0, abs=1e-6)


def test_slope_fit_range():
    N = 2.0 ** np.arange(4, 14)
    curve = pd.DataFrame({"N": N, "err": N ** -1.0})
    assert slope_fit(curve, (2 ** 6, 2 ** 9)).points == 4
    with pytest.raises(InsufficientPointsError):
        slope_fit(curve, (2 ** 6, 2 ** 8))


def test_wavelet_error_is_non_increasing(db4_wavelets, cartoon_64):
    curve = n_term_error(db4_wavelets, cartoon_64, [16, 64, 256, 1024, 4096])
    assert list(curve.columns) == ["N", "err", "err_deflated"]
    errors = curve["err"].to_numpy()
    assert np.all(np.diff(errors) <= 1e-12)
    assert errors[-1] <= 1e-10


def test_shearlet_full_reconstruction(system_64, cartoon_64):
    count = analyze(system_64, cartoon_64).count
    curve = n_term_error(system_64, cartoon_64, [64, 1024, count])
    errors = curve["err"].to_numpy()
    assert errors[-1] <= 1e-10
    assert np.all(errors <= errors[0])


def test_n_term_error_rejects_lists(db4_wavelets, cartoon_64):
    with pytest.raises(ParameterError):
        n_term_error(db4_wavelets, cartoon_64, [64, 16])
    with pytest.raises(ParameterError):
        n_term_error(db4_wavelets, cartoon_64, [64 * 64 + 1])


def test_smooth_images_are_sparse(system_128):
    image = make_cartoon(CartoonSpec(size=128, nu=1.0, rho0=0.5, seed=7, jump_amplitude=0.0)).image
    wavelets = WaveletSystem(FilterParams(19, 19), 128)
    for system in (wavelets, system_128):
        budget = int(0.05 * analyze(system, image).count)
        curve = n_term_error(system, image, [budget], tol=1e-10)
        assert curve["err"].iloc[0] <= 1e-6


def test_run_bench_is_deterministic_across_threads():
    settings = dict(
        params=FilterParams(15, 10),
        seeds=[0, 1],
        size=64,
        N_list=(64, 128, 256, 512, 1024),
        N_range=(64, 1024),
    )
    curves_1, slopes_1 = run_bench(threads=1, **settings)
    curves_2, slopes_2 = run_bench(threads=2, **settings)
    pd.testing.assert_frame_equal(curves_1, curves_2)
    pd.testing.assert_frame_equal(slopes_1, slopes_2)
    assert list(curves_1.columns) == ["seed", "system", "N", "err", "err_deflated"]
    assert set(slopes_1["system"]) == {"shearlet", "wavelet"}
    summary = summarize_slopes(slopes_1)
    assert len(summary) == 2


@pytest.mark.slow
def test_shearlets_beat_wavelets_on_cartoons():
    _, slopes = run_bench()
    table = slopes.pivot(index="seed", columns="system")
    assert np.all(np.abs(table[("deflated_slope", "shearlet")]) <= 0.4)
    assert np.all(table[("slope", "shearlet")] <= table[("slope", "wavelet")] - 0.4)
    assert not math.isnan(table[("slope", "shearlet")].mean())
