import json

import numpy as np
import pytest

import tvparcor


@pytest.fixture(scope="module")
def series():
    return tvparcor.TimeSeries(tvparcor.simulate("bivar-tvvar2", t_len=300, seed=5))


def test_simulate_is_deterministic():
    a = tvparcor.simulate(t_len=50, seed=3)
    b = tvparcor.simulate(t_len=50, seed=3)
    assert a.shape == (50, 2)
    np.testing.assert_array_equal(a, b)


def test_select_and_spectra(series):
    fit, report = tvparcor.select(series, 3, tvparcor.make_grid(0.99, 1.0, 0.005), n_samples=20, seed=1)
    report = json.loads(report)
    assert fit.order == report["chosen_order"]
    assert len(report["entries"]) == 3
    sp = tvparcor.spectra(fit, n_freqs=16)
    assert sp["log_g11"].shape == (len(sp["times"]), 16)
    assert np.all((sp["rho2_12"] >= 0) & (sp["rho2_12"] <= 1))
    np.testing.assert_allclose(sp["rho2_12"], sp["gamma2_12"], atol=1e-10)


def test_forecast_bands_are_nested(series):
    fit = tvparcor.fit(series, 2, delta_f=0.99, delta_b=0.99)
    point, bands = tvparcor.forecast(fit, series, horizon=4, n_samples=200, seed=2)
    assert point.shape == (4, 2)
    assert len(bands) == 3
    assert np.all(bands[0] <= bands[1]) and np.all(bands[1] <= bands[2])


def test_ase_against_the_generating_model(series):
    fit = tvparcor.fit(series, 2, delta_f=0.99, delta_b=0.99)
    err = tvparcor.ase(fit, "bivar-tvvar2", t_len=300)
    assert set(err) == {"log_g11", "log_g22", "rho2_12"}
    assert all(v >= 0 for v in err.values())


def test_errors_surface_as_exceptions():
    with pytest.raises(tvparcor.TvparcorError, match="ParseError"):
        tvparcor.parse_series("1,2\n3,x\n")
    with pytest.raises(tvparcor.TvparcorError, match="RangeExhausted"):
        tvparcor.fit(tvparcor.TimeSeries(np.zeros((5, 2)) + np.arange(10).reshape(5, 2)), 1)
