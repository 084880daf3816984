import json

import numpy as np
import pytest

import sdmc


def small_sanity(**overrides):
    config = sdmc.preset("sanity", trajectories=128)
    config["grid"] = {"t_end": 0.2, "dt": 0.001, "record_stride": 100}
    config.update(overrides)
    return config


def test_presets_listed():
    names = sdmc.preset_names()
    for expected in ["fig1", "fig1-mini", "fig3", "fig3-mini", "sanity", "ising-z"]:
        assert expected in names
    with pytest.raises(sdmc.ConfigError):
        sdmc.preset("nope")


def test_compare_run_and_series():
    result = sdmc.run(small_sanity())
    assert result.passed is True
    assert result.trajectories_used == 128
    series = result.series("stochastic")
    mean, se_re, se_im = series["one_body"][0]
    assert mean.shape == (3, 2, 2)
    assert mean.dtype == np.complex128
    assert np.all(se_re >= 0) and np.all(se_im >= 0)
    trace = np.trace(mean, axis1=1, axis2=2)
    trace_se = np.hypot(np.sqrt((se_re[:, 0, 0] ** 2 + se_re[:, 1, 1] ** 2)), np.sqrt(se_im[:, 0, 0] ** 2 + se_im[:, 1, 1] ** 2))
    assert trace[0] == 1.0
    assert np.all(np.abs(trace - 1.0) <= 5 * trace_se + 1e-12)
    full = series["full"][0]
    assert full.shape == (3, 8, 8)
    oracle = result.series("oracle")
    assert np.all(oracle["one_body"][0][1] == 0)
    assert result.series("analytic") is None


def test_tables_and_manifest(tmp_path):
    result = sdmc.run(small_sanity())
    table = result.table("stochastic")
    assert table["rows"].shape == (3, len(table["columns"]))
    assert table["columns"][:3] == ["rho_0[0,0].re", "rho_0[0,0].im", "rho_0[0,0].se"]
    written = result.emit(tmp_path)
    assert (tmp_path / "manifest.json").exists()
    assert len(written) == 4
    manifest = sdmc.manifest(result)
    assert manifest["trajectories_used"] == 128
    rerun = sdmc.run(manifest["config"])
    np.testing.assert_array_equal(rerun.table("stochastic")["rows"], table["rows"])


def test_deterministic_across_workers():
    a = sdmc.run(small_sanity(mode="stochastic", workers=1)).table("stochastic")["rows"]
    b = sdmc.run(small_sanity(mode="stochastic", workers=3)).table("stochastic")["rows"]
    np.testing.assert_array_equal(a, b)


def test_analytic_mode():
    config = sdmc.preset("ising-z", mode="analytic")
    result = sdmc.run(config)
    mean = result.series("analytic")["one_body"][0][0]
    rho = np.array([[0.9, 0.05 + 0.02j], [0.05 - 0.02j, 0.1]])
    times = result.series("analytic")["times"]
    np.testing.assert_allclose(mean[:, 0, 1], rho[0, 1] * np.cos(2 * times), atol=1e-12)


def test_config_file(tmp_path):
    config = small_sanity()
    model = config.pop("model")
    (tmp_path / "model.json").write_text(json.dumps(model))
    config["model"] = "model.json"
    path = tmp_path / "run.json"
    path.write_text(json.dumps(config))
    assert sdmc.load_config(path)["model"]["hbar"] == 1.0
    assert sdmc.run(str(path)).passed is True


def test_invalid_config():
    with pytest.raises(sdmc.ConfigError):
        sdmc.run(small_sanity(trajectories=0))
    with pytest.raises(ValueError):
        sdmc.run("{\"grid\": 1}")


def test_linalg_helpers():
    a = np.array([[1, 0], [0, 0]], dtype=complex)
    b = np.full((2, 2), 0.5, dtype=complex)
    rho = np.kron(a, b)
    np.testing.assert_allclose(sdmc.partial_trace(rho, [2, 2], [1]), b)
    np.testing.assert_allclose(sdmc.partial_trace(rho, [2, 2], [0]), a)
    z = np.diag([1.0, -1.0]).astype(complex)
    np.testing.assert_allclose(sdmc.matrix_exp(-1j * 0.3 * z), np.diag(np.exp([-0.3j, 0.3j])), atol=1e-14)
