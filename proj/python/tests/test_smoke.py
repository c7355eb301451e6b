import math

import numpy as np
import pytest

import jmgt


def small_spec(tmp_path, **extra):
    sections = {
        "physics": {"k": 1},
        "grid": {"dim": 2, "points": 16, "box_length": 8},
        "time": {"dt": 0.01, "t_end": 0.3},
        "experiment": {"profile": "random", "amplitude": 0.01, "seed": 3},
        "output": {"directory": str(tmp_path), "formats": "csv,checkpoint"},
    }
    for key, body in extra.items():
        sections.setdefault(key, {}).update(body)
    return jmgt.config_from_dict(sections)


def test_params_and_rejection():
    p = jmgt.make_params(0.5, 1.0, 0.1, 0.0, 0.1, 0.5)
    assert p.b == pytest.approx(0.6)
    assert p.c_g2 == pytest.approx(0.95)
    with pytest.raises(ValueError):
        jmgt.make_params(0.5, 1.0, -0.1, 0.0, 0.1, 0.5)


def test_config_errors_map_to_value_error():
    with pytest.raises(jmgt.ConfigError):
        jmgt.parse_config("[physics]\nno_such_key = 1\n")


def test_laplacian_matches_numpy():
    n, L = 32, 2 * math.pi
    x = np.arange(n) * L / n
    X, Y = np.meshgrid(x, x, indexing="ij")
    f = np.sin(X) * np.cos(2 * Y)
    assert np.max(np.abs(jmgt.laplacian(f, L) + 5 * f)) < 1e-11


def test_radial_integral_limit():
    t = 1e6
    assert jmgt.radial_integral(3, t) * t**1.5 == pytest.approx(0.5 * math.gamma(1.5), rel=1e-6)


def test_mode_rate_positive():
    p = jmgt.make_params(0.5, 1.0, 0.1, 0.0, 0.1, 0.5)
    lam = jmgt.mode_spectral_rate(1.0, p)
    assert lam > 0
    assert jmgt.measure_mode_rate(1.0, p) == pytest.approx(lam, rel=0.05)


def test_simulate_and_checkpoint(tmp_path):
    spec = small_spec(tmp_path)
    rec = jmgt.simulate(spec)
    assert not rec["blew_up"]
    assert rec["t"][-1] == pytest.approx(0.3)
    assert np.all(rec["E1"] > 0)
    assert rec["psi"].shape == (16, 16)

    code, message, outputs = jmgt.run_command("simulate", spec)
    assert code == 0, message
    ck = jmgt.read_checkpoint(str(tmp_path / "final.jmgt1"))
    assert ck["steps"] == 30
    np.testing.assert_array_equal(ck["psi"], rec["psi"])


def test_bad_config_exit_code(tmp_path):
    spec = small_spec(tmp_path, scan={"amp_min": 1e-3, "amp_max": 1e-3})
    code, _, _ = jmgt.run_command("no-such-command", spec)
    assert code == 3


def test_symbol_decay_slopes():
    spec = jmgt.config_from_dict({"symbol": {"nodes": 512, "t_end": 400, "fit_lo": 50, "fit_hi": 400}})
    out = jmgt.symbol_decay(spec)
    assert out["slopes"]["U"] == pytest.approx(-0.75, abs=0.05)
    assert out["U"][-1] < 0.1 * out["U"][0]
