import json

import numpy as np
import pytest

import fasamp


def test_lsfc_and_noise():
    assert fasamp.lsfc(20.0) == pytest.approx(2.5e-3)
    assert fasamp.calibrate_noise(-10.0, 1e-4, 200) == pytest.approx(5e-6)
    with pytest.raises(ValueError):
        fasamp.lsfc(0.0)


def test_steering_vector_is_unit_norm():
    v = fasamp.steering_vector(60.0, 16)
    assert v.shape == (16,)
    assert np.linalg.norm(v) == pytest.approx(1.0)


def test_denoise_limits():
    off = fasamp.denoise(0.3 + 0.1j, 0.2, 0.0, 0.0, 1.0)
    assert off["pi"] == 0.0
    on = fasamp.denoise(0.7 - 0.4j, 0.3, 1.0, 0.0, 1.7)
    assert on["x_tilde"] == pytest.approx((0.7 - 0.4j) * 1.7 / 2.0)


def test_run_recovers_noiseless_user():
    A = fasamp.generate_pilots(60, 80, 13)
    rng = np.random.default_rng(4)
    X = np.zeros((80, 8), dtype=complex)
    X[21] = (rng.standard_normal(8) + 1j * rng.standard_normal(8)) / np.sqrt(2)
    out = fasamp.run(A @ X, A, 1e-10)
    err = np.linalg.norm(out["x_hat"][21] - X[21]) ** 2 / np.linalg.norm(X[21]) ** 2
    assert err < 1e-6
    assert int(np.argmax(out["lambda"])) == 21


def test_geographic_variant_stays_in_bounds():
    cfg = {"scene": {"K": 60, "K_a": 4, "G": 40, "N_o": 4, "snr_db": -5, "seed": 3}}
    scene = fasamp.sample_scene(json.dumps(cfg))
    A = fasamp.generate_pilots(40, 60, 5)
    Y = fasamp.synthesize_received(A, scene["X"], scene["psi"], 6)
    out = fasamp.run(Y, A, scene["psi"], variant="geographic", geo_bounds=(1e-4, 2.5e-3), T_max=20)
    assert np.all(out["phi_x"] >= 1e-4)
    assert np.all(out["phi_x"] <= 2.5e-3)


def test_somp_orthogonal():
    C = np.eye(10, dtype=complex)
    H = np.zeros((10, 2), dtype=complex)
    H[[2, 7]] = 1.0 + 0.5j
    support, est = fasamp.somp(C @ H, C, 2)
    assert sorted(support) == [2, 7]
    assert fasamp.ade([2, 7], sorted(support), 2) == 0.0


def test_sweep_csv_and_config_errors():
    cfg = {
        "scene": {"K": 40, "K_a": 3, "G": 24, "N_o": 4, "L_s": 2, "seed": 1},
        "solver": {"T_max": 5},
        "experiment": {"trials": 2, "algorithms": ["proposed_geo", "somp_ls"], "record_wall_time": False},
    }
    csv = fasamp.run_sweep(json.dumps(cfg))
    lines = csv.strip().splitlines()
    assert lines[0].startswith("axis_value,algorithm,ade_mean")
    assert len(lines) == 3
    with pytest.raises(ValueError):
        fasamp.run_sweep(json.dumps({"scene": {"snr_dB": 0}}))
