import math

import numpy as np
import pytest

import fluctuon as fl


def test_model_case_coefficients():
    c = fl.model_case(2)
    assert c.phi(1.5) == pytest.approx(1.5**2)
    assert c.dphi(1.5) == pytest.approx(3.0)
    assert c.sigma(4.0) == pytest.approx(4.0)
    assert fl.model_case(1).sigma(4.0) == pytest.approx(2.0)
    assert c.exponents.m == pytest.approx(2.0)


def test_validate_assumptions_passes_for_model_case():
    report = fl.validate_assumptions(fl.model_case(2), samples=100)
    assert report["all_pass"]
    assert all(ch["status"] != "fail" for ch in report["checks"])


def test_structure_sums_closed_form():
    for cutoff in range(0, 5):
        s = fl.structure_sums(1, cutoff, 64)
        assert np.allclose(s["f1"], 2 * cutoff + 1)
        if cutoff:
            assert s["f3_sup"] == pytest.approx(fl.f3_closed_form_1d(cutoff), rel=1e-12)
        assert s["f2_sup"] < 1e-12


def test_resolution_too_small():
    with pytest.raises(fl.ResolutionTooSmall):
        fl.structure_sums(1, 8, 16)


def test_zero_noise_path_is_constant():
    out = fl.simulate_path(fl.model_case(2), resolution=32, horizon=0.01, epsilon=0.0, rho0=1.3)
    snaps = out["snapshots"]
    assert snaps.shape == (2, 32)
    assert np.all(snaps == 1.3)
    assert not out["rejected"]


def test_noisy_path_conserves_mass():
    out = fl.simulate_path(fl.model_case(2), resolution=64, horizon=0.01, epsilon=1e-3, cutoff=3, seed=7)
    assert out["max_rel_mass_drift"] < 1e-12
    assert out["snapshots"].mean(axis=1) == pytest.approx([1.0, 1.0], rel=1e-12)


def test_dft_and_negative_sobolev_norm():
    x = np.arange(64) / 64
    g = np.cos(2 * np.pi * x)
    coeffs = fl.dft(g)
    assert coeffs[1] == pytest.approx(0.5)
    assert coeffs[-1] == pytest.approx(0.5)
    expected = math.sqrt(2 * 0.25 / (1 + 4 * math.pi**2))
    assert fl.h_neg_norm(g, 1.0) == pytest.approx(expected, rel=1e-12)


def test_schedule_and_errors():
    rows = fl.make_schedule([1e-2, 1e-3, 1e-4], 0.125)
    assert [r["M"] for r in rows] == [1, 2, 3]
    with pytest.raises(fl.RegimeViolation):
        fl.make_schedule([1e-2, 1e-3], 0.2)
    with pytest.raises(fl.InvalidArgument):
        fl.make_schedule([1e-2], -1.0)


def test_config_parse_and_validate_run(tmp_path):
    cfg = fl.parse_config("[run]\ncommand = validate\n", [f"run.output={tmp_path}", "validate.samples=100"])
    assert cfg.command == "validate"
    assert len(cfg.hash()) == 16
    result = fl.run(cfg)
    assert result["exit_code"] == 0
    assert any(f.endswith(".json") for f in result["files"])
    with pytest.raises(fl.ConfigError):
        fl.parse_config("", ["norm.beta=0.2"])
