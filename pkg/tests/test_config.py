import json
import math

import pytest
from pydantic import ValidationError

from ergolab.config import (
    PRESETS,
    THETA_S_REFERENCE,
    QubitParams,
    RunConfig,
    load_run_config,
    preset,
)
from ergolab.control import default_kappa
from ergolab.errors import ConfigError


def test_presets():
    sweet = PRESETS["sweet-spot"]
    assert sweet.omega_q == pytest.approx(2 * math.pi * 5.450e9)
    assert (sweet.T1, sweet.T2) == (25.7e-6, 32.7e-6)
    working = PRESETS["working-point"]
    assert working.omega_q == pytest.approx(2 * math.pi * 5.336e9)
    assert (working.T1, working.T2) == (64.5e-6, 2.2e-6)
    decoupled = PRESETS["decoupled"]
    assert decoupled.T2 == pytest.approx(2 * decoupled.T1)
    assert decoupled.gamma_phi == pytest.approx(0.0, abs=1e-6)


def test_unknown_preset():
    with pytest.raises(ConfigError):
        preset("flux-noise")
    with pytest.raises(ValidationError):
        RunConfig(device="flux-noise")


def test_t2_bound():
    with pytest.raises(ValidationError, match=r"T2 <= 2\*T1"):
        QubitParams(omega_q=1e10, T1=10e-6, T2=25e-6)
    assert QubitParams(omega_q=1e10, T1=10e-6, T2=20e-6).gamma_phi == pytest.approx(0.0, abs=1e-9)


def test_params_are_frozen():
    with pytest.raises(ValidationError):
        PRESETS["working-point"].T1 = 1.0


def test_reference_angle():
    assert math.cos(THETA_S_REFERENCE / 2) ** 2 == pytest.approx(1 / 3)
    assert THETA_S_REFERENCE / math.pi == pytest.approx(0.6082, abs=1e-4)


@pytest.mark.parametrize(
    "text, expected",
    [("fig2", THETA_S_REFERENCE), ("reference", THETA_S_REFERENCE), ("0.75pi", 0.75 * math.pi), ("pi", math.pi), ("0.5*pi", math.pi / 2), ("1.2", 1.2)],
)
def test_theta_parsing(text, expected):
    assert RunConfig(theta_s=text).theta_s == pytest.approx(expected)


def test_theta_out_of_range():
    with pytest.raises(ValidationError):
        RunConfig(theta_s="1.5pi")
    with pytest.raises(ValidationError):
        RunConfig(theta_s=-0.1)


def test_kappa():
    assert RunConfig().resolved_kappa() == pytest.approx(default_kappa(PRESETS["working-point"]))
    assert RunConfig(kappa=0.25).resolved_kappa() == 0.25
    for bad in (0.0, -1.0):
        with pytest.raises(ValidationError):
            RunConfig(kappa=bad)


def test_default_kappa_value():
    # 1 / (omega_q * 80 ns) at the working point
    assert default_kappa(PRESETS["working-point"]) == pytest.approx(3.728e-4, rel=1e-3)


def test_unknown_keys_rejected():
    with pytest.raises(ValidationError):
        RunConfig(temperature=0.1)


def test_config_values_validated():
    with pytest.raises(ValidationError):
        RunConfig(repetitions=1)
    with pytest.raises(ValidationError):
        RunConfig(hold_times=[1e-6, -1e-6])
    with pytest.raises(ValidationError):
        RunConfig(mode="quantum")


def test_custom_device_params():
    cfg = RunConfig(device={"omega_q": 1e10, "T1": 10e-6, "T2": 5e-6})
    assert cfg.qubit_params().T2 == 5e-6


def test_load_precedence(tmp_path, monkeypatch):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"seed": 5, "shots": 300, "device": "sweet-spot"}), encoding="utf-8")
    monkeypatch.delenv("ERGOLAB_SEED", raising=False)
    assert load_run_config(str(path)).seed == 5
    monkeypatch.setenv("ERGOLAB_SEED", "7")
    cfg = load_run_config(str(path), {"shots": None})
    assert (cfg.seed, cfg.shots, cfg.device) == (7, 300, "sweet-spot")
    assert load_run_config(str(path), {"seed": 9}).seed == 9


def test_bad_seed_env(monkeypatch):
    monkeypatch.setenv("ERGOLAB_SEED", "abc")
    with pytest.raises(ConfigError):
        load_run_config()


def test_jobs_from_env(monkeypatch):
    monkeypatch.setenv("ERGOLAB_JOBS", "3")
    assert RunConfig().jobs == 3
    monkeypatch.delenv("ERGOLAB_JOBS")
    assert RunConfig().jobs == 1


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_run_config(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(str(bad))
    listed = tmp_path / "list.json"
    listed.write_text("[1, 2]", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_run_config(str(listed))


def test_gate_device_defaults_to_sweet_spot():
    assert RunConfig().gate_params() == PRESETS["sweet-spot"]
    assert RunConfig(gate_device="working-point").gate_params() == PRESETS["working-point"]
    with pytest.raises(ValidationError):
        RunConfig(gate_device="flux-noise")
