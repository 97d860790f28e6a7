# © spinsemi developers
#
# License: BSD (3-clause)

"""Tests for the configuration interface."""

import pytest

import spinsemi.config
from spinsemi import IntegratorConfig, get_config, set_config


def test_get_set_del_config():
    """Test setting, getting and deleting a setting."""
    assert get_config("rel_tol") == 1e-12
    assert get_config("ode_method") == "RK45"
    set_config(rel_tol=1e-9)
    assert get_config("rel_tol") == 1e-9
    assert get_config("ode_method") == "RK45"
    set_config(rel_tol=None)
    assert get_config("rel_tol") == 1e-12
    assert get_config("ode_method") == "RK45"


def test_set_invalid_config():
    """Test trying to set an invalid configuration key."""
    with pytest.raises(ValueError, match="Trying to set invalid config key:"):
        set_config(invalid_key="some_value")


def test_get_invalid_config():
    """Test trying to get an invalid configuration key."""
    with pytest.raises(ValueError, match="Trying to get invalid config key:"):
        get_config("invalid_key")


def test_get_all_config():
    """Test trying to get all configuration values as a dict."""
    all_config = get_config()
    assert isinstance(all_config, dict)
    assert {"rel_tol", "abs_tol", "max_steps", "ode_method", "n_jobs"} <= set(all_config)


def test_invalid_key_in_user_config_file():
    """Test writing an invalid key to the user config file."""
    with open(spinsemi.config._USER_CONFIG_PATH, "w") as user_config_file:
        user_config_file.write("invalid_key: 3")

    with pytest.raises(ValueError, match=r"Invalid key\(s\) found .* {'invalid_key'}"):
        get_config("rel_tol")


def test_tolerance_environment_variable(monkeypatch):
    """Test that SPINSEMI_TOL overrides the configured relative tolerance."""
    set_config(rel_tol=1e-8)
    monkeypatch.setenv(spinsemi.config.TOLERANCE_ENV_VAR, "1e-6")
    assert get_config("rel_tol") == 1e-6
    assert IntegratorConfig.from_config().rel_tol == 1e-6


@pytest.mark.parametrize("value", ["abc", "-1e-3", "0"])
def test_invalid_tolerance_environment_variable(monkeypatch, value):
    """Test that a malformed SPINSEMI_TOL is rejected."""
    monkeypatch.setenv(spinsemi.config.TOLERANCE_ENV_VAR, value)
    with pytest.raises(ValueError, match="Invalid value for SPINSEMI_TOL"):
        get_config("rel_tol")


def test_integrator_config_from_config():
    """Test that integrator settings follow the configuration and explicit overrides."""
    set_config(ode_method="DOP853", max_steps=500)
    cfg = IntegratorConfig.from_config(rel_tol=1e-7, abs_tol=None)
    assert cfg.method == "DOP853"
    assert cfg.max_steps == 500
    assert cfg.rel_tol == 1e-7
    assert cfg.abs_tol == 1e-14


@pytest.mark.parametrize(
    "kwargs", [{"rel_tol": 0}, {"abs_tol": -1.0}, {"max_step": 0.0}, {"method": "Euler"}]
)
def test_invalid_integrator_config(kwargs):
    """Test that invalid integrator settings are rejected."""
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)
