# © spinsemi developers
#
# License: BSD (3-clause)

"""Shared fixtures for the test suite."""

import pytest

import spinsemi.config


@pytest.fixture(autouse=True)
def temp_test_config(tmp_path, monkeypatch):
    """Create, use and delete a temporary user config file for testing."""
    # setup
    user_config_path_backup = spinsemi.config._USER_CONFIG_PATH
    spinsemi.config._USER_CONFIG_PATH = tmp_path / "testconfig.yml"
    monkeypatch.delenv(spinsemi.config.TOLERANCE_ENV_VAR, raising=False)

    # execute test
    yield

    # cleanup
    spinsemi.config._USER_CONFIG_PATH = user_config_path_backup
