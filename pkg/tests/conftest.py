"""Shared fixtures: calibrated decoders at two cost points.

The default-config calibration is the expensive one (30 trials x 10
rounds); it is session-scoped so the acceptance module and the unit tests
share a single run.  `small_config` trades statistical headroom for speed
and is what the service/CLI tests use.
"""

import sys
import warnings

import pytest

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    import fastapi.testclient  # noqa: F401  (quiet the httpx shim warning once)

from mindlink.session import SessionConfig, calibrate


@pytest.fixture(scope="session")
def default_config():
    return SessionConfig()


@pytest.fixture(scope="session")
def default_calibration(default_config):
    return calibrate(default_config)


@pytest.fixture(scope="session")
def default_decoder(default_calibration):
    return default_calibration.decoder


@pytest.fixture(scope="session")
def small_config():
    return SessionConfig(
        seed=7, calibration_trials=6, calibration_rounds=4, rounds_max=4
    )


@pytest.fixture(scope="session")
def small_decoder(small_config):
    return calibrate(small_config).decoder


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Repeat the acceptance verdict lines where they are easy to find."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
