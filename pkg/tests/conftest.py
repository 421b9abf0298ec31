import json
import os

import pytest

from models.heterojunction import ModelParams


@pytest.fixture(autouse=True)
def set_env_var(monkeypatch):
    """
    Overrides environment variables so tests run single-process with quiet logging.
    """
    monkeypatch.setenv("PDEMSCATTER_THREADS", "1")
    monkeypatch.setenv("PDEMSCATTER_LOG_LEVEL", "WARNING")

    assert os.getenv("PDEMSCATTER_THREADS") == "1"
    assert os.getenv("PDEMSCATTER_LOG_LEVEL") == "WARNING"


@pytest.fixture
def well_params():
    """
    Diffused PT-symmetric well with beta = 4, mu1 = mu2 = 3, a0 = 4.
    """
    return ModelParams(mu1=3.0, mu2=3.0, beta=4.0, a0=4.0)


@pytest.fixture
def hermitian_params():
    """
    Same well without gain and loss.
    """
    return ModelParams(mu1=3.0, mu2=0.0, beta=4.0, a0=4.0)


@pytest.fixture
def barrier_params():
    """
    PT-symmetric barrier with mu1 = -1, mu2 = 2, beta = 1, a0 = 4.
    """
    return ModelParams(mu1=-1.0, mu2=2.0, beta=1.0, a0=4.0)


@pytest.fixture
def resonant_barrier_params():
    """
    Barrier with stronger gain, mu2 = 3.5, whose window [0.3, 3] holds a resonance above 1e2.
    """
    return ModelParams(mu1=-1.0, mu2=3.5, beta=1.0, a0=4.0)


@pytest.fixture
def write_config(tmp_path):
    """
    Fixture returning a helper that writes a run configuration to a JSON file.
    """

    def _write(params, E_min=0.05, E_max=3.0, n_points=10, **extra):
        document = {
            "params": params,
            "energy_window": {"E_min": E_min, "E_max": E_max, "n_points": n_points},
            "out_dir": str(tmp_path / "out"),
            **extra,
        }
        path = tmp_path / "config.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return _write
