import numpy as np
import pytest

from core.config import Config, load_config
from gait.params import GaitParams, load_gait
from models.full import build_full_model
from models.params import Anthropometry
from models.subsystem import build_subsystem_model

SUBJECT_1 = Anthropometry(height=1.70, weight=62.0)


@pytest.fixture
def config() -> Config:
    """Load default config for tests."""
    return load_config()


@pytest.fixture
def temp_config(tmp_path):
    """Write a small experiment config and return its path."""

    def write(extra: str = "") -> str:
        toml_content = f"""
[physics]
max_duration_s = 0.05

[sensors.insole]
noise = false
[sensors.load_cell]
noise = false
[sensors.imu]
noise = false

[experiment]
terrains = ["rigid"]
steps = 2
seed = 3
output_dir = "{tmp_path / 'runs'}"

[[experiment.subjects]]
name = "subject1"
height = 1.70
weight = 62.0

[[experiment.controllers]]
kind = "pd"
{extra}
"""
        config_path = tmp_path / "test.toml"
        config_path.write_text(toml_content)
        return str(config_path)

    return write


@pytest.fixture(scope="session")
def full():
    """(model, layout) for subject 1 with the default prosthesis."""
    return build_full_model(SUBJECT_1)


@pytest.fixture(scope="session")
def subsystem():
    return build_subsystem_model()


@pytest.fixture(scope="session")
def gait() -> GaitParams:
    return load_gait("config/gait.yaml")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
