import pytest

from core.config import Config, ConfigError, ControllerConfig, SupportConfig, load_config
from core.types import ControllerKind, DomainId, QpStatus, SensedForces, TerrainKind, next_domain


def test_load_default_config():
    config = load_config()
    assert isinstance(config, Config)
    assert config.physics.dt_us == 500
    assert config.physics.control_every == 12


def test_config_defaults():
    config = Config()
    assert config.controller.kind == ControllerKind.FORCE_SENSING
    assert config.controller.u_max_knee == 120.0
    assert config.controller.u_max_ankle == 175.0
    assert config.sensors.insole.rate_hz == 200.0
    assert config.sensors.insole.delay_ms == 5.0
    assert config.sensors.imu.rate_hz == 750.0


def test_default_experiment_grid():
    exp = load_config().experiment
    assert [s.name for s in exp.subjects] == ["subject1", "subject2"]
    assert [c.kind for c in exp.controllers] == list(ControllerKind)
    assert exp.terrains == ["rubber"]


def test_terrain_presets_ordered_by_stiffness():
    config = load_config()
    k = [config.terrain_preset(n).stiffness for n in ("rubber", "grass", "track", "sidewalk")]
    assert k == sorted(k)
    assert config.terrain_preset("rigid").kind == TerrainKind.RIGID


def test_unknown_terrain_preset(temp_config):
    path = temp_config()
    config = load_config(path)
    with pytest.raises(ConfigError, match="unknown terrain preset"):
        config.terrain_preset("ice")


def test_unknown_terrain_in_experiment(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text('[experiment]\nterrains = ["ice"]\n')
    with pytest.raises(ConfigError, match="unknown terrain preset: ice"):
        load_config(path)


def test_custom_preset_extends_builtins(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('[terrain.mud]\nstiffness = 5.0e4\n[terrain.rubber]\ndamping = 3.0\n')
    config = load_config(path)
    assert config.terrain_preset("mud").stiffness == 5.0e4
    assert config.terrain_preset("rubber").damping == 3.0
    assert config.terrain_preset("rubber").stiffness == 2.0e5


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")


def test_invalid_toml(tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("[physics\n")
    with pytest.raises(ConfigError, match="invalid TOML"):
        load_config(path)


@pytest.mark.parametrize(
    "field,value",
    [("kp", 0.0), ("kd", -1.0), ("u_max_knee", -1.0), ("epsilon", 1.0), ("epsilon", 0.0), ("window", 0)],
)
def test_controller_validation(field, value):
    with pytest.raises(ValueError):
        ControllerConfig(**{field: value})


def test_zero_torque_limit_is_allowed():
    assert ControllerConfig(u_max_knee=0.0).u_max_knee == 0.0


def test_experiment_controllers_inherit_controller_gains(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text(
        "[controller]\nkp = 300.0\nrho = 10.0\n"
        '[[experiment.controllers]]\nkind = "pd"\n'
        '[[experiment.controllers]]\nkind = "no-sensor-idclfqp"\nrho = 5.0\n'
    )
    a, b = load_config(path).experiment.controllers
    assert (a.kind, a.kp, a.rho) == (ControllerKind.PD, 300.0, 10.0)
    assert (b.kind, b.kp, b.rho) == (ControllerKind.NO_SENSOR, 300.0, 5.0)


def test_experiment_defaults_to_the_controller_section(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('[controller]\nkind = "pd"\nkd = 7.0\n')
    (only,) = load_config(path).experiment.controllers
    assert (only.kind, only.kd) == (ControllerKind.PD, 7.0)


@pytest.mark.parametrize("field,value", [("kx", -1.0), ("catch_height", 0.0), ("catch_height", 1.5)])
def test_support_validation(field, value):
    with pytest.raises(ValueError):
        SupportConfig(**{field: value})


def test_default_support_section():
    support = load_config().human.support
    assert support.enabled
    assert support.catch_height == 0.9


def test_experiment_steps_validation(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text("[experiment]\nsteps = 0\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_domain_cycle():
    assert next_domain(DomainId.PS) == DomainId.PNS
    assert next_domain(next_domain(DomainId.PS)) == DomainId.PS


def test_types_enums():
    assert QpStatus.OPTIMAL.value == "optimal"
    assert ControllerKind.PD.value == "pd"
    sensed = SensedForces()
    assert sensed.F_f.shape == (3,)
    assert sensed.F_gz_valid is True
