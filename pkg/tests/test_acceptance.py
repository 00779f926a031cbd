"""Closed-loop walking episodes on the default configuration. Run with ``pytest -m slow``."""

import math

import numpy as np
import pytest

from core.config import load_config
from core.types import ControllerKind, DomainId, QpStatus
from sim.episode import run_episode

STEPS = 30
SEEDS = (0, 1, 2)
COMPLIANT = ("rubber", "track", "grass", "sidewalk")

pytestmark = pytest.mark.slow


def controller(cfg, kind):
    return cfg.controller.model_copy(update={"kind": kind})


@pytest.fixture(scope="module")
def default_config():
    return load_config()


@pytest.fixture(scope="module")
def episodes(default_config):
    subject = default_config.experiment.subjects[0]
    return {
        kind: run_episode(default_config, subject, "rubber", controller(default_config, kind), seed=0, steps=STEPS)
        for kind in (ControllerKind.FORCE_SENSING, ControllerKind.NO_SENSOR)
    }


def stance_rmse(log):
    value = log.summary()["rmse"]["stance"]
    assert not math.isnan(value)
    return value


@pytest.mark.parametrize("kind", [ControllerKind.FORCE_SENSING, ControllerKind.NO_SENSOR])
def test_walks_without_falling(episodes, kind):
    log = episodes[kind]
    assert not log.fell, log.fall_reason
    assert log.step_count >= STEPS


@pytest.mark.parametrize("kind", [ControllerKind.FORCE_SENSING, ControllerKind.NO_SENSOR])
def test_clf_condition_holds(episodes, kind):
    for r in episodes[kind].records:
        if r.qp_status == QpStatus.OPTIMAL and not r.fallback:
            assert r.Vdot <= r.bound + r.delta + 1e-6 * (1 + abs(r.bound))


def test_relaxation_mostly_idle(episodes):
    records = [r for r in episodes[ControllerKind.FORCE_SENSING].records if r.qp_status == QpStatus.OPTIMAL]
    idle = sum(r.delta <= 1e-8 for r in records)
    assert idle >= 0.9 * len(records)


@pytest.mark.parametrize("kind", [ControllerKind.FORCE_SENSING, ControllerKind.NO_SENSOR])
def test_torque_limits(episodes, default_config, kind):
    knee, ankle = default_config.controller.u_max_knee, default_config.controller.u_max_ankle
    assert all(abs(r.u_knee) <= knee for r in episodes[kind].records)
    assert all(abs(r.u_ankle) <= ankle for r in episodes[kind].records)


def test_knee_orbit_settles(episodes):
    """Knee state at each stance entry stays within 5% of the orbit size after step 10."""
    records = episodes[ControllerKind.FORCE_SENSING].records
    crossings = [
        (cur.knee, cur.knee_rate)
        for prev, cur in zip(records, records[1:], strict=False)
        if prev.domain == DomainId.PNS and cur.domain == DomainId.PS and cur.step >= 10
    ]
    assert len(crossings) >= 5
    late = np.array([(r.knee, r.knee_rate) for r in records if r.step >= 10])
    diameter = float(np.linalg.norm(late.max(axis=0) - late.min(axis=0)))
    gaps = np.linalg.norm(np.diff(np.array(crossings), axis=0), axis=1)
    assert np.all(gaps <= 0.05 * diameter) or np.all(np.diff(gaps) <= 0)


def test_force_sensing_tracks_stance_better(episodes):
    assert stance_rmse(episodes[ControllerKind.FORCE_SENSING]) < stance_rmse(episodes[ControllerKind.NO_SENSOR])


@pytest.mark.parametrize("terrain", COMPLIANT)
def test_force_sensing_better_on_every_compliant_terrain(default_config, terrain):
    subject = default_config.experiment.subjects[0]

    def mean_rmse(kind):
        return np.mean(
            [
                stance_rmse(run_episode(default_config, subject, terrain, controller(default_config, kind), seed=s, steps=STEPS))
                for s in SEEDS
            ]
        )

    assert mean_rmse(ControllerKind.FORCE_SENSING) < mean_rmse(ControllerKind.NO_SENSOR)


@pytest.mark.parametrize("subject_index", [0, 1])
def test_force_sensing_lowest_of_four_controllers(default_config, subject_index):
    subject = default_config.experiment.subjects[subject_index]
    results = {
        kind: stance_rmse(run_episode(default_config, subject, "rubber", controller(default_config, kind), seed=0, steps=STEPS))
        for kind in ControllerKind
    }
    assert min(results, key=results.get) == ControllerKind.FORCE_SENSING
