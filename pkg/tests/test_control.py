import logging

import numpy as np
import pytest

from control.ankle import ankle_pd
from control.controller import (
    REGISTRY,
    ControllerRegistry,
    control_tick,
    default_registry,
    make_context,
    pd_tick,
)
from control.estimator import ForceEstimator, force_estimate, residual_load
from core.config import ControllerConfig
from core.types import ControllerKind, DomainId, QpStatus, SensedForces
from dynamics.dynamics import dynamics_terms
from dynamics.kinematics import point_jacobian
from gait.bezier import bezier
from gait.outputs import KNEE
from gait.params import AnkleSchedule
from models.measurable import MeasurableState, subsystem_accelerations
from qp.types import QpSolution

ZETA = np.array([5.0, -200.0, 2.0])


def on_trajectory(gait, domain, fraction=0.4):
    d = gait.domain(domain)
    q = np.array([d.p0 + fraction * (d.pf - d.p0), 0.6, 0.0, 0.0, 0.0])
    q[KNEE] = bezier(d.alpha, fraction)[0]
    return q


def static_solution(sub, layout, q, zeta):
    """Torques and ground wrench holding q at rest under socket load zeta."""
    G = dynamics_terms(sub, q, np.zeros(5)).H
    Jt = point_jacobian(sub, q, layout.sole).T
    lam = np.linalg.solve(Jt[:3], G[:3] - zeta)
    u = G[3:] - Jt[3:] @ lam
    return u, lam


def gait_holding_ankle(gait, q, u_ankle, kp=400.0):
    """Copy of the gait whose stance ankle PD outputs u_ankle at rest in q."""
    g = gait.model_copy(deep=True)
    ps = g.domains[DomainId.PS]
    g.domains[DomainId.PS] = ps.model_copy(
        update={"ankle": AnkleSchedule(kp=kp, kd=20.0, setpoints=[(0.0, q[4] + u_ankle / kp)])}
    )
    return g


def static_setup(subsystem, gait, kind, zeta):
    sub, layout = subsystem
    q = on_trajectory(gait, DomainId.PS)
    u, lam = static_solution(sub, layout, q, zeta)
    ctx = make_context(ControllerConfig(kind=kind), gait_holding_ankle(gait, q, u[1]), sub, layout)
    ctx.u_prev = u.copy()
    ctx.lam_prev = lam.copy()
    X = MeasurableState.from_subsystem(q, np.zeros(5), ZETA)
    sensed = SensedForces(F_f=ZETA.copy(), F_gz=float(lam[1]), M_gy=float(lam[2]))
    return ctx, X, sensed, u, lam


class FailingSolver:
    last_active: tuple[int, ...] = ()

    def solve(self, problem, warm_start=None):
        return QpSolution(x=np.zeros(problem.n), status=QpStatus.INFEASIBLE)


def test_static_force_sensing(subsystem, gait):
    ctx, X, sensed, u, lam = static_setup(subsystem, gait, ControllerKind.FORCE_SENSING, ZETA)
    assert np.abs(u).max() < 120.0
    u_s, diag = control_tick(ctx, X, sensed, DomainId.PS)
    assert diag.status == QpStatus.OPTIMAL
    np.testing.assert_allclose(u_s, u, atol=1e-5)
    assert diag.lam_hx == pytest.approx(lam[0], abs=1e-5)
    assert diag.delta == pytest.approx(0.0, abs=1e-9)
    assert diag.V == pytest.approx(0.0, abs=1e-12)


def test_static_no_sensor_ignores_socket_load(subsystem, gait):
    sub, layout = subsystem
    ctx, X, sensed, _, _ = static_setup(subsystem, gait, ControllerKind.NO_SENSOR, np.zeros(3))
    u0, lam0 = static_solution(sub, layout, X.q_bar, np.zeros(3))
    u_s, diag = control_tick(ctx, X, sensed, DomainId.PS)
    np.testing.assert_allclose(u_s, u0, atol=1e-5)
    assert diag.lam_hx == pytest.approx(lam0[0], abs=1e-5)

    # the two controllers differ by the knee torque the socket load needs
    u_f, _ = static_solution(sub, layout, X.q_bar, ZETA)
    ctx_f, X_f, sensed_f, _, _ = static_setup(subsystem, gait, ControllerKind.FORCE_SENSING, ZETA)
    u_sensing, _ = control_tick(ctx_f, X_f, sensed_f, DomainId.PS)
    assert u_sensing[0] - u_s[0] == pytest.approx(u_f[0] - u0[0], abs=1e-4)


def test_invalid_insole_falls_back_to_full_wrench(subsystem, gait):
    ctx, X, sensed, u, _ = static_setup(subsystem, gait, ControllerKind.FORCE_SENSING, ZETA)
    sensed.F_gz_valid = False
    u_s, diag = control_tick(ctx, X, sensed, DomainId.PS)
    assert diag.status == QpStatus.OPTIMAL
    np.testing.assert_allclose(u_s, u, atol=1e-5)


def test_zero_torque_limit(subsystem, gait):
    ctx, X, sensed, _, _ = static_setup(subsystem, gait, ControllerKind.FORCE_SENSING, ZETA)
    ctx.cfg = ctx.cfg.model_copy(update={"u_max_knee": 0.0})
    X.x_s[0] += 0.05  # knee off the trajectory
    u_s, diag = control_tick(ctx, X, sensed, DomainId.PS)
    assert diag.status == QpStatus.OPTIMAL
    assert not diag.fallback
    assert u_s[0] == pytest.approx(0.0, abs=1e-9)
    assert diag.delta >= 0.0
    assert diag.Vdot <= diag.bound + diag.delta + 1e-6 * (1 + abs(diag.bound))


def test_clf_condition_off_trajectory(subsystem, gait, rng):
    sub, layout = subsystem
    ctx = make_context(ControllerConfig(), gait, sub, layout)
    for _ in range(20):
        q = on_trajectory(gait, DomainId.PNS, rng.uniform(0.1, 0.9))
        q[KNEE] += rng.uniform(-0.05, 0.05)
        qdot = rng.uniform(-0.3, 0.3, 5)
        X = MeasurableState.from_subsystem(q, qdot, np.zeros(3))
        _, diag = control_tick(ctx, X, SensedForces(), DomainId.PNS)
        assert diag.status == QpStatus.OPTIMAL
        assert diag.Vdot <= diag.bound + diag.delta + 1e-6 * (1 + abs(diag.bound))


def test_swing_controllers_agree_without_socket_load(subsystem, gait, rng):
    sub, layout = subsystem
    q = on_trajectory(gait, DomainId.PNS)
    q[KNEE] += 0.02
    X = MeasurableState.from_subsystem(q, rng.uniform(-0.2, 0.2, 5), np.zeros(3))
    results = []
    for kind in (ControllerKind.FORCE_SENSING, ControllerKind.NO_SENSOR, ControllerKind.FORCE_ESTIMATING):
        ctx = make_context(ControllerConfig(kind=kind), gait, sub, layout)
        u_s, _ = control_tick(ctx, X, SensedForces(), DomainId.PNS)
        results.append(u_s)
    np.testing.assert_allclose(results[0], results[1], atol=1e-9)
    np.testing.assert_allclose(results[0], results[2], atol=1e-9)


def test_pd_clips(subsystem, gait):
    sub, layout = subsystem
    ctx = make_context(ControllerConfig(kind=ControllerKind.PD), gait, sub, layout)
    q = on_trajectory(gait, DomainId.PNS)
    q[KNEE] += 2.0
    X = MeasurableState.from_subsystem(q, np.zeros(5), np.zeros(3))
    u_s, diag = control_tick(ctx, X, SensedForces(), DomainId.PNS)
    assert u_s[0] == -120.0
    assert diag.status is None
    q[KNEE] -= 2.001
    X = MeasurableState.from_subsystem(q, np.zeros(5), np.zeros(3))
    u_s, diag = control_tick(ctx, X, SensedForces(), DomainId.PNS)
    assert u_s[0] == pytest.approx(250.0 * 0.001)


def test_fallback_holds_previous_torque(subsystem, gait, caplog):
    sub, layout = subsystem
    ctx = make_context(ControllerConfig(), gait, sub, layout)
    ctx.solver = FailingSolver()
    ctx.u_prev = np.array([12.5, 0.0])
    X = MeasurableState.from_subsystem(on_trajectory(gait, DomainId.PNS), np.zeros(5), np.zeros(3))
    with caplog.at_level(logging.WARNING, logger="control.controller"):
        u_s, diag = control_tick(ctx, X, SensedForces(), DomainId.PNS)
    assert diag.fallback
    assert diag.status == QpStatus.INFEASIBLE
    assert u_s[0] == 12.5
    assert np.isnan(diag.Vdot)
    assert "holding previous torque" in caplog.text


def test_domain_change_resets_warm_start(subsystem, gait):
    sub, layout = subsystem
    ctx = make_context(ControllerConfig(), gait, sub, layout)
    X = MeasurableState.from_subsystem(on_trajectory(gait, DomainId.PNS), np.zeros(5), np.zeros(3))
    control_tick(ctx, X, SensedForces(), DomainId.PNS)
    assert ctx.x_prev is not None
    assert ctx.last_domain == DomainId.PNS
    X = MeasurableState.from_subsystem(on_trajectory(gait, DomainId.PS), np.zeros(5), np.zeros(3))
    control_tick(ctx, X, SensedForces(), DomainId.PS)
    assert ctx.last_domain == DomainId.PS
    assert len(ctx.x_prev) == 5 + 2 + 1 + 1


def test_registry():
    assert set(REGISTRY.kinds) == set(ControllerKind)
    registry = ControllerRegistry()
    with pytest.raises(KeyError):
        registry.get(ControllerKind.PD)
    registry.register(ControllerKind.PD, pd_tick)
    assert registry.get(ControllerKind.PD) is pd_tick
    assert default_registry().kinds == REGISTRY.kinds


def test_custom_handler(subsystem, gait):
    sub, layout = subsystem
    registry = default_registry()
    calls = []

    def recording(ctx, X, sensed, bundle, domain, u_ankle):
        calls.append(domain)
        return pd_tick(ctx, X, sensed, bundle, domain, u_ankle)

    registry.register(ControllerKind.FORCE_SENSING, recording)
    ctx = make_context(ControllerConfig(), gait, sub, layout)
    X = MeasurableState.from_subsystem(on_trajectory(gait, DomainId.PNS), np.zeros(5), np.zeros(3))
    control_tick(ctx, X, SensedForces(), DomainId.PNS, registry=registry)
    assert calls == [DomainId.PNS]


def test_ankle_pd():
    schedule = AnkleSchedule(kp=100.0, kd=10.0, setpoints=[(0.0, 0.1), (0.5, -0.1)])
    q = np.zeros(5)
    qdot = np.zeros(5)
    qdot[4] = 1.0
    assert ankle_pd(0.2, q, qdot, schedule, 175.0) == pytest.approx(10.0 - 10.0)
    assert ankle_pd(0.7, q, qdot, schedule, 175.0) == pytest.approx(-10.0 - 10.0)
    q[4] = 5.0
    assert ankle_pd(0.7, q, np.zeros(5), schedule, 175.0) == -175.0


def test_force_estimate_window():
    history = [np.full(3, float(i)) for i in range(40)]
    np.testing.assert_allclose(force_estimate(history, 30), np.full(3, 24.5))
    with pytest.raises(ValueError):
        force_estimate([], 30)
    est = ForceEstimator(window=3)
    np.testing.assert_array_equal(est.estimate(), np.zeros(3))
    for s in history[:5]:
        est.add(s)
    np.testing.assert_allclose(est.estimate(), np.full(3, 3.0))
    est.clear()
    assert not est.history


@pytest.mark.parametrize("stance", [False, True])
def test_residual_load_recovers_socket_wrench(subsystem, rng, stance):
    sub, layout = subsystem
    for _ in range(20):
        q = np.concatenate([[0.1, 0.6, 0.0], rng.uniform(-0.8, 0.2, 2)])
        qdot = rng.uniform(-1.0, 1.0, 5)
        zeta = rng.normal(0.0, 200.0, 3)
        u = rng.normal(0.0, 30.0, 2)
        X = MeasurableState.from_subsystem(q, qdot, zeta)
        qdd, lam = subsystem_accelerations(sub, layout, X, u, stance)
        r = residual_load(sub, layout, q, qdot, qdd, u, lam if stance else None)
        np.testing.assert_allclose(r, zeta, atol=1e-6 * (1 + np.abs(zeta).max()))


def test_force_estimating_tick_uses_samples(subsystem, gait):
    sub, layout = subsystem
    ctx = make_context(ControllerConfig(kind=ControllerKind.FORCE_ESTIMATING, window=2), gait, sub, layout)
    X = MeasurableState.from_subsystem(on_trajectory(gait, DomainId.PNS), np.zeros(5), np.zeros(3))
    control_tick(ctx, X, SensedForces(), DomainId.PNS, qdd_measured=np.zeros(5))
    control_tick(ctx, X, SensedForces(), DomainId.PNS, qdd_measured=np.zeros(5))
    control_tick(ctx, X, SensedForces(), DomainId.PNS, qdd_measured=np.zeros(5))
    assert len(ctx.estimator.history) == 2
