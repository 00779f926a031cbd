from pathlib import Path

import numpy as np
import pytest

from core.types import DomainId
from gait.bezier import GaitError, bernstein, bezier, bezier_derivative, de_casteljau, fit_bezier
from gait.outputs import KNEE, output_bundle, phase, phase_gradient
from gait.params import AnkleSchedule, dump_gait, fit_gait, fit_header, format_residual, load_gait, save_gait

SAMPLES = "config/gait_samples.yaml"


def test_bernstein_partition_of_unity():
    B = bernstein(np.linspace(0, 1, 11), 5)
    np.testing.assert_allclose(B.sum(axis=1), 1.0, atol=1e-15)


def test_bezier_endpoints_and_de_casteljau(rng):
    alpha = rng.normal(size=(2, 6))
    np.testing.assert_allclose(bezier(alpha, 0.0), alpha[:, 0])
    np.testing.assert_allclose(bezier(alpha, 1.0), alpha[:, -1])
    for tau in rng.uniform(0, 1, 10):
        np.testing.assert_allclose(bezier(alpha, tau), de_casteljau(alpha, tau), atol=1e-12)


def test_bezier_derivative_finite_difference(rng):
    alpha = rng.normal(size=6)
    h = 1e-6
    for tau in (0.1, 0.5, 0.9):
        fd = (bezier(alpha, tau + h) - bezier(alpha, tau - h)) / (2 * h)
        np.testing.assert_allclose(bezier_derivative(alpha, tau), fd, atol=1e-6)
        fd2 = (bezier_derivative(alpha, tau + h) - bezier_derivative(alpha, tau - h)) / (2 * h)
        np.testing.assert_allclose(bezier_derivative(alpha, tau, 2), fd2, atol=1e-4)


def test_fit_exact_samples(rng):
    alpha = rng.normal(size=6)
    tau = np.linspace(0, 1, 21)
    y = np.array([bezier(alpha, t)[0] for t in tau])
    fitted, residual = fit_bezier(tau, y, 5)
    np.testing.assert_allclose(fitted, alpha, atol=1e-9)
    assert residual < 1e-10


def test_fit_rejects_bad_input():
    with pytest.raises(GaitError, match="cannot determine"):
        fit_bezier(np.linspace(0, 1, 4), np.zeros(4), 5)
    with pytest.raises(GaitError, match="rank deficient"):
        fit_bezier(np.array([0.0, 0.0, 0.5, 0.5, 1.0, 1.0]), np.zeros(6), 5)
    with pytest.raises(GaitError, match="lie in"):
        fit_bezier(np.linspace(0, 1.5, 10), np.zeros(10), 3)


def test_load_default_gait(gait):
    assert gait.degree == 5
    assert set(gait.domains) == set(DomainId)
    assert gait.domain(DomainId.PS).alpha.shape == (1, 6)


def test_load_gait_errors(tmp_path):
    with pytest.raises(GaitError, match="not found"):
        load_gait(tmp_path / "none.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("degree: 2\nstep_length: 0.4\nduration: 0.6\ndomains: {}\n")
    with pytest.raises(GaitError):
        load_gait(bad)


def test_fit_gait_regenerates_default_file():
    gait, residual = fit_gait(SAMPLES, 5)
    assert residual < 1e-10
    text = dump_gait(gait, fit_header(SAMPLES, 5, residual))
    assert text == Path("config/gait.yaml").read_text()


def test_fit_gait_header(tmp_path):
    gait, residual = fit_gait(SAMPLES, 5)
    out = tmp_path / "gait.yaml"
    save_gait(gait, out, fit_header(SAMPLES, 5, residual))
    assert "residual below 1e-10" in out.read_text().splitlines()[1]
    assert load_gait(out) == gait


def test_fit_gait_degree_too_low():
    with pytest.raises(GaitError, match=">= 3"):
        fit_gait(SAMPLES, 2)


def test_format_residual():
    assert format_residual(1e-12) == "below 1e-10"
    assert format_residual(0.5) == "5.000000e-01"


def test_ankle_schedule():
    s = AnkleSchedule(kp=10.0, kd=1.0, setpoints=[(0.0, 0.1), (0.5, -0.2)])
    assert s.setpoint(0.0) == 0.1
    assert s.setpoint(0.49) == 0.1
    assert s.setpoint(0.5) == -0.2
    with pytest.raises(ValueError):
        AnkleSchedule(kp=1.0, kd=1.0, setpoints=[(0.2, 0.0)])


def test_phase_clamped(gait):
    d = gait.domain(DomainId.PS)
    q = np.zeros(5)
    qdot = np.array([1.0, 0, 0, 0, 0])
    q[0] = d.p0 - 0.1
    assert phase(q, qdot, gait, DomainId.PS) == (0.0, 0.0)
    assert not phase_gradient(gait, DomainId.PS, q).any()
    q[0] = d.pf + 0.1
    assert phase(q, qdot, gait, DomainId.PS) == (1.0, 0.0)
    q[0] = 0.5 * (d.p0 + d.pf) + 2.0
    tau, tau_dot = phase(q, qdot, gait, DomainId.PS, origin=2.0)
    assert tau == pytest.approx(0.5)
    assert tau_dot == pytest.approx(1.0 / (d.pf - d.p0))


def test_output_on_trajectory(gait):
    d = gait.domain(DomainId.PNS)
    q = np.array([0.3 * d.pf, 0.8, 0.0, 0.0, 0.0])
    tau, _ = phase(q, np.zeros(5), gait, DomainId.PNS)
    q[KNEE] = bezier(d.alpha, tau)[0]
    b = output_bundle(q, np.zeros(5), gait, DomainId.PNS)
    assert b.y[0] == pytest.approx(0.0, abs=1e-15)
    assert b.ydot[0] == 0.0


@pytest.mark.parametrize("domain", list(DomainId))
def test_output_jacobians_finite_difference(gait, rng, domain):
    d = gait.domain(domain)
    h = 1e-7
    for _ in range(10):
        q = rng.uniform(-0.5, 0.5, 5)
        q[0] = rng.uniform(0.1, 0.9) * (d.pf - d.p0) + d.p0
        qdot = rng.uniform(-1.0, 1.0, 5)
        b = output_bundle(q, qdot, gait, domain)
        J_fd = np.zeros((1, 5))
        for i in range(5):
            e = np.zeros(5)
            e[i] = h
            J_fd[0, i] = (output_bundle(q + e, qdot, gait, domain).y[0] - output_bundle(q - e, qdot, gait, domain).y[0]) / (2 * h)
        np.testing.assert_allclose(b.J_y, J_fd, atol=1e-6)
        Jd_fd = (output_bundle(q + h * qdot, qdot, gait, domain).J_y - output_bundle(q - h * qdot, qdot, gait, domain).J_y) / (2 * h)
        np.testing.assert_allclose(b.Jdot_y, Jd_fd, atol=1e-5)
