import numpy as np
import pytest

from clf.care import ClfError, care_residual, is_stabilizable, solve_care
from clf.resclf import build_resclf, clf_terms, feedback_linearize, lie_derivatives, linear_output_dynamics, resclf_from_gains
from core.types import DomainId
from gait.outputs import output_bundle
from models.measurable import MeasurableState, subsystem_accelerations

N_RANDOM = 1000


def random_measurable(gait, domain, rng):
    d = gait.domain(domain)
    q = np.concatenate([[rng.uniform(d.p0, d.pf), rng.uniform(0.5, 0.7), rng.uniform(-0.3, 0.3)], rng.uniform(-0.8, 0.2, 2)])
    qdot = rng.uniform(-1.0, 1.0, 5)
    zeta = rng.normal(0.0, 200.0, 3)
    return MeasurableState.from_subsystem(q, qdot, zeta)


def test_double_integrator_care():
    F, G = linear_output_dynamics(1)
    P = solve_care(F, G, np.eye(2))
    s3 = np.sqrt(3.0)
    np.testing.assert_allclose(P, [[s3, 1.0], [1.0, s3]], atol=1e-10)
    assert care_residual(F, G, np.eye(2), P) < 1e-9


def test_care_random_stabilizable(rng):
    for _ in range(20):
        F = rng.normal(size=(4, 4))
        G = rng.normal(size=(4, 2))
        A = rng.normal(size=(4, 4))
        Q = A @ A.T + np.eye(4)
        P = solve_care(F, G, Q)
        assert care_residual(F, G, Q, P) < 1e-9
        assert np.linalg.eigvalsh(P).min() > 0
        np.testing.assert_allclose(P, P.T)


def test_care_rejects_bad_problems():
    F, G = linear_output_dynamics(1)
    with pytest.raises(ClfError, match="positive definite"):
        solve_care(F, G, np.diag([1.0, -1.0]))
    assert not is_stabilizable(np.eye(2), np.zeros((2, 1)))
    with pytest.raises(ClfError, match="stabilizable"):
        solve_care(np.eye(2), np.zeros((2, 1)), np.eye(2))
    with pytest.raises(ClfError, match="shapes"):
        solve_care(F, G, np.eye(3))


@pytest.mark.parametrize("epsilon", [0.0, 1.0, -0.5, 2.0])
def test_epsilon_range(epsilon):
    with pytest.raises(ClfError, match="epsilon"):
        resclf_from_gains([1.0, 1.0], epsilon)


def test_clf_sandwich_bounds(rng):
    clf = resclf_from_gains([1.0, 1.0], 0.1)
    assert clf.rate == pytest.approx(clf.c3 / 0.1)
    for _ in range(N_RANDOM):
        xi = rng.normal(size=2)
        n2 = xi @ xi
        V = clf.V(xi)
        assert clf.c1 * n2 <= V * (1 + 1e-12)
        assert V <= clf.c2 / clf.epsilon**2 * n2 * (1 + 1e-12)


def test_clf_decay_under_lqr(rng):
    """nu = -G^T P_eps xi / (2 eps) drives V down at least at the configured rate."""
    clf = resclf_from_gains([1.0, 1.0], 0.1)
    for _ in range(100):
        xi = rng.normal(size=2)
        V, LfV, LgV = clf_terms(xi, clf)
        nu = -clf.G.T @ clf.P_eps @ xi / (2.0 * clf.epsilon)
        assert LfV + LgV @ nu <= -clf.rate * V + 1e-9 * (1.0 + V)


def test_clf_terms_directional_derivative(rng):
    clf = resclf_from_gains([2.0, 1.0], 0.2)
    h = 1e-6
    xi = rng.normal(size=2)
    nu = rng.normal(size=1)
    _, LfV, LgV = clf_terms(xi, clf)
    step = clf.F @ xi + clf.G @ nu
    fd = (clf.V(xi + h * step) - clf.V(xi - h * step)) / (2 * h)
    assert LfV + LgV @ nu == pytest.approx(fd, rel=1e-6)
    with pytest.raises(ClfError):
        clf_terms(np.zeros(3), clf)


def test_build_resclf_rejects_odd_size():
    with pytest.raises(ClfError):
        build_resclf(np.eye(3), 0.1)


@pytest.mark.parametrize("domain", list(DomainId))
def test_lie_derivatives_match_dynamics(subsystem, gait, rng, domain):
    sub, layout = subsystem
    stance = domain == DomainId.PS
    for _ in range(N_RANDOM):
        X = random_measurable(gait, domain, rng)
        u = rng.normal(0.0, 50.0, 2)
        bundle = output_bundle(X.q_bar, X.qdot_bar, gait, domain)
        Lf2, LgLf = lie_derivatives(sub, layout, X, bundle, stance)
        qdd, _ = subsystem_accelerations(sub, layout, X, u, stance)
        expected = bundle.yddot(X.qdot_bar, qdd)
        np.testing.assert_allclose(Lf2 + LgLf @ u, expected, atol=1e-8 * (1 + np.abs(expected).max()))


@pytest.mark.parametrize("domain", list(DomainId))
def test_feedback_linearize(subsystem, gait, rng, domain):
    sub, layout = subsystem
    stance = domain == DomainId.PS
    for _ in range(50):
        X = random_measurable(gait, domain, rng)
        bundle = output_bundle(X.q_bar, X.qdot_bar, gait, domain)
        nu = rng.normal(size=1)
        u = feedback_linearize(sub, layout, X, bundle, nu, stance, u_ankle=3.0)
        assert u[1] == 3.0
        qdd, _ = subsystem_accelerations(sub, layout, X, u, stance)
        np.testing.assert_allclose(bundle.yddot(X.qdot_bar, qdd), nu, atol=1e-7)
