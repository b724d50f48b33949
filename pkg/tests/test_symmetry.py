import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from resonant_nls.dynamics import StepperConfig, Trajectory, evolve
from resonant_nls.grid import SpatialGrid
from resonant_nls.initial import gaussian_state, make_rng, random_gaussian_state
from resonant_nls.state import energy, mass, norm
from resonant_nls.symmetry import (GroupElement, OutOfResolution, apply, apply_trajectory, dilate,
                                   pde_residuals, verify_covariance)

# L = 4 pi puts every quarter-integer frequency on the lattice
G = SpatialGrid(4 * math.pi, 128)

finite = dict(allow_nan=False, allow_infinity=False)
quarter = st.integers(-8, 8).map(lambda m: m / 4.0)


def elements(with_boost=True, with_scale=False, shift=2.0):
    xi = st.tuples(quarter, quarter) if with_boost else st.just((0.0, 0.0))
    lam = st.sampled_from([0.5, 1.0, 2.0]) if with_scale else st.just(1.0)
    x = st.floats(-shift, shift, **finite)
    return st.builds(GroupElement, st.floats(-math.pi, math.pi, **finite), xi, st.tuples(x, x), lam)


def close(a, b, tol):
    return np.max(np.abs(a - b)) <= tol * max(np.max(np.abs(b)), 1e-300)


@pytest.fixture(scope="module")
def state():
    return random_gaussian_state(G, 1, make_rng(0), width_range=(1.0, 1.3), center_spread=1.0)


def test_identity_is_noop(state):
    assert np.array_equal(apply(GroupElement.identity(), state).data, state.data)


def test_scale_must_be_positive_and_dyadic(state):
    with pytest.raises(ValueError):
        GroupElement(lam=0.0)
    with pytest.raises(OutOfResolution):
        apply(GroupElement(lam=1.5), state)


@given(elements(with_scale=True), elements(with_scale=True), elements(with_scale=True))
def test_composition_is_associative(a, b, c):
    l, r = (a @ b) @ c, a @ (b @ c)
    assert l.theta == pytest.approx(r.theta, abs=1e-9)
    assert np.allclose(l.xi0, r.xi0) and np.allclose(l.x0, r.x0) and l.lam == pytest.approx(r.lam)


@given(elements(with_scale=True))
def test_inverse(g):
    for h in (g @ g.inverse(), g.inverse() @ g):
        assert h.theta == pytest.approx(0.0, abs=1e-9)
        assert np.allclose(h.xi0, 0) and np.allclose(h.x0, 0, atol=1e-12) and h.lam == pytest.approx(1.0)


@given(elements(), elements(), st.sampled_from([0.0, 0.3]))
def test_group_law_phase_translation_boost(state, g1, g2, t):
    lhs = apply(g1, apply(g2, state, t), t)
    rhs = apply(g1 @ g2, state, t)
    assert close(lhs.data, rhs.data, 1e-10)


# small shifts: a dilated state translated far would reach the periodic boundary
@given(elements(with_scale=True, shift=0.5), elements(with_scale=True, shift=0.5))
def test_group_law_with_dilations(g1, g2):
    u = gaussian_state(G, 1, (-1, 1), width=1.0)
    try:
        lhs = apply(g1, apply(g2, u))
        rhs = apply(g1 @ g2, u)
    except ValueError:
        # out of resolution, or the composite boost xi1 + xi2/lam1 is off the lattice
        assume(False)
    assert close(lhs.data, rhs.data, 1e-8)


@given(elements(with_scale=True))
def test_mass_invariance(g):
    # compact enough for one dilation either way on this grid
    u = random_gaussian_state(G, 1, make_rng(2), width_range=(0.7, 0.9), center_spread=0.5)
    try:
        v = apply(g, u)
    except OutOfResolution:
        assume(False)
    assert mass(v) == pytest.approx(mass(u), rel=1e-8)


def test_phase_keeps_everything(state):
    v = apply(GroupElement(theta=1.1), state)
    assert mass(v) == pytest.approx(mass(state), rel=1e-14)
    assert energy(v) == pytest.approx(energy(state), rel=1e-14)
    for p in (2, 4, math.inf):
        assert norm(v, p, 1) == pytest.approx(norm(state, p, 1), rel=1e-14)


@pytest.mark.parametrize("lam, width", [(2.0, 1.2), (0.5, 1.2), (4.0, 0.6), (0.25, 2.0)])
def test_dilation_of_gaussian(lam, width):
    u = gaussian_state(G, 0, (0,), width=width)
    v = apply(GroupElement(lam=lam), u)
    assert mass(v) == pytest.approx(math.pi * width**2, rel=1e-8)
    assert norm(v, 2) == pytest.approx(norm(u, 2), rel=1e-8)
    assert norm(v, 4) == pytest.approx(lam**-0.5 * norm(u, 4), rel=1e-8)
    X, Y = G.mesh()
    w = width * lam
    assert close(v.data[0], np.exp(-(X**2 + Y**2) / (2 * w * w)) / lam, 1e-8)


def test_dilation_resolution_checks():
    wide = gaussian_state(G, 0, (0,), width=4.0)
    with pytest.raises(OutOfResolution):
        dilate(wide.data, 2.0, G)
    narrow = gaussian_state(G, 0, (0,), width=0.15)
    with pytest.raises(OutOfResolution):
        dilate(narrow.data, 0.5, G)


def test_boost_resolution_checks(state):
    with pytest.raises(ValueError):
        apply(GroupElement(xi0=(0.3, 0.0)), state)     # not on the lattice
    edge = G.k_nyquist - 0.25
    with pytest.raises(OutOfResolution):
        apply(GroupElement(xi0=(edge, 0.0)), state)


@pytest.fixture(scope="module")
def run():
    g = SpatialGrid(4 * math.pi, 128)
    u = random_gaussian_state(g, 1, make_rng(1), amplitude=0.5, width_range=(1.0, 1.3),
                              center_spread=1.0)
    traj = Trajectory()
    evolve(u, StepperConfig(dt=2e-3, T=0.4, snapshot_stride=10), [traj], diagnostics=False)
    return traj


def test_residuals_need_three_snapshots(run):
    short = Trajectory(run.times[:2], run.states[:2])
    with pytest.raises(ValueError):
        pde_residuals(short)


def test_residual_is_small_on_converged_run(run):
    r = pde_residuals(run)
    assert len(r) == len(run) - 2 and r.max() < 1e-2


def test_identity_and_translation_covariance(run):
    rep = verify_covariance(GroupElement.identity(), run)
    assert rep.residual == rep.baseline
    rep = verify_covariance(GroupElement(theta=0.4, x0=(1.3, -0.7)), run)
    assert abs(rep.residual - rep.baseline) <= 1e-10 * rep.baseline + 1e-14
    assert rep.fd_floor is not None and rep.fd_floor > 0


def test_boost_covariance(run):
    rep = verify_covariance(GroupElement(xi0=(1.0, 0.0)), run)
    assert rep.ratio <= 3.0


def test_dilated_trajectory_times(run):
    moved = apply_trajectory(GroupElement(lam=2.0), Trajectory(run.times[:3], run.states[:3]))
    assert moved.times == pytest.approx([4 * t for t in run.times[:3]])
