import numpy as np
import pytest

from gcsdyn import (
    ClassicalPoint,
    ComplexField,
    CoverageError,
    EscapeError,
    Grid,
    PropagationError,
    PropagatorConfig,
    RealField,
    UnitarityError,
    classical_period,
    evolve_feedback,
    evolve_static,
    expectation,
    gcs_from_model,
    ground_moments,
    ground_state,
    momentum_for_energy,
    normalized,
    potential_value,
    quadrature_weights,
    step,
    suggest_grid,
)
from gcsdyn.tolerances import DEFAULT_TOLERANCES


def _free_gaussian(grid, sigma0):
    psi = np.exp(-grid.points**2 / (4.0 * sigma0**2))
    return normalized(ComplexField(grid, psi))


def test_config_validation():
    with pytest.raises(PropagationError):
        PropagatorConfig(dt=-1.0)
    with pytest.raises(PropagationError):
        PropagatorConfig(dt=1e-3, scheme="euler")
    with pytest.raises(PropagationError):
        PropagatorConfig(dt=1e-3, mode="both")
    with pytest.raises(PropagationError):
        PropagatorConfig(dt=1e-3, snapshot_stride=0)


def test_step_grid_mismatch():
    g1 = Grid(-5.0, 5.0, 64)
    g2 = Grid(-5.0, 5.0, 128)
    psi = _free_gaussian(g1, 1.0)
    v = RealField(g2, np.zeros(g2.n))
    with pytest.raises(PropagationError):
        step(psi, v, 1e-3)


def test_free_particle_single_step_matches_closed_form():
    # oracle: free Gaussian spreading, psi(x,t) with complex width
    # sigma^2(t) = sigma0^2 (1 + i hbar t / 2 m sigma0^2)
    g = Grid(-24.0, 24.0, 1024)
    sigma0 = 1.0
    dt = 0.05
    psi = _free_gaussian(g, sigma0)
    v = RealField(g, np.zeros(g.n))
    out = step(psi, v, dt, scheme="split-step")
    tau = 1.0 + 0.5j * dt / sigma0**2
    closed = np.exp(-g.points**2 / (4.0 * sigma0**2 * tau)) / np.sqrt(tau)
    closed = normalized(ComplexField(g, closed)).values
    phase = np.vdot(closed, out.values)
    phase /= abs(phase)
    assert np.max(np.abs(out.values - phase * closed)) < 1e-8


def test_free_particle_width_law():
    # oracle: dq2(t) = sigma0^2 (1 + (hbar t / 2 m sigma0^2)^2), doubled here
    # because dq2 of the density is sigma0^2 at t = 0
    g = Grid(-40.0, 40.0, 2048)
    sigma0 = 1.0
    dt = 0.02
    nsteps = 150
    psi = _free_gaussian(g, sigma0)
    v = RealField(g, np.zeros(g.n))
    for _ in range(nsteps):
        psi = step(psi, v, dt, scheme="split-step")
    t = nsteps * dt
    got = expectation(psi, "x2") - expectation(psi, "x") ** 2
    want = sigma0**2 * (1.0 + (0.5 * t / sigma0**2) ** 2)
    assert got == pytest.approx(want, rel=1e-6)


def test_stationary_state_phase_advance(harmonic, harmonic_grid):
    # split-step: kinetic factor exact in k-space, Strang phase error O(dt^3)
    psi0 = ground_state(harmonic, harmonic_grid)
    psi = ComplexField(harmonic_grid, psi0.values.astype(complex))
    v = RealField(harmonic_grid, potential_value(harmonic, harmonic_grid.points))
    dt = 5e-4
    w = quadrature_weights(harmonic_grid)
    out = step(psi, v, dt, scheme="split-step")
    advance = np.angle(np.dot(w, np.conj(psi.values) * out.values))
    assert advance == pytest.approx(-0.5 * dt, abs=1e-10)  # -E0 dt / hbar
    assert np.max(np.abs(np.abs(out.values) ** 2 - psi0.values**2)) < 1e-10

    # Crank-Nicolson advances with the 3-point-Laplacian ground energy, a
    # dx^2-shifted eigenvalue; density stays put
    out_cn = step(psi, v, dt, scheme="crank-nicolson")
    advance_cn = np.angle(np.dot(w, np.conj(psi.values) * out_cn.values))
    dx2_shift = harmonic_grid.dx**2 / 12.0  # |E_fd - E0| ~ hbar w (w dx)^2/12 scale
    assert advance_cn == pytest.approx(-0.5 * dt, abs=10.0 * dx2_shift * dt)
    assert np.max(np.abs(np.abs(out_cn.values) ** 2 - psi0.values**2)) < 1e-8


@pytest.mark.parametrize("scheme", ["crank-nicolson", "split-step"])
def test_self_convergence_second_order(harmonic, harmonic_grid, scheme):
    # Richardson: error against a dt/8 reference shrinks ~4x per halving
    psi0 = gcs_from_model(harmonic, harmonic_grid, ClassicalPoint(1.0, 0.0)).psi
    v = RealField(harmonic_grid, potential_value(harmonic, harmonic_grid.points))
    horizon = 0.5

    def run(nsteps):
        psi = psi0
        for _ in range(nsteps):
            psi = step(psi, v, horizon / nsteps, scheme=scheme)
        return psi.values

    ref = run(400)
    w = quadrature_weights(harmonic_grid)
    errs = []
    for nsteps in (50, 100):
        diff = run(nsteps) - ref
        errs.append(np.sqrt(float(np.dot(w, np.abs(diff) ** 2))))
    ratio = errs[0] / errs[1]
    assert 3.2 < ratio < 4.8


def test_crank_nicolson_unitarity_long_run(harmonic):
    g = Grid(-12.0, 12.0, 512)
    psi = gcs_from_model(harmonic, g, ClassicalPoint(1.0, 0.0)).psi
    v = RealField(g, potential_value(harmonic, g.points))
    w = quadrature_weights(g)
    for _ in range(10000):
        psi = step(psi, v, 2e-3, scheme="crank-nicolson")
    drift = abs(float(np.dot(w, np.abs(psi.values) ** 2)) - 1.0)
    assert drift < 1e-10


@pytest.fixture(scope="module")
def morse_run_grid(morse):
    return suggest_grid(morse, q_reach_min=-1.0, q_reach_max=1.0, n=2048)


def test_feedback_fixed_point_keeps_density_frozen(morse, morse_run_grid):
    # quick run: the density freeze is already at its floor, while the
    # center-mean wobble is second order in dt (the strict bound is checked
    # in the slow variant below)
    period = classical_period(morse, 0.0)
    conf = PropagatorConfig(dt=period / 2000, scheme="split-step", mode="feedback",
                            snapshot_stride=100)
    run = evolve_feedback(morse, ClassicalPoint(0.0, 0.0), conf, period,
                          morse_run_grid)
    info = ground_moments(morse, morse_run_grid)
    for rec in run.records:
        assert 1.0 - rec.overlap < 1e-8
        assert rec.q_mean == pytest.approx(info.q0, abs=5e-6)
    assert all(p.Q == 0.0 and p.P == 0.0 for p in run.trajectory.points)


def test_feedback_fixed_point_mean_pinned(morse, morse_run_grid):
    # fine step: the measured mean sits on the ground mean to 1e-8
    period = classical_period(morse, 0.0)
    conf = PropagatorConfig(dt=period / 40000, scheme="split-step",
                            mode="feedback", snapshot_stride=2000)
    run = evolve_feedback(morse, ClassicalPoint(0.0, 0.0), conf, period,
                          morse_run_grid)
    info = ground_moments(morse, morse_run_grid)
    assert max(abs(r.q_mean - info.q0) for r in run.records) < 1e-8


def test_feedback_harmonic_matches_glauber(harmonic):
    # oracle: Glauber coherent state, density is the rigidly oscillating
    # ground Gaussian rho0(x - Q0 cos wt)
    grid = suggest_grid(harmonic, q_reach_min=-1.5, q_reach_max=1.5, n=1024)
    period = 2.0 * np.pi
    conf = PropagatorConfig(dt=period / 16000, scheme="split-step",
                            mode="feedback", snapshot_stride=800)
    run = evolve_feedback(harmonic, ClassicalPoint(1.0, 0.0), conf, period, grid)
    w = quadrature_weights(grid)
    x = grid.points
    dq2_0 = run.records[0].dq2
    for frame in run.frames:
        t = frame.diagnostics.t
        center = np.cos(t)
        ref = np.exp(-((x - center) ** 2))  # variance 1/2 Gaussian density
        ref /= float(np.dot(w, ref))
        rho = np.abs(frame.state.psi.values) ** 2
        rho /= float(np.dot(w, rho))
        overlap = float(np.dot(w, np.sqrt(rho * ref)))
        assert 1.0 - overlap < 1e-6
        assert abs(frame.diagnostics.dq2 / dq2_0 - 1.0) < 1e-7


def test_harmonic_mode_equivalence(harmonic):
    # feedback and static potentials differ by x-independent terms only
    grid = suggest_grid(harmonic, q_reach_min=-1.5, q_reach_max=1.5, n=1024)
    period = 2.0 * np.pi
    conf_fb = PropagatorConfig(dt=period / 2000, scheme="split-step",
                               mode="feedback", snapshot_stride=100)
    conf_st = PropagatorConfig(dt=period / 2000, scheme="split-step",
                               mode="static", snapshot_stride=100)
    point = ClassicalPoint(1.0, 0.0)
    fb = evolve_feedback(harmonic, point, conf_fb, period, grid)
    st0 = gcs_from_model(harmonic, grid, point)
    st = evolve_static(st0, harmonic, conf_st, period)
    for fa, fs in zip(fb.frames, st.frames):
        rho_a = np.abs(fa.state.psi.values) ** 2
        rho_b = np.abs(fs.psi.values) ** 2
        assert np.max(np.abs(rho_a - rho_b)) < 1e-6


def test_harmonic_static_stays_coherent(harmonic):
    # the harmonic exception: no feedback needed for constant spread
    grid = suggest_grid(harmonic, q_reach_min=-1.5, q_reach_max=1.5, n=1024)
    period = 2.0 * np.pi
    conf = PropagatorConfig(dt=period / 16000, scheme="split-step", mode="static",
                            snapshot_stride=800)
    st0 = gcs_from_model(harmonic, grid, ClassicalPoint(1.0, 0.0))
    run = evolve_static(st0, harmonic, conf, period)
    dq2_0 = run.records[0].dq2
    for rec in run.records:
        assert abs(rec.dq2 / dq2_0 - 1.0) < 1e-7


def test_feedback_morse_short_run(morse, morse_run_grid):
    e_cl = 0.2 * morse.well_depth
    p0 = momentum_for_energy(morse, e_cl, 0.0)
    period = classical_period(morse, e_cl)
    conf = PropagatorConfig(dt=period / 2000, scheme="split-step",
                            mode="feedback", snapshot_stride=100)
    run = evolve_feedback(morse, ClassicalPoint(0.0, p0), conf, period,
                          morse_run_grid)
    info = ground_moments(morse, morse_run_grid)
    dq2_0 = run.records[0].dq2
    q_by_t = {round(p.t, 12): p.Q for p in run.trajectory.points}
    for rec in run.records:
        assert abs(rec.dq2 / dq2_0 - 1.0) < 1e-4
        assert abs(rec.q_mean - info.q0 - q_by_t[round(rec.t, 12)]) < 1e-4 * morse.dq
        assert abs(rec.norm - 1.0) < 1e-10


def test_static_morse_spreads(morse):
    # displaced packet in the frozen well loses its shape within a few
    # periods; no closed-form value exists, assert the floor
    grid = suggest_grid(morse, q_reach_min=-3.0, q_reach_max=12.0, n=2560)
    e_ref = 0.2 * morse.well_depth
    period = classical_period(morse, e_ref)
    conf = PropagatorConfig(dt=period / 1000, scheme="split-step", mode="static",
                            snapshot_stride=100)
    # one period is plenty: the displaced packet at this energy spreads by
    # 35% of its variance within a fifth of a period, and its fast halo
    # reaches any desk-scale grid edge shortly after one period
    st0 = gcs_from_model(morse, grid, ClassicalPoint(morse.dq, 0.0))
    run = evolve_static(st0, morse, conf, period)
    dq2_0 = run.records[0].dq2
    rel = [abs(r.dq2 / dq2_0 - 1.0) for r in run.records]
    assert max(rel) > 0.05


def test_snapshot_cadence(morse, morse_run_grid):
    conf = PropagatorConfig(dt=1e-3, scheme="crank-nicolson", mode="feedback",
                            snapshot_stride=7)
    run = evolve_feedback(morse, ClassicalPoint(0.0, 0.1), conf, 25e-3,
                          morse_run_grid)
    steps = [int(round(f.diagnostics.t / 1e-3)) for f in run.frames]
    assert steps == [0, 7, 14, 21, 25]  # stride plus the forced final step
    assert len(run.trajectory.points) == 26


def test_unitarity_alarm_fires(morse, morse_run_grid):
    tol = DEFAULT_TOLERANCES.replacing(unitarity_drift=1e-16)
    conf = PropagatorConfig(dt=1e-3, scheme="split-step", mode="feedback")
    with pytest.raises(UnitarityError):
        evolve_feedback(morse, ClassicalPoint(0.0, 0.1), conf, 0.1,
                        morse_run_grid, tol)


def test_coverage_precheck_fails_before_stepping(morse):
    # trajectory reaches beyond what this grid can hold: fail fast
    small = Grid(-2.0, 6.0, 256)
    e_cl = 0.9 * morse.well_depth
    p0 = momentum_for_energy(morse, e_cl, 0.0)
    conf = PropagatorConfig(dt=1e-3, scheme="split-step", mode="feedback")
    with pytest.raises(CoverageError):
        evolve_feedback(morse, ClassicalPoint(0.0, p0), conf, 1.0, small)


def test_unbounded_initial_point_escapes(morse, morse_run_grid):
    conf = PropagatorConfig(dt=1e-3, scheme="split-step", mode="feedback")
    with pytest.raises(EscapeError):
        evolve_feedback(morse, ClassicalPoint(0.0, 10.0), conf, 1.0,
                        morse_run_grid)
