"""Unitary time stepping in two modes: feedback and static.

In feedback mode (the mechanism under study) the potential is rebuilt every
step around the advancing classical center, so the packet is carried without
spreading; in static mode the original potential stays frozen and serves as
the spreading baseline. The classical trajectory is autonomous: the quantum
mean is never fed back into it, diagnostics only compare the two.

Per step the coupling order is: classical half-kick, drift, half-kick
(velocity Verlet); the potential is then assembled at the time-centered
classical state (midpoint position and half-kicked momentum, with the force
evaluated at the midpoint) and the quantum step uses it. This keeps the
coupled loop second-order accurate in dt.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_banded

from .classical import Trajectory, classical_force, turning_points, v_class
from .diagnostics import DiagnosticsRecord, record
from .displacement import ClassicalPoint, GCSState, gcs_from_model
from .errors import CoverageError, PropagationError, UnitarityError
from .grids import (
    ComplexField,
    Grid,
    RealField,
    boundary_mass,
    quadrature_weights,
)
from .hydrodynamics import PotentialSnapshot, assemble_potential
from .models import (
    PotentialModel,
    ground_density_values,
    ground_energy,
    ground_moments,
    potential_value,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

SCHEMES = ("crank-nicolson", "split-step")
MODES = ("feedback", "static")


@dataclass(frozen=True)
class PropagatorConfig:
    """Time step, scheme, run mode, and snapshot cadence."""

    dt: float
    scheme: str = "crank-nicolson"
    mode: str = "feedback"
    snapshot_stride: int = 1

    def __post_init__(self):
        if self.dt <= 0.0:
            raise PropagationError("dt must be positive")
        if self.scheme not in SCHEMES:
            raise PropagationError(f"scheme must be one of {SCHEMES}")
        if self.mode not in MODES:
            raise PropagationError(f"mode must be one of {MODES}")
        if int(self.snapshot_stride) < 1:
            raise PropagationError("snapshot_stride must be >= 1")


class FeedbackFrame(NamedTuple):
    state: GCSState
    potential: PotentialSnapshot
    diagnostics: DiagnosticsRecord


class StaticFrame(NamedTuple):
    psi: ComplexField
    diagnostics: DiagnosticsRecord


@dataclass(frozen=True)
class RunResult:
    """A propagation run: snapshot frames plus the full classical trajectory."""

    frames: tuple
    trajectory: Trajectory
    grid: Grid
    model: PotentialModel
    config: PropagatorConfig

    @property
    def records(self) -> tuple:
        return tuple(f.diagnostics for f in self.frames)


@lru_cache(maxsize=16)
def _kinetic_phase(n: int, dx: float, dt: float, m: float, hbar: float) -> np.ndarray:
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    ph = np.exp(-1j * hbar * k * k * dt / (2.0 * m))
    ph.setflags(write=False)
    return ph


def _step_split(vals, v_vals, dt, dx, m, hbar):
    kin = _kinetic_phase(len(vals), dx, dt, m, hbar)
    half = np.exp(-0.5j * v_vals * dt / hbar)
    return half * np.fft.ifft(kin * np.fft.fft(half * vals))


def _step_cn(vals, v_vals, dt, dx, m, hbar):
    n = len(vals)
    theta = dt / (2.0 * hbar)
    off = -(hbar * hbar) / (2.0 * m * dx * dx)
    diag = (hbar * hbar) / (m * dx * dx) + v_vals
    h_psi = np.empty_like(vals)
    h_psi[1:-1] = off * (vals[:-2] + vals[2:]) + diag[1:-1] * vals[1:-1]
    h_psi[0] = diag[0] * vals[0] + off * vals[1]
    h_psi[-1] = diag[-1] * vals[-1] + off * vals[-2]
    rhs = vals - 1j * theta * h_psi
    ab = np.zeros((3, n), dtype=np.complex128)
    ab[0, 1:] = 1j * theta * off
    ab[1, :] = 1.0 + 1j * theta * diag
    ab[2, :-1] = 1j * theta * off
    try:
        return solve_banded((1, 1), ab, rhs)
    except Exception as exc:
        raise PropagationError(f"tridiagonal solve failed: {exc}") from exc


_STEPPERS = {"split-step": _step_split, "crank-nicolson": _step_cn}


def step(
    psi: ComplexField,
    V: RealField,
    dt: float,
    scheme: str = "crank-nicolson",
    m: float = 1.0,
    hbar: float = 1.0,
) -> ComplexField:
    """One unitary step of i hbar d_t psi = -(hbar^2/2m) psi'' + V psi.

    Crank-Nicolson: Cayley form, tridiagonal solve, unconditionally unitary
    to round-off (second order in dt and dx). Split-step: Strang splitting,
    spectral in space, second order in dt; in feedback mode the caller hands
    in V at the step's midpoint time.
    """
    if psi.grid != V.grid:
        raise PropagationError("psi and V live on different grids")
    if scheme not in _STEPPERS:
        raise PropagationError(f"scheme must be one of {SCHEMES}")
    out = _STEPPERS[scheme](psi.values, V.values, dt, psi.grid.dx, m, hbar)
    return ComplexField(psi.grid, out)


def _potential_cap(grid: Grid, m: float, hbar: float) -> float:
    """Kinetic ceiling of the grid: hbar^2 k_max^2 / 2m.

    Potential values above it are dynamically unresolvable; inside the
    evolution loops V is clamped there so the phase factor cannot scramble
    round-off amplitude in regions the packet never reaches (the inner
    Morse wall grows like exp(2a|x|) and would otherwise rotate by ~1e8
    radians per step).
    """
    k_max = np.pi / grid.dx
    return hbar**2 * k_max**2 / (2.0 * m)


def _check_monitors(vals, grid, w, step_index, tol):
    nrm = float(np.dot(w, np.abs(vals) ** 2))
    if abs(nrm - 1.0) > tol.unitarity_drift:
        raise UnitarityError(
            f"norm drifted to {nrm:.12g} at step {step_index}"
        )
    rho = np.abs(vals) ** 2
    bm = boundary_mass(rho, grid)
    if bm > tol.boundary_mass:
        raise CoverageError(
            f"packet reached the grid boundary at step {step_index} "
            f"(edge mass {bm:.3e})"
        )


def _precheck_coverage(model, grid, q_lo, q_hi, tol):
    w = quadrature_weights(grid)
    for q in (q_lo, q_hi):
        ref = ground_density_values(model, grid.points - q)
        ref = ref / float(np.dot(w, ref))
        if boundary_mass(ref, grid) > tol.boundary_mass:
            raise CoverageError(
                f"grid does not cover the classical trajectory (packet at "
                f"Q = {q:g} touches the boundary)"
            )


def evolve_feedback(
    model: PotentialModel,
    point0: ClassicalPoint,
    config: PropagatorConfig,
    T: float,
    grid: Grid,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RunResult:
    """Propagate the displaced ground state with the self-adjusting potential.

    Every step advances (Q, P) by one Verlet step, rebuilds V(x, t) at the
    time-centered classical state, and advances psi one quantum step in it.
    Snapshot frames (state, potential, diagnostics) are emitted every
    snapshot_stride steps, always including the initial and final ones.
    Cheap monitors (norm drift, boundary mass) run every step.
    """
    if T <= 0.0:
        raise PropagationError("T must be positive")
    nsteps = max(1, int(round(T / config.dt)))
    dt = config.dt
    m, hbar = model.mass, model.hbar

    e_cl = point0.P**2 / (2.0 * m) + float(v_class(model, point0.Q))
    q_lo, q_hi = turning_points(model, e_cl)
    _precheck_coverage(model, grid, q_lo, q_hi, tol)

    state0 = gcs_from_model(model, grid, point0, tol)
    info = ground_moments(model, grid)
    w = quadrature_weights(grid)
    stepper = _STEPPERS[config.scheme]
    v_cap = _potential_cap(grid, m, hbar)

    vals = state0.psi.values.copy()
    q, p = point0.Q, point0.P
    f = float(classical_force(model, q))
    points = [ClassicalPoint(Q=q, P=p, t=0.0)]
    forces = [f]
    frames = []

    def emit(step_index, vals, q, p, f):
        pt = ClassicalPoint(Q=q, P=p, t=step_index * dt)
        snap = assemble_potential(model, pt, f, grid, tol=tol)
        st = GCSState(
            psi=ComplexField(grid, vals),
            point=pt,
            model=model,
            shift_method="analytic" if step_index == 0 else "propagated",
            base_mean=info.q0,
        )
        frames.append(FeedbackFrame(st, snap, record(st, model, pt, snap, tol)))

    emit(0, vals, q, p, f)
    for s in range(1, nsteps + 1):
        p_half = p + 0.5 * dt * f
        q_new = q + dt * p_half / m
        q_mid = 0.5 * (q + q_new)
        f_mid = float(classical_force(model, q_mid))
        f_new = float(classical_force(model, q_new))
        p_new = p_half + 0.5 * dt * f_new

        mid_point = ClassicalPoint(Q=q_mid, P=p_half, t=(s - 0.5) * dt)
        snap_mid = assemble_potential(model, mid_point, f_mid, grid, tol=tol)
        vals = stepper(vals, np.minimum(snap_mid.V.values, v_cap), dt,
                       grid.dx, m, hbar)

        q, p, f = q_new, p_new, f_new
        points.append(ClassicalPoint(Q=q, P=p, t=s * dt))
        forces.append(f)
        _check_monitors(vals, grid, w, s, tol)
        if s % config.snapshot_stride == 0 or s == nsteps:
            emit(s, vals, q, p, f)

    traj = Trajectory(points=tuple(points), forces=np.array(forces), dt=dt)
    return RunResult(
        frames=tuple(frames), trajectory=traj, grid=grid, model=model, config=config
    )


def evolve_static(
    state0: GCSState,
    model: PotentialModel,
    config: PropagatorConfig,
    T: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> RunResult:
    """Propagate a displaced state in the frozen original potential.

    The spreading baseline. Diagnostics carry the same record fields as
    feedback mode, but the overlap reference is anchored to the measured
    packet center (q_mean - q0) rather than to a classical orbit: the
    mirror-well reference orbit is unbounded for displacements beyond
    ln2/a, so it can leave any finite grid, and the shape-anchored
    comparison is the conservative baseline (static runs degrade only
    through true shape distortion). The autonomous center trajectory is
    still integrated and returned for twin-run comparisons. The diagnostics
    potential carries the at-rest assembled convention (V_model - E0);
    propagation itself uses the plain model potential clamped at the grid's
    kinetic ceiling (densities are offset-invariant).
    """
    if T <= 0.0:
        raise PropagationError("T must be positive")
    grid = state0.psi.grid
    nsteps = max(1, int(round(T / config.dt)))
    dt = config.dt
    m, hbar = model.mass, model.hbar

    v_run = np.minimum(
        potential_value(model, grid.points), _potential_cap(grid, m, hbar)
    )
    v_diag = RealField(
        grid, potential_value(model, grid.points) - ground_energy(model)
    )
    w = quadrature_weights(grid)
    stepper = _STEPPERS[config.scheme]
    info = ground_moments(model, grid)
    x = grid.points

    vals = state0.psi.values.copy()
    q, p = state0.point.Q, state0.point.P
    f = float(classical_force(model, q))
    points = [ClassicalPoint(Q=q, P=p, t=0.0)]
    forces = [f]
    frames = []

    def emit(step_index, vals, q, p, f):
        # reference point anchored at the measured center
        rho = np.abs(vals) ** 2
        nrm = float(np.dot(w, rho))
        q_meas = float(np.dot(w, x * rho)) / nrm - info.q0
        dpsi = np.gradient(vals, grid.dx)
        p_meas = hbar * float(np.dot(w, np.imag(np.conj(vals) * dpsi))) / nrm
        pt = ClassicalPoint(Q=q_meas, P=p_meas, t=step_index * dt)
        f_ref = float(classical_force(model, q_meas))
        snap = PotentialSnapshot(V=v_diag, point=pt, dPdt=f_ref, dQdt=p_meas / m)
        psi_field = ComplexField(grid, vals)
        frames.append(
            StaticFrame(psi_field, record(psi_field, model, pt, snap, tol))
        )

    emit(0, vals, q, p, f)
    for s in range(1, nsteps + 1):
        p_half = p + 0.5 * dt * f
        q_new = q + dt * p_half / m
        f_new = float(classical_force(model, q_new))
        p_new = p_half + 0.5 * dt * f_new

        vals = stepper(vals, v_run, dt, grid.dx, m, hbar)

        q, p, f = q_new, p_new, f_new
        points.append(ClassicalPoint(Q=q, P=p, t=s * dt))
        forces.append(f)
        _check_monitors(vals, grid, w, s, tol)
        if s % config.snapshot_stride == 0 or s == nsteps:
            emit(s, vals, q, p, f)

    traj = Trajectory(points=tuple(points), forces=np.array(forces), dt=dt)
    return RunResult(
        frames=tuple(frames), trajectory=traj, grid=grid, model=model, config=config
    )
