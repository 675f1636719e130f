"""The classical layer: center potential, force law, trajectory integration.

The potential felt by the wave-packet center is read off the reconstructed
V(x, t): expanding it in powers of x isolates an overall linear coefficient

    a(t) = -dP/dt + [linear part of the curvature term],

and requiring a(t) = 0 yields the autonomous center equation

    dP/dt = F_cl(Q) = -d V_class / dQ.

For the Morse well the center potential is the mirror image of the original,
V_class(Q) = U0 (1 - exp(+aQ))^2 = V(-Q); for symmetric wells it coincides
with the original potential.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_interp_spline

from .displacement import ClassicalPoint
from .errors import EscapeError, ExtractionError
from .grids import Grid
from .models import PotentialModel
from .tolerances import DEFAULT_TOLERANCES, Tolerances

_EXP_CAP = 350.0


@dataclass(frozen=True)
class Trajectory:
    """Velocity-Verlet trajectory of the wave-packet center.

    points[i] is the state at t = i * dt; forces[i] the force evaluated at
    points[i].Q, aligned for downstream potential assembly.
    """

    points: tuple
    forces: np.ndarray
    dt: float

    def __len__(self):
        return len(self.points)

    @property
    def t(self) -> np.ndarray:
        return np.array([p.t for p in self.points])

    @property
    def q(self) -> np.ndarray:
        return np.array([p.Q for p in self.points])

    @property
    def p(self) -> np.ndarray:
        return np.array([p.P for p in self.points])

    def energy(self, model: PotentialModel) -> np.ndarray:
        return self.p**2 / (2.0 * model.mass) + v_class(model, self.q)


def classical_force(model: PotentialModel, q):
    """dP/dt = -dV_class/dQ at center displacement q."""
    q = np.asarray(q, dtype=np.float64)
    if model.kind == "harmonic":
        f = -model.mass * model.omega**2 * q
    else:
        a = model.a
        u0 = model.well_depth
        e1 = np.exp(np.minimum(a * q, _EXP_CAP))
        e2 = np.exp(np.minimum(2.0 * a * q, _EXP_CAP))
        f = 2.0 * a * u0 * (e1 - e2)
    return f if f.ndim else float(f)


def v_class(model: PotentialModel, q):
    """Center potential: mirror Morse well, or the harmonic well itself."""
    q = np.asarray(q, dtype=np.float64)
    if model.kind == "harmonic":
        v = 0.5 * model.mass * model.omega**2 * q * q
    else:
        e = np.exp(np.minimum(model.a * q, _EXP_CAP))
        v = model.well_depth * (1.0 - e) ** 2
    return v if v.ndim else float(v)


def linear_coefficient(
    model: PotentialModel,
    point: ClassicalPoint,
    dPdt: float,
    grid: Grid | None = None,
    method: str = "analytic",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Coefficient of the term linear in x of the assembled V(x, t).

    method="analytic" evaluates the closed form a(t) = F_cl(Q) - dP/dt.
    method="fit" extracts it from the assembled potential samples: the
    linear Taylor coefficient at the expansion point x = 0 is the slope
    there, read off a quintic spline through the samples in a window around
    the origin. Both evaluators agree to ~1e-10 relative on adequate grids.
    """
    if method == "analytic":
        return float(classical_force(model, point.Q)) - dPdt
    if method != "fit":
        raise ValueError(f"unknown method {method!r}")
    if grid is None:
        raise ExtractionError("numeric extraction needs a grid")

    from .hydrodynamics import assemble_potential

    snap = assemble_potential(model, point, dPdt, grid, tol=tol)
    x = grid.points
    half = tol.linear_fit_window * model.dq
    window = np.abs(x) <= half
    if int(np.count_nonzero(window)) < 12:
        raise ExtractionError(
            f"fit window |x| <= {half:g} holds {int(np.count_nonzero(window))} "
            "samples; need at least 12"
        )
    if not (x[window][0] < 0.0 < x[window][-1]):
        raise ExtractionError("expansion point x = 0 not inside the fit window")
    try:
        spline = make_interp_spline(x[window], snap.V.values[window], k=5)
    except Exception as exc:  # singular collocation, duplicated knots
        raise ExtractionError(f"spline fit failed: {exc}") from exc
    return float(spline.derivative()(0.0))


def classical_period(model: PotentialModel, e_cl: float = 0.0) -> float:
    """Period of the bounded center orbit at classical energy e_cl.

    Harmonic motion is isochronous; the Morse period stretches as
    1 / sqrt(1 - E/U0) and diverges at the dissociation energy.
    """
    if model.kind == "harmonic":
        return 2.0 * math.pi / model.omega
    u0 = model.well_depth
    if not 0.0 <= e_cl < u0:
        raise EscapeError(
            f"no bounded Morse orbit at E = {e_cl:g} (well depth {u0:g})"
        )
    omega0 = model.a * math.sqrt(2.0 * u0 / model.mass)
    return 2.0 * math.pi / (omega0 * math.sqrt(1.0 - e_cl / u0))


def momentum_for_energy(model: PotentialModel, e_cl: float, q0: float = 0.0) -> float:
    """P0 >= 0 such that P0^2/2m + V_class(q0) = e_cl."""
    kin = e_cl - float(v_class(model, q0))
    if kin < 0.0:
        raise EscapeError(
            f"V_class({q0:g}) = {float(v_class(model, q0)):g} exceeds E = {e_cl:g}"
        )
    return math.sqrt(2.0 * model.mass * kin)


def turning_points(model: PotentialModel, e_cl: float) -> tuple[float, float]:
    """Center-orbit turning points (Q_min, Q_max) at energy e_cl."""
    if model.kind == "harmonic":
        amp = math.sqrt(2.0 * e_cl / (model.mass * model.omega**2))
        return -amp, amp
    u0 = model.well_depth
    if not 0.0 <= e_cl < u0:
        raise EscapeError(f"no bounded Morse orbit at E = {e_cl:g}")
    r = math.sqrt(e_cl / u0)
    # mirror well: bounded branch has exp(aQ) in (1 - r, 1 + r)
    return math.log(1.0 - r) / model.a, math.log(1.0 + r) / model.a


def integrate_trajectory(
    model: PotentialModel,
    q0: float,
    p0: float,
    dt: float,
    steps: int,
    q_bounds: tuple[float, float] | None = None,
) -> Trajectory:
    """Velocity-Verlet integration of the center equation.

    Symplectic, second order; records the force at every stored point.
    Raises EscapeError for unbounded Morse initial data (E >= U0) and, when
    q_bounds is given, as soon as Q leaves that interval.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    e_cl = p0 * p0 / (2.0 * model.mass) + float(v_class(model, q0))
    if model.kind == "morse" and e_cl >= model.well_depth:
        raise EscapeError(
            f"unbounded Morse orbit: E = {e_cl:g} >= U0 = {model.well_depth:g}"
        )

    m = model.mass
    q, p = float(q0), float(p0)
    f = float(classical_force(model, q))
    points = [ClassicalPoint(Q=q, P=p, t=0.0)]
    forces = [f]
    for s in range(steps):
        p_half = p + 0.5 * dt * f
        q = q + dt * p_half / m
        f = float(classical_force(model, q))
        p = p_half + 0.5 * dt * f
        if q_bounds is not None and not (q_bounds[0] <= q <= q_bounds[1]):
            raise EscapeError(
                f"trajectory left [{q_bounds[0]:g}, {q_bounds[1]:g}] at Q = {q:g}",
                step=s + 1,
            )
        points.append(ClassicalPoint(Q=q, P=p, t=(s + 1) * dt))
        forces.append(f)
    return Trajectory(points=tuple(points), forces=np.array(forces), dt=dt)
