"""Displaced ground states and their density/phase decomposition.

A label point (Q, P) displaces a real ground state psi0 into the boosted,
translated packet

    psi(x) = exp(-i P Q / 2 hbar) exp(i P x / hbar) psi0(x - Q),

whose density is the translated ground density and whose phase is linear,
S(x) = P x - P Q / 2. Q and P are, by construction, the position-mean shift
and the momentum mean of the packet; both are verified on every state built
here.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import make_interp_spline

from .errors import (
    CoverageError,
    DisplacementError,
    NormalizationError,
    PhaseUnwrapError,
)
from .grids import (
    ComplexField,
    Grid,
    RealField,
    boundary_mass,
    expectation,
    quadrature_weights,
)
from .models import PotentialModel, ground_state, ground_state_values
from .tolerances import DEFAULT_TOLERANCES, Tolerances

INVARIANT_TOL = 1e-6  # |<x> - q0 - Q| and |<p> - P| allowed on construction
NORM_SHIFT_TOL = 1e-8  # norm loss allowed in the translation itself


@dataclass(frozen=True)
class ClassicalPoint:
    """Wave-packet center label: coordinate displacement Q, momentum P, time t."""

    Q: float
    P: float
    t: float = 0.0

    def __post_init__(self):
        if not all(map(math.isfinite, (self.Q, self.P, self.t))):
            raise DisplacementError("classical point must be finite")


@dataclass(frozen=True)
class GCSState:
    """A displaced ground state with its label point.

    shift_method records how the translation was evaluated: "spectral",
    "quintic", "analytic", "none" (Q = 0), or "propagated" for states coming
    out of the time stepper. base_mean is the position mean of the
    undisplaced state (q0), so <x> = base_mean + Q.
    """

    psi: ComplexField
    point: ClassicalPoint
    model: PotentialModel | None = None
    shift_method: str = "none"
    base_mean: float = 0.0


def alpha_label(point: ClassicalPoint, hbar: float = 1.0) -> complex:
    """Bookkeeping label sqrt(2 hbar) (Q + i P); never used in numerics."""
    return math.sqrt(2.0 * hbar) * complex(point.Q, point.P)


def _translate_spectral(values: np.ndarray, grid: Grid, shift: float) -> np.ndarray:
    n = grid.n
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=grid.dx)
    out = np.fft.ifft(np.fft.fft(values) * np.exp(-1j * k * shift))
    return out.real if not np.iscomplexobj(values) else out


def _translate_quintic(values: np.ndarray, grid: Grid, shift: float) -> np.ndarray:
    x = grid.points
    spline = make_interp_spline(x, values, k=5)
    xs = x - shift
    inside = (xs >= x[0]) & (xs <= x[-1])
    out = np.zeros_like(values)
    out[inside] = spline(xs[inside])
    return out


def displace(
    psi0: RealField,
    point: ClassicalPoint,
    hbar: float = 1.0,
    model: PotentialModel | None = None,
    translator: str = "auto",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GCSState:
    """Apply the displacement (Q, P) to a normalized real ground state.

    The translation psi0(x - Q) is evaluated spectrally when the field is
    decayed enough at the edges for the periodic embedding to be alias-free,
    and by quintic interpolation otherwise; the choice lands in the state's
    shift_method. The phase factors exp(-i P Q / 2 hbar) exp(i P x / hbar)
    are exact.

    Raises CoverageError when the shifted packet touches the grid boundary
    and DisplacementError when the constructed state fails its defining
    expectations <x> - q0 = Q, <p> = P.
    """
    grid = psi0.grid
    rho0 = psi0.values**2
    nrm0 = float(np.dot(quadrature_weights(grid), rho0))
    if abs(nrm0 - 1.0) > tol.norm:
        raise NormalizationError(nrm0, tol.norm, "base state")
    base_mean = float(np.dot(quadrature_weights(grid), grid.points * rho0))

    if translator == "auto":
        clean = boundary_mass(rho0, grid) <= tol.spectral_shift_mass
        translator = "spectral" if clean else "quintic"
    if point.Q == 0.0:
        shifted = psi0.values.copy()
        method = "none"
    elif translator == "spectral":
        shifted = _translate_spectral(psi0.values, grid, point.Q)
        method = "spectral"
    elif translator == "quintic":
        shifted = _translate_quintic(psi0.values, grid, point.Q)
        method = "quintic"
    else:
        raise ValueError(f"unknown translator {translator!r}")

    w = quadrature_weights(grid)
    shifted_norm = float(np.dot(w, shifted * shifted))
    if boundary_mass(shifted * shifted, grid) > tol.boundary_mass:
        raise CoverageError(
            f"displaced packet (Q = {point.Q:g}) touches the grid boundary"
        )
    if abs(shifted_norm - nrm0) > NORM_SHIFT_TOL:
        raise CoverageError(
            f"translation by Q = {point.Q:g} lost norm "
            f"({nrm0:.12g} -> {shifted_norm:.12g}); grid too small or aliased"
        )

    phase = np.exp(1j * (point.P * grid.points - 0.5 * point.P * point.Q) / hbar)
    state = GCSState(
        psi=ComplexField(grid, shifted * phase),
        point=point,
        model=model,
        shift_method=method,
        base_mean=base_mean,
    )
    _verify_state(state, hbar, tol)
    return state


def gcs_from_model(
    model: PotentialModel,
    grid: Grid,
    point: ClassicalPoint,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> GCSState:
    """Displaced ground state with the translation evaluated analytically.

    Preferred constructor when the closed-form ground state is available:
    re-evaluating psi0 at x - Q avoids any interpolation or aliasing error.
    """
    base = ground_state(model, grid, tol)  # also validates coverage at Q = 0
    w = quadrature_weights(grid)
    base_mean = float(np.dot(w, grid.points * base.values**2))

    shifted = ground_state_values(model, grid.points - point.Q)
    mass = float(np.dot(w, shifted * shifted))
    if boundary_mass(shifted * shifted / mass, grid) > tol.boundary_mass:
        raise CoverageError(
            f"displaced packet (Q = {point.Q:g}) touches the grid boundary"
        )
    shifted /= math.sqrt(mass)
    hbar = model.hbar
    phase = np.exp(1j * (point.P * grid.points - 0.5 * point.P * point.Q) / hbar)
    state = GCSState(
        psi=ComplexField(grid, shifted * phase),
        point=point,
        model=model,
        shift_method="analytic",
        base_mean=base_mean,
    )
    _verify_state(state, hbar, tol)
    return state


def _verify_state(state: GCSState, hbar: float, tol: Tolerances):
    x_mean = expectation(state.psi, "x", hbar=hbar, tol=tol)
    p_mean = expectation(state.psi, "p", hbar=hbar, tol=tol)
    dx_err = abs(x_mean - state.base_mean - state.point.Q)
    dp_err = abs(p_mean - state.point.P)
    if dx_err > INVARIANT_TOL or dp_err > INVARIANT_TOL:
        raise DisplacementError(
            f"displaced state off its label: |<x> - q0 - Q| = {dx_err:.3e}, "
            f"|<p> - P| = {dp_err:.3e}"
        )


@dataclass(frozen=True)
class PolarFields:
    """Density and unwrapped phase of a wavefunction.

    valid marks samples whose density exceeds the phase floor; outside it
    the phase is a linear extrapolation and carries no information.
    """

    rho: RealField
    S: RealField
    valid: np.ndarray


def density_phase(
    state: GCSState | ComplexField,
    hbar: float = 1.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
    on_ambiguity: str = "raise",
) -> PolarFields:
    """Polar decomposition psi = sqrt(rho) exp(i S / hbar).

    The phase is unwrapped from the density peak outward over the region
    where rho exceeds the phase floor (a fraction of its peak); below the
    floor it is extended linearly and flagged invalid. S is defined up to a
    global multiple of 2 pi hbar, anchored to the principal value at the
    peak. Jumps close to pi between adjacent valid samples are ambiguous:
    on_ambiguity="raise" aborts with PhaseUnwrapError, "mask" truncates the
    valid region at the offending jump instead (useful when decomposing
    heavily spread states for inspection).
    """
    if on_ambiguity not in ("raise", "mask"):
        raise ValueError(f"unknown ambiguity policy {on_ambiguity!r}")
    if isinstance(state, GCSState):
        psi = state.psi
        if state.model is not None:
            hbar = state.model.hbar
    else:
        psi = state
    grid = psi.grid
    rho = np.abs(psi.values) ** 2
    peak = int(np.argmax(rho))
    floor = tol.phase_floor * rho[peak]
    valid = rho > floor

    # restrict to the contiguous valid run containing the peak
    left = peak
    while left > 0 and valid[left - 1]:
        left -= 1
    right = peak
    while right < grid.n - 1 and valid[right + 1]:
        right += 1
    valid = np.zeros(grid.n, dtype=bool)
    valid[left : right + 1] = True

    raw = np.angle(psi.values)
    seg = raw[left : right + 1]
    d = np.diff(seg)
    d -= 2.0 * np.pi * np.round(d / (2.0 * np.pi))
    # jumps near pi are ambiguous, but only where the state carries
    # amplitude; tail samples hold numerical dust with random phases
    seg_rho = rho[left : right + 1]
    core = np.minimum(seg_rho[:-1], seg_rho[1:]) >= tol.phase_jump_floor * rho[peak]
    too_big = (np.abs(d) > 0.9 * np.pi) & core
    if np.any(too_big):
        if on_ambiguity == "raise":
            i = int(np.argmax(too_big))
            raise PhaseUnwrapError(left + i + 1, float(d[i]))
        # truncate the valid run at the nearest ambiguous jump on each side
        bad = np.flatnonzero(too_big)
        above = bad[bad >= peak - left]
        below = bad[bad < peak - left]
        if above.size:
            right = left + int(above[0])
        if below.size:
            left = left + int(below[-1]) + 1
        seg = raw[left : right + 1]
        d = np.diff(seg)
        d -= 2.0 * np.pi * np.round(d / (2.0 * np.pi))
        valid = np.zeros(grid.n, dtype=bool)
        valid[left : right + 1] = True
    s = np.zeros(grid.n)
    s_seg = np.concatenate(([seg[0]], seg[0] + np.cumsum(d)))
    # anchor the global branch to the principal value at the peak
    s_seg -= 2.0 * np.pi * np.round((s_seg[peak - left] - raw[peak]) / (2.0 * np.pi))
    s[left : right + 1] = s_seg

    # linear extension beyond the valid run
    if left > 0:
        slope = s[left + 1] - s[left] if right > left else 0.0
        s[:left] = s[left] - slope * np.arange(left, 0, -1)
    if right < grid.n - 1:
        slope = s[right] - s[right - 1] if right > left else 0.0
        s[right + 1 :] = s[right] + slope * np.arange(1, grid.n - right)

    return PolarFields(
        rho=RealField(grid, rho), S=RealField(grid, hbar * s), valid=valid
    )
