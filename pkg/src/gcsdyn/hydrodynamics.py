"""Hydrodynamic machinery: quantum curvature, potential assembly, residuals.

Writing psi = sqrt(rho) exp(i S / hbar) splits the Schroedinger equation
into a continuity equation for rho,

    d_t rho + (1/m) d_x (rho d_x S) = 0,

and a Hamilton-Jacobi equation for S with a quantum term,

    d_t S + (d_x S)^2 / 2m - (hbar^2 / 2m) (sqrt(rho))'' / sqrt(rho) = -V.

For a displaced ground density rho(x - Q) with linear phase S = P x - P Q/2,
both hold exactly when the potential is rebuilt around the moving center:

    V(x, t) = (hbar^2 / 2m) F(x - Q) - (dP/dt) x - P^2 / 2m
              + ((dQ/dt) P + (dP/dt) Q) / 2,

with F = (sqrt(rho))'' / sqrt(rho) and the kinematic closure dQ/dt = P / m
(forced by the continuity equation; asserted in tests, not assumed
silently). For ground densities the curvature term equals V(xi) - E0
pointwise, which is how the assembled potential is evaluated analytically.
"""

import math
from dataclasses import dataclass

import numpy as np

from .displacement import ClassicalPoint
from .errors import CoverageError, InvalidFieldError, NodeError, NormalizationError
from .grids import (
    Grid,
    RealField,
    _derivative_arrays,
    boundary_mass,
    integrate,
    quadrature_weights,
)
from .models import (
    PotentialModel,
    ground_density_values,
    ground_energy,
    potential_value,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances


@dataclass(frozen=True)
class CurvatureResult:
    """Quantum curvature F with its evaluation mask.

    Outside `valid` (density below the curvature floor) F is clamped to its
    last evaluated value; those samples carry no information.
    """

    F: RealField
    valid: np.ndarray


@dataclass(frozen=True)
class PotentialSnapshot:
    """The reconstructed potential at one instant of the classical motion."""

    V: RealField
    point: ClassicalPoint
    dPdt: float
    dQdt: float


def quantum_curvature(
    rho: RealField, tol: Tolerances = DEFAULT_TOLERANCES
) -> CurvatureResult:
    """F = (sqrt(rho))'' / sqrt(rho), clamped where the density underflows.

    Evaluated in log space, F = g'' + (g')^2 with g = ln(rho) / 2, which is
    the same quantity but does not amplify the tail where rho spans many
    decades. Densities with interior zeros (nodes) are rejected; displaced
    ground densities are nodeless.
    """
    vals = rho.values
    if np.any(vals < 0.0):
        worst = float(vals.min())
        if worst < -1e-14 * float(vals.max()):
            raise InvalidFieldError(f"density has negative samples (min {worst:.3e})")
        vals = np.maximum(vals, 0.0)
    mass = integrate(RealField(rho.grid, vals))
    if abs(mass - 1.0) > tol.norm:
        raise NormalizationError(mass, tol.norm, "density")

    peak = float(vals.max())
    mask = vals > tol.curvature_floor * peak
    idx = np.flatnonzero(mask)
    if idx.size < 6:
        raise InvalidFieldError("density above the curvature floor on < 6 samples")
    i0, i1 = int(idx[0]), int(idx[-1])
    if not np.all(mask[i0 : i1 + 1]):
        hole = i0 + int(np.argmin(mask[i0 : i1 + 1]))
        raise NodeError(f"density vanishes in the interior near sample {hole}")

    f_seg = _log_curvature_segment(vals, rho.grid.dx, i0, i1)
    f = np.empty(rho.grid.n)
    f[i0 : i1 + 1] = f_seg
    f[:i0] = f_seg[0]
    f[i1 + 1 :] = f_seg[-1]
    valid = np.zeros(rho.grid.n, dtype=bool)
    valid[i0 : i1 + 1] = True
    return CurvatureResult(F=RealField(rho.grid, f), valid=valid)


def _log_curvature_segment(vals: np.ndarray, dx: float, i0: int, i1: int) -> np.ndarray:
    g = 0.5 * np.log(vals[i0 : i1 + 1])
    g1 = _derivative_arrays(g, dx, 1, "5pt")
    g2 = _derivative_arrays(g, dx, 2, "5pt")
    return g2 + g1 * g1


def _peak_segment(vals: np.ndarray, floor: float) -> tuple[int, int]:
    """Contiguous run above `floor` containing the density peak."""
    peak = int(np.argmax(vals))
    above = vals > floor
    i0 = peak
    while i0 > 0 and above[i0 - 1]:
        i0 -= 1
    i1 = peak
    while i1 < len(vals) - 1 and above[i1 + 1]:
        i1 += 1
    return i0, i1


def assemble_potential(
    model: PotentialModel,
    point: ClassicalPoint,
    dPdt: float,
    grid: Grid,
    curvature: str = "analytic",
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> PotentialSnapshot:
    """Build V(x, t) for the classical state (Q, P, dP/dt).

    curvature="analytic" evaluates the curvature term through the identity
    (hbar^2/2m) F(xi) = V_model(xi) - E0; curvature="numeric" differentiates
    the translated ground density instead and exists as a cross-check.
    """
    x = grid.points
    xi = x - point.Q
    rho_shift = ground_density_values(model, xi)
    w = quadrature_weights(grid)
    mass = float(np.dot(w, rho_shift))
    if boundary_mass(rho_shift / mass, grid) > tol.boundary_mass:
        raise CoverageError(
            f"density shifted by Q = {point.Q:g} leaves the grid"
        )

    if curvature == "analytic":
        curv = potential_value(model, xi) - ground_energy(model)
    elif curvature == "numeric":
        res = quantum_curvature(RealField(grid, rho_shift / mass), tol)
        curv = (model.hbar**2 / (2.0 * model.mass)) * res.F.values
    else:
        raise ValueError(f"unknown curvature evaluation {curvature!r}")

    dQdt = point.P / model.mass
    v = (
        curv
        - dPdt * x
        - point.P**2 / (2.0 * model.mass)
        + 0.5 * (dQdt * point.P + dPdt * point.Q)
    )
    return PotentialSnapshot(
        V=RealField(grid, v), point=point, dPdt=float(dPdt), dQdt=dQdt
    )


def continuity_residual(
    rho_t: RealField, rho: RealField, S: RealField, m: float
) -> float:
    """L2 norm of d_t rho + (1/m) d_x (rho d_x S), relative to ||d_t rho||.

    Falls back to the absolute norm when d_t rho vanishes identically.
    Derivatives use the 5-point stencils; the flux rho * d_x S decays with
    the density, so no periodic embedding is needed.
    """
    grid = rho.grid
    dx = grid.dx
    flux = rho.values * _derivative_arrays(S.values, dx, 1, "5pt")
    r = rho_t.values + _derivative_arrays(flux, dx, 1, "5pt") / m
    w = quadrature_weights(grid)
    num = math.sqrt(float(np.dot(w, r * r)))
    den = math.sqrt(float(np.dot(w, rho_t.values**2)))
    if den == 0.0:
        return num
    return num / den


def hjm_residual(
    S_t: RealField,
    S: RealField,
    rho: RealField,
    V: RealField,
    m: float,
    hbar: float,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Density-weighted residual of the phase equation.

    Residual r = d_t S + (d_x S)^2 / 2m - (hbar^2/2m) F + V, reported as
    sqrt(int rho r^2) / sqrt(int rho V^2). The support is the contiguous
    region around the density peak where rho exceeds the residual floor;
    deeper tails of measured states hold numerical dust whose
    differentiated phase would dominate the norm.
    """
    grid = rho.grid
    vals = np.maximum(rho.values, 0.0)
    peak = float(vals.max())
    i0, i1 = _peak_segment(vals, tol.residual_floor * peak)
    if i1 - i0 < 6:
        raise InvalidFieldError("density above the residual floor on < 6 samples")
    sl = slice(i0, i1 + 1)

    curv = _log_curvature_segment(vals, grid.dx, i0, i1)
    s_x = _derivative_arrays(S.values[sl], grid.dx, 1, "5pt")
    r = (
        S_t.values[sl]
        + s_x * s_x / (2.0 * m)
        - (hbar**2 / (2.0 * m)) * curv
        + V.values[sl]
    )
    w = quadrature_weights(grid)[sl] * vals[sl]
    num = math.sqrt(float(np.dot(w, r * r)))
    den = math.sqrt(float(np.dot(w, V.values[sl] ** 2)))
    if den == 0.0:
        return num
    return num / den
