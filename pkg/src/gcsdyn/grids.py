"""Uniform 1-D grid, sampled fields, and discrete calculus.

Everything downstream (ground states, displaced packets, potentials,
propagation) lives on the uniform grid defined here. Fields are immutable
value objects; the operations are pure functions.

Boundary handling: fields are assumed negligible at the grid edges. The
spectral second derivative embeds the field periodically (period n*dx), so
it must only be used on fields that decay at both ends; the 5-point stencils
use one-sided closures of matching order and are safe near the edges.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np

from .errors import InvalidFieldError, NormalizationError
from .tolerances import DEFAULT_TOLERANCES, Tolerances

BOUNDARY_POINTS = 5  # edge strip monitored by boundary_mass


@dataclass(frozen=True)
class Grid:
    """Uniform spatial lattice on [x_min, x_max] with n points.

    dx is derived: dx * (n - 1) == x_max - x_min to machine precision by
    construction (points come from np.linspace).
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)):
            raise InvalidFieldError("grid endpoints must be finite")
        if not self.x_max > self.x_min:
            raise InvalidFieldError(
                f"x_max ({self.x_max}) must exceed x_min ({self.x_min})"
            )
        if int(self.n) != self.n or self.n < 16:
            raise InvalidFieldError(f"grid needs n >= 16 points, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def points(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n)
        x.setflags(write=False)
        return x

    @property
    def length(self) -> float:
        return self.x_max - self.x_min


def _locked(values: np.ndarray) -> np.ndarray:
    values.setflags(write=False)
    return values


@dataclass(frozen=True)
class RealField:
    """Real samples on a Grid (density, phase, potential)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64, copy=True)
        if vals.shape != (self.grid.n,):
            raise InvalidFieldError(
                f"field has {vals.shape} samples, grid has {self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidFieldError("field contains non-finite samples")
        object.__setattr__(self, "values", _locked(vals))


@dataclass(frozen=True)
class ComplexField:
    """Complex samples on a Grid (wavefunction)."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != (self.grid.n,):
            raise InvalidFieldError(
                f"field has {vals.shape} samples, grid has {self.grid.n}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidFieldError("field contains non-finite samples")
        object.__setattr__(self, "values", _locked(vals))


# ---------------------------------------------------------------------------
# finite-difference stencils
# ---------------------------------------------------------------------------

def _fd_coefficients(offsets, order: int) -> np.ndarray:
    """Stencil weights for d^order/dx^order at offset 0 (unit spacing)."""
    offsets = np.asarray(offsets, dtype=np.float64)
    a = np.vander(offsets, increasing=True).T
    b = np.zeros(len(offsets))
    b[order] = math.factorial(order)
    c = np.linalg.solve(a, b)
    if order >= 1:
        c -= c.mean()  # derivative stencils annihilate constants exactly
    return c


# one-sided rows of matching order for the first points at each edge;
# row r uses offsets -r .. m-1-r, i.e. always the first m samples
_D1_5_EDGE = [_fd_coefficients(range(-r, 5 - r), 1) for r in range(2)]
_D2_5_EDGE = [_fd_coefficients(range(-r, 6 - r), 2) for r in range(2)]
_D1_7_EDGE = [_fd_coefficients(range(-r, 7 - r), 1) for r in range(3)]


def _edge_fill(out, vals, edge_rows, order):
    sign = -1.0 if order % 2 else 1.0
    rev = vals[::-1]
    for r, row in enumerate(edge_rows):
        m = len(row)
        out[r] = np.dot(row, vals[:m])
        out[-1 - r] = sign * np.dot(row, rev[:m])
    return out


def _derivative_arrays(vals: np.ndarray, dx: float, order: int, stencil: str):
    f = vals
    out = np.empty_like(f)
    if stencil == "5pt" and order == 1:
        out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / 12.0
        _edge_fill(out, f, _D1_5_EDGE, 1)
        return out / dx
    if stencil == "5pt" and order == 2:
        out[2:-2] = (
            -f[:-4] + 16.0 * f[1:-3] - 30.0 * f[2:-2] + 16.0 * f[3:-1] - f[4:]
        ) / 12.0
        _edge_fill(out, f, _D2_5_EDGE, 2)
        return out / dx**2
    if stencil == "7pt" and order == 1:
        out[3:-3] = (
            -f[:-6] + 9.0 * f[1:-5] - 45.0 * f[2:-4] + 45.0 * f[4:-2] - 9.0 * f[5:-1] + f[6:]
        ) / 60.0
        _edge_fill(out, f, _D1_7_EDGE, 1)
        return out / dx
    raise ValueError(f"unsupported stencil/order: {stencil!r}/{order}")


def _spectral_derivative(vals: np.ndarray, dx: float, order: int) -> np.ndarray:
    n = len(vals)
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=dx)
    out = np.fft.ifft((1j * k) ** order * np.fft.fft(vals))
    if not np.iscomplexobj(vals):
        return out.real
    return out


def _differentiate(fld, order: int, method: str):
    vals = fld.values
    dx = fld.grid.dx
    if method == "spectral":
        if np.iscomplexobj(vals):
            der = _spectral_derivative(vals, dx, order)
        else:
            der = _spectral_derivative(vals.astype(np.float64), dx, order)
    elif method == "central-5pt":
        if np.iscomplexobj(vals):
            der = _derivative_arrays(vals.real, dx, order, "5pt") + 1j * _derivative_arrays(
                vals.imag, dx, order, "5pt"
            )
        else:
            der = _derivative_arrays(vals, dx, order, "5pt")
    else:
        raise ValueError(f"unknown derivative method {method!r}")
    cls = ComplexField if np.iscomplexobj(vals) else RealField
    return cls(fld.grid, der)


def second_derivative(fld, method: str = "spectral"):
    """d^2 f / dx^2 on the same grid.

    method="spectral" assumes the field decays to ~0 at both boundaries
    (periodic embedding with period n*dx); "central-5pt" is fourth order
    with one-sided closures and has no such requirement.
    """
    return _differentiate(fld, 2, method)


def first_derivative(fld, method: str = "central-5pt"):
    """d f / dx on the same grid (same method options as second_derivative)."""
    return _differentiate(fld, 1, method)


# ---------------------------------------------------------------------------
# quadrature and expectation values
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _weights_cached(x_min: float, x_max: float, n: int) -> np.ndarray:
    dx = (x_max - x_min) / (n - 1)
    if n % 2 == 1:
        w = np.full(n, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        w *= dx / 3.0
    else:
        w = np.full(n, dx)
        w[0] = w[-1] = 0.5 * dx
    w.setflags(write=False)
    return w


def quadrature_weights(grid: Grid) -> np.ndarray:
    """Composite Simpson weights (n odd) or trapezoid weights (n even)."""
    return _weights_cached(grid.x_min, grid.x_max, grid.n)


def integrate(fld: RealField) -> float:
    """Quadrature of the field over [x_min, x_max]."""
    return float(np.dot(quadrature_weights(fld.grid), fld.values))


def norm_squared(psi: ComplexField) -> float:
    return float(np.dot(quadrature_weights(psi.grid), np.abs(psi.values) ** 2))


def normalized(psi):
    """Rescale a field so its density integrates to 1 on the grid."""
    w = quadrature_weights(psi.grid)
    if isinstance(psi, ComplexField):
        s = math.sqrt(float(np.dot(w, np.abs(psi.values) ** 2)))
        return ComplexField(psi.grid, psi.values / s)
    s = float(np.dot(w, psi.values))
    return RealField(psi.grid, psi.values / s)


def _check_normalized(psi: ComplexField, tol: float):
    nrm = norm_squared(psi)
    if abs(nrm - 1.0) > tol:
        raise NormalizationError(nrm, tol, "wavefunction")


def expectation(
    psi: ComplexField,
    weight: str,
    hbar: float = 1.0,
    tol: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Expectation value in a normalized state.

    weight: "x", "x2" (position moments via quadrature of x^k |psi|^2),
    "p" (hbar * Im integral psi* dpsi/dx), or "p2" (hbar^2 integral |dpsi/dx|^2).
    The wavefunction derivative uses a sixth-order local stencil so momentum
    moments stay accurate for strongly boosted packets.
    """
    _check_normalized(psi, tol.norm)
    w = quadrature_weights(psi.grid)
    x = psi.grid.points
    vals = psi.values
    if weight == "x":
        return float(np.dot(w, x * np.abs(vals) ** 2))
    if weight == "x2":
        return float(np.dot(w, x * x * np.abs(vals) ** 2))
    dx = psi.grid.dx
    dpsi = _derivative_arrays(vals.real, dx, 1, "7pt") + 1j * _derivative_arrays(
        vals.imag, dx, 1, "7pt"
    )
    if weight == "p":
        return float(hbar * np.dot(w, np.imag(np.conj(vals) * dpsi)))
    if weight == "p2":
        return float(hbar * hbar * np.dot(w, np.abs(dpsi) ** 2))
    raise ValueError(f"unknown expectation weight {weight!r}")


def boundary_mass(rho_values: np.ndarray, grid: Grid) -> float:
    """Probability mass within BOUNDARY_POINTS of either edge."""
    dx = grid.dx
    edge = float(np.sum(rho_values[:BOUNDARY_POINTS]) + np.sum(rho_values[-BOUNDARY_POINTS:]))
    return edge * dx


def density(psi: ComplexField) -> np.ndarray:
    return np.abs(psi.values) ** 2
