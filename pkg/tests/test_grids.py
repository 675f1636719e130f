import numpy as np
import pytest

from gcsdyn import (
    ComplexField,
    Grid,
    InvalidFieldError,
    NormalizationError,
    RealField,
    boundary_mass,
    expectation,
    first_derivative,
    integrate,
    normalized,
    second_derivative,
)


def test_grid_invariants():
    g = Grid(-1.0, 1.0, 33)
    assert g.dx * (g.n - 1) == pytest.approx(g.x_max - g.x_min, abs=0.0)
    assert g.points[0] == -1.0 and g.points[-1] == 1.0
    with pytest.raises(InvalidFieldError):
        Grid(1.0, -1.0, 33)
    with pytest.raises(InvalidFieldError):
        Grid(-1.0, 1.0, 8)


def test_field_validation():
    g = Grid(-1.0, 1.0, 17)
    with pytest.raises(InvalidFieldError):
        RealField(g, np.zeros(16))
    bad = np.zeros(17)
    bad[3] = np.nan
    with pytest.raises(InvalidFieldError):
        RealField(g, bad)
    fld = RealField(g, np.ones(17))
    with pytest.raises(ValueError):
        fld.values[0] = 2.0  # immutable


def test_spectral_second_derivative_eigenfunction():
    # period-matched grid: points cover one period minus the wrap sample
    n = 256
    g = Grid(0.0, 2.0 * np.pi * (n - 1) / n, n)
    k = 3.0
    f = RealField(g, np.sin(k * g.points))
    d2 = second_derivative(f, method="spectral")
    assert np.max(np.abs(d2.values + k * k * f.values)) < 1e-10


@pytest.mark.parametrize("method", ["spectral", "central-5pt"])
def test_second_derivative_constant_is_zero(method):
    g = Grid(-3.0, 3.0, 128)
    d2 = second_derivative(RealField(g, np.full(g.n, 2.5)), method=method)
    # zero up to summation roundoff amplified by 1/dx^2 at the edge rows
    roundoff = 100.0 * np.finfo(float).eps * 2.5 / g.dx**2
    assert np.max(np.abs(d2.values)) < max(1e-12, roundoff)


def test_second_derivative_gaussian_closed_form():
    # oracle: d2/dx2 exp(-x^2/2) = (x^2 - 1) exp(-x^2/2)
    g = Grid(-10.0, 10.0, 512)
    x = g.points
    f = np.exp(-0.5 * x * x)
    expected = (x * x - 1.0) * f
    d2 = second_derivative(RealField(g, f), method="spectral")
    assert np.max(np.abs(d2.values - expected)) < 1e-8


def test_stencil_vs_spectral_on_decaying_field():
    g = Grid(-12.0, 12.0, 1024)
    f = RealField(g, np.exp(-0.5 * g.points**2))
    a = second_derivative(f, method="spectral").values
    b = second_derivative(f, method="central-5pt").values
    # 5-point stencil is 4th order; agreement at the O(dx^4) scale
    assert np.max(np.abs(a - b)) < 10.0 * g.dx**4


def test_first_derivative_linear_exact():
    g = Grid(-2.0, 5.0, 64)
    d1 = first_derivative(RealField(g, 3.0 * g.points - 1.0), method="central-5pt")
    assert np.max(np.abs(d1.values - 3.0)) < 1e-11


def test_integrate_constant_exact():
    g = Grid(0.0, 1.0, 101)
    assert integrate(RealField(g, np.ones(g.n))) == pytest.approx(1.0, abs=0.0)


def test_integrate_gaussian():
    # oracle: integral of exp(-x^2) over R is sqrt(pi); tails < 1e-28 at 8
    g = Grid(-8.0, 8.0, 401)
    val = integrate(RealField(g, np.exp(-g.points**2)))
    assert val == pytest.approx(np.sqrt(np.pi), abs=1e-10)


def test_integrate_linearity():
    g = Grid(-4.0, 4.0, 257)
    rng = np.random.default_rng(7)
    f = rng.standard_normal(g.n)
    h = rng.standard_normal(g.n)
    a, b = 2.25, -0.75
    lhs = integrate(RealField(g, a * f + b * h))
    rhs = a * integrate(RealField(g, f)) + b * integrate(RealField(g, h))
    assert lhs == pytest.approx(rhs, rel=1e-14, abs=1e-14)


def _gaussian_state(g, x0=0.0, k=0.0, sigma=1.0):
    x = g.points
    psi = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2)) * np.exp(1j * k * x)
    return normalized(ComplexField(g, psi))


def test_expectation_position_symmetry():
    g = Grid(-10.0, 10.0, 512)
    psi = _gaussian_state(g)
    assert abs(expectation(psi, "x")) < 1e-10


def test_expectation_momentum_plane_wave():
    # oracle: <p> of exp(ikx) * envelope is hbar k
    g = Grid(-12.0, 12.0, 768)
    k = 1.7
    psi = _gaussian_state(g, k=k)
    assert expectation(psi, "p", hbar=1.0) == pytest.approx(k, abs=1e-8)
    # result must be real by construction; hbar scaling linear
    assert expectation(psi, "p", hbar=2.0) == pytest.approx(2.0 * k, abs=2e-8)


def test_expectation_requires_normalization():
    g = Grid(-10.0, 10.0, 256)
    psi = ComplexField(g, np.exp(-0.5 * g.points**2))
    with pytest.raises(NormalizationError) as err:
        expectation(psi, "x")
    assert "norm" in str(err.value)


def test_boundary_mass_detects_edge_packets():
    g = Grid(-10.0, 10.0, 256)
    centered = np.exp(-g.points**2)
    centered /= integrate(RealField(g, centered))
    assert boundary_mass(centered, g) < 1e-12
    shifted = np.exp(-((g.points - 9.8) ** 2))
    shifted /= integrate(RealField(g, shifted))
    assert boundary_mass(shifted, g) > 1e-3
