"""The runnable invariant suite behind `gcsdyn verify`.

Each check produces (name, value, threshold, pass/fail); a run passes only
if every check does. Cheap analytic identities run first; the propagation
checks are skipped when the grid cannot cover the configured trajectory
(that coverage check itself then reports the failure).
"""

import math
from dataclasses import dataclass

import numpy as np

from .classical import (
    classical_force,
    classical_period,
    integrate_trajectory,
    linear_coefficient,
    turning_points,
    v_class,
)
from .config import RunConfig
from .diagnostics import potential_slope_at
from .displacement import ClassicalPoint
from .errors import GcsdynError
from .grids import RealField, boundary_mass, integrate, quadrature_weights
from .hydrodynamics import (
    assemble_potential,
    continuity_residual,
    hjm_residual,
    quantum_curvature,
)
from .models import (
    ground_density_values,
    ground_energy,
    ground_moments,
    ground_state,
    potential_value,
    stationary_residual,
)
from .propagation import PropagatorConfig, evolve_feedback

MAX_VERIFY_STEPS = 20000


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name},{self.value:.6e},{self.threshold:.6e},{status}"


def _check(name, value, threshold):
    value = float(value)
    ok = math.isfinite(value) and value <= threshold
    return CheckResult(name=name, value=value, threshold=threshold, passed=ok)


def run_verification(cfg: RunConfig) -> list[CheckResult]:
    model, grid, tol = cfg.model, cfg.grid, cfg.tolerances
    x = grid.points
    w = quadrature_weights(grid)
    hbar, m = model.hbar, model.mass
    scale = model.well_depth if model.kind == "morse" else model.energy_scale
    results = []

    # coverage of the configured classical trajectory, before anything runs
    e_cl = cfg.p0_init**2 / (2.0 * m) + float(v_class(model, cfg.q0_init))
    try:
        q_lo, q_hi = turning_points(model, e_cl)
    except GcsdynError:
        q_lo = q_hi = cfg.q0_init
    bm = 0.0
    for q in (q_lo, q_hi, 0.0):
        ref = ground_density_values(model, x - q)
        ref = ref / float(np.dot(w, ref))
        bm = max(bm, boundary_mass(ref, grid))
    coverage = _check("grid_coverage", bm, tol.boundary_mass)
    results.append(coverage)

    # ground-state identities
    try:
        psi0 = ground_state(model, grid, tol)
        rho0 = RealField(grid, psi0.values**2)
        results.append(
            _check("ground_norm", abs(integrate(rho0) - 1.0), 1e-8)
        )
        results.append(
            _check("stationary_residual",
                   stationary_residual(model, grid, method="central-5pt"), 1e-6)
        )
        curv = quantum_curvature(rho0, tol)
        target = potential_value(model, x) - ground_energy(model)
        good = rho0.values > 1e-8 * float(rho0.values.max())
        dev = np.abs((hbar**2 / (2.0 * m)) * curv.F.values - target)[good].max()
        curv_tol = 1e-5 if model.kind == "morse" else 1e-6
        results.append(_check("curvature_identity", dev / scale, curv_tol))

        info = ground_moments(model, grid)
        results.append(
            _check("ground_spread", abs(info.dq2 / model.dq2 - 1.0), 1e-6)
        )
    except GcsdynError:
        if coverage.passed:
            raise
        return results

    # hydrodynamic identities at sampled displacements inside coverage
    reach = max(abs(q_lo), abs(q_hi), model.dq)
    q_samples = np.linspace(-reach, reach, 5)
    p_samples = np.linspace(-hbar / model.dq, hbar / model.dq, 3)
    hjm_worst = 0.0
    cont_worst = 0.0
    delta = 1e-3 * classical_period(model, 0.0) / (2.0 * math.pi)
    try:
        for q in q_samples:
            for p in p_samples:
                pt = ClassicalPoint(Q=float(q), P=float(p), t=0.0)
                dpdt = float(classical_force(model, q))
                snap = assemble_potential(model, pt, dpdt, grid, tol=tol)
                rho = ground_density_values(model, x - q)
                rho = RealField(grid, rho / float(np.dot(w, rho)))
                s = RealField(grid, p * x - 0.5 * p * q)
                s_t = RealField(grid, dpdt * x - 0.5 * (dpdt * q + p * p / m))
                hjm_worst = max(
                    hjm_worst, hjm_residual(s_t, s, rho, snap.V, m, hbar, tol)
                )
                qdot = p / m
                rp = ground_density_values(model, x - (q + qdot * delta))
                rm = ground_density_values(model, x - (q - qdot * delta))
                rp /= float(np.dot(w, rp))
                rm /= float(np.dot(w, rm))
                rho_t = RealField(grid, (rp - rm) / (2.0 * delta))
                cont_worst = max(
                    cont_worst, continuity_residual(rho_t, rho, s, m)
                )
        results.append(_check("hjm_identity", hjm_worst, 1e-5))
        results.append(_check("continuity_identity", cont_worst, 1e-6))
    except GcsdynError:
        results.append(_check("hjm_identity", math.inf, 1e-5))
        results.append(_check("continuity_identity", math.inf, 1e-6))

    # classical extraction
    try:
        lin_worst = 0.0
        for q in np.linspace(-reach, reach, 10):
            pt = ClassicalPoint(Q=float(q), P=0.3, t=0.0)
            ana = linear_coefficient(model, pt, dPdt=0.05)
            num = linear_coefficient(model, pt, dPdt=0.05, grid=grid, method="fit")
            lin_worst = max(lin_worst, abs(num - ana) / max(abs(ana), 1e-12))
        results.append(_check("linear_coefficient_agreement", lin_worst, 1e-6))
    except GcsdynError:
        results.append(_check("linear_coefficient_agreement", math.inf, 1e-6))

    q_mirror = np.linspace(-reach, reach, 41)
    mirror_dev = np.max(
        np.abs(v_class(model, q_mirror) - potential_value(model, -q_mirror))
    )
    results.append(_check("vclass_mirror", mirror_dev / max(scale, 1e-300), 1e-12))

    # Ehrenfest closure along a short integrated trajectory
    period = classical_period(model, max(e_cl, 0.0))
    dt_cl = period / 2000.0
    traj = integrate_trajectory(model, cfg.q0_init, cfg.p0_init, dt_cl, 2000)
    eh_worst = 0.0
    force_scale = max(float(np.max(np.abs(traj.forces))), scale * _inv_len(model))
    for i in range(0, len(traj), 100):
        pt = traj.points[i]
        snap = assemble_potential(model, pt, float(traj.forces[i]), grid, tol=tol)
        grad = potential_slope_at(snap.V, pt.Q, model.dq)
        eh_worst = max(eh_worst, abs(traj.forces[i] + grad) / force_scale)
    results.append(_check("ehrenfest_closure", eh_worst, 1e-6))

    if not coverage.passed:
        return results

    # short feedback run with the configured dt and scheme
    horizon = min(cfg.T, period)
    nsteps = int(round(horizon / cfg.propagation.dt))
    if nsteps > MAX_VERIFY_STEPS:
        horizon = MAX_VERIFY_STEPS * cfg.propagation.dt
    pconf = PropagatorConfig(
        dt=cfg.propagation.dt,
        scheme=cfg.propagation.scheme,
        mode="feedback",
        snapshot_stride=max(1, int(round(horizon / cfg.propagation.dt)) // 50),
    )
    try:
        run = evolve_feedback(model, cfg.initial_point, pconf, horizon, grid, tol)
        records = run.records
        results.append(
            _check("unitarity", max(abs(r.norm - 1.0) for r in records), 1e-8)
        )
        results.append(
            _check("feedback_overlap", max(1.0 - r.overlap for r in records), 1e-4)
        )
        dq2_0 = records[0].dq2
        results.append(
            _check(
                "dq2_drift",
                max(abs(r.dq2 / dq2_0 - 1.0) for r in records),
                1e-4,
            )
        )
        eh_run = max(r.ehrenfest_residual for r in records)
        # lenient generic gate: the run uses the config's own dt, so the
        # residual scales with its tracking error; the acceptance suite pins
        # the strict bound at its stated time step
        results.append(_check("ehrenfest_run", eh_run / force_scale, 1e-4))
    except GcsdynError:
        for name, thr in (
            ("unitarity", 1e-8),
            ("feedback_overlap", 1e-4),
            ("dq2_drift", 1e-4),
            ("ehrenfest_run", 1e-4),
        ):
            results.append(_check(name, math.inf, thr))
    return results


def _inv_len(model):
    """A natural inverse length: a for Morse, 1/spread for harmonic."""
    return model.a if model.kind == "morse" else 1.0 / model.dq
