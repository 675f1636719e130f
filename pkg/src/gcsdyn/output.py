"""CSV and figure emission.

All floating-point output is written with 17 significant digits so runs are
reproducible bit for bit and downstream plotting is implementation
independent. Column names and order are part of the contract:

* diagnostics.csv: t, norm, q_mean, p_mean, dq2, overlap,
  ehrenfest_residual, hjm_residual, boundary_mass, l2_distance
* trajectory.csv: t, Q, P, dPdt, E_cl
* fields/NNNN.csv: x, re_psi, im_psi, rho, S, V
* vclass.csv: Q, V_class_analytic, V_class_numeric, relative_deviation
"""

import csv
from pathlib import Path

import numpy as np

from .classical import Trajectory
from .diagnostics import DiagnosticsRecord
from .displacement import density_phase
from .models import PotentialModel
from .propagation import FeedbackFrame, RunResult


def _fmt(value) -> str:
    if isinstance(value, (bool, int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_rows(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_diagnostics_csv(path, records) -> Path:
    path = Path(path)
    _write_rows(path, DiagnosticsRecord.CSV_COLUMNS, (r.csv_row() for r in records))
    return path


def write_trajectory_csv(path, trajectory: Trajectory, model: PotentialModel) -> Path:
    path = Path(path)
    energy = trajectory.energy(model)
    rows = (
        (pt.t, pt.Q, pt.P, trajectory.forces[i], energy[i])
        for i, pt in enumerate(trajectory.points)
    )
    _write_rows(path, ("t", "Q", "P", "dPdt", "E_cl"), rows)
    return path


def write_fields_csv(directory, result: RunResult) -> list[Path]:
    """One x, re_psi, im_psi, rho, S, V file per snapshot frame."""
    directory = Path(directory)
    paths = []
    for i, frame in enumerate(result.frames):
        if isinstance(frame, FeedbackFrame):
            psi = frame.state.psi
            v_vals = frame.potential.V.values
        else:
            psi = frame.psi
            v_vals = None
        polar = density_phase(psi, hbar=result.model.hbar, on_ambiguity="mask")
        if v_vals is None:
            from .models import ground_energy, potential_value

            v_vals = potential_value(result.model, psi.grid.points) - ground_energy(
                result.model
            )
        rows = zip(
            psi.grid.points,
            psi.values.real,
            psi.values.imag,
            polar.rho.values,
            polar.S.values,
            v_vals,
        )
        path = directory / f"{i:04d}.csv"
        _write_rows(path, ("x", "re_psi", "im_psi", "rho", "S", "V"), rows)
        paths.append(path)
    return paths


def write_vclass_csv(path, rows) -> Path:
    """rows: iterables of (Q, analytic, numeric, relative deviation)."""
    path = Path(path)
    _write_rows(
        path, ("Q", "V_class_analytic", "V_class_numeric", "relative_deviation"), rows
    )
    return path


def write_plot_data(outdir, result: RunResult) -> list[Path]:
    """Pre-binned series for the standard figures."""
    outdir = Path(outdir) / "plots"
    records = result.records
    t = [r.t for r in records]
    paths = [
        _write_or(outdir / "dq2_t.csv", ("t", "dq2"), zip(t, (r.dq2 for r in records))),
        _write_or(
            outdir / "overlap_t.csv", ("t", "overlap"), zip(t, (r.overlap for r in records))
        ),
    ]
    q_of_t = {round(p.t, 12): p.Q for p in result.trajectory.points}
    rows = ((r.t, q_of_t.get(round(r.t, 12), np.nan), r.q_mean) for r in records)
    paths.append(_write_or(outdir / "center_tracking.csv", ("t", "Q", "q_mean"), rows))

    # a handful of potential profiles across the run
    frames = result.frames
    picks = sorted({0, len(frames) // 4, len(frames) // 2, (3 * len(frames)) // 4, len(frames) - 1})
    header = ["x"] + [f"V_{frames[i].diagnostics.t:.6g}" for i in picks]
    columns = [result.grid.points]
    for i in picks:
        frame = frames[i]
        if isinstance(frame, FeedbackFrame):
            columns.append(frame.potential.V.values)
        else:
            from .models import ground_energy, potential_value

            columns.append(
                potential_value(result.model, result.grid.points)
                - ground_energy(result.model)
            )
    paths.append(_write_or(outdir / "potential_snapshots.csv", header, zip(*columns)))
    return paths


def _write_or(path, header, rows):
    _write_rows(path, header, rows)
    return path


def render_plots(outdir, result: RunResult) -> list[Path]:
    """Vector images of the four standard figures (requires matplotlib)."""
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:  # pragma: no cover - depends on environment
        raise RuntimeError(
            "plot rendering needs matplotlib (install the 'plots' extra)"
        ) from exc

    outdir = Path(outdir) / "plots"
    outdir.mkdir(parents=True, exist_ok=True)
    records = result.records
    t = np.array([r.t for r in records])
    made = []

    def save(fig, name):
        target = outdir / name
        fig.savefig(target, format="svg")
        plt.close(fig)
        made.append(target)

    fig, ax = plt.subplots()
    ax.plot(t, [r.dq2 for r in records])
    ax.set_xlabel("t")
    ax.set_ylabel("dq2")
    save(fig, "dq2_t.svg")

    fig, ax = plt.subplots()
    ax.plot(t, [1.0 - r.overlap for r in records])
    ax.set_xlabel("t")
    ax.set_ylabel("1 - overlap")
    ax.set_yscale("log")
    save(fig, "overlap_t.svg")

    fig, ax = plt.subplots()
    q_of_t = {round(p.t, 12): p.Q for p in result.trajectory.points}
    ax.plot(t, [q_of_t.get(round(r.t, 12), np.nan) for r in records], label="Q")
    ax.plot(t, [r.q_mean for r in records], "--", label="q_mean")
    ax.set_xlabel("t")
    ax.legend()
    save(fig, "center_tracking.svg")

    fig, ax = plt.subplots()
    picks = sorted({0, len(result.frames) // 2, len(result.frames) - 1})
    lo = min(r.q_mean for r in records)
    hi = max(r.q_mean for r in records)
    span = 6.0 * result.model.dq
    x = result.grid.points
    window = (x >= lo - span) & (x <= hi + span)
    v_lo, v_hi = np.inf, -np.inf
    plotted = False
    for i in picks:
        frame = result.frames[i]
        if isinstance(frame, FeedbackFrame):
            v = frame.potential.V.values
            ax.plot(x, v, label=f"t = {frame.diagnostics.t:.3g}")
            v_lo = min(v_lo, float(v[window].min()))
            v_hi = max(v_hi, float(v[window].max()))
            plotted = True
    ax.set_xlabel("x")
    ax.set_ylabel("V")
    ax.set_xlim(lo - span, hi + span)
    if plotted:
        pad = 0.1 * (v_hi - v_lo) + 1e-12
        ax.set_ylim(v_lo - pad, v_hi + pad)
        ax.legend()
    save(fig, "potential_snapshots.svg")
    return made
