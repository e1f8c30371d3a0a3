"""Experiment orchestration: single solves, refinement studies, amplitude
sweeps, and deterministic serialization of their results."""

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import reconstruct as rec
from .errors import ConfigError
from .interface import build_problem, solve_free_boundary
from .norms import weighted_norm_2d

FIELD_COLUMNS = ("x1", "x2", "rho", "u1", "u2", "P", "Mach")
INTERFACE_COLUMNS = (
    "x1", "g_cd", "p_upper", "p_lower", "p_jump",
    "tangency_upper", "tangency_lower",
)
SWEEP_COLUMNS = (
    "sigma", "dU_sup", "gcd_sup", "gcd_weighted", "outer_iterations",
    "dU_over_sigma", "gcd_over_sigma",
)
REFINE_COLUMNS = (
    "n", "h_max", "pressure_jump", "tangency", "pressure_jump_interior",
    "tangency_interior", "mass_defect", "wall_defect", "transport",
)


@dataclass
class RunReport:
    sigma: float
    grid: tuple
    converged: bool
    outer_iterations: int
    outer_residuals: list
    picard_counts: list
    backtracks: int
    corner_defect: float
    du_sup: float
    gcd_sup: float
    gcd_weighted: float
    phi_weighted: dict
    rh: dict
    conservation: dict
    wall_defects: dict
    transport_residual: float
    mach_max: float
    elapsed_seconds: float
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        def clean(value):
            if isinstance(value, dict):
                return {k: clean(v) for k, v in value.items()}
            if isinstance(value, (list, tuple)):
                return [clean(v) for v in value]
            if isinstance(value, np.ndarray):
                return [clean(v) for v in value.tolist()]
            if isinstance(value, (np.floating, float)):
                value = float(value)
                if not np.isfinite(value):
                    raise ConfigError("non-finite value in run report")
                return value
            if isinstance(value, (np.integer, int, bool, str)) or value is None:
                return int(value) if isinstance(value, np.integer) else value
            raise TypeError(f"unexpected report entry {value!r}")

        return {
            "sigma": clean(self.sigma),
            "grid": list(self.grid),
            "converged": self.converged,
            "outer_iterations": self.outer_iterations,
            "outer_residuals": clean(self.outer_residuals),
            "picard_counts": clean(self.picard_counts),
            "backtracks": self.backtracks,
            "corner_defect": clean(self.corner_defect),
            "norms": {
                "dU_sup": clean(self.du_sup),
                "gcd_sup": clean(self.gcd_sup),
                "gcd_weighted": clean(self.gcd_weighted),
                "phi_weighted": clean(self.phi_weighted),
            },
            "rh_residuals": clean({k: v for k, v in self.rh.items() if np.isscalar(v)}),
            "conservation": clean(
                {k: v for k, v in self.conservation.items() if np.isscalar(v)}
            ),
            "wall_defects": clean(self.wall_defects),
            "transport_residual": clean(self.transport_residual),
            "mach_max": clean(self.mach_max),
            "extras": clean(self.extras),
        }


def run(config, out_dir=None, threads=1):
    """One full free-boundary solve plus verification; optionally writes
    the CSV/JSON/SVG artifacts into out_dir."""
    t0 = time.perf_counter()
    geometry, boundary, background, sigma = config.build_all()
    problem = build_problem(
        geometry, boundary, background,
        n1=int(config.numerics["n1"]), n2=int(config.numerics["n2"]),
        grading=float(config.numerics["grading"]),
        fixed_point=config.fixed_point_settings(),
        mass_slack=max(2.0 * sigma, 1e-12),
    )
    result = solve_free_boundary(problem, config.outer_settings(), threads=threads)
    curve = result.curve

    phys_up = rec.inverse_map(result.upper, curve.g_cd, geometry.wall_upper)
    phys_lo = rec.inverse_map(result.lower, curve.g_cd, geometry.wall_lower)
    rh = rec.rh_residuals(phys_up, phys_lo, curve.g_cd)
    cons_up = rec.conservation_residuals(phys_up, problem.m_plus, geometry.wall_upper)
    cons_lo = rec.conservation_residuals(phys_lo, problem.m_minus, geometry.wall_lower)

    alpha = float(config.numerics["alpha"])
    bg_up, bg_lo = background.upper.state, background.lower.state

    def deviation(fieldset, state):
        return max(
            float(np.max(np.abs(fieldset.rho - state.rho))),
            float(np.max(np.abs(fieldset.u1 - state.u1))),
            float(np.max(np.abs(fieldset.u2))),
            float(np.max(np.abs(fieldset.pressure - state.pressure))),
        )

    du_sup = max(deviation(result.upper, bg_up), deviation(result.lower, bg_lo))
    phi_weighted = {
        "upper": weighted_norm_2d(result.upper.phi, result.upper.grid.y1,
                                  result.upper.grid.y2, 2, alpha, -1.0 - alpha),
        "lower": weighted_norm_2d(result.lower.phi, result.lower.grid.y1,
                                  result.lower.grid.y2, 2, alpha, -1.0 - alpha),
    }
    transport = max(
        rec.streamline_transport_residual(phys_up),
        rec.streamline_transport_residual(phys_lo),
    )
    report = RunReport(
        sigma=sigma,
        grid=(int(config.numerics["n1"]), int(config.numerics["n2"])),
        converged=result.converged,
        outer_iterations=result.iterations,
        outer_residuals=list(result.residual_history),
        picard_counts=[list(pc) for pc in result.picard_counts],
        backtracks=result.backtracks,
        corner_defect=float(abs(rh["pressure_jump"][0])),
        du_sup=du_sup,
        gcd_sup=curve.sup_norm,
        gcd_weighted=curve.weighted_norm(alpha=alpha),
        phi_weighted=phi_weighted,
        rh={k: v for k, v in rh.items()},
        conservation={
            "mass_defect_max": max(cons_up["mass_defect_max"], cons_lo["mass_defect_max"]),
            "slip_max": max(cons_up["slip_max"], cons_lo["slip_max"]),
        },
        wall_defects={"upper": phys_up.wall_defect, "lower": phys_lo.wall_defect},
        transport_residual=transport,
        mach_max=float(max(np.max(phys_up.mach), np.max(phys_lo.mach))),
        elapsed_seconds=time.perf_counter() - t0,
    )
    if out_dir is not None:
        write_artifacts(out_dir, report, curve, phys_up, phys_lo, rh, result)
    return report


def sweep(config, amplitudes=None, out_dir=None, threads=1):
    """Amplitude sweep: one solve per row plus linear-response diagnostics."""
    from .config import validate_amplitudes

    amps = validate_amplitudes(
        tuple(amplitudes) if amplitudes is not None else config.sweep_amplitudes
    )
    rows, errors = [], []

    def one(amplitude):
        sub = config.with_amplitude(amplitude)
        rep = run(sub, threads=1)
        denom = rep.sigma if rep.sigma > 0.0 else 1.0
        return {
            "sigma": rep.sigma,
            "dU_sup": rep.du_sup,
            "gcd_sup": rep.gcd_sup,
            "gcd_weighted": rep.gcd_weighted,
            "outer_iterations": rep.outer_iterations,
            "dU_over_sigma": rep.du_sup / denom,
            "gcd_over_sigma": rep.gcd_sup / denom,
        }

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(one, a) for a in amps]
            for amplitude, future in zip(amps, futures):
                try:
                    rows.append(future.result())
                except Exception as exc:  # noqa: BLE001 - keep the partial table
                    errors.append((amplitude, repr(exc)))
    else:
        for amplitude in amps:
            try:
                rows.append(one(amplitude))
            except Exception as exc:  # noqa: BLE001
                errors.append((amplitude, repr(exc)))
    if out_dir is not None:
        _ensure_dir(out_dir)
        _write_csv(os.path.join(out_dir, "sweep.csv"), SWEEP_COLUMNS,
                   [[r[k] for k in SWEEP_COLUMNS] for r in rows])
        if errors:
            with open(os.path.join(out_dir, "sweep_errors.txt"), "w",
                      encoding="utf-8") as handle:
                for amplitude, message in errors:
                    handle.write(f"{amplitude!r}: {message}\n")
    return rows, errors


def refine(config, grids=None, out_dir=None, threads=1):
    """Grid-refinement study of the interface and conservation residuals."""
    grid_list = tuple(int(g) for g in (grids if grids is not None else config.refine_grids))
    if len(grid_list) < 2 or any(b <= a for a, b in zip(grid_list, grid_list[1:])):
        raise ConfigError("refinement grids must be at least two, ascending")
    rows = []
    for n in grid_list:
        rep = run(config.with_grid(n), threads=threads)
        rows.append({
            "n": n,
            "h_max": config.length / (n - 1),
            "pressure_jump": rep.rh["pressure_jump_max"],
            "tangency": max(rep.rh["tangency_upper_max"], rep.rh["tangency_lower_max"]),
            "pressure_jump_interior": rep.rh["pressure_jump_interior_max"],
            "tangency_interior": max(rep.rh["tangency_upper_interior_max"],
                                     rep.rh["tangency_lower_interior_max"]),
            "mass_defect": rep.conservation["mass_defect_max"],
            "wall_defect": max(rep.wall_defects.values()),
            "transport": rep.transport_residual,
        })
    orders = {}
    hs = np.array([r["h_max"] for r in rows])
    for key in ("pressure_jump", "tangency", "pressure_jump_interior",
                "tangency_interior", "mass_defect", "wall_defect", "transport"):
        errs = np.array([r[key] for r in rows])
        if np.all(errs > 0.0):
            orders[key] = float(np.polyfit(np.log(hs), np.log(errs), 1)[0])
        else:
            orders[key] = float("nan")
    if out_dir is not None:
        _ensure_dir(out_dir)
        _write_csv(os.path.join(out_dir, "refine.csv"), REFINE_COLUMNS,
                   [[r[k] for k in REFINE_COLUMNS] for r in rows])
    return rows, orders


def _ensure_dir(path):
    os.makedirs(path, exist_ok=True)


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(v) for v in row) + "\n")


def _field_rows(phys):
    n1, n2 = phys.x2.shape
    rows = []
    for i in range(n1):
        for j in range(n2):
            rows.append([
                phys.x1[i], phys.x2[i, j], phys.rho[i, j], phys.u1[i, j],
                phys.u2[i, j], phys.pressure[i, j], phys.mach[i, j],
            ])
    return rows


def write_artifacts(out_dir, report, curve, phys_up, phys_lo, rh, result):
    _ensure_dir(out_dir)
    _write_csv(os.path.join(out_dir, "fields_upper.csv"), FIELD_COLUMNS,
               _field_rows(phys_up))
    _write_csv(os.path.join(out_dir, "fields_lower.csv"), FIELD_COLUMNS,
               _field_rows(phys_lo))
    interface_rows = [
        [curve.y1[i], curve.g_cd[i], phys_up.pressure_interface[i],
         phys_lo.pressure_interface[i], rh["pressure_jump"][i],
         rh["tangency_upper"][i], rh["tangency_lower"][i]]
        for i in range(len(curve.y1))
    ]
    _write_csv(os.path.join(out_dir, "interface.csv"), INTERFACE_COLUMNS,
               interface_rows)
    # report.json stays bit-identical between runs; wall time goes beside it
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")
    with open(os.path.join(out_dir, "timing.txt"), "w", encoding="utf-8") as handle:
        handle.write(f"elapsed_seconds: {report.elapsed_seconds:.3f}\n")
    _write_plots(out_dir, curve, rh, result)


def _write_plots(out_dir, curve, rh, result):
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "cdnozzle"

    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    ax.plot(curve.y1, curve.g_cd, lw=1.5)
    ax.set_xlabel("x1")
    ax.set_ylabel("g_cd(x1)")
    ax.set_title("contact discontinuity")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "interface.svg"), metadata={"Date": None})
    plt.close(fig)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(curve.y1, rh["pressure_jump"], lw=1.2)
    ax1.set_xlabel("x1")
    ax1.set_ylabel("[P](x1)")
    ax1.set_title("interface pressure jump")
    ax1.grid(alpha=0.3)
    ax2.semilogy(range(1, len(result.residual_history) + 1),
                 result.residual_history, marker="o", ms=3)
    ax2.set_xlabel("outer iteration")
    ax2.set_ylabel("max |Q|")
    ax2.set_title("residual history")
    ax2.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "pressure_jump.svg"), metadata={"Date": None})
    plt.close(fig)
