"""Figure-level experiment runners driven by ExperimentConfig.

Each runner resolves the config's sweep, computes every sweep point (in
parallel worker threads when jobs > 1), and only then writes its output
files, so a failure anywhere leaves no partial products.  Outputs are CSV
for curves and tables, NDJSON for space-time fields; all floats at 12
significant digits, file names indexed by sweep position, merges ordered
by sweep index.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from ._io import write_csv, write_ndjson
from .config import ExperimentConfig, SweepPoint
from .errors import ConfigError
from .lasermap import map_to_anyonic, mode_locking_threshold
from .model import AnyonicParams, Grid, build_h_eff, default_grid
from .nonnormal import (
    amplification_grid_for,
    analytic_bound_state_pt,
    g_infinity,
    g_infinity_poschl_teller,
    g_t,
    self_orthogonality,
)
from .nonnormal import AmplificationReport
from .propagation import evolve
from .scattering import gaussian_packet, group_velocity, report_from_final, stationary_rt
from .spectra import (
    DispersionCurve,
    critical_velocity,
    delocalization_margin,
    moving_bound_state,
    poschl_teller_energies,
    shifted_point_energy,
    solve_spectrum,
)

__all__ = ["run_experiment", "run_spectrum", "run_delocalize", "run_scatter", "run_amplify", "run_lasermap"]


def _map_points(fn, points, jobs: int):
    if jobs <= 1 or len(points) <= 1:
        return [fn(p) for p in points]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, points))


def _grid_for_point(cfg: ExperimentConfig, point: SweepPoint) -> Grid:
    """Near-threshold drifts get a doubled box: localization lengths diverge."""
    grid = cfg.grid if cfg.grid is not None else default_grid()
    try:
        e1 = cfg.ground_state_energy()
    except ConfigError:
        return grid
    vc = critical_velocity(e1, point.phi) if point.phi > 0 else None
    if vc is not None and abs(point.v) > 0.9 * vc:
        return grid.scaled(2.0, 2.0)
    return grid


def _stationary_ground_state(cfg: ExperimentConfig, delta: float, grid: Grid):
    """Bound state of the stationary well: closed form at nu = 1, else numeric."""
    e1 = cfg.ground_state_energy()
    if cfg.nu == 1.0 and cfg.v0 is None:
        return analytic_bound_state_pt(grid, delta), e1
    pot = cfg.potential(delta)
    h = build_h_eff(pot, AnyonicParams(phi=0.0, v=0.0), grid, boundary="dirichlet")
    result = solve_spectrum(h)
    idx = result.nearest(complex(e1))
    return result.eigenvector(idx), e1


# --------------------------------------------------------------------- spectrum


def run_spectrum(cfg: ExperimentConfig, outdir: Path, jobs: int = 1) -> list:
    points = cfg.sweep_points()

    def compute(point: SweepPoint):
        params = AnyonicParams(phi=point.phi, v=point.v)
        grid = _grid_for_point(cfg, point)
        pot = cfg.potential(point.delta)
        h = build_h_eff(pot, params, grid, boundary=cfg.boundary)
        result = solve_spectrum(h)
        curve = DispersionCurve.sample(params, cfg.k_max, cfg.k_points)
        bound_rows = []
        if cfg.potential_kind == "poschl_teller" and cfg.effective_amplitude() < 0:
            family = poschl_teller_energies(cfg.nu)
            for n, e_n in enumerate(family.energies, start=1):
                shifted = shifted_point_energy(e_n, params)
                survives = delocalization_margin(e_n, params) > 0
                bound_rows.append((n, e_n, shifted.real, shifted.imag, survives))
        return result, curve, bound_rows

    computed = _map_points(compute, points, jobs)

    written = []
    manifest = []
    for point, (result, curve, bound_rows) in zip(points, computed):
        tag = f"{point.index:03d}"
        written.append(
            write_csv(
                outdir / f"continuum_{tag}.csv",
                ("k", "re_e", "im_e"),
                zip(curve.k_samples, curve.energy.real, curve.energy.imag),
            )
        )
        written.append(
            write_csv(
                outdir / f"bound_{tag}.csv",
                ("n", "e_stationary", "re_e", "im_e", "survives"),
                bound_rows,
            )
        )
        written.append(
            write_csv(
                outdir / f"eigs_{tag}.csv",
                ("re_e", "im_e", "classification", "localization_length"),
                result.csv_rows(),
            )
        )
        manifest.append(
            (point.index, point.phi, point.v, point.delta, result.point_count)
        )
    written.append(
        write_csv(
            outdir / "manifest.csv",
            ("index", "phi", "v", "delta", "numerical_point_count"),
            manifest,
        )
    )
    return written


# ------------------------------------------------------------------- delocalize


def run_delocalize(cfg: ExperimentConfig, outdir: Path, jobs: int = 1) -> list:
    points = cfg.sweep_points()

    def compute(point: SweepPoint):
        params = AnyonicParams(phi=point.phi, v=point.v)
        grid = _grid_for_point(cfg, point)
        u1, e1 = _stationary_ground_state(cfg, point.delta, grid)
        dressed = moving_bound_state(u1, e1, params)
        margin = delocalization_margin(e1, params)
        pot = cfg.potential(point.delta)
        h = build_h_eff(pot, params, grid, boundary=cfg.boundary)
        result = solve_spectrum(h)
        loc_num = math.inf
        pts = result.point_indices()
        if len(pts):
            target = shifted_point_energy(e1, params)
            best = pts[np.argmin(np.abs(result.eigenvalues[pts] - target))]
            loc_num = float(result.localization_length[best])
        return grid, dressed, margin, result.point_count, loc_num

    computed = _map_points(compute, points, jobs)

    written = []
    metrics = []
    for point, (grid, dressed, margin, count, loc_num) in zip(points, computed):
        tag = f"{point.index:03d}"
        if dressed is not None:
            written.append(
                write_csv(
                    outdir / f"profile_{tag}.csv",
                    ("x", "density"),
                    zip(grid.x, dressed.density()),
                )
            )
        metrics.append(
            (
                point.index,
                point.phi,
                point.v,
                point.delta,
                margin,
                (1.0 / margin) if margin > 0 else math.inf,
                count,
                loc_num,
            )
        )
    written.append(
        write_csv(
            outdir / "metrics.csv",
            (
                "index",
                "phi",
                "v",
                "delta",
                "margin",
                "analytic_localization_length",
                "numerical_point_count",
                "numerical_localization_length",
            ),
            metrics,
        )
    )
    return written


# ---------------------------------------------------------------------- scatter


def run_scatter(cfg: ExperimentConfig, outdir: Path, jobs: int = 1) -> list:
    points = cfg.sweep_points()
    grid = cfg.grid if cfg.grid is not None else default_grid()

    def compute(point: SweepPoint):
        params = AnyonicParams(phi=point.phi, v=point.v)
        pot = cfg.potential(point.delta)
        packet = cfg.packet(point.carrier if point.carrier is not None else 0.0)
        vg = group_velocity(packet.carrier, params)
        side = math.copysign(1.0, packet.center - cfg.separatrix)
        if vg * side >= 0:
            raise ConfigError(
                f"sweep point {point.index}: packet does not approach the separatrix "
                f"(center {packet.center}, group velocity {vg:+.3g})"
            )
        psi0 = gaussian_packet(grid, packet)
        record = evolve(psi0, pot, params, cfg.propagator)
        report = report_from_final(record.final(), packet, params, cfg.separatrix)
        return record, report

    computed = _map_points(compute, points, jobs)

    stride = cfg.density_stride
    written = []
    report_rows = []
    for point, (record, report) in zip(points, computed):
        tag = f"{point.index:03d}"
        ndjson = []
        for t, norm, snap in zip(record.times, record.norm, record.snapshots):
            rho = snap.density()
            ndjson.append(
                {
                    "t": float(t),
                    "norm": float(norm),
                    "density": [float(d) for d in rho[::stride]],
                }
            )
        written.append(write_ndjson(outdir / f"evolution_{tag}.ndjson", ndjson))
        written.append(
            write_csv(
                outdir / f"norm_{tag}.csv", ("t", "norm"), zip(record.times, record.norm)
            )
        )
        report_rows.append(
            (
                point.index,
                point.phi,
                point.v,
                point.delta,
                report.k_incident,
                report.k_reflected.real,
                report.k_reflected.imag,
                report.reflected_power_fraction,
                report.transmitted_power_fraction,
                report.reflected_is_evanescent,
            )
        )
    written.append(
        write_csv(
            outdir / "report.csv",
            (
                "index",
                "phi",
                "v",
                "delta",
                "k",
                "re_k_r",
                "im_k_r",
                "reflected_fraction",
                "transmitted_fraction",
                "evanescent",
            ),
            report_rows,
        )
    )

    if cfg.rt_sweep is not None:
        # stationary r(k), t(k) spectra, one file per distinct (phi, v, delta)
        ks = np.linspace(cfg.rt_sweep["k_min"], cfg.rt_sweep["k_max"], cfg.rt_sweep["num"])
        triples = sorted({(p.phi, p.v, p.delta) for p in points})
        for i, (phi, v, delta) in enumerate(triples):
            params = AnyonicParams(phi=phi, v=v)
            pot = cfg.potential(delta)
            rows = []
            for k in ks:
                if group_velocity(float(k), params) <= 0:
                    continue  # not a left-incident channel
                r, t = stationary_rt(pot, params, float(k), grid=grid)
                rows.append((float(k), r.real, r.imag, t.real, t.imag))
            written.append(
                write_csv(
                    outdir / f"rt_{i:03d}.csv", ("k", "re_r", "im_r", "re_t", "im_t"), rows
                )
            )
    return written


# ---------------------------------------------------------------------- amplify


def run_amplify(cfg: ExperimentConfig, outdir: Path, jobs: int = 1) -> list:
    points = cfg.sweep_points()

    def compute(point: SweepPoint):
        params = AnyonicParams(phi=point.phi, v=point.v)
        e1 = cfg.ground_state_energy()
        margin = delocalization_margin(e1, params)
        if cfg.nu == 1.0 and cfg.v0 is None:
            # Closed-form state on an auto-widened quadrature grid.
            ginf = g_infinity_poschl_teller(point.delta, params)
            u1 = analytic_bound_state_pt(amplification_grid_for(e1, params), point.delta)
        else:
            u1, e1 = _stationary_ground_state(
                cfg, point.delta, cfg.grid if cfg.grid is not None else default_grid()
            )
            ginf = g_infinity(u1, params, e1=e1)
        sorth = self_orthogonality(u1)

        gt_rows = []
        if cfg.g_t_times:
            gt_grid = cfg.g_t_grid if cfg.g_t_grid is not None else Grid(-30.0, 30.0, 1024)
            pot = cfg.potential(point.delta)
            h = build_h_eff(pot, params, gt_grid, boundary="dirichlet")
            spec_res = solve_spectrum(h)
            e_dom = spec_res.eigenvalues[spec_res.nearest(shifted_point_energy(e1, params))]
            gt_rows = [(t, g_t(h, e_dom, t)) for t in cfg.g_t_times]

        record = None
        sim_grid = None
        if cfg.amplify_evolve:
            # Evolution runs honor the configured box as-is; automatic box
            # doubling is reserved for eigensolve localization studies.
            sim_grid = cfg.grid if cfg.grid is not None else default_grid()
            u1_sim, _ = _stationary_ground_state(cfg, point.delta, sim_grid)
            dressed = moving_bound_state(u1_sim, e1, params)
            if dressed is None:
                raise ConfigError(
                    f"amplify evolve: no normalizable initial state at v = {point.v}"
                )
            pot = cfg.potential(point.delta)
            record = evolve(dressed, pot, params, cfg.propagator)
        report = AmplificationReport(
            g_infinity=ginf,
            g_t_samples=tuple(gt_rows),
            self_orthogonality=sorth,
            delocalization_margin=margin,
        )
        return report, record, sim_grid

    computed = _map_points(compute, points, jobs)

    written = []
    rows = []
    stride = cfg.density_stride
    for point, (report, record, sim_grid) in zip(points, computed):
        tag = f"{point.index:03d}"
        rows.append(
            (
                point.phi,
                point.v,
                point.delta,
                report.g_infinity,
                report.self_orthogonality,
                report.delocalization_margin,
            )
        )
        if report.g_t_samples:
            written.append(
                write_csv(outdir / f"gt_{tag}.csv", ("t", "g_t"), report.g_t_samples)
            )
        if record is not None:
            ndjson = []
            for t, norm, snap in zip(record.times, record.norm, record.snapshots):
                rho = snap.density()
                total = float(np.trapezoid(rho, dx=sim_grid.dx))
                ndjson.append(
                    {
                        "t": float(t),
                        "norm": float(norm),
                        "density": [float(d) for d in (rho / total)[::stride]],
                    }
                )
            written.append(write_ndjson(outdir / f"evolution_{tag}.ndjson", ndjson))
            written.append(
                write_csv(
                    outdir / f"norm_{tag}.csv", ("t", "norm"), zip(record.times, record.norm)
                )
            )
    written.append(
        write_csv(
            outdir / "ginf.csv",
            ("phi", "v", "delta", "g_infinity", "self_orthogonality", "margin"),
            rows,
        )
    )
    return written


# --------------------------------------------------------------------- lasermap


def run_lasermap(cfg: ExperimentConfig, outdir: Path, jobs: int = 1) -> list:
    mapping = map_to_anyonic(cfg.cavity)
    threshold = mode_locking_threshold(cfg.cavity, cfg.e1)
    written = [
        write_csv(
            outdir / "mapping.csv",
            ("phi", "v", "gain_balanced", "modulators_tuned", "threshold"),
            [
                (
                    mapping.params.phi,
                    mapping.params.v,
                    mapping.gain_balanced,
                    mapping.modulators_tuned,
                    threshold if threshold is not None else math.inf,
                )
            ],
        )
    ]
    if cfg.detuning is not None:
        d = cfg.detuning
        table = []
        for ratio in np.linspace(d["start"], d["stop"], d["num"]):
            c = cfg.cavity
            cav = type(c)(
                D=c.D, Dg=c.Dg, delta1=c.delta1, delta2=c.delta2,
                g=c.g, l=c.l, Tm=ratio * c.TR, TR=c.TR,
            )
            m = map_to_anyonic(cav)
            thr = mode_locking_threshold(cav, cfg.e1)
            delocalized = thr is not None and abs(m.params.v) >= thr
            table.append((ratio, m.params.v, thr if thr is not None else math.inf, delocalized))
        written.append(
            write_csv(
                outdir / "threshold_table.csv",
                ("tm_over_tr", "v", "threshold", "delocalized"),
                table,
            )
        )
    return written


_RUNNERS = {
    "spectrum": run_spectrum,
    "delocalize": run_delocalize,
    "scatter": run_scatter,
    "amplify": run_amplify,
    "lasermap": run_lasermap,
}


def run_experiment(cfg: ExperimentConfig, outdir, jobs: int = 1) -> list:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.experiment](cfg, outdir, jobs=jobs)
