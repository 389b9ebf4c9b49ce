"""Run drivers behind the CLI: ramps, fidelity grids, maps and pulses.

Grid sweeps distribute independent points over a fork-based worker pool
(shared read-only operator templates, copy-on-write) and always emit rows
in grid-index order, so output files are deterministic for a given config
regardless of thread count or interruption/resume history.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

import numpy as np

from . import states
from .basis import LatticeShape, enumerate_basis, write_basis_text
from .config import ConfigError, RunConfig, fmt, write_csv
from .operators import HamiltonianTemplates, build_correlator
from .propagate import evolve, evolve_dissipative, fidelity
from .ramp import RampPlan, RampSchedule
from .spectrum import GapReport, gap_scan, ground_state, low_spectrum

_POOL_CONTEXT = {}


@dataclass
class SimContext:
    """Table, templates and initial state shared by every point of a sweep."""

    cfg: RunConfig
    table: object
    templates: HamiltonianTemplates
    psi0: np.ndarray


def prepare_context(cfg: RunConfig) -> SimContext:
    table = enumerate_basis(LatticeShape(cfg.sites, cfg.excitations))
    templates = HamiltonianTemplates(table)
    psi0 = initial_state(cfg, table)
    return SimContext(cfg, table, templates, psi0)


def initial_state(cfg: RunConfig, table) -> np.ndarray:
    if cfg.init == "mi":
        return states.mi_ground_state(table, cfg.plan.delta.start, cfg.plan.g.start)
    if cfg.init == "sf":
        return states.sf_ground_state(table)
    psi = np.load(cfg.init_file)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.shape != (table.dim,):
        raise ConfigError(
            f"init_file state has {psi.shape[0]} amplitudes, basis dim is {table.dim}"
        )
    nrm = np.linalg.norm(psi)
    if not nrm > 0:
        raise ConfigError("init_file state has zero norm")
    return psi / nrm


@dataclass
class RampResult:
    fidelity_raw: float
    fidelity_normalized: float
    final_norm: float
    norm_drift: float
    symmetric_leakage: float
    step_count: int
    target_energy: float


def _run_plan(ctx: SimContext, plan: RampPlan, checkpoints: int = 0):
    cfg = ctx.cfg
    kwargs = {"checkpoints": checkpoints}
    if cfg.tol is not None:
        kwargs["tol"] = cfg.tol
    if cfg.steps > 0:
        kwargs["initial_steps"] = cfg.steps
    if cfg.dissipation:
        result = evolve_dissipative(
            ctx.templates, plan, ctx.psi0,
            kappa=cfg.kappa, gamma=cfg.gamma, convention=cfg.convention,
            **kwargs,
        )
    else:
        result = evolve(ctx.templates, plan, ctx.psi0, **kwargs)
    end = plan.params_at_fraction(1.0)
    h = ctx.templates.assemble_copy(end.g, end.J, end.delta)
    target = ground_state(h)
    raw = fidelity(result.final_state, target.vector)
    nrm = float(np.linalg.norm(result.final_state))
    return result, RampResult(
        fidelity_raw=raw,
        fidelity_normalized=raw / nrm**2,
        final_norm=nrm,
        norm_drift=result.norm_drift,
        symmetric_leakage=result.symmetric_leakage,
        step_count=result.step_count,
        target_energy=target.energy,
    )


def run_ramp(cfg: RunConfig, ctx: SimContext | None = None) -> RampResult:
    """Init -> evolve -> fidelity; optional per-checkpoint CSV."""
    ctx = ctx or prepare_context(cfg)
    evo, summary = _run_plan(ctx, cfg.plan, checkpoints=cfg.checkpoints)
    if cfg.out:
        rows = [
            (c.t, c.g, c.J, c.delta, c.norm,
             c.overlap_instantaneous_ground, c.symmetric_weight)
            for c in evo.checkpoints
        ]
        write_csv(
            cfg.out,
            ("t", "g", "J", "Delta", "norm",
             "overlap_with_instantaneous_ground", "symmetric_weight"),
            rows,
            footer_comments=[
                "summary F=%s F_normalized=%s norm_drift=%s step_count=%d"
                % (fmt(summary.fidelity_raw), fmt(summary.fidelity_normalized),
                   fmt(summary.norm_drift), summary.step_count)
            ],
        )
    return summary


@dataclass
class FidelityGrid:
    """Fidelity over a (axis1 x axis2) target-parameter grid."""

    axis_names: tuple
    axis1: tuple
    axis2: tuple
    fidelity: np.ndarray  # shape (len(axis1), len(axis2))
    provenance: np.ndarray | None = None
    metadata: dict = dataclasses.field(default_factory=dict)

    def rows(self):
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                row = [a, b, self.fidelity[i, j]]
                if self.provenance is not None:
                    row.append(int(self.provenance[i, j]))
                yield tuple(row)


def _plan_with_targets(plan: RampPlan, jt: float, dt: float) -> RampPlan:
    return RampPlan(
        plan.g,
        RampSchedule(plan.J.start, jt, plan.J.index),
        RampSchedule(plan.delta.start, dt, plan.delta.index),
        plan.total_time,
    )


def _grid_point(task):
    idx, jt, dt = task
    ctx = _POOL_CONTEXT["ctx"]
    plan = _plan_with_targets(ctx.cfg.plan, jt, dt)
    _, summary = _run_plan(ctx, plan)
    f = summary.fidelity_normalized if ctx.cfg.dissipation else summary.fidelity_raw
    return idx, f


def _run_indexed(tasks, worker, ctx, threads):
    """Evaluate `worker` over indexed tasks, deterministically ordered."""
    _POOL_CONTEXT["ctx"] = ctx
    try:
        if threads > 1 and len(tasks) > 1:
            import multiprocessing

            mp = multiprocessing.get_context("fork")
            with mp.Pool(processes=threads) as pool:
                results = pool.map(worker, tasks)
        else:
            results = [worker(t) for t in tasks]
    finally:
        _POOL_CONTEXT.pop("ctx", None)
    return dict(results)


def _progress_path(out: str) -> str:
    return out + ".progress"


def _load_progress(path: str) -> dict:
    done = {}
    if os.path.exists(path):
        with open(path, "r", encoding="ascii") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                idx, value = line.split(",", 1)
                done[int(idx)] = float(value)
    return done


def run_phase_diagram(
    cfg: RunConfig, threads: int = 1, resume: bool = False,
    ctx: SimContext | None = None,
) -> FidelityGrid:
    """One evolution per (J(T), Delta(T)) grid point; resumable.

    Completed points are journaled to `<out>.progress` as they finish;
    with `resume` the journal is honored, and the final CSV is always
    rewritten in full grid order, so resumed and uninterrupted runs are
    byte-identical.
    """
    if cfg.jt_grid is None or cfg.dt_grid is None:
        raise ConfigError("phase-diagram needs JT_* and dT_* grids")
    ctx = ctx or prepare_context(cfg)
    jts = cfg.jt_grid.values()
    dts = cfg.dt_grid.values()
    points = [
        (i * len(dts) + j, jt, dt)
        for i, jt in enumerate(jts) for j, dt in enumerate(dts)
    ]

    done = {}
    journal = _progress_path(cfg.out) if cfg.out else None
    if journal and resume:
        done = _load_progress(journal)
    pending = [p for p in points if p[0] not in done]

    if journal and pending:
        mode = "a" if resume else "w"
        _POOL_CONTEXT["ctx"] = ctx
        try:
            with open(journal, mode, encoding="ascii") as fh:
                # journal every point as it completes so an interrupted
                # sweep resumes from real progress, threaded or not
                if threads > 1 and len(pending) > 1:
                    import multiprocessing

                    mp = multiprocessing.get_context("fork")
                    with mp.Pool(processes=threads) as pool:
                        for idx, f in pool.imap_unordered(_grid_point, pending):
                            fh.write(f"{idx},{fmt(f)}\n")
                            fh.flush()
                            done[idx] = f
                else:
                    for task in pending:
                        idx, f = _grid_point(task)
                        fh.write(f"{idx},{fmt(f)}\n")
                        fh.flush()
                        done[idx] = f
        finally:
            _POOL_CONTEXT.pop("ctx", None)
    elif pending:
        done.update(_run_indexed(pending, _grid_point, ctx, threads))

    grid = FidelityGrid(
        axis_names=("JT", "dT"),
        axis1=tuple(jts),
        axis2=tuple(dts),
        fidelity=np.array(
            [[done[i * len(dts) + j] for j in range(len(dts))]
             for i in range(len(jts))]
        ),
        metadata={"init": cfg.init, "rJ": cfg.plan.J.index,
                  "T": cfg.plan.total_time,
                  "dissipation": cfg.dissipation},
    )
    if cfg.out:
        write_grid_csv(cfg.out, grid)
        if journal and os.path.exists(journal):
            os.unlink(journal)
    return grid


def write_grid_csv(path, grid: FidelityGrid):
    header = list(grid.axis_names) + ["F"]
    if grid.provenance is not None:
        header.append("source")
    write_csv(path, header, grid.rows())


def read_grid_csv(path) -> FidelityGrid:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh
                if line.strip() and not line.startswith("#")]
    if len(header) < 3:
        raise ConfigError(f"{path}: not a fidelity grid CSV")
    a1 = sorted({float(r[0]) for r in rows})
    a2 = sorted({float(r[1]) for r in rows})
    f = np.full((len(a1), len(a2)), np.nan)
    for r in rows:
        f[a1.index(float(r[0])), a2.index(float(r[1]))] = float(r[2])
    if np.isnan(f).any():
        raise ConfigError(f"{path}: grid is not complete/rectangular")
    return FidelityGrid((header[0], header[1]), tuple(a1), tuple(a2), f)


def combine_max_fidelity(grids, labels=None) -> FidelityGrid:
    """Pointwise maximum over grids with identical axes, with provenance."""
    if not grids:
        raise ValueError("no grids to combine")
    first = grids[0]
    for g in grids[1:]:
        if g.axis_names != first.axis_names or g.axis1 != first.axis1 \
                or g.axis2 != first.axis2:
            raise ValueError("grid axes do not match")
    stack = np.stack([g.fidelity for g in grids])
    winner = np.argmax(stack, axis=0)
    best = np.max(stack, axis=0)
    meta = {"sources": labels or [g.metadata for g in grids]}
    return FidelityGrid(first.axis_names, first.axis1, first.axis2,
                        best, winner, meta)


def _rj_point(task):
    idx, rj = task
    ctx = _POOL_CONTEXT["ctx"]
    base = ctx.cfg.plan
    scale = rj / base.J.index
    plan = RampPlan(
        RampSchedule(base.g.start, base.g.stop, base.g.index * scale),
        RampSchedule(base.J.start, base.J.stop, rj),
        RampSchedule(base.delta.start, base.delta.stop, base.delta.index * scale),
        base.total_time,
    )
    _, summary = _run_plan(ctx, plan)
    f = summary.fidelity_normalized if ctx.cfg.dissipation else summary.fidelity_raw
    return idx, f


@dataclass
class RjSweepResult:
    rj_values: tuple
    fidelities: tuple
    best_rj: float


def run_rj_sweep(cfg: RunConfig, threads: int = 1,
                 ctx: SimContext | None = None) -> RjSweepResult:
    """Fidelity vs ramping index at fixed index ratios (trajectory fixed)."""
    if not cfg.rj_values:
        raise ConfigError("rj-sweep needs rJ_values")
    ctx = ctx or prepare_context(cfg)
    tasks = list(enumerate(cfg.rj_values))
    done = _run_indexed(tasks, _rj_point, ctx, threads)
    fids = tuple(done[i] for i in range(len(tasks)))
    best = cfg.rj_values[int(np.argmax(fids))]
    if cfg.out:
        write_csv(
            cfg.out, ("rJ", "F"), list(zip(cfg.rj_values, fids)),
            footer_comments=[f"argmax rJ={fmt(best)}"],
        )
    return RjSweepResult(tuple(cfg.rj_values), fids, best)


def _rho1_point(task):
    idx, j_val, d_val = task
    ctx = _POOL_CONTEXT["ctx"]
    h = ctx.templates.assemble_copy(ctx.cfg.plan.g.start, j_val, d_val)
    vec = ground_state(h).vector
    corr = _POOL_CONTEXT["corr"]
    diag = _POOL_CONTEXT["corr_diag"]
    num = float(np.real(vec @ (corr @ vec)))
    den = float(np.real(vec @ (diag @ vec)))
    return idx, num / den


def run_rho1_map(cfg: RunConfig, threads: int = 1,
                 ctx: SimContext | None = None):
    """Ground-state rho1(i, j) over a (J, Delta) grid at fixed g = g0."""
    if cfg.j_grid is None or cfg.d_grid is None:
        raise ConfigError("rho1-map needs J_* and d_* grids")
    table = (ctx.table if ctx else
             enumerate_basis(LatticeShape(cfg.sites, cfg.excitations)))
    templates = ctx.templates if ctx else HamiltonianTemplates(table)
    holder = SimContext(cfg, table, templates, np.zeros(table.dim))
    js = cfg.j_grid.values()
    ds = cfg.d_grid.values()
    tasks = [
        (i * len(ds) + j, jv, dv)
        for i, jv in enumerate(js) for j, dv in enumerate(ds)
    ]
    _POOL_CONTEXT["corr"] = build_correlator(table, cfg.rho_i, cfg.rho_j)
    _POOL_CONTEXT["corr_diag"] = build_correlator(table, cfg.rho_i, cfg.rho_i)
    try:
        done = _run_indexed(tasks, _rho1_point, holder, threads)
    finally:
        _POOL_CONTEXT.pop("corr", None)
        _POOL_CONTEXT.pop("corr_diag", None)
    rows = [(jv, dv, done[i * len(ds) + j])
            for i, jv in enumerate(js) for j, dv in enumerate(ds)]
    if cfg.out:
        write_csv(cfg.out, ("J", "Delta", "rho1"), rows)
    return rows


def run_gap_scan(cfg: RunConfig, ctx: SimContext | None = None) -> GapReport:
    """Coarse symmetric/any gap curve plus refined minimum (CSV footer row)."""
    table = (ctx.table if ctx else
             enumerate_basis(LatticeShape(cfg.sites, cfg.excitations)))
    templates = ctx.templates if ctx else HamiltonianTemplates(table)
    report = gap_scan(
        templates, cfg.plan, resolution=cfg.resolution,
        refine_tol=cfg.refine_tol, with_any_gap=bool(cfg.out),
    )
    if cfg.out:
        rows = [
            (s, p.g, p.J, p.delta, gap_sym, gap_any)
            for (s, p, gap_sym, gap_any) in report.curve
        ]
        rows.append((report.s, report.params.g, report.params.J,
                     report.params.delta, report.gap, ""))
        write_csv(
            cfg.out,
            ("s", "g", "J", "Delta", "E_gap_symmetric", "E_gap_any"),
            rows,
            footer_comments=[
                "refined minimum s=%s J=%s E_gap=%s"
                % (fmt(report.s), fmt(report.params.J), fmt(report.gap)),
            ],
        )
    return report


def run_spectrum(cfg: RunConfig, ctx: SimContext | None = None):
    """Lowest levels along the plan trajectory, with symmetry weights."""
    table = (ctx.table if ctx else
             enumerate_basis(LatticeShape(cfg.sites, cfg.excitations)))
    templates = ctx.templates if ctx else HamiltonianTemplates(table)
    rows = []
    from .ramp import trajectory_point

    for s in np.linspace(0.0, 1.0, cfg.resolution):
        p = trajectory_point(cfg.plan, float(s))
        h = templates.assemble_copy(p.g, p.J, p.delta)
        pairs = low_spectrum(h, cfg.count, translation=templates.translation)
        for level, pair in enumerate(pairs):
            rows.append((
                float(s), p.g, p.J, p.delta, level,
                pair.energy - pairs[0].energy, pair.symmetric_weight,
            ))
    if cfg.out:
        write_csv(
            cfg.out,
            ("s", "g", "J", "Delta", "level", "energy_above_ground",
             "symmetric_weight"),
            rows,
        )
    return rows


def run_basis(cfg: RunConfig):
    table = enumerate_basis(LatticeShape(cfg.sites, cfg.excitations))
    if cfg.out:
        write_basis_text(table, cfg.out)
    return table


def run_init_pulse(cfg: RunConfig):
    """Pulse simulation; CSV rows `l, type, duration, cumulative_fidelity`."""
    if cfg.pulse == "mi":
        res = states.simulate_mi_pulse(cfg.plan.delta.start, cfg.plan.g.start,
                                       cfg.eps)
        rows = [(1, "MI", res.duration, res.fidelity)]
        footer = [f"fidelity={fmt(res.fidelity)} tau_d1={fmt(res.duration)}"]
    else:
        n = cfg.pulse_n or cfg.excitations
        res = states.simulate_sf_pulse(n, cfg.eps, cfg.g_d)
        rows = [(seg.step, seg.kind, seg.duration, seg.cumulative_fidelity)
                for seg in res.segments]
        footer = [
            "fidelity=%s tau_d2=%s" % (fmt(res.fidelity), fmt(res.total_duration))
        ]
    if cfg.out:
        write_csv(cfg.out, ("l", "type", "duration", "cumulative_fidelity"),
                  rows, footer_comments=footer)
    return res
