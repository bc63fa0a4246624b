"""Batch command line: configure sources and schedules, run the estimators
and the theorem checks, emit CSV/JSON artifacts and static SVG plots.

Subcommands: rate | cgf | verify | report.  Outputs are byte-identical for
identical configs and seeds; --threads changes speed only, never values.
Exit codes: 0 clean, 1 when an unexpected violation is found (or an expected
one is missed; with --strict INCONCLUSIVE also fails), 2 on usage or config
errors.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spectrum, verify
from .conjugate import Grid
from .cumulant import TruncationWindow, cgf_curves
from .sources import Source, source_from_json
from .spectrum import ShrinkSchedule, estimate_rate_curve
from .verify import GammaSet, Interval, VerificationReport

HUGE = 1e10  # stand-in for the whole line in the counterexample check


def default_sources() -> list[Source]:
    from .sources import DivergentPM, GaussianIID, InterleavedGaussian, MixedGaussian

    g1 = GaussianIID(-1.0, 1.0)
    g2 = GaussianIID(1.0, 1.0)
    return [
        GaussianIID(0.0, 1.0),
        MixedGaussian(g1, g2, 0.5, 0.5),
        InterleavedGaussian(g1, g2),
        DivergentPM(),
    ]


@dataclass
class ExperimentConfig:
    sources: list = field(default_factory=default_sources)
    r_grid: Grid = field(default_factory=lambda: Grid(-3.0, 3.0, 0.05))
    theta_grid: Grid = field(default_factory=lambda: Grid(-3.0, 3.0, 0.05))
    schedule: ShrinkSchedule = field(default_factory=ShrinkSchedule.default)
    windows: list = field(
        default_factory=lambda: [
            TruncationWindow.full(),
            TruncationWindow.interval(-3.0, 3.0),
            TruncationWindow.symmetric(8.0),
        ]
    )
    gamma_sets: list | None = None  # explicit sets; None means "generate"
    gamma_seed: int = 42
    gamma_count: int = 20
    tolerance: float = 0.05
    out_dir: str = "out"

    def gammas(self) -> list:
        if self.gamma_sets is not None:
            return self.gamma_sets
        return verify.random_gamma_suite(self.gamma_seed, self.gamma_count,
                                         self.r_grid.lo, self.r_grid.hi)

    def to_json(self) -> dict:
        return {
            "sources": [s.to_json() for s in self.sources],
            "r_grid": self.r_grid.to_json(),
            "theta_grid": self.theta_grid.to_json(),
            "schedule": self.schedule.to_json(),
            "windows": [w.to_json() for w in self.windows],
            "gamma_sets": None if self.gamma_sets is None else [g.to_json() for g in self.gamma_sets],
            "gamma_seed": self.gamma_seed,
            "gamma_count": self.gamma_count,
            "tolerance": self.tolerance,
            "out_dir": self.out_dir,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ExperimentConfig":
        cfg = cls()
        if "source" in d:
            cfg.sources = [source_from_json(d["source"])]
        if "sources" in d:
            cfg.sources = [source_from_json(s) for s in d["sources"]]
        if "r_grid" in d:
            cfg.r_grid = Grid.from_json(d["r_grid"])
        if "theta_grid" in d:
            cfg.theta_grid = Grid.from_json(d["theta_grid"])
        if "schedule" in d:
            cfg.schedule = ShrinkSchedule.from_json(d["schedule"])
        if "windows" in d:
            cfg.windows = [TruncationWindow.from_json(w) for w in d["windows"]]
        if d.get("gamma_sets") is not None:
            cfg.gamma_sets = [GammaSet.from_json(g) for g in d["gamma_sets"]]
        cfg.gamma_seed = int(d.get("gamma_seed", cfg.gamma_seed))
        cfg.gamma_count = int(d.get("gamma_count", cfg.gamma_count))
        cfg.tolerance = float(d.get("tolerance", cfg.tolerance))
        cfg.out_dir = str(d.get("out_dir", cfg.out_dir))
        return cfg


def _labels(sources) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for s in sources:
        base = s.label()
        k = seen.get(base, 0)
        seen[base] = k + 1
        out.append(base if k == 0 else f"{base}_{k + 1}")
    return out


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _dump_json(path: Path, payload) -> None:
    _write(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _plot_rate(path: Path, source: Source, curve) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "ldspectrum"
    rs = curve.grid.points()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    finite = np.isfinite(curve.lower)
    if finite.any():
        ax.plot(rs[finite], curve.lower[finite], label="H_lower", color="tab:blue")
        ax.fill_between(
            rs[finite],
            curve.lower[finite] - curve.spread_lower[finite],
            curve.lower[finite] + curve.spread_lower[finite],
            color="tab:blue", alpha=0.2, linewidth=0,
        )
    finite_u = np.isfinite(curve.upper)
    if finite_u.any():
        ax.plot(rs[finite_u], curve.upper[finite_u], label="H_upper", color="tab:orange", ls="--")
    if source.capabilities().has_analytic_rate:
        lo_fn, hi_fn = source.analytic_rate()
        oracle = np.asarray(lo_fn(rs), dtype=float)
        m = np.isfinite(oracle)
        if m.any():
            ax.plot(rs[m], oracle[m], label="analytic", color="k", lw=0.8, ls=":")
    ax.set_xlabel("R")
    ax.set_ylabel("rate")
    ax.set_title(source.label())
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def _plot_cgf(path: Path, source: Source, curves) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "ldspectrum"
    ts = curves.theta_grid.points()
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for vals, name, color in ((curves.phi_lower, "phi_lower", "tab:green"),
                              (curves.phi_upper, "phi_upper", "tab:red")):
        m = np.isfinite(vals)
        if m.any():
            ax.plot(ts[m], vals[m], label=name, color=color)
    ax.set_xlabel("theta")
    ax.set_ylabel("cgf")
    ax.set_title(f"{source.label()} ({curves.window.label()})")
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def cmd_rate(cfg: ExperimentConfig, threads: int = 1, plot: bool = True) -> int:
    out = Path(cfg.out_dir)
    for label, source in zip(_labels(cfg.sources), cfg.sources):
        curve = estimate_rate_curve(source, cfg.r_grid, cfg.schedule, threads=threads)
        _write(out / label / "rate_curve.csv", curve.to_csv())
        if plot:
            _plot_rate(out / label / "rate_curve.svg", source, curve)
    return 0


def cmd_cgf(cfg: ExperimentConfig, threads: int = 1, plot: bool = True) -> int:
    out = Path(cfg.out_dir)
    for label, source in zip(_labels(cfg.sources), cfg.sources):
        for window in cfg.windows:
            curves = cgf_curves(source, window, cfg.theta_grid, cfg.schedule.n_schedule,
                                cfg.schedule.w_tail)
            _write(out / label / f"cgf_{window.label()}.csv", curves.to_csv())
            if plot:
                _plot_cgf(out / label / f"cgf_{window.label()}.svg", source, curves)
    return 0


def _source_battery(cfg: ExperimentConfig, source: Source, threads: int):
    """All diagnostics and theorem checks for one source."""
    tol = cfg.tolerance
    sched = cfg.schedule
    curve = estimate_rate_curve(source, cfg.r_grid, sched, threads=threads)
    coarse_thetas = Grid(cfg.theta_grid.lo, cfg.theta_grid.hi,
                         (cfg.theta_grid.hi - cfg.theta_grid.lo) / 12)
    etight = spectrum.e_tightness_diagnostic(source, n_schedule=sched.n_schedule,
                                             w_tail=sched.w_tail)
    ctight = spectrum.c_tightness_diagnostic(source, coarse_thetas,
                                             n_schedule=sched.n_schedule, w_tail=sched.w_tail)
    sigma = spectrum.sigma_convergence_diagnostic(
        source, (cfg.r_grid.lo, cfg.r_grid.hi), tol, sched)

    full_curves = cgf_curves(source, TruncationWindow.full(), cfg.theta_grid,
                             sched.n_schedule, sched.w_tail)
    gammas = cfg.gammas()

    reports: list[VerificationReport] = []
    for gamma in gammas:
        reports.append(verify.verify_sandwich_upper(source, gamma, curve, tol=tol))
        reports.append(verify.verify_sandwich_lower(source, gamma, curve, tol=tol,
                                                    sigma_convergent=sigma.passed))

    if source.kind == "divergent_pm":
        whole_line = GammaSet([Interval(-HUGE, HUGE)])
        reports.append(
            verify.verify_full_ldp(source, [whole_line], curve, tol=tol, expected_violation=True)
        )
    else:
        finite = np.isfinite(curve.lower) & np.isfinite(curve.upper)
        coincide = finite.any() and float(
            np.max(np.abs(curve.lower[finite] - curve.upper[finite]))
        ) <= tol
        if coincide:
            reports.append(verify.verify_full_ldp(source, gammas, curve, tol=tol))

    bounded = [w for w in cfg.windows if not w.is_full]
    if bounded:
        window = bounded[0]
        curves_m = cgf_curves(source, window, cfg.theta_grid, sched.n_schedule, sched.w_tail)
        reports.append(
            verify.verify_duality(source, window, curve, curves_m, tol=tol,
                                  sigma_convergent=sigma.passed)
        )
    reports.append(
        verify.verify_reduction(source, curve, full_curves, tol=tol,
                                c_tight=ctight.verdict == spectrum.C_TIGHT_CONSISTENT)
    )
    if source.kind == "gaussian_iid":
        reports.append(
            verify.verify_locality(source, TruncationWindow.interval(0.55, 1.05), 0.8,
                                   tol=0.03, theta_grid=cfg.theta_grid,
                                   n_schedule=sched.n_schedule)
        )
    reports.append(
        verify.verify_cge_upper(source, GammaSet([Interval(1.0, 2.0)]), full_curves,
                                sched.n_schedule, tol=tol, r_grid=cfg.r_grid, curve=curve)
    )
    diagnostics = {
        "e_tightness": {
            "verdict": etight.verdict,
            "k_schedule": list(etight.k_schedule),
            "slopes": [float(s) for s in etight.slopes],
        },
        "c_tightness": {
            "verdict": ctight.verdict,
            "k0": ctight.k0,
        },
        "sigma_convergence": {
            "passed": sigma.passed,
            "witness": sigma.witness,
            "counterexample_r": sigma.counterexample_r,
            "note": "heuristic: PASS means no violation found among candidate subsequences",
        },
    }
    return curve, reports, diagnostics


def _exit_code(all_reports, strict: bool) -> int:
    unexpected = [r for r in all_reports if r.verdict == verify.VIOLATED and not r.expected_violation]
    missed = [r for r in all_reports if r.expected_violation and r.verdict != verify.VIOLATED]
    if unexpected or missed:
        return 1
    if strict and any(r.verdict == verify.INCONCLUSIVE for r in all_reports):
        return 1
    return 0


def cmd_verify(cfg: ExperimentConfig, threads: int = 1, strict: bool = False) -> int:
    out = Path(cfg.out_dir)
    payload = {}
    tables = []
    everything = []
    for label, source in zip(_labels(cfg.sources), cfg.sources):
        _, reports, diagnostics = _source_battery(cfg, source, threads)
        payload[label] = {
            "diagnostics": diagnostics,
            "reports": [r.to_json() for r in reports],
        }
        everything.extend(reports)
        tables.append(f"== {label} ==\n" + verify.render_table(reports))
    _dump_json(out / "verification_reports.json", payload)
    _write(out / "verification_table.txt", "\n".join(tables))
    return _exit_code(everything, strict)


def cmd_report(cfg: ExperimentConfig, threads: int = 1, plot: bool = True,
               strict: bool = False) -> int:
    out = Path(cfg.out_dir)
    cmd_rate(cfg, threads=threads, plot=plot)
    cmd_cgf(cfg, threads=threads, plot=plot)
    embedded = cfg.to_json()
    embedded.pop("out_dir")  # payload describes the experiment, not the destination
    payload = {"config": embedded, "sources": {}}
    everything = []
    lines = ["# Verification summary", ""]
    lines.append("| source | theorem | verdict | worst margin |")
    lines.append("|---|---|---|---|")
    for label, source in zip(_labels(cfg.sources), cfg.sources):
        _, reports, diagnostics = _source_battery(cfg, source, threads)
        payload["sources"][label] = {
            "diagnostics": diagnostics,
            "reports": [r.to_json() for r in reports],
        }
        everything.extend(reports)
        for r in reports:
            worst = min(r.margins.values()) if r.margins else 0.0
            mark = " (expected)" if r.expected_violation and r.verdict == verify.VIOLATED else ""
            lines.append(f"| {label} | {r.theorem} | {r.verdict}{mark} | {worst:.4g} |")
    counts = {
        "HOLDS": sum(r.verdict == verify.HOLDS for r in everything),
        "VIOLATED": sum(r.verdict == verify.VIOLATED for r in everything),
        "expected_violations": sum(
            r.verdict == verify.VIOLATED and r.expected_violation for r in everything
        ),
        "INCONCLUSIVE": sum(r.verdict == verify.INCONCLUSIVE for r in everything),
    }
    payload["counts"] = counts
    lines += [
        "",
        f"Totals: {counts['HOLDS']} HOLDS, {counts['VIOLATED']} VIOLATED "
        f"({counts['expected_violations']} expected), {counts['INCONCLUSIVE']} INCONCLUSIVE.",
        "",
    ]
    _dump_json(out / "report.json", payload)
    _write(out / "summary.md", "\n".join(lines))
    return _exit_code(everything, strict)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ldspectrum",
                                description="rate-function and CGF toolkit for general sources")
    p.add_argument("--config", type=str, default=None, help="JSON experiment config")
    p.add_argument("--out", type=str, default=None, help="output directory (overrides config)")
    p.add_argument("--seed", type=int, default=None, help="gamma-suite seed (overrides config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads (speed only)")
    p.add_argument("--no-plot", action="store_true", help="skip SVG artifacts")
    p.add_argument("--strict", action="store_true", help="INCONCLUSIVE also fails the exit code")
    p.add_argument("command", choices=["rate", "cgf", "verify", "report"])
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is not None:
            cfg = ExperimentConfig.from_json(json.loads(Path(args.config).read_text()))
        else:
            cfg = ExperimentConfig()
        if args.out is not None:
            cfg.out_dir = args.out
        if args.seed is not None:
            cfg.gamma_seed = args.seed
        if args.command == "rate":
            return cmd_rate(cfg, threads=args.threads, plot=not args.no_plot)
        if args.command == "cgf":
            return cmd_cgf(cfg, threads=args.threads, plot=not args.no_plot)
        if args.command == "verify":
            return cmd_verify(cfg, threads=args.threads, strict=args.strict)
        return cmd_report(cfg, threads=args.threads, plot=not args.no_plot, strict=args.strict)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
