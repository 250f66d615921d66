"""Command-line entry point: ``confound-prob {evalue,analyze,sweep,plot,verify}``.

Exit codes: 0 success, 1 failure, 2 partial success (some rows or cases
skipped).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Optional, Sequence

from . import figures, report
from .analysis import AnalysisConfig, analyze_batch, BatchError, sweep_prior
from .bias_model import Engine, PriorSpec
from .effect_measures import EffectEstimate
from .evalue import evalue_for_ci_limit, evalue_from_ratio
from .ingest import CaseValidationError, Issue, SchemaError, parse_cases
from .verify import DEFAULT_SEED, verify_engines

SEED_ENV = "CONFOUND_PROB_SEED"
EXIT_OK, EXIT_FAIL, EXIT_PARTIAL = 0, 1, 2

ENGINE_NAMES = {
    "closed": Engine.CLOSED_FORM, "closed_form": Engine.CLOSED_FORM,
    "quad": Engine.QUADRATURE, "quadrature": Engine.QUADRATURE,
    "mc": Engine.MONTE_CARLO, "monte_carlo": Engine.MONTE_CARLO,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; 2 means partial success here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_FAIL, f"{self.prog}: error: {message}\n")


def _seed(flag: Optional[int], fallback: int = 0) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV, "").strip()
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}")
    return fallback


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_cases(path: str, skip_invalid: bool):
    """Returns (records, issues) or raises CaseValidationError."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            records, issues = parse_cases(fh)
    except SchemaError as exc:
        raise CaseValidationError([Issue(1, "header", str(exc))])
    except OSError as exc:
        raise CaseValidationError([Issue(0, "input", str(exc))])
    if issues and not skip_invalid:
        raise CaseValidationError(issues)
    return records, issues


def _report_issues(issues, stream) -> None:
    stream.write(json.dumps([i.as_dict() for i in issues], indent=2) + "\n")


def _grid(text: str) -> list[float]:
    try:
        grid = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"could not parse sigma-gamma grid {text!r}")
    if not grid or any(x <= 0 for x in grid):
        raise UsageError("sigma-gamma grid needs positive values")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError(f"sigma-gamma grid must be strictly increasing, got {text!r}")
    return grid


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="case CSV (case_id,domain,measure,point,ci_lower,ci_upper,se_log,evalue)")
    p.add_argument("--sigma-theta", type=float, default=1.0, help="prior SD of the log true effect (default 1.0)")
    p.add_argument("--default-s", type=float, default=0.2,
                   help="log-scale SE for rows without CI or se_log (default 0.2)")
    p.add_argument("--engine", choices=sorted(ENGINE_NAMES), default="closed",
                   help="closed form, 2-D quadrature or Monte Carlo (default closed)")
    p.add_argument("--seed", type=int, default=None, help=f"Monte Carlo seed (falls back to ${SEED_ENV}, then 0)")
    p.add_argument("--mc-draws", type=int, default=10**6, help="Monte Carlo draws per case (default 1e6)")
    p.add_argument("--skip-invalid", action="store_true", help="drop invalid rows instead of failing (exit 2)")


def _config(args, credible_interval: bool = True) -> AnalysisConfig:
    return AnalysisConfig(
        default_s=args.default_s,
        engine=ENGINE_NAMES[args.engine],
        seed=_seed(args.seed),
        mc_draws=args.mc_draws,
        credible_interval=credible_interval,
    )


# ---------------------------------------------------------------------------


def cmd_evalue(args) -> int:
    try:
        if (args.lcl is None) != (args.ucl is None):
            raise ValueError("--lcl and --ucl must be given together")
        est = EffectEstimate(args.measure, args.rr, args.lcl, args.ucl)
        ev = evalue_from_ratio(est.point)
        ev_ci = evalue_for_ci_limit(est) if est.has_ci else None
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.json:
        print(json.dumps({"rr": args.rr, "evalue": ev, "evalue_ci_limit": ev_ci}))
    else:
        print(f"E-value (point estimate): {report.fmt(ev)}")
        if ev_ci is not None:
            print(f"E-value (CI limit):       {report.fmt(ev_ci)}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    prior = PriorSpec(args.sigma_theta, args.sigma_gamma)
    config = _config(args, credible_interval=not args.no_ci)
    try:
        records, issues = _load_cases(args.input, args.skip_invalid)
    except CaseValidationError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        _report_issues(exc.issues, sys.stdout)
        return EXIT_FAIL
    errors: list = []
    try:
        results = analyze_batch(records, prior, config, errors=errors, max_workers=args.workers)
    except BatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report.results_csv(results), args.out)
    if args.json:
        meta = {"engine": config.engine.value, "seed": config.seed, "default_s": config.default_s,
                "prior": asdict(prior)}
        Path(args.json).write_text(report.results_json(results, **meta), encoding="utf-8")
    if issues:
        _report_issues(issues, sys.stderr)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    return EXIT_PARTIAL if (issues or errors) else EXIT_OK


def cmd_sweep(args) -> int:
    grid = _grid(args.sigma_gamma_grid)
    base = PriorSpec(args.sigma_theta, grid[0])
    config = _config(args, credible_interval=False)
    try:
        records, issues = _load_cases(args.input, args.skip_invalid)
    except CaseValidationError as exc:
        print(f"error: {args.input}: {exc}", file=sys.stderr)
        _report_issues(exc.issues, sys.stdout)
        return EXIT_FAIL
    sweeps, failed = [], []
    for i, rec in enumerate(records):
        try:
            sweeps.append(sweep_prior(rec, grid, base, config))
        except Exception as exc:  # noqa: BLE001 - reported per case
            failed.append(f"case {rec.case_id!r}: {exc}")
    if records and not sweeps:
        for f in failed:
            print(f"error: {f}", file=sys.stderr)
        return EXIT_FAIL
    _emit(report.sweep_csv(sweeps), args.out)
    spans = report.span_csv(sweeps)
    if args.summary:
        Path(args.summary).write_text(spans, encoding="utf-8")
    else:
        (sys.stdout if args.out else sys.stderr).write(spans)
    if issues:
        _report_issues(issues, sys.stderr)
    for f in failed:
        print(f"error: {f}", file=sys.stderr)
    return EXIT_PARTIAL if (issues or failed) else EXIT_OK


def cmd_plot(args) -> int:
    try:
        text = Path(args.results).read_text(encoding="utf-8")
        if args.figure == "prior-sensitivity":
            svg = figures.prior_sensitivity(report.read_sweep_csv(text))
        else:
            rows = report.read_results_csv(text)
            svg = figures.e_vs_p(rows) if args.figure == "e-vs-p" else figures.case_bars(rows)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    Path(args.out).write_text(svg, encoding="utf-8")
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _seed(args.seed, DEFAULT_SEED)
    rep = verify_engines(
        grid_size=args.grid_size,
        seed=seed,
        mc_points=args.mc_points,
        mc_draws=args.mc_draws,
        closed_form_bias=args.inject_bias,
    )
    print(f"grid: {rep.grid_size} tuples, seed {seed}")
    print(f"max |closed - quadrature| = {rep.max_quad_diff:.3e}  (tolerance 1e-06)  {'ok' if rep.quad_ok else 'FAIL'}")
    worst = max((abs(m.closed - m.estimate) / m.std_error if m.std_error else 0.0) for m in rep.mc_compared) \
        if rep.mc_compared else float("nan")
    print(f"monte carlo: {len(rep.mc_compared)} compared, {len(rep.mc_unreliable)} unreliable, "
          f"{len(rep.mc_misses)} outside 3 SE (allowed {rep.mc_allowed_misses}), "
          f"max |closed - mc| / se = {worst:.2f}  {'ok' if rep.mc_ok else 'FAIL'}")
    for m in rep.mc_unreliable:
        print(f"  unreliable: {m.point}  ({m.error})")
    if not rep.quad_ok:
        print(f"offending tuple (quadrature): {rep.worst_quad_point}", file=sys.stderr)
    for m in rep.mc_misses:
        print(f"offending tuple (monte carlo): {m.point} closed={m.closed:.6g} mc={m.estimate:.6g} se={m.std_error:.3g}",
              file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="confound-prob", description="Posterior probability that unmeasured confounding explains away an association.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evalue", help="E-value for a ratio and its CI limit")
    p.add_argument("--rr", type=float, required=True, help="observed ratio (RR, OR or HR)")
    p.add_argument("--lcl", type=float, help="lower 95%% confidence limit")
    p.add_argument("--ucl", type=float, help="upper 95%% confidence limit")
    p.add_argument("--measure", choices=["RR", "OR", "HR"], default="RR", help="effect measure (default RR)")
    p.add_argument("--json", action="store_true", help="print {rr, evalue, evalue_ci_limit} as JSON")
    p.set_defaults(func=cmd_evalue)

    p = sub.add_parser("analyze", help="posterior exceedance probability for every case")
    _add_model_flags(p)
    p.add_argument("--sigma-gamma", type=float, default=0.5, help="half-normal scale of log Gamma (default 0.5)")
    p.add_argument("--out", help="results CSV (default stdout)")
    p.add_argument("--json", help="also write a JSON mirror here")
    p.add_argument("--no-ci", action="store_true", help="skip theta_true credible intervals")
    p.add_argument("--workers", type=int, default=None, help="threads for the batch (default 1)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="exceedance probability over a grid of sigma_gamma")
    _add_model_flags(p)
    p.add_argument("--sigma-gamma-grid", default="0.25,0.5,1.0", help="comma-separated, strictly increasing")
    p.add_argument("--out", help="long-format CSV case_id,sigma_gamma,p_exceed (default stdout)")
    p.add_argument("--summary", help="per-case stability_span CSV (default: printed)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="SVG figure from a results or sweep CSV")
    p.add_argument("--results", required=True, help="analyze output (e-vs-p, case-bars) or sweep output (prior-sensitivity)")
    p.add_argument("--figure", required=True, choices=figures.FIGURES, help="which figure")
    p.add_argument("--out", required=True, help="SVG path")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("verify", help="cross-check closed form against quadrature and Monte Carlo")
    p.add_argument("--grid-size", type=int, default=100, help="random parameter tuples (default 100)")
    p.add_argument("--seed", type=int, default=None, help=f"grid and Monte Carlo seed (falls back to ${SEED_ENV}, then {DEFAULT_SEED})")
    p.add_argument("--mc-points", type=int, default=None, help="tuples also checked by Monte Carlo (default a quarter)")
    p.add_argument("--mc-draws", type=int, default=10**6, help="Monte Carlo draws per tuple (default 1e6)")
    p.add_argument("--inject-bias", type=float, default=0.0,
                   help="test hook: add this to every closed-form value (should make verify fail)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
