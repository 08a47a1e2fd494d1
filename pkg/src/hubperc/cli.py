"""Command-line frontend.

Subcommands map one-to-one onto the library modules:

  constants    derived exponents and the critical intensity, printed as JSON
  simulate     sample one percolated graph, write edge/component CSVs
  experiment   run a Monte Carlo regime from a flat key=value config file
  fixedpoint   truncated-kernel survival fixed point, rho CSV + JSON summary

Exit codes: 0 success, 1 tolerance fail (outputs still written), 2 usage
error, 3 I/O error.
"""

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .components import connected_components, write_component_csv
from .constants import ModelParams, derive_exponents, lambda_crit
from .experiments import (
    REGIMES,
    ExperimentConfig,
    run_regime,
    scaling_window_scan,
    write_report,
)
from .fixedpoint import (
    NonConvergenceError,
    SubcriticalError,
    build_kernel_grid,
    operator_norm,
    operator_norm_two_step,
    solve_rho,
    write_rho_csv,
    write_solution_json,
    zeta_infinity,
)
from .graphgen import sample_graph, write_edge_list
from .weights import build_weights

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_IO = 3

# config-file schema for the experiment subcommand (flat key = value text)
_INT_KEYS = {"n", "replicates", "seed", "hub_k", "truncation_m", "workers"}
_FLOAT_KEYS = {"tau", "C", "lambda_mult", "eps0", "a_value", "delta",
               "tol_ratio", "tol_tv", "tol_ks"}
_STR_KEYS = {"regime", "kernel"}
_LIST_KEYS = {"lambda_grid"}
_KNOWN_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | _LIST_KEYS
_CONFIG_REGIMES = REGIMES + ("scan",)


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; '#' starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ValueError(f"config line {lineno}: expected key = value")
        if key in raw:
            raise ValueError(f"config line {lineno}: duplicate key '{key}'")
        raw[key] = value
    return raw


def build_experiment_config(raw: dict) -> tuple[ExperimentConfig, str]:
    """Turn parsed config text into an ExperimentConfig plus the regime label."""
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ValueError(f"unknown config key: '{unknown[0]}'")
    for key in ("regime", "n", "replicates", "seed"):
        if key not in raw:
            raise ValueError(f"missing config key: '{key}'")
    label = raw["regime"]
    if label not in _CONFIG_REGIMES:
        raise ValueError(
            f"regime must be one of {', '.join(_CONFIG_REGIMES)}; got '{label}'")
    params = ModelParams(
        tau=float(raw.get("tau", 2.5)),
        tail_const_C=float(raw.get("C", 1.0)),
        n=int(raw["n"]),
        kernel=raw.get("kernel", "nr"),
    )
    kwargs = {}
    for key in _INT_KEYS - {"n"}:
        if key in raw:
            kwargs[key] = int(raw[key])
    for key in _FLOAT_KEYS - {"tau", "C"}:
        if key in raw:
            kwargs[key] = float(raw[key])
    if "lambda_grid" in raw:
        kwargs["lambda_grid"] = tuple(
            float(tok) for tok in raw["lambda_grid"].split(",") if tok.strip())
    cfg = ExperimentConfig(
        params=params,
        regime="critical" if label == "scan" else label,
        **kwargs,
    )
    return cfg, label


def cmd_constants(args) -> int:
    params = ModelParams(tau=args.tau, tail_const_C=args.C, n=1, kernel=args.kernel)
    payload = {**asdict(derive_exponents(params)), **asdict(lambda_crit(params))}
    print(json.dumps(payload, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_simulate(args) -> int:
    params = ModelParams(tau=args.tau, tail_const_C=args.C, n=args.n,
                         kernel=args.kernel, lam=args.lam)
    pi = params.pi_n() if args.pi is None else args.pi
    if not 0.0 <= pi <= 1.0:
        raise ValueError(f"pi must lie in [0,1], got {pi}")
    ws = build_weights(params)
    graph = sample_graph(ws, params.kernel, pi, args.seed)
    summary = connected_components(graph, ws)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_edge_list(graph, out / "edges.csv")
    write_component_csv(summary, out / "components.csv")
    c1 = int(summary.sizes[0])
    c2 = int(summary.sizes[1]) if summary.num_components > 1 else 0
    meta = {
        "n": params.n, "m": graph.num_edges, "c1": c1, "c2": c2,
        "kernel": params.kernel, "tau": params.tau, "C": params.tail_const_C,
        "lambda": args.lam, "pi": pi, "seed": args.seed,
    }
    (out / "summary.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"n={params.n} m={graph.num_edges} C1={c1} C2={c2}")
    return EXIT_OK


def cmd_experiment(args) -> int:
    text = Path(args.config).read_text()
    cfg, label = build_experiment_config(parse_config_text(text))
    report = scaling_window_scan(cfg) if label == "scan" else run_regime(cfg)
    out = Path(args.out)
    write_report(report, out)
    flags = sorted(k for k in report.summary if k.endswith("_pass"))
    failed = [k for k in flags if not report.summary[k]]
    print(f"regime={label} replicates={cfg.replicates} "
          f"pass={len(flags) - len(failed)}/{len(flags)} out={out}")
    for key in failed:
        print(f"FAIL {key}", file=sys.stderr)
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_fixedpoint(args) -> int:
    params = ModelParams(tau=args.tau, tail_const_C=args.C, n=1, kernel=args.kernel)
    exps = derive_exponents(params)
    kg = build_kernel_grid(args.a, args.n_grid, exps, kernel=params.kernel)
    if args.two_step_check:
        n_one = operator_norm(kg)
        n_two = operator_norm_two_step(kg)
        rel = abs(n_one - n_two) / n_one
        print(f"operator_norm={n_one!r} two_step_norm={n_two!r} rel_diff={rel:.3e}")
    sol = solve_rho(kg, args.lam, tol=args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_rho_csv(kg, sol, out / "rho.csv")
    write_solution_json(sol, out / "summary.json")
    print(f"a={args.a:g} lambda={args.lam:g} zeta_a={sol.zeta_a!r} "
          f"lambda_c_a={sol.lambda_c_a!r}")
    if args.ladder:
        a = 10.0
        print("ladder: a zeta_a")
        while a <= args.ladder_cap + 1e-9:
            rung = solve_rho(build_kernel_grid(a, args.ladder_grid, exps,
                                               kernel=params.kernel), args.lam)
            print(f"ladder: {a:g} {rung.zeta_a!r}")
            a *= 2.0
        zeta = zeta_infinity(args.lam, exps, kernel=params.kernel,
                             tol=args.ladder_tol, n_grid=args.ladder_grid,
                             a_cap=args.ladder_cap)
        print(f"zeta_extrapolated={zeta!r}")
    return EXIT_OK


def _add_model_flags(sub, n_flag: bool) -> None:
    sub.add_argument("--tau", type=float, default=2.5,
                     help="power-law exponent, dimensionless, in (2,3) (default 2.5)")
    sub.add_argument("--C", type=float, default=1.0,
                     help="tail constant of the weight law, dimensionless (default 1.0)")
    sub.add_argument("--kernel", default="nr", choices=("nr", "cl", "grg"),
                     help="connection kernel (default nr)")
    if n_flag:
        sub.add_argument("--n", type=int, default=10 ** 4,
                         help="number of vertices (default 10000)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hubperc",
        description="Bond percolation on scale-free rank-1 random graphs.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("constants", help="print derived exponents and lambda_c as JSON")
    _add_model_flags(p, n_flag=False)
    p.set_defaults(func=cmd_constants)

    p = subs.add_parser("simulate", help="sample one percolated graph")
    _add_model_flags(p, n_flag=True)
    p.add_argument("--lam", type=float, default=1.0,
                   help="intensity lambda; retention pi = lam * n^{-(3-tau)/2} (default 1.0)")
    p.add_argument("--pi", type=float, default=None,
                   help="override retention probability in [0,1] directly (default: derived)")
    p.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    p.add_argument("--out", default="simulate_out",
                   help="output directory (default simulate_out)")
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("experiment", help="run one Monte Carlo regime from a config file")
    p.add_argument("--config", required=True,
                   help="flat key=value config file ('#' comments)")
    p.add_argument("--out", default="experiment_out",
                   help="output directory (default experiment_out)")
    p.set_defaults(func=cmd_experiment)

    p = subs.add_parser("fixedpoint", help="survival fixed point on a truncated kernel")
    _add_model_flags(p, n_flag=False)
    p.add_argument("--a", type=float, default=50.0,
                   help="truncation parameter a > 0 (default 50)")
    p.add_argument("--lam", type=float, default=0.5,
                   help="intensity lambda >= 0 (default 0.5)")
    p.add_argument("--n-grid", type=int, default=2048,
                   help="graded grid size (default 2048)")
    p.add_argument("--tol", type=float, default=1e-10,
                   help="fixed-point sup-norm tolerance (default 1e-10)")
    p.add_argument("--out", default="fixedpoint_out",
                   help="output directory (default fixedpoint_out)")
    p.add_argument("--ladder", action="store_true",
                   help="also print the zeta_a ladder and its extrapolated limit")
    p.add_argument("--ladder-tol", type=float, default=5e-3,
                   help="relative tolerance on successive extrapolants (default 5e-3)")
    p.add_argument("--ladder-grid", type=int, default=1024,
                   help="grid size used on ladder rungs (default 1024)")
    p.add_argument("--ladder-cap", type=float, default=10_000.0,
                   help="largest truncation visited by the ladder (default 10000)")
    p.add_argument("--two-step-check", action="store_true",
                   help="print one- and two-step operator norms and their relative difference")
    p.set_defaults(func=cmd_fixedpoint)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage/help
        code = exc.code
        return EXIT_OK if code in (0, None) else EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, SubcriticalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
