"""Command-line interface.

Subcommands: estimate, bootstrap, simulate, experiment, ttest, parse.
Reports are written as versioned JSON (--json) with a flat CSV mirror
(--csv); a human-readable summary always goes to standard output.  Exit
codes: 0 success, 1 input error, 2 numeric failure; failures also emit a
machine-readable error object on standard error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import warnings as _warnings
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .bootstrap import BootstrapConfig, bootstrap_se, choose_p
from .direct import EntropyEstimate, estimate_direct_pooled
from .estimators import DIRECT_METHODS, EstimatorSpec, run_estimator
from .ingest import SequenceFile, SequenceFileError, ingest_many, tokens_from_text
from .markov import Alphabet, Sequence, TransitionMatrix
from .simulate import (
    BENCHMARK_NAMES,
    ExperimentPlan,
    ExperimentReport,
    ReparamPoint,
    SecondOrderParams,
    benchmark_matrix,
    reparam_to_abcd,
    run_experiment,
    simulate_chain,
    simulate_second_order,
)
from .stats import ttest_pooled
from .swlz import format_parsing, swlz_parse

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


class PlanError(ValueError):
    """An experiment plan file violates the plan schema."""


class _Parser(argparse.ArgumentParser):
    # Flag misuse is an input error (exit 1), not argparse's default exit 2.
    def error(self, message: str) -> None:  # type: ignore[override]
        raise SequenceFileError(message)


def _base_report(command: str, seed: int | None) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": command,
        "seed": seed,
    }


def _write_json(path: str, report: dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")


def _write_csv(path: str, header: list[str], rows: list[list[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _round(x: float | None, digits: int = 10) -> float | None:
    return None if x is None else round(float(x), digits)


# ---------------------------------------------------------------- estimate


def _add_input_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("files", nargs="*", metavar="FILE", help="sequence file(s)")
    sub.add_argument("--text", help="inline sequence instead of files")
    sub.add_argument(
        "--format", choices=("tokens", "lines"), default="tokens", help="file layout"
    )
    sub.add_argument(
        "--collapse-repeats",
        action="store_true",
        help="merge consecutive identical symbols before analysis",
    )
    sub.add_argument("--alphabet", metavar="FILE", help="declared alphabet, one token list")


def _add_report_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--json", metavar="OUT", help="write JSON report here")
    sub.add_argument("--csv", metavar="OUT", help="write flat CSV report here")


def _read_alphabet(path: str | None) -> tuple[str, ...] | None:
    if path is None:
        return None
    from .ingest import read_tokens

    return tuple(read_tokens(path))


def _load_sequence(args: argparse.Namespace) -> tuple[Sequence, list[int], dict[str, Any]]:
    declared = _read_alphabet(args.alphabet)
    if args.text is not None:
        tokens = tokens_from_text(args.text)
        if not tokens:
            raise SequenceFileError("empty --text input")
        if declared is not None:
            missing = sorted({t for t in tokens if t not in set(declared)})
            if missing:
                raise SequenceFileError(
                    f"--text tokens outside declared alphabet: {', '.join(missing)}"
                )
            alphabet = Alphabet(declared)
        else:
            alphabet = Alphabet.from_tokens(tokens)
        if args.collapse_repeats:
            from .ingest import collapse_repeats

            tokens = collapse_repeats(tokens)
        if len(tokens) < 2:
            raise SequenceFileError("fewer than 2 symbols in --text input")
        seq = Sequence.from_tokens(tokens, alphabet)
        starts = [0]
        source = {"text": True, "files": []}
    elif args.files:
        files = [
            SequenceFile(
                path=p,
                format=args.format,
                declared_alphabet=declared,
                collapse_repeats=args.collapse_repeats,
            )
            for p in args.files
        ]
        seq, starts = ingest_many(files)
        source = {"text": False, "files": list(args.files)}
    else:
        raise SequenceFileError("no input: pass FILE(s) or --text")
    source.update(
        {
            "n_obs": seq.length,
            "kappa": seq.alphabet.kappa,
            "alphabet": list(seq.alphabet.symbols),
            "collapse_repeats": bool(args.collapse_repeats),
        }
    )
    return seq, starts, source


def _split_segments(seq: Sequence, starts: list[int]) -> list[Sequence]:
    bounds = starts + [seq.length]
    return [
        Sequence(seq.states[a:b], seq.alphabet)
        for a, b in zip(bounds, bounds[1:])
        if b > a
    ]


def _estimator_specs(args: argparse.Namespace) -> list[EstimatorSpec]:
    methods = args.method or ["empirical"]
    specs = []
    for m in methods:
        specs.append(
            EstimatorSpec(m, None if m == "swlz" else args.order)
        )
    return specs


def _estimate_record(
    est: EntropyEstimate,
    se: float | None,
    p_used: float | None,
    replicates: int | None,
    extra_warnings: list[str],
) -> dict[str, Any]:
    return {
        "method": est.method,
        "order": est.order,
        "value_bits": _round(est.value),
        "se": _round(se),
        "p_used": _round(p_used),
        "replicates": replicates,
        "warnings": list(est.warnings) + extra_warnings,
    }


def _cmd_estimate(args: argparse.Namespace, require_bootstrap: bool) -> int:
    seq, starts, source = _load_sequence(args)
    if require_bootstrap and not args.replicates:
        raise SequenceFileError("the bootstrap command requires --replicates")
    specs = _estimator_specs(args)
    exclude_boundaries = getattr(args, "exclude_boundaries", False)
    segments = _split_segments(seq, starts) if exclude_boundaries else None
    records = []
    lines = []
    for spec in specs:
        extra: list[str] = []
        if segments is not None and spec.method in DIRECT_METHODS:
            est = estimate_direct_pooled(
                segments,
                order=spec.order,
                stationary=spec.method,
                paper_zero_mode=args.paper_zero_mode,
            )
            extra.append("transitions across file boundaries excluded")
        else:
            est = run_estimator(seq, spec, paper_zero_mode=args.paper_zero_mode)
        se = p_used = None
        replicates = None
        if args.replicates:
            if args.p is not None:
                p_used = args.p
            else:
                with _warnings.catch_warnings(record=True) as caught:
                    _warnings.simplefilter("always")
                    p_used = choose_p(est.value, seq.length)
                extra.extend(str(w.message) for w in caught)
            config = BootstrapConfig(p=p_used, replicates=args.replicates, seed=args.seed)
            result = bootstrap_se(seq, spec, config)
            se = result.standard_error
            replicates = args.replicates
            if result.n_failures:
                extra.append(
                    f"{result.n_failures} bootstrap replicate(s) failed "
                    f"({result.failure_policy} policy)"
                )
        records.append(_estimate_record(est, se, p_used, replicates, extra))
        detail = f"{est.value:.4f} bits"
        if se is not None:
            detail += f"  (SE {se:.4f}, p={p_used:.4f}, B={replicates})"
        lines.append(f"{spec.describe():>24}: {detail}")
        for w in records[-1]["warnings"]:
            lines.append(f"{'':>26}warning: {w}")
    seed = args.seed if args.replicates else None
    report = _base_report("bootstrap" if require_bootstrap else "estimate", seed)
    report["input"] = source
    report["estimates"] = records
    if args.json:
        _write_json(args.json, report)
    if args.csv:
        header = ["method", "order", "value_bits", "se", "p_used", "replicates", "warnings"]
        rows = [
            [r["method"], r["order"], r["value_bits"], r["se"], r["p_used"],
             r["replicates"], "; ".join(r["warnings"])]
            for r in records
        ]
        _write_csv(args.csv, header, rows)
    print(f"n = {seq.length} observations over {seq.alphabet.kappa} symbols")
    for line in lines:
        print(line)
    return EXIT_OK


# ---------------------------------------------------------------- parse


def _cmd_parse(args: argparse.Namespace) -> int:
    seq, _, source = _load_sequence(args)
    parsing = swlz_parse(seq)
    rendered = format_parsing(seq, parsing)
    report = _base_report("parse", None)
    report["input"] = source
    report["phrases"] = [
        {"start": s, "length": ln} for s, ln in parsing.phrases
    ]
    report["last_capped"] = parsing.last_capped
    report["rendered"] = rendered
    if args.json:
        _write_json(args.json, report)
    if args.csv:
        _write_csv(
            args.csv,
            ["start", "length"],
            [[s, ln] for s, ln in parsing.phrases],
        )
    print(rendered)
    return EXIT_OK


# ---------------------------------------------------------------- simulate


def _parse_matrix_file(path: str) -> TransitionMatrix:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SequenceFileError(f"cannot read {path}: {exc}") from exc
    stripped = text.lstrip()
    if stripped.startswith("["):
        rows = json.loads(text)
    else:
        rows = [
            [float(tok) for tok in line.split()]
            for line in text.splitlines()
            if line.strip() and not line.strip().startswith("#")
        ]
    try:
        return TransitionMatrix.from_probs(np.asarray(rows, dtype=np.float64))
    except ValueError as exc:
        raise SequenceFileError(f"{path}: {exc}") from exc


def _cmd_simulate(args: argparse.Namespace) -> int:
    chosen = [
        args.benchmark is not None,
        args.matrix is not None,
        args.second_order is not None,
    ]
    if sum(chosen) != 1:
        raise SequenceFileError(
            "choose exactly one generator: --benchmark, --matrix, or --second-order"
        )
    if args.second_order is not None:
        try:
            a, b, c, d = (float(v) for v in args.second_order.split(","))
        except ValueError as exc:
            raise SequenceFileError("--second-order expects a,b,c,d") from exc
        seq = simulate_second_order(SecondOrderParams(a, b, c, d), args.length, rng=args.seed)
    else:
        if args.benchmark is not None:
            P = benchmark_matrix(args.benchmark, kappa=args.kappa, diag=args.diag)
        else:
            P = _parse_matrix_file(args.matrix)
        init = args.init if args.init is not None else None
        seq = simulate_chain(P, args.length, init=init, rng=args.seed)
    line = " ".join(seq.tokens()) + "\n"
    if args.out:
        Path(args.out).write_text(line, encoding="utf-8")
        print(f"wrote {seq.length} symbols to {args.out}")
    else:
        sys.stdout.write(line)
    return EXIT_OK


# ---------------------------------------------------------------- experiment


def _plan_field(plan: dict[str, Any], key: str, kind: type, required: bool = True) -> Any:
    if key not in plan:
        if required:
            raise PlanError(f"plan field '{key}': missing")
        return None
    value = plan[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise PlanError(f"plan field '{key}': expected {kind.__name__}")
    return value


def _load_plan(path: str) -> tuple[ExperimentPlan, dict[str, Any]]:
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SequenceFileError(f"cannot read {path}: {exc}") from exc
    try:
        plan_dict = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PlanError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(plan_dict, dict):
        raise PlanError("plan must be a JSON object")

    gen = _plan_field(plan_dict, "generator", dict)
    generator: TransitionMatrix | SecondOrderParams
    if "benchmark" in gen:
        name = gen["benchmark"]
        if name not in BENCHMARK_NAMES:
            raise PlanError(
                f"plan field 'generator.benchmark': unknown name {name!r}"
            )
        generator = benchmark_matrix(
            name, kappa=int(gen.get("kappa", 8)), diag=float(gen.get("diag", 0.95))
        )
        generator_name = name
    elif "matrix" in gen:
        try:
            generator = TransitionMatrix.from_probs(np.asarray(gen["matrix"], dtype=float))
        except ValueError as exc:
            raise PlanError(f"plan field 'generator.matrix': {exc}") from exc
        generator_name = "matrix"
    elif "second_order" in gen:
        so = gen["second_order"]
        if not isinstance(so, dict):
            raise PlanError("plan field 'generator.second_order': expected object")
        try:
            if {"a", "b", "c", "d"} <= so.keys():
                generator = SecondOrderParams(
                    float(so["a"]), float(so["b"]), float(so["c"]), float(so["d"])
                )
            elif {"p", "q", "phi", "gamma"} <= so.keys():
                generator = reparam_to_abcd(
                    ReparamPoint(
                        float(so["p"]), float(so["q"]), float(so["phi"]), float(so["gamma"])
                    )
                )
            else:
                raise PlanError(
                    "plan field 'generator.second_order': need a,b,c,d or p,q,phi,gamma"
                )
        except ValueError as exc:
            raise PlanError(f"plan field 'generator.second_order': {exc}") from exc
        generator_name = "second_order"
    else:
        raise PlanError(
            "plan field 'generator': need one of benchmark, matrix, second_order"
        )

    lengths = _plan_field(plan_dict, "lengths", list)
    if not all(isinstance(v, int) for v in lengths):
        raise PlanError("plan field 'lengths': expected integers")
    estimators = []
    for k, item in enumerate(_plan_field(plan_dict, "estimators", list)):
        if not isinstance(item, dict) or "method" not in item:
            raise PlanError(f"plan field 'estimators[{k}]': expected object with 'method'")
        try:
            estimators.append(EstimatorSpec(item["method"], item.get("order")))
        except ValueError as exc:
            raise PlanError(f"plan field 'estimators[{k}]': {exc}") from exc
    try:
        plan = ExperimentPlan(
            generator=generator,
            lengths=tuple(lengths),
            replicates=_plan_field(plan_dict, "replicates", int),
            estimators=tuple(estimators),
            seed=_plan_field(plan_dict, "seed", int),
            paper_zero_mode=bool(plan_dict.get("paper_zero_mode", False)),
            generator_name=generator_name,
        )
    except ValueError as exc:
        raise PlanError(f"plan validation: {exc}") from exc
    return plan, plan_dict


def _report_to_dict(report: ExperimentReport, plan_dict: dict[str, Any]) -> dict[str, Any]:
    out = _base_report("experiment", report.plan.seed)
    out["plan"] = plan_dict
    out["cells"] = [
        {
            "length": cell.length,
            "method": cell.estimator.tag,
            "order": cell.estimator.order,
            "n_ok": cell.n_ok,
            "n_failed": cell.n_failed,
            "min": _round(cell.minimum),
            "mean": _round(cell.mean),
            "max": _round(cell.maximum),
            "sd": _round(cell.sd),
        }
        for cell in report.cells
    ]
    return out


def _cmd_experiment(args: argparse.Namespace) -> int:
    plan, plan_dict = _load_plan(args.plan)
    report = run_experiment(plan)
    out = _report_to_dict(report, plan_dict)
    json_path = args.json or str(Path(args.plan).with_suffix(".report.json"))
    _write_json(json_path, out)
    if args.csv:
        header = ["length", "method", "order", "n_ok", "n_failed", "min", "mean", "max", "sd"]
        rows = [
            [c["length"], c["method"], c["order"], c["n_ok"], c["n_failed"],
             c["min"], c["mean"], c["max"], c["sd"]]
            for c in out["cells"]
        ]
        _write_csv(args.csv, header, rows)
    fmt = "{:>7} {:>22} {:>9} {:>9} {:>9} {:>9} {:>7}"
    print(fmt.format("length", "estimator", "min", "mean", "max", "sd", "failed"))
    for c in report.cells:
        print(
            fmt.format(
                c.length,
                c.estimator.describe(),
                "-" if c.minimum is None else f"{c.minimum:.4f}",
                "-" if c.mean is None else f"{c.mean:.4f}",
                "-" if c.maximum is None else f"{c.maximum:.4f}",
                "-" if c.sd is None else f"{c.sd:.4f}",
                c.n_failed,
            )
        )
    print(f"report written to {json_path}")
    return EXIT_OK


# ---------------------------------------------------------------- ttest


def _read_numbers(path: str) -> list[float]:
    from .ingest import read_tokens

    tokens = read_tokens(path)
    try:
        return [float(t) for t in tokens]
    except ValueError as exc:
        raise SequenceFileError(f"{path}: non-numeric value: {exc}") from exc


def _cmd_ttest(args: argparse.Namespace) -> int:
    a = _read_numbers(args.group_a)
    b = _read_numbers(args.group_b)
    cmp = ttest_pooled(a, b)
    report = _base_report("ttest", None)
    report.update(
        {
            "t_statistic": _round(cmp.t_statistic),
            "df": cmp.df,
            "mean_a": _round(cmp.means[0]),
            "mean_b": _round(cmp.means[1]),
            "n_a": len(cmp.group_a),
            "n_b": len(cmp.group_b),
        }
    )
    if args.json:
        _write_json(args.json, report)
    if args.csv:
        _write_csv(
            args.csv,
            ["t_statistic", "df", "mean_a", "mean_b", "n_a", "n_b"],
            [[report["t_statistic"], cmp.df, report["mean_a"], report["mean_b"],
              len(cmp.group_a), len(cmp.group_b)]],
        )
    print(f"t = {cmp.t_statistic:.4f}  (df = {cmp.df})")
    print(f"group means: a = {cmp.means[0]:.4f}, b = {cmp.means[1]:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------- wiring


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="entrate", description=__doc__)
    parser.add_argument("--version", action="version", version=f"entrate {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="entropy rate estimates for a sequence file")
    _add_input_options(est)
    est.add_argument(
        "--method",
        action="append",
        choices=(*DIRECT_METHODS, "swlz"),
        help="estimator; repeatable (default: empirical)",
    )
    est.add_argument("--order", type=int, default=1, help="assumed chain order m")
    est.add_argument(
        "--paper-zero-mode",
        action="store_true",
        help="report reducible eigen/limit estimates as 0 instead of failing",
    )
    est.add_argument(
        "--exclude-boundaries",
        action="store_true",
        help="do not count transitions spanning file boundaries (direct methods)",
    )
    est.add_argument("--replicates", type=int, help="attach bootstrap SE with B replicates")
    est.add_argument("--p", type=float, help="bootstrap block parameter override")
    est.add_argument("--seed", type=int, default=0, help="bootstrap RNG seed")
    _add_report_options(est)

    boot = sub.add_parser("bootstrap", help="bootstrap standard errors (requires --replicates)")
    _add_input_options(boot)
    boot.add_argument(
        "--method",
        action="append",
        choices=(*DIRECT_METHODS, "swlz"),
        help="estimator; repeatable (default: empirical)",
    )
    boot.add_argument("--order", type=int, default=1)
    boot.add_argument("--paper-zero-mode", action="store_true")
    boot.add_argument("--exclude-boundaries", action="store_true")
    boot.add_argument("--replicates", type=int, required=True)
    boot.add_argument("--p", type=float)
    boot.add_argument("--seed", type=int, default=0)
    _add_report_options(boot)

    par = sub.add_parser("parse", help="shortest-never-seen phrase decomposition")
    _add_input_options(par)
    _add_report_options(par)

    sim = sub.add_parser("simulate", help="simulate a sequence from a known chain")
    sim.add_argument("--benchmark", choices=BENCHMARK_NAMES)
    sim.add_argument("--matrix", metavar="FILE", help="explicit row-stochastic matrix")
    sim.add_argument("--second-order", metavar="A,B,C,D", help="two-state pair chain")
    sim.add_argument("--kappa", type=int, default=8)
    sim.add_argument("--diag", type=float, default=0.95)
    sim.add_argument("--length", type=int, required=True)
    sim.add_argument("--init", type=int, help="fixed initial state (default: stationary)")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--out", metavar="FILE", help="write tokens here instead of stdout")

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment plan")
    exp.add_argument("plan", metavar="PLAN.json")
    _add_report_options(exp)

    tt = sub.add_parser("ttest", help="pooled-variance two-sample t statistic")
    tt.add_argument("group_a", metavar="FILE_A")
    tt.add_argument("group_b", metavar="FILE_B")
    _add_report_options(tt)

    return parser


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}) + "\n")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except (SequenceFileError, PlanError) as exc:
        _emit_error("input", str(exc))
        return EXIT_INPUT
    try:
        if args.command == "estimate":
            return _cmd_estimate(args, require_bootstrap=False)
        if args.command == "bootstrap":
            return _cmd_estimate(args, require_bootstrap=True)
        if args.command == "parse":
            return _cmd_parse(args)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "ttest":
            return _cmd_ttest(args)
        raise AssertionError(f"unhandled command {args.command}")
    except (SequenceFileError, PlanError) as exc:
        _emit_error("input", str(exc))
        return EXIT_INPUT
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _emit_error("numeric", str(exc))
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
