"""Command-line front end.

Subcommands mirror the pipeline stages: ``tree gen|validate``,
``mask assign``, ``dyn iterate``, ``scaling build|verify``,
``pipeline run`` and ``export``.  Exit codes: 0 success / all checks
pass, 1 failed validation or checks, 2 bad input or constraint error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .errors import (
    ConstraintViolation,
    LfmraError,
    NonConvergenceError,
    NoSolutionError,
    ParameterError,
    StructureError,
    WindowOverflowError,
)
from .galois import FieldParams
from .maskdyn import LambdaArray, assign_lambda, iterate_to_fixed_point
from .pipeline import (
    ALL_CHECKS,
    StageError,
    load_config_file,
    report_json_dict,
    run_pipeline,
)
from .scalefn import (
    build_phi_hat,
    check_limit_condition,
    check_orthonormality_freq,
    check_orthonormality_time,
    check_refinement,
    inverse_transform,
    mask_from_lambda,
    refinement_coeffs,
)
from .validtree import Tree, build_digraph, build_window_tree, generate_tree, validate_tree

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out and out != "-":
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_tree(path: str) -> Tree:
    return Tree.from_json_dict(_load_json(path))


def _cmd_tree_gen(args) -> int:
    params = FieldParams.create(args.p, args.s, _parse_poly(args.poly))
    try:
        tree = generate_tree(params, args.N, args.height, args.seed)
    except NoSolutionError as e:
        _emit({"error": "no_solution", "message": str(e)}, args.output)
        return EXIT_FAIL
    report = validate_tree(tree)
    _emit({"tree": tree.to_json_dict(), "report": report.to_json_dict()}, args.output)
    return EXIT_OK if report.ok else EXIT_FAIL


def _cmd_tree_validate(args) -> int:
    tree = _load_tree(args.file)
    report = validate_tree(tree, args.N)
    _emit({"report": report.to_json_dict()}, args.output)
    return EXIT_OK if report.ok else EXIT_FAIL


def _mask_pieces(args):
    tree = _load_tree(args.tree)
    report = validate_tree(tree)
    if not report.ok:
        raise ParameterError(f"tree fails admissibility: {report.violations}")
    wt = build_window_tree(tree)
    return tree, wt, build_digraph(wt)


def _cmd_mask_assign(args) -> int:
    _, _, digraph = _mask_pieces(args)
    table = LambdaArray.from_json_dict(_load_json(args.table)) if args.table else None
    strategy = "explicit" if table is not None else args.strategy
    lam = assign_lambda(digraph, strategy, seed=args.seed, table=table)
    _emit(lam.to_json_dict(), args.output)
    return EXIT_OK


def _cmd_dyn_iterate(args) -> int:
    _, wt, digraph = _mask_pieces(args)
    lam = LambdaArray.from_json_dict(_load_json(getattr(args, "lambda")))
    bound = wt.height - wt.N if args.bound is None else args.bound
    try:
        fixed = iterate_to_fixed_point(lam, bound)
    except NonConvergenceError as e:
        _emit(
            {
                "error": "non_convergence",
                "message": str(e),
                "bound": bound,
                "trajectory": [st.to_json_dict() for st in e.states],
            },
            args.output,
        )
        return EXIT_FAIL
    _emit(
        {
            "M": fixed.m,
            "bound": bound,
            "trajectory": [st.to_json_dict() for st in fixed.states],
        },
        args.output,
    )
    return EXIT_OK


def _scaling_artifacts(args):
    _, wt, digraph = _mask_pieces(args)
    lam = LambdaArray.from_json_dict(_load_json(getattr(args, "lambda")))
    bound = wt.height - wt.N
    fixed = iterate_to_fixed_point(lam, bound)
    m_used = fixed.m if args.m is None else args.m
    if m_used < 0 or m_used > bound:
        raise ParameterError(f"M must lie in [0, {bound}], got {m_used}")
    mask = mask_from_lambda(lam)
    phi_hat = build_phi_hat(mask, m_used)
    phi = inverse_transform(phi_hat)
    beta = refinement_coeffs(mask)
    return m_used, mask, phi_hat, phi, beta


def _cmd_scaling_build(args) -> int:
    m_used, mask, phi_hat, phi, beta = _scaling_artifacts(args)
    _emit(
        {
            "M": m_used,
            "phi_hat": phi_hat.to_json_list(),
            "phi": phi.to_json_list(),
            "beta": beta.to_json_list(),
            "beta_normalization": f"1/{phi.params.order}",
        },
        args.output,
    )
    return EXIT_OK


def _cmd_scaling_verify(args) -> int:
    m_used, mask, phi_hat, phi, beta = _scaling_artifacts(args)
    wanted = tuple(args.checks.split(",")) if args.checks else ALL_CHECKS
    for c in wanted:
        if c not in ALL_CHECKS:
            raise ParameterError(f"unknown check {c!r}; expected subset of {ALL_CHECKS}")
    checks: dict = {}
    if "freq" in wanted:
        checks["freq"] = check_orthonormality_freq(phi_hat).to_json_dict()
    if "time" in wanted:
        checks["time"] = check_orthonormality_time(phi).to_json_dict()
    if "limit" in wanted:
        checks["limit"] = {"passed": check_limit_condition(phi_hat)}
    if "refine" in wanted:
        checks["refine"] = check_refinement(phi, beta, mask, phi_hat).to_json_dict()
    passed = all(rep["passed"] for rep in checks.values())
    _emit({"M": m_used, "checks": checks, "passed": passed}, args.output)
    return EXIT_OK if passed else EXIT_FAIL


def _cmd_pipeline_run(args) -> int:
    config = load_config_file(args.config)
    result = run_pipeline(config)
    _emit(report_json_dict(result), args.output or config.output.get("report"))
    return EXIT_OK if result.passed else EXIT_FAIL


def _entry_value(rec) -> tuple[float, float]:
    if "value" in rec:
        val = rec["value"]
        if isinstance(val, str):
            num, _, den = val.partition("/")
            return int(num) / (int(den) if den else 1), 0.0
        return float(val), 0.0
    return rec["re"], rec["im"]


def _rows_from_table(entries: list) -> tuple[list[str], list[list]]:
    rows = []
    if entries and "h" in entries[0]:
        # shift-keyed table: emit the window offset plus the stored digits
        width = max(
            (len(rec["h"]["digits"]) * max(1, len(rec["h"]["digits"][0]) if rec["h"]["digits"] else 1)
             for rec in entries),
            default=0,
        )
        header = ["lo"] + [f"d{i}" for i in range(width)] + ["re", "im"]
        for rec in entries:
            flat = [d for digit in rec["h"]["digits"] for d in digit]
            flat += [0] * (width - len(flat))
            re, im = _entry_value(rec)
            rows.append([rec["h"]["lo"]] + flat + [re, im])
        return header, rows
    width = max((len(rec["window"]) * len(rec["window"][0]) for rec in entries), default=0)
    header = [f"d{i}" for i in range(width)] + ["re", "im"]
    for rec in entries:
        flat = [d for digit in rec["window"] for d in digit]
        re, im = _entry_value(rec)
        rows.append(flat + [re, im])
    return header, rows


def _cmd_export(args) -> int:
    data = _load_json(args.file)
    if args.table not in data:
        raise ParameterError(f"input has no table {args.table!r}")
    entries = data[args.table]
    if args.format == "json":
        _emit({args.table: entries}, args.output)
        return EXIT_OK
    header, rows = _rows_from_table(entries)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _parse_poly(text: str | None):
    if text is None:
        return None
    return tuple(int(c) for c in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="lfmra",
        description="Construct and verify orthogonal step scaling functions "
        "on Laurent-series local fields.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    tree = sub.add_parser("tree", help="generate or validate label trees")
    tree_sub = tree.add_subparsers(dest="action", required=True)
    gen = tree_sub.add_parser("gen", help="generate an admissible tree")
    gen.add_argument("-p", type=int, required=True)
    gen.add_argument("-s", type=int, required=True)
    gen.add_argument("-N", type=int, required=True)
    gen.add_argument("--poly", help="reduction polynomial low coefficients, comma separated")
    gen.add_argument("--height", type=int, default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("-o", "--output", default=None)
    gen.set_defaults(fn=_cmd_tree_gen)
    val = tree_sub.add_parser("validate", help="validate a tree JSON file")
    val.add_argument("file")
    val.add_argument("-N", type=int, default=None)
    val.add_argument("-o", "--output", default=None)
    val.set_defaults(fn=_cmd_tree_validate)

    mask = sub.add_parser("mask", help="assign mask-square tables")
    mask_sub = mask.add_subparsers(dest="action", required=True)
    assign = mask_sub.add_parser("assign")
    assign.add_argument("--tree", required=True)
    assign.add_argument("--strategy", default="haar")
    assign.add_argument("--seed", type=int, default=None)
    assign.add_argument("--table", default=None, help="explicit table JSON file")
    assign.add_argument("-o", "--output", default=None)
    assign.set_defaults(fn=_cmd_mask_assign)

    dyn = sub.add_parser("dyn", help="iterate the array dynamics")
    dyn_sub = dyn.add_subparsers(dest="action", required=True)
    it = dyn_sub.add_parser("iterate")
    it.add_argument("--tree", required=True)
    it.add_argument("--lambda", required=True)
    it.add_argument("--bound", type=int, default=None)
    it.add_argument("-o", "--output", default=None)
    it.set_defaults(fn=_cmd_dyn_iterate)

    scaling = sub.add_parser("scaling", help="build or verify the scaling function")
    scaling_sub = scaling.add_subparsers(dest="action", required=True)
    build = scaling_sub.add_parser("build")
    verify = scaling_sub.add_parser("verify")
    for cmd in (build, verify):
        cmd.add_argument("--tree", required=True)
        cmd.add_argument("--lambda", required=True)
        cmd.add_argument("--m", type=int, default=None)
        cmd.add_argument("-o", "--output", default=None)
    build.set_defaults(fn=_cmd_scaling_build)
    verify.add_argument("--checks", default=None, help="comma separated subset of checks")
    verify.set_defaults(fn=_cmd_scaling_verify)

    pipe = sub.add_parser("pipeline", help="run the whole pipeline from a config")
    pipe_sub = pipe.add_subparsers(dest="action", required=True)
    run = pipe_sub.add_parser("run")
    run.add_argument("-c", "--config", required=True)
    run.add_argument("-o", "--output", default=None)
    run.set_defaults(fn=_cmd_pipeline_run)

    export = sub.add_parser("export", help="re-emit a built table as CSV or JSON")
    export.add_argument("file")
    export.add_argument("--table", default="phi", help="phi, phi_hat or beta")
    export.add_argument("--format", choices=("csv", "json"), default="csv")
    export.add_argument("-o", "--output", default=None)
    export.set_defaults(fn=_cmd_export)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StageError as e:
        kind = "check_failure" if isinstance(e.cause, NonConvergenceError) else "error"
        sys.stderr.write(f"error at stage {e.stage}: {e.cause}\n")
        if isinstance(e.cause, ConstraintViolation):
            for witness, info in e.cause.details:
                sys.stderr.write(f"  {witness}: {info}\n")
        return EXIT_FAIL if kind == "check_failure" else EXIT_ERROR
    except ConstraintViolation as e:
        sys.stderr.write(f"constraint violation: {e}\n")
        for witness, info in e.details:
            sys.stderr.write(f"  {witness}: {info}\n")
        return EXIT_ERROR
    except (
        ParameterError,
        StructureError,
        WindowOverflowError,
        NoSolutionError,
        OSError,
        json.JSONDecodeError,
        KeyError,
    ) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR
    except NonConvergenceError as e:
        sys.stderr.write(f"did not converge: {e}\n")
        return EXIT_FAIL
    except LfmraError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
