"""End-to-end orchestration: tree, mask table, dynamics, scaling function, checks.

A pipeline run is fully determined by its config (field parameters,
tree source, mask strategy and seeds), and the emitted report embeds
the resolved config plus its hash so runs can be reproduced bit for bit.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from typing import Any

from . import __version__
from .errors import LfmraError, ParameterError
from .galois import FieldParams
from .maskdyn import (
    FixedPointResult,
    LambdaArray,
    LemmaReport,
    assign_lambda,
    iterate_to_fixed_point,
    verify_level_lemmas,
)
from .scalefn import (
    FreqStepFunction,
    MaskFunction,
    RefinementCoeffs,
    TimeStepFunction,
    build_phi_hat,
    check_limit_condition,
    check_orthonormality_freq,
    check_orthonormality_time,
    check_refinement,
    inverse_transform,
    mask_from_lambda,
    refinement_coeffs,
)
from .validtree import (
    MaskDigraph,
    Tree,
    ValidationReport,
    WindowTree,
    build_digraph,
    build_window_tree,
    generate_tree,
    validate_tree,
)

__all__ = [
    "PipelineConfig",
    "PipelineResult",
    "StageError",
    "run_pipeline",
    "report_json_dict",
    "load_config_file",
    "ALL_CHECKS",
]

ALL_CHECKS = ("freq", "time", "limit", "refine")


class StageError(LfmraError):
    """A pipeline stage failed; carries the stage label and the cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    """Resolved run parameters; see ``from_dict`` for the file layout."""

    p: int
    s: int
    N: int
    reduction_poly: tuple[int, ...] | None = None
    tree_file: str | None = None
    tree_data: dict | None = None
    tree_target_height: int | None = None
    tree_seed: int = 0
    lambda_strategy: str = "haar"
    lambda_seed: int | None = None
    lambda_file: str | None = None
    lambda_table: list | None = None
    M: int | None = None
    checks: tuple[str, ...] = ALL_CHECKS
    output: dict = dc_field(default_factory=dict)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        """Parse the nested config layout.

        {
          "p": 3, "s": 1, "N": 1,
          "reduction_poly": null,
          "tree": {"generate": {"target_height": 2, "seed": 7}}
                  | {"file": "tree.json"} | {"data": {...tree json...}},
          "lambda": {"strategy": "uniform", "seed": null,
                     "file": null, "table": null},
          "M": null,
          "checks": ["freq", "time", "limit", "refine"],
          "output": {}
        }
        """
        try:
            p = int(d["p"])
            s = int(d["s"])
            n = int(d["N"])
        except KeyError as e:
            raise ParameterError(f"config is missing required key {e}") from e
        poly = d.get("reduction_poly")
        tree = d.get("tree") or {"generate": {}}
        lam = d.get("lambda") or {}
        gen = tree.get("generate") or {}
        checks = tuple(d.get("checks") or ALL_CHECKS)
        for c in checks:
            if c not in ALL_CHECKS:
                raise ParameterError(f"unknown check {c!r}; expected subset of {ALL_CHECKS}")
        strategy = lam.get("strategy", "haar")
        seed = lam.get("seed")
        if strategy == "dirichlet" and seed is None:
            seed = 0
        m = d.get("M")
        return cls(
            p=p,
            s=s,
            N=n,
            reduction_poly=tuple(poly) if poly is not None else None,
            tree_file=tree.get("file"),
            tree_data=tree.get("data"),
            tree_target_height=gen.get("target_height"),
            tree_seed=int(gen.get("seed", 0)),
            lambda_strategy=strategy,
            lambda_seed=seed if seed is None else int(seed),
            lambda_file=lam.get("file"),
            lambda_table=lam.get("table"),
            M=int(m) if m is not None else None,
            checks=checks,
            output=dict(d.get("output") or {}),
        )

    def to_dict(self) -> dict:
        tree: dict[str, Any]
        if self.tree_file is not None:
            tree = {"file": self.tree_file}
        elif self.tree_data is not None:
            tree = {"data": self.tree_data}
        else:
            tree = {
                "generate": {
                    "target_height": self.tree_target_height,
                    "seed": self.tree_seed,
                }
            }
        return {
            "p": self.p,
            "s": self.s,
            "N": self.N,
            "reduction_poly": list(self.reduction_poly)
            if self.reduction_poly is not None
            else None,
            "tree": tree,
            "lambda": {
                "strategy": self.lambda_strategy,
                "seed": self.lambda_seed,
                "file": self.lambda_file,
                "table": self.lambda_table,
            },
            "M": self.M,
            "checks": list(self.checks),
            "output": self.output,
        }

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def load_config_file(path: str) -> PipelineConfig:
    """Read a JSON or TOML config file."""
    if path.endswith(".toml"):
        try:
            import tomllib as toml_mod  # Python >= 3.11
        except ModuleNotFoundError:
            import tomli as toml_mod
        with open(path, "rb") as fh:
            data = toml_mod.load(fh)
    else:
        with open(path) as fh:
            data = json.load(fh)
    return PipelineConfig.from_dict(data)


@dataclass
class PipelineResult:
    """Everything a run produces, plus the pass/fail matrix."""

    config: PipelineConfig
    params: FieldParams
    tree: Tree
    tree_report: ValidationReport
    window_tree: WindowTree
    digraph: MaskDigraph
    lam: LambdaArray
    fixed: FixedPointResult
    lemmas: LemmaReport
    m_used: int
    mask: MaskFunction
    phi_hat: FreqStepFunction
    phi: TimeStepFunction
    beta: RefinementCoeffs
    checks: dict[str, Any]
    passed: bool


def _stage(name: str):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(name, exc) from exc
            return False

    return _Ctx()


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run every stage and the requested checks; raises StageError on failure."""
    with _stage("params"):
        params = FieldParams.create(config.p, config.s, config.reduction_poly)
        if config.N < 1:
            raise ParameterError(f"N must be >= 1, got {config.N}")

    with _stage("tree"):
        if config.tree_file is not None:
            with open(config.tree_file) as fh:
                tree = Tree.from_json_dict(json.load(fh))
        elif config.tree_data is not None:
            tree = Tree.from_json_dict(config.tree_data)
        else:
            tree = generate_tree(
                params, config.N, config.tree_target_height, config.tree_seed
            )
        if tree.params != params or tree.N != config.N:
            raise ParameterError("tree file disagrees with config on field or N")
        tree_report = validate_tree(tree)
        if not tree_report.ok:
            raise ParameterError(
                f"tree fails admissibility: {tree_report.violations}"
            )

    with _stage("window_tree"):
        wt = build_window_tree(tree)
        digraph = build_digraph(wt)

    with _stage("mask"):
        table = None
        if config.lambda_file is not None:
            with open(config.lambda_file) as fh:
                table = LambdaArray.from_json_dict(json.load(fh))
        elif config.lambda_table is not None:
            table = LambdaArray.from_json_dict(
                {
                    "params": params.to_json_dict(),
                    "N": config.N,
                    "entries": config.lambda_table,
                }
            )
        strategy = config.lambda_strategy
        if table is not None and strategy != "explicit":
            strategy = "explicit"
        lam = assign_lambda(
            digraph, strategy, seed=config.lambda_seed, table=table
        )

    with _stage("dynamics"):
        bound = wt.height - config.N
        fixed = iterate_to_fixed_point(lam, bound)
        lemmas = verify_level_lemmas(wt, fixed.states)

    with _stage("scaling"):
        m_used = fixed.m if config.M is None else config.M
        if m_used < 0:
            raise ParameterError(f"M must be >= 0, got {m_used}")
        if m_used > bound:
            raise ParameterError(
                f"M = {m_used} exceeds the guaranteed bound {bound}"
            )
        mask = mask_from_lambda(lam)
        phi_hat = build_phi_hat(mask, m_used)
        phi = inverse_transform(phi_hat)
        beta = refinement_coeffs(mask)

    with _stage("checks"):
        checks: dict[str, Any] = {}
        if "freq" in config.checks:
            checks["freq"] = check_orthonormality_freq(phi_hat)
        if "time" in config.checks:
            checks["time"] = check_orthonormality_time(phi)
        if "limit" in config.checks:
            checks["limit"] = check_limit_condition(phi_hat)
        if "refine" in config.checks:
            checks["refine"] = check_refinement(phi, beta, mask, phi_hat)
        passed = all(
            (rep if isinstance(rep, bool) else rep.passed) for rep in checks.values()
        )

    return PipelineResult(
        config=config,
        params=params,
        tree=tree,
        tree_report=tree_report,
        window_tree=wt,
        digraph=digraph,
        lam=lam,
        fixed=fixed,
        lemmas=lemmas,
        m_used=m_used,
        mask=mask,
        phi_hat=phi_hat,
        phi=phi,
        beta=beta,
        checks=checks,
        passed=passed,
    )


def _checks_json(checks: dict[str, Any]) -> dict:
    out = {}
    for name, rep in checks.items():
        if isinstance(rep, bool):
            out[name] = {"passed": rep}
        else:
            out[name] = rep.to_json_dict()
    return out


def report_json_dict(result: PipelineResult) -> dict:
    """Deterministic report payload for a finished run."""
    from .maskdyn import _key_json, _value_to_json  # local import keeps surface tidy

    mask_entries = [
        {"window": _key_json(k), "value": _value_to_json(result.mask.values[k])}
        for k in sorted(result.mask.values, key=lambda key: tuple(e.digits for e in key))
    ]
    return {
        "version": __version__,
        "config": result.config.to_dict(),
        "config_hash": result.config.hash(),
        "params": result.params.to_json_dict(),
        "tree": result.tree.to_json_dict(),
        "tree_report": result.tree_report.to_json_dict(),
        "window_tree": result.window_tree.to_json_dict(),
        "lambda": result.lam.to_json_dict(),
        "trajectory": [st.to_json_dict() for st in result.fixed.states],
        "fixed_point_m": result.fixed.m,
        "level_lemmas": {
            "passed": result.lemmas.passed,
            "failures": result.lemmas.failures,
        },
        "M": result.m_used,
        "mask": mask_entries,
        "phi_hat": result.phi_hat.to_json_list(),
        "phi": result.phi.to_json_list(),
        "beta": result.beta.to_json_list(),
        "beta_normalization": f"1/{result.params.order}",
        "checks": _checks_json(result.checks),
        "passed": result.passed,
    }
