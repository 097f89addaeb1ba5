"""Shared builders for test instances."""

from dataclasses import dataclass

from lfmra import (
    FieldParams,
    FixedPointResult,
    FreqStepFunction,
    LambdaArray,
    MaskDigraph,
    MaskFunction,
    RefinementCoeffs,
    TimeStepFunction,
    Tree,
    WindowTree,
    assign_lambda,
    build_digraph,
    build_phi_hat,
    build_window_tree,
    generate_tree,
    inverse_transform,
    iterate_to_fixed_point,
    mask_from_lambda,
    refinement_coeffs,
)


@dataclass
class Instance:
    params: FieldParams
    tree: Tree
    wt: WindowTree
    digraph: MaskDigraph
    lam: LambdaArray
    bound: int
    fixed: FixedPointResult
    m_used: int
    m0: MaskFunction
    phi_hat: FreqStepFunction
    phi: TimeStepFunction
    beta: RefinementCoeffs


def build_instance(params, tree, strategy, seed=None, table=None, m=None) -> Instance:
    wt = build_window_tree(tree)
    digraph = build_digraph(wt)
    lam = assign_lambda(digraph, strategy, seed=seed, table=table)
    bound = wt.height - wt.N
    fixed = iterate_to_fixed_point(lam, bound)
    m_used = fixed.m if m is None else m
    m0 = mask_from_lambda(lam)
    phi_hat = build_phi_hat(m0, m_used)
    phi = inverse_transform(phi_hat)
    beta = refinement_coeffs(m0)
    return Instance(
        params, tree, wt, digraph, lam, bound, fixed, m_used, m0, phi_hat, phi, beta
    )


def haar_instance() -> Instance:
    params = FieldParams.create(2, 1)
    return build_instance(params, generate_tree(params, 1), "haar")


def p3_path_tree() -> Tree:
    params = FieldParams.create(3, 1)
    z, one, two = params.elem(0), params.elem(1), params.elem(2)
    return Tree(params, 1, {0: z, 1: one, 2: two}, {0: None, 1: 0, 2: 1})


def p3_uniform_instance() -> Instance:
    tree = p3_path_tree()
    return build_instance(tree.params, tree, "uniform")


# (p, s, N, height cap) combinations; the cap respects both the longest
# window chain (order**N - 1) and desk scale for the frequency tables
# (order**(N+M) below ~20000).
FUZZ_COMBOS = [
    (2, 1, 1, 1),
    (2, 1, 2, 3),
    (3, 1, 1, 2),
    (3, 1, 2, 6),
    (2, 2, 1, 3),
    (2, 2, 2, 6),
    (3, 2, 1, 4),
    (3, 2, 2, 4),
]


def fuzz_configs(count: int = 100):
    """Deterministic parameter stream for the randomized instances."""
    import random

    rng = random.Random(20240817)
    out = []
    for i in range(count):
        p, s, n, cap = FUZZ_COMBOS[i % len(FUZZ_COMBOS)]
        h_window = rng.randint(n, cap)
        target = h_window + n - 1
        out.append(
            {
                "p": p,
                "s": s,
                "N": n,
                "target_height": target,
                "tree_seed": i,
                "lambda_seed": 1000 + i,
            }
        )
    return out


def build_fuzz_instance(cfg: dict) -> Instance:
    params = FieldParams.create(cfg["p"], cfg["s"])
    tree = generate_tree(params, cfg["N"], cfg["target_height"], cfg["tree_seed"])
    return build_instance(params, tree, "dirichlet", seed=cfg["lambda_seed"])
