"""Acceptance suite: one test per criterion, each printing PASS or FAIL.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the one-line
verdicts alongside the pytest output.
"""

import itertools
import random
import time
from fractions import Fraction

import pytest

from lfmra import (
    CharacterWindow,
    ConstraintViolation,
    FieldParams,
    FreqStepFunction,
    LambdaArray,
    PipelineConfig,
    RefinementCoeffs,
    assign_lambda,
    build_phi_hat,
    char_dilate,
    char_eval_exponent,
    check_limit_condition,
    check_orthonormality_freq,
    check_orthonormality_time,
    check_refinement,
    gf_add,
    gf_mul,
    gf_neg,
    gf_sub,
    inverse_transform,
    inverse_transform_direct,
    mask_from_lambda,
    orthonormality_sums_nested,
    rademacher,
    run_pipeline,
    scalar_mul,
    verify_level_lemmas,
)
from lfmra.localfield import basis_vector

from helpers import build_fuzz_instance, fuzz_configs, p3_path_tree


def _verdict(num, name, ok):
    print(f"[ACCEPTANCE {num}] {name}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="module")
def fuzz():
    t0 = time.perf_counter()
    instances = [build_fuzz_instance(cfg) for cfg in fuzz_configs(100)]
    elapsed = time.perf_counter() - t0
    return instances, elapsed


def test_criterion_1_haar_reconstruction():
    t0 = time.perf_counter()
    config = PipelineConfig.from_dict(
        {"p": 2, "s": 1, "N": 1, "tree": {"generate": {"seed": 0}}, "lambda": {"strategy": "haar"}}
    )
    result = run_pipeline(config)
    elapsed = time.perf_counter() - t0

    params = result.params
    indicator = {
        (params.elem(0),): Fraction(1),
        (params.elem(1),): Fraction(0),
    }
    freq = result.checks["freq"]
    tor = result.checks["time"]
    ref = result.checks["refine"]
    ok = (
        result.m_used == 0
        and result.fixed.m == 0
        and result.phi.exact
        and result.phi.values == indicator
        and freq.passed
        and all(v == 1 for v in freq.sums.values())
        and tor.passed
        and all(v == (1 if h.is_zero() else 0) for h, v in tor.inner.items())
        and result.checks["limit"] is True
        and ref.passed
        and ref.exact
        and ref.time_residual == 0
        and ref.freq_residual == 0
        and elapsed < 1.0
    )
    _verdict(1, "haar reconstruction (p=2, s=1, N=1)", ok)
    assert ok, f"elapsed={elapsed:.3f}s, checks={result.checks}"


def test_criterion_2_non_haar_p3():
    t0 = time.perf_counter()
    tree = p3_path_tree()
    config = PipelineConfig.from_dict(
        {
            "p": 3,
            "s": 1,
            "N": 1,
            "tree": {"data": tree.to_json_dict()},
            "lambda": {"strategy": "uniform"},
        }
    )
    result = run_pipeline(config)
    elapsed = time.perf_counter() - t0

    bound = result.window_tree.height - 1
    freq = result.checks["freq"]
    tor = result.checks["time"]
    ok = (
        result.fixed.m == 1
        and bound == 1
        and result.fixed.m <= bound
        and freq.passed
        and result.phi_hat.squares_exact
        and all(v == Fraction(1) for v in freq.sums.values())
        and tor.passed
        and all(
            abs(v - (1 if h.is_zero() else 0)) <= 1e-9 for h, v in tor.inner.items()
        )
        and result.checks["limit"] is True
        and result.checks["refine"].passed
        and elapsed < 1.0
    )
    _verdict(2, "non-haar case (p=3 path tree, uniform)", ok)
    assert ok, f"elapsed={elapsed:.3f}s"


def test_criterion_3_theorem_fuzz(fuzz):
    instances, built = fuzz
    t0 = time.perf_counter()
    failures = []
    for i, inst in enumerate(instances):
        if inst.fixed.m > inst.bound:
            failures.append((i, "fixed point above bound"))
            continue
        freq = check_orthonormality_freq(inst.phi_hat)
        if not freq.passed or any(abs(v - 1) > 1e-12 for v in freq.sums.values()):
            failures.append((i, "freq"))
        tor = check_orthonormality_time(inst.phi, tol=1e-9)
        if not tor.passed:
            failures.append((i, "time"))
        if not check_limit_condition(inst.phi_hat):
            failures.append((i, "limit"))
        if not check_refinement(inst.phi, inst.beta, inst.m0, inst.phi_hat).passed:
            failures.append((i, "refine"))
    elapsed = built + (time.perf_counter() - t0)
    ok = not failures and len(instances) == 100 and elapsed < 120.0
    _verdict(3, f"theorem fuzz, 100 instances in {elapsed:.1f}s", ok)
    assert ok, f"failures={failures}, elapsed={elapsed:.1f}s"


def test_criterion_4_lemma_suite(fuzz):
    instances, _ = fuzz
    failures = []
    for i, inst in enumerate(instances):
        if not all(st.exact for st in inst.fixed.states):
            failures.append((i, "trajectory not exact"))
            continue
        rep = verify_level_lemmas(inst.wt, inst.fixed.states)
        if not rep.passed:
            failures.append((i, rep.failures[:2]))
    ok = not failures
    _verdict(4, "level lemmas exact on every fuzz instance", ok)
    assert ok, f"failures={failures[:5]}"


def test_criterion_5a_product_oracle(fuzz):
    instances, _ = fuzz
    failures = []
    for i, inst in enumerate(instances):
        n = inst.wt.N
        k_max = inst.m_used + n
        for key in itertools.product(
            inst.params.elements(), repeat=n + inst.m_used
        ):
            chi = CharacterWindow(inst.params, -n, key)
            acc = Fraction(1) if inst.m0.values_exact else 1.0
            for k in range(k_max + 1):
                chik = char_dilate(chi, -k)
                mask_key = tuple(chik.exponent(j) for j in range(-n, 1))
                acc *= inst.m0.values[mask_key]
            if acc != inst.phi_hat.values[key]:
                failures.append((i, key))
                break
    ok = not failures
    _verdict(5, "oracle (a): adjoint-dilation product equals builder", ok)
    assert ok, f"failures={failures[:3]}"


def test_criterion_5b_nested_sum_oracle(fuzz):
    instances, _ = fuzz
    failures = []
    for i, inst in enumerate(instances):
        nested = orthonormality_sums_nested(inst.lam, inst.m_used)
        sums = check_orthonormality_freq(inst.phi_hat).sums
        if nested != sums:
            failures.append(i)
    ok = not failures
    _verdict(5, "oracle (b): nested-sum expansion equals prefix sums", ok)
    assert ok, f"failures={failures[:5]}"


def test_criterion_5c_transform_oracle():
    rng = random.Random(2718)
    specs = [(2, 1, 1, 2), (3, 1, 1, 1), (2, 2, 1, 1), (5, 1, 1, 1), (3, 1, 2, 1)]
    worst = 0.0
    for i in range(50):
        p, s, n, m = specs[i % len(specs)]
        params = FieldParams.create(p, s)
        keys = list(itertools.product(params.elements(), repeat=n + m))
        values = {k: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for k in keys}
        squares = {k: abs(v) ** 2 for k, v in values.items()}
        phi_hat = FreqStepFunction(params, n, m, values, squares, False, False)
        fast = inverse_transform(phi_hat)
        direct = inverse_transform_direct(phi_hat)
        err = max(abs(complex(fast.values[k]) - direct.values[k]) for k in keys)
        worst = max(worst, err)
    ok = worst < 1e-12
    _verdict(5, f"oracle (c): fast transform vs direct summation, max err {worst:.2e}", ok)
    assert ok


def test_criterion_6_negative_controls(haar):
    gf2 = haar.params
    z, o = gf2.elem(0), gf2.elem(1)

    # (a) row-sum violation rejected at assignment
    try:
        assign_lambda(
            haar.digraph,
            "explicit",
            table={(z, z): 1, (o, z): 0.7, (o, o): 0.5},
        )
        rejected = False
    except ConstraintViolation:
        rejected = True

    # (b) mass off the digraph support breaks a prefix sum
    off = LambdaArray(
        gf2,
        1,
        {(z, z): Fraction(1), (z, o): Fraction(0), (o, z): Fraction(0), (o, o): Fraction(1)},
        True,
    )
    m0_off = mask_from_lambda(off)
    phi_hat_off = build_phi_hat(m0_off, 0)
    freq = check_orthonormality_freq(phi_hat_off)
    off_detected = (not freq.passed) and any(v != 1 for v in freq.sums.values())

    # (c) perturbed refinement coefficients leave a visible residual
    coeffs = dict(haar.beta.coeffs)
    zero_shift = next(h for h in coeffs if h.is_zero())
    coeffs[zero_shift] = coeffs[zero_shift] + Fraction(1, 10)
    perturbed = RefinementCoeffs(gf2, 1, coeffs, haar.beta.exact, haar.beta.normalization)
    rep = check_refinement(haar.phi, perturbed, haar.m0, haar.phi_hat)
    perturb_detected = (not rep.passed) and rep.time_residual > 0.01

    ok = rejected and off_detected and perturb_detected
    _verdict(6, "negative controls (assignment, support, coefficients)", ok)
    assert ok


def _axioms_hold(params):
    elems = params.elements()
    zero, one = params.zero(), params.one()
    for a, b in itertools.product(elems, repeat=2):
        if gf_add(a, b) != gf_add(b, a) or gf_mul(a, b) != gf_mul(b, a):
            return False
    for a, b, c in itertools.product(elems, repeat=3):
        if gf_add(gf_add(a, b), c) != gf_add(a, gf_add(b, c)):
            return False
        if gf_mul(gf_mul(a, b), c) != gf_mul(a, gf_mul(b, c)):
            return False
        if gf_mul(a, gf_add(b, c)) != gf_add(gf_mul(a, b), gf_mul(a, c)):
            return False
    for a in elems:
        if gf_add(a, zero) != a or gf_mul(a, one) != a:
            return False
        if gf_add(a, gf_neg(a)) != zero or gf_sub(a, a) != zero:
            return False
        if not a.is_zero() and not any(gf_mul(a, b) == one for b in elems):
            return False
    return True


def test_criterion_7_algebraic_foundations():
    fields_16 = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (11, 1), (13, 1), (2, 4)]
    axioms_ok = all(_axioms_hold(FieldParams.create(p, s)) for p, s in fields_16)

    pairing_ok = True
    fields_9 = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2)]
    for p, s in fields_9:
        params = FieldParams.create(p, s)
        for k in range(-3, 4):
            for j in range(-3, 4):
                if k == j:
                    continue
                for u in params.elements():
                    for v in params.elements():
                        chi = rademacher(params, k, v)
                        x = scalar_mul(u, basis_vector(params, j))
                        if char_eval_exponent(chi, x) != 0:
                            pairing_ok = False
    ok = axioms_ok and pairing_ok
    _verdict(7, "field axioms (order <= 16) and pairing locality (order <= 9)", ok)
    assert ok
