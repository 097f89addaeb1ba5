import itertools
import math
import random
from fractions import Fraction

import pytest

import lfmra.scalefn as scalefn
from lfmra import (
    CharacterWindow,
    FieldParams,
    FreqStepFunction,
    LambdaArray,
    ParameterError,
    RefinementCoeffs,
    TimeStepFunction,
    build_phi_hat,
    char_dilate,
    check_limit_condition,
    check_orthonormality_freq,
    check_orthonormality_time,
    check_refinement,
    forward_transform,
    inverse_transform,
    inverse_transform_direct,
    l2_norm_sq,
    mask_from_lambda,
    orthonormality_sums_nested,
    reconstruct_mask,
    refinement_coeffs,
)

from helpers import build_fuzz_instance, build_instance, p3_path_tree


def _keys(params, width):
    return list(itertools.product(params.elements(), repeat=width))


def test_mask_values(haar, p3_uniform):
    m = haar.m0
    assert m.values_exact and m.squares_exact
    assert set(m.values.values()) == {Fraction(0), Fraction(1)}

    m3 = p3_uniform.m0
    p = p3_uniform.params
    two, one, z = p.elem(2), p.elem(1), p.elem(0)
    assert m3.values[(z, z)] == 1
    assert m3.values[(two, one)] == pytest.approx(math.sqrt(0.5))
    assert m3.values[(two, two)] == 0
    assert m3.squares[(two, one)] == Fraction(1, 2)
    assert m3.squares_exact and not m3.values_exact


def test_mask_bad_phase(haar):
    with pytest.raises(ParameterError):
        mask_from_lambda(haar.lam, phase="random_signs")


def test_phi_hat_zero_window(haar, p3_uniform):
    for inst in (haar, p3_uniform):
        assert inst.phi_hat.values[inst.phi_hat.zero_key()] == 1


def test_phi_hat_haar_table(haar):
    assert all(v == 1 for v in haar.phi_hat.values.values())
    assert haar.phi_hat.M == 0


def test_phi_hat_haar_is_boolean_and_bounded(haar, p3_uniform):
    assert set(haar.phi_hat.values.values()) <= {Fraction(0), Fraction(1)}
    for inst in (haar, p3_uniform):
        assert all(0 <= v <= 1 for v in inst.phi_hat.values.values())
        assert all(0 <= sq <= 1 for sq in inst.phi_hat.squares.values())


def test_mask_squares_reproduce_table(haar, p3_uniform):
    for inst in (haar, p3_uniform):
        assert inst.m0.squares == inst.lam.table


def test_phi_hat_p3_squares(p3_uniform):
    p = p3_uniform.params
    two, one = p.elem(2), p.elem(1)
    assert p3_uniform.phi_hat.squares[(two, one)] == Fraction(1, 2)
    assert p3_uniform.phi_hat.M == 1


def test_phi_hat_bad_m(haar):
    with pytest.raises(ParameterError):
        build_phi_hat(haar.m0, -1)


def _phi_hat_char_oracle(inst, K):
    """Truncated product of mask values along adjoint-dilated characters."""
    params, n = inst.params, inst.wt.N
    table = {}
    for key in _keys(params, n + inst.m_used):
        chi = CharacterWindow(params, -n, key)
        acc = Fraction(1) if inst.m0.values_exact else 1.0
        for k in range(K + 1):
            chik = char_dilate(chi, -k)
            mask_key = tuple(chik.exponent(j) for j in range(-n, 1))
            acc *= inst.m0.values[mask_key]
        table[key] = acc
    return table


def test_phi_hat_matches_character_oracle(haar, p3_uniform):
    for inst in (haar, p3_uniform):
        oracle = _phi_hat_char_oracle(inst, inst.m_used + inst.wt.N)
        assert oracle == inst.phi_hat.values
    inst = build_fuzz_instance(
        {"p": 2, "s": 2, "N": 1, "target_height": 3, "tree_seed": 6, "lambda_seed": 42}
    )
    oracle = _phi_hat_char_oracle(inst, inst.m_used + 1)
    for key, v in oracle.items():
        assert v == inst.phi_hat.values[key]


def test_freq_orthonormality(haar, p3_uniform):
    rep = check_orthonormality_freq(haar.phi_hat)
    assert rep.passed
    assert all(v == 1 for v in rep.sums.values())

    rep3 = check_orthonormality_freq(p3_uniform.phi_hat)
    assert rep3.passed
    assert all(v == Fraction(1) for v in rep3.sums.values())


def _off_support_phi_hat(gf2):
    z, o = gf2.elem(0), gf2.elem(1)
    table = {
        (z, z): Fraction(1),
        (z, o): Fraction(0),
        (o, z): Fraction(0),
        (o, o): Fraction(1),
    }
    lam = LambdaArray(gf2, 1, table, True)
    m0 = mask_from_lambda(lam)
    return lam, m0, build_phi_hat(m0, 0)


def test_freq_orthonormality_negative_control(gf2):
    _, _, phi_hat = _off_support_phi_hat(gf2)
    rep = check_orthonormality_freq(phi_hat)
    assert not rep.passed
    assert rep.sums[(gf2.elem(1),)] == 0


def test_nested_sums_oracle(haar, p3_uniform):
    for inst in (haar, p3_uniform):
        nested = orthonormality_sums_nested(inst.lam, inst.m_used)
        assert nested == check_orthonormality_freq(inst.phi_hat).sums
    # and on a failing table the two routes agree as well
    lam, m0, phi_hat = _off_support_phi_hat(FieldParams.create(2, 1))
    assert orthonormality_sums_nested(lam, 0) == check_orthonormality_freq(phi_hat).sums


def test_limit_condition(haar, p3_uniform, gf2):
    assert check_limit_condition(haar.phi_hat)
    assert check_limit_condition(p3_uniform.phi_hat)
    broken = FreqStepFunction(
        gf2,
        1,
        0,
        {(gf2.elem(0),): 0.0, (gf2.elem(1),): 1.0},
        {(gf2.elem(0),): 0.0, (gf2.elem(1),): 1.0},
        False,
        False,
    )
    assert not check_limit_condition(broken)


def test_inverse_haar_is_unit_ball_indicator(haar):
    phi = haar.phi
    assert phi.exact
    p = haar.params
    assert phi.values[(p.elem(0),)] == 1
    assert phi.values[(p.elem(1),)] == 0
    assert l2_norm_sq(phi) == 1


def test_point_mass_transforms_to_constant(gf3):
    keys = _keys(gf3, 1)
    table = {k: (1.0 if all(e.is_zero() for e in k) else 0.0) for k in keys}
    phi_hat = FreqStepFunction(gf3, 1, 0, table, dict(table), False, False)
    phi = inverse_transform(phi_hat)
    vals = set(round(abs(v), 12) for v in phi.values.values())
    assert vals == {round(1 / 3, 12)}


def _random_freq(params, n, m, rng):
    keys = _keys(params, n + m)
    values = {k: complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) for k in keys}
    squares = {k: abs(v) ** 2 for k, v in values.items()}
    return FreqStepFunction(params, n, m, values, squares, False, False)


def test_fast_inverse_matches_direct():
    rng = random.Random(99)
    for case in [(2, 1, 1, 2), (3, 1, 2, 1), (2, 2, 1, 1), (5, 1, 1, 1)]:
        p, s, n, m = case
        params = FieldParams.create(p, s)
        phi_hat = _random_freq(params, n, m, rng)
        fast = inverse_transform(phi_hat)
        direct = inverse_transform_direct(phi_hat)
        err = max(abs(complex(fast.values[k]) - direct.values[k]) for k in fast.values)
        assert err < 1e-12


def test_roundtrip_forward_inverse():
    rng = random.Random(5)
    for _ in range(10):
        params = FieldParams.create(3, 1)
        phi_hat = _random_freq(params, 1, 1, rng)
        back = forward_transform(inverse_transform(phi_hat))
        err = max(
            abs(complex(phi_hat.values[k]) - complex(back.values[k]))
            for k in phi_hat.values
        )
        assert err < 1e-12


def test_roundtrip_exact_haar(haar):
    back = forward_transform(haar.phi)
    assert back.values == haar.phi_hat.values


def test_time_orthonormality(haar, p3_uniform):
    rep = check_orthonormality_time(haar.phi)
    assert rep.passed
    assert rep.norm_sq == 1
    zero = [h for h in rep.inner if h.is_zero()]
    assert len(zero) == 1
    for h, v in rep.inner.items():
        assert v == (1 if h.is_zero() else 0)

    rep3 = check_orthonormality_time(p3_uniform.phi)
    assert rep3.passed
    for h, v in rep3.inner.items():
        target = 1 if h.is_zero() else 0
        assert abs(v - target) <= 1e-9


def test_time_orthonormality_scaling_control(p3_uniform):
    doubled = TimeStepFunction(
        p3_uniform.params,
        1,
        p3_uniform.m_used,
        {k: 2 * v for k, v in p3_uniform.phi.values.items()},
        p3_uniform.phi.exact,
    )
    rep = check_orthonormality_time(doubled)
    assert not rep.passed
    assert abs(rep.norm_sq - 4) < 1e-9


def test_refinement_coeffs_flat_for_point_mask(gf3):
    keys = _keys(gf3, 2)
    values = {k: (1.0 if all(e.is_zero() for e in k) else 0.0) for k in keys}
    m0 = scalefn.MaskFunction(gf3, 1, values, dict(values), False, False)
    beta = refinement_coeffs(m0)
    vals = {complex(v) for v in beta.coeffs.values()}
    assert len(vals) == 1
    assert vals.pop() == pytest.approx(1 / 3)


def test_refinement_coeffs_haar(haar):
    beta = haar.beta
    nonzero = {h: v for h, v in beta.coeffs.items() if v}
    assert len(nonzero) == 2
    assert all(v == 1 for v in nonzero.values())
    los = sorted(h.lo for h in nonzero)
    assert los == [-1, 0]  # the zero shift and the depth-1 generator
    assert beta.normalization == Fraction(1, 2)


def test_refinement_roundtrip(haar, p3_uniform):
    for inst in (haar, p3_uniform):
        rebuilt = reconstruct_mask(inst.beta)
        for k, v in inst.m0.values.items():
            assert abs(complex(float(v)) - complex(rebuilt[k])) < 1e-12


def test_check_refinement(haar, p3_uniform):
    rep = check_refinement(haar.phi, haar.beta, haar.m0, haar.phi_hat)
    assert rep.passed and rep.exact
    assert rep.time_residual == 0 and rep.freq_residual == 0

    rep3 = check_refinement(
        p3_uniform.phi, p3_uniform.beta, p3_uniform.m0, p3_uniform.phi_hat
    )
    assert rep3.passed
    assert rep3.time_residual < 1e-9


def test_check_refinement_perturbed_beta(haar):
    coeffs = dict(haar.beta.coeffs)
    zero_shift = next(h for h in coeffs if h.is_zero())
    coeffs[zero_shift] = coeffs[zero_shift] + Fraction(1, 10)
    perturbed = RefinementCoeffs(
        haar.beta.params, haar.beta.N, coeffs, haar.beta.exact, haar.beta.normalization
    )
    rep = check_refinement(haar.phi, perturbed, haar.m0, haar.phi_hat)
    assert not rep.passed
    assert rep.time_residual > 0.01


def test_refine_numpy_path_matches_python(monkeypatch, p3_uniform):
    instances = [
        p3_uniform,
        build_fuzz_instance(
            {"p": 3, "s": 2, "N": 1, "target_height": 3, "tree_seed": 1, "lambda_seed": 77}
        ),
    ]
    for inst in instances:
        monkeypatch.setattr(scalefn, "_NUMPY_THRESHOLD", 1)
        fast = check_refinement(inst.phi, inst.beta, inst.m0, inst.phi_hat)
        monkeypatch.setattr(scalefn, "_NUMPY_THRESHOLD", 10**9)
        slow = check_refinement(inst.phi, inst.beta, inst.m0, inst.phi_hat)
        assert abs(fast.time_residual - slow.time_residual) < 1e-12
        assert fast.passed == slow.passed


def test_plancherel_consistency(gf2, haar, p3_uniform):
    instances = [haar, p3_uniform]
    for inst in instances:
        freq_ok = check_orthonormality_freq(inst.phi_hat).passed
        time_ok = check_orthonormality_time(inst.phi).passed
        assert freq_ok == time_ok
    # a failing table fails on both sides
    _, _, phi_hat = _off_support_phi_hat(gf2)
    phi = inverse_transform(phi_hat)
    assert not check_orthonormality_freq(phi_hat).passed
    assert not check_orthonormality_time(phi).passed


def test_theorem_end_to_end_on_generated_instances():
    for cfg in [
        {"p": 2, "s": 1, "N": 2, "target_height": 4, "tree_seed": 4, "lambda_seed": 21},
        {"p": 3, "s": 1, "N": 1, "target_height": 2, "tree_seed": 5, "lambda_seed": 22},
        {"p": 2, "s": 2, "N": 2, "target_height": 5, "tree_seed": 6, "lambda_seed": 23},
    ]:
        inst = build_fuzz_instance(cfg)
        assert inst.fixed.m <= inst.bound
        assert check_orthonormality_freq(inst.phi_hat).passed
        assert check_orthonormality_time(inst.phi).passed
        assert check_limit_condition(inst.phi_hat)
        assert check_refinement(inst.phi, inst.beta, inst.m0, inst.phi_hat).passed


def test_premature_m_fails_checks():
    # truncating below the fixed-point index must break orthonormality
    tree = p3_path_tree()
    inst = build_instance(tree.params, tree, "uniform", m=0)
    assert inst.fixed.m == 1
    assert not check_orthonormality_freq(inst.phi_hat).passed
    assert not check_orthonormality_time(inst.phi).passed
    inst1 = build_instance(tree.params, tree, "uniform", m=1)
    assert check_orthonormality_freq(inst1.phi_hat).passed
    assert abs(l2_norm_sq(inst1.phi) - 1) < 1e-9
