import math
from fractions import Fraction

import numpy as np
import pytest
from corpus import CORPUS, DOUBLE01, FORK2, LINE, SPLIT

from treeshift import (
    DUAL,
    bergman_coefficient,
    bergman_norm,
    bergman_weight_moment,
    dirichlet_coefficient,
    dirichlet_measure_weights,
    dirichlet_norm,
    graded_function,
    h2_norm_via_measure_decomposition,
    kernel_apply,
    kernel_block_spec,
    kernel_matrix_oracle,
    kernel_oracle_expected,
    log_convexity_check,
    make_shift,
    pick_property_check,
    radial_weight,
    vec_add,
    vec_norm,
    vec_scale,
)
from treeshift.errors import OutsideDisc, TruncationLoss, UnknownVertex, WrongQ
from treeshift.shifts import DIRICHLET


def test_dirichlet_coefficients():
    assert all(dirichlet_coefficient(1, block, 5) == 1 for block in (None, 0, 3))
    assert dirichlet_coefficient(2, None, 3) == Fraction(1, 4)
    assert dirichlet_coefficient(2, 0, 1) == Fraction(2, 3)


def test_bergman_coefficients():
    assert [bergman_coefficient(2, None, n) for n in range(5)] == [1, 2, 3, 4, 5]
    assert bergman_coefficient(3, 1, 2) == Fraction(5, 2)
    for block in (None, 0, 2):
        for n in range(8):
            assert bergman_coefficient(3, block, n) * dirichlet_coefficient(3, block, n) == 1


def test_kernel_coefficient_monotonicity():
    for q in (2, 3, 4):
        for block in (None, 0, 1):
            dirichlet = [dirichlet_coefficient(q, block, n) for n in range(12)]
            bergman = [bergman_coefficient(q, block, n) for n in range(12)]
            assert dirichlet[0] == bergman[0] == 1
            assert all(a >= b for a, b in zip(dirichlet, dirichlet[1:]))
            assert all(a <= b for a, b in zip(bergman, bergman[1:]))


@pytest.mark.parametrize("tree", [FORK2, DOUBLE01, SPLIT], ids=["fork2", "double01", "split"])
@pytest.mark.parametrize("q", [2, 3])
def test_kernel_oracle_structure(tree, q):
    shift = make_shift(tree, q, DUAL, 9)
    identity = kernel_matrix_oracle(shift, 0, 0)
    assert np.max(np.abs(identity - np.eye(identity.shape[0]))) < 1e-12
    for j in range(4):
        for k in range(4):
            block = kernel_matrix_oracle(shift, j, k)
            if j == k:
                assert np.max(np.abs(block - kernel_oracle_expected(shift, k))) < 1e-10
            else:
                assert np.max(np.abs(block)) < 1e-10


def test_kernel_oracle_guards():
    dirichlet = make_shift(FORK2, 2, DIRICHLET, 6)
    with pytest.raises(ValueError):
        kernel_matrix_oracle(dirichlet, 1, 1)
    dual = make_shift(FORK2, 2, DUAL, 4)
    with pytest.raises(TruncationLoss):
        kernel_matrix_oracle(dual, 4, 4)


def test_kernel_apply_at_origin_is_identity():
    spec = kernel_block_spec(DOUBLE01)
    g = {None: (Fraction(2),), "r": (Fraction(1, 3),), "a": (Fraction(-1),)}
    out = kernel_apply(spec, 3, "dirichlet", 0.0, 0.5, g, order=40)
    for block, coords in g.items():
        assert out[block] == pytest.approx([complex(c) for c in coords])


def test_kernel_apply_q1_is_truncated_geometric_series():
    spec = kernel_block_spec(FORK2)
    x = 0.3 * 0.4
    order = 25
    out = kernel_apply(spec, 1, "dirichlet", 0.3, 0.4, {None: (1.0,)}, order)
    expected = (1 - x ** (order + 1)) / (1 - x)
    assert out[None][0] == pytest.approx(expected, abs=1e-14)


def test_kernel_apply_q2_root_block_is_log_series():
    spec = kernel_block_spec(LINE)
    out = kernel_apply(spec, 2, "dirichlet", 0.5, 0.5, {None: (1.0,)}, order=80)
    assert out[None][0] == pytest.approx(-math.log(0.75) / 0.25, abs=1e-13)


def test_kernel_apply_outside_disc():
    with pytest.raises(OutsideDisc):
        kernel_apply(kernel_block_spec(LINE), 2, "dirichlet", 1.0, 0.5, {None: (1,)}, 5)


@pytest.mark.parametrize("space", ["dirichlet", "bergman"])
@pytest.mark.parametrize("q", [2, 4])
def test_kernel_series_order_bound_is_honest(space, q):
    from treeshift import kernel_series_order

    spec = kernel_block_spec(DOUBLE01)
    z = w = 0.6
    order = kernel_series_order(q, space, abs(z * w), tol=1e-12)
    g = {None: (1.0,), "r": (1.0,), "a": (1.0,)}
    short = kernel_apply(spec, q, space, z, w, g, order)
    long = kernel_apply(spec, q, space, z, w, g, order + 25)
    for block in g:
        assert abs(short[block][0] - long[block][0]) < 1e-12


def test_graded_function_validation():
    with pytest.raises(UnknownVertex):
        graded_function(FORK2, [(1, {"a": (1,)})])
    with pytest.raises(ValueError):
        graded_function(FORK2, [(1, {"r": (1, 2)})])


def test_dirichlet_norm_examples():
    constant = graded_function(FORK2, [(Fraction(1), {})])
    assert dirichlet_norm(constant, 2) == 1
    linear = graded_function(FORK2, [(0, {}), (Fraction(1), {})])
    assert dirichlet_norm(linear, 2) == 2
    mixed = graded_function(
        FORK2, [(Fraction(1), {"r": (Fraction(1, 2),)}), (Fraction(2), {})]
    )
    # q=1 norm is the plain sum of squared layer norms
    assert dirichlet_norm(mixed, 1) == 1 + Fraction(1, 4) + 4
    assert isinstance(dirichlet_norm(mixed, 2), Fraction)


def test_bergman_norm_examples():
    linear = graded_function(FORK2, [(0, {}), (Fraction(1), {})])
    assert bergman_norm(linear, 2) == Fraction(1, 2)
    block = graded_function(FORK2, [(0, {}), (0, {}), (0, {"r": (Fraction(1),)})])
    assert bergman_norm(block, 2) == Fraction(1, 2)  # (2)_2/(3)_2
    # single-layer reciprocity: the two squared norms multiply to the
    # squared Hardy norm squared
    single = graded_function(FORK2, [(0, {}), (0, {"r": (Fraction(3),)})])
    assert dirichlet_norm(single, 3) * bergman_norm(single, 3) == Fraction(81)


@pytest.mark.parametrize("name", sorted(CORPUS))
@pytest.mark.parametrize("q", [1, 2, 3])
def test_dirichlet_norm_equals_moment_aggregation(name, q):
    tree = CORPUS[name]
    shift = make_shift(tree, q, DIRICHLET, 10)
    blocks = dict(tree.branching_vertices())
    for n in range(5):
        layers = [(0, {})] * n + [
            (Fraction(2, 3), {v: tuple([Fraction(1, 2)] * (c - 1)) for v, c in blocks.items()})
        ]
        f = graded_function(tree, layers)
        expected = Fraction(2, 3) ** 2 * shift.moment(tree.root, n)
        for v, c in blocks.items():
            child = tree.children_of(v)[0]
            expected += (c - 1) * Fraction(1, 4) * shift.moment(child, n)
        assert dirichlet_norm(f, q) == expected


@pytest.mark.parametrize("q", [2, 3])
def test_single_layer_norm_matches_vertex_space_matrix_route(q):
    tree = DOUBLE01
    shift = make_shift(tree, q, DIRICHLET, 10)
    basis = {b.vertex: b for b in shift.kernel_basis().blocks}
    coords = {"r": (Fraction(1, 2),), "a": (Fraction(-2, 3),)}
    for n in range(4):
        layers = [(0, {})] * n + [(Fraction(1, 5), coords)]
        f = graded_function(tree, layers)
        vector = vec_scale(float(Fraction(1, 5)), {tree.root: 1.0})
        for v, block_coords in coords.items():
            for coeff, vec in zip(block_coords, basis[v].vectors):
                vector = vec_add(vector, vec_scale(float(coeff), vec))
        pushed = shift.apply_power(vector, n)
        assert vec_norm(pushed) ** 2 == pytest.approx(float(dirichlet_norm(f, q)), rel=1e-12)


def test_h2_norm_decomposition_examples():
    linear = graded_function(FORK2, [(0, {}), (Fraction(1), {})])
    assert h2_norm_via_measure_decomposition(linear) == 2
    constant = graded_function(FORK2, [(Fraction(5), {})])
    assert h2_norm_via_measure_decomposition(constant) == 25
    deep = graded_function(
        DOUBLE01, [(0, {}), (0, {}), (0, {}), (0, {"a": (Fraction(1),)})]
    )
    assert h2_norm_via_measure_decomposition(deep) == 2
    with pytest.raises(WrongQ):
        h2_norm_via_measure_decomposition(linear, q=3)


def _random_rational_function(tree, rng, layers=5):
    blocks = dict(tree.branching_vertices())
    built = []
    for _ in range(layers):
        coords = {
            v: tuple(Fraction(int(rng.integers(-6, 7)), 3) for _ in range(c - 1))
            for v, c in blocks.items()
        }
        built.append((Fraction(int(rng.integers(-6, 7)), 2), coords))
    return graded_function(tree, built)


def test_h2_norm_decomposition_equals_direct_norm():
    rng = np.random.default_rng(11)
    for name in sorted(CORPUS):
        tree = CORPUS[name]
        for _ in range(20):
            f = _random_rational_function(tree, rng)
            assert h2_norm_via_measure_decomposition(f) == dirichlet_norm(f, 2)


@pytest.mark.parametrize("q", [2, 3, 5])
def test_norm_domination_over_hardy(q):
    rng = np.random.default_rng(13)
    for name in sorted(CORPUS):
        tree = CORPUS[name]
        for _ in range(20):
            f = _random_rational_function(tree, rng)
            assert dirichlet_norm(f, q) >= dirichlet_norm(f, 1)


def test_radial_weight_coefficients():
    assert radial_weight(2, 3).coefficients == {3: Fraction(4)}
    assert radial_weight(3, 0).coefficients == {0: Fraction(2), 1: Fraction(-2)}
    with pytest.raises(WrongQ):
        radial_weight(1, 0)


def test_bergman_weight_moment_q2_closed_form():
    for l in range(5):
        for n in range(7):
            exact, quad = bergman_weight_moment(2, l, n)
            assert exact == Fraction(l + 1, n + l + 1)
            assert abs(float(exact) - quad) < 1e-12


def test_bergman_weight_moment_is_normalized():
    for q in range(2, 6):
        for l in range(7):
            exact, _quad = bergman_weight_moment(q, l, 0)
            assert exact == 1


def test_bergman_weight_moment_matches_block_weight():
    assert bergman_weight_moment(3, 1, 1)[0] == Fraction(1, 2)
    for q in range(2, 6):
        for l in range(7):
            for n in range(11):
                exact, quad = bergman_weight_moment(q, l, n)
                assert exact == Fraction(math.prod(range(l + 1, l + 1 + n))) / math.prod(
                    range(l + q, l + q + n)
                )
                assert abs(float(exact) - quad) < 1e-10


def test_pick_property():
    assert pick_property_check(1, None, 50).passed  # equal parameters
    assert log_convexity_check(1, 2, 100).passed
    reversed_report = log_convexity_check(2, 1, 100)
    assert not reversed_report.passed
    assert reversed_report.witness == 1
    for q in range(1, 7):
        for depth in (None, 0, 1, 5, 10):
            assert pick_property_check(q, depth, 100).passed


def test_dirichlet_measure_weights():
    assert dirichlet_measure_weights(LINE) == {None: 1}
    assert dirichlet_measure_weights(FORK2) == {None: 1, "r": Fraction(1, 2)}
    assert dirichlet_measure_weights(DOUBLE01) == {
        None: 1,
        "r": Fraction(1, 2),
        "a": Fraction(1, 3),
    }
