import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnot_ineq.dual import Dual, real
from carnot_ineq.errors import IndexOutOfRange, InvalidParameter
from carnot_ineq.group import Point, group_op, random_point, random_step_two
from carnot_ineq.hcalculus import (
    compose_left_translation,
    constant_field,
    field,
    gradient_self_check,
    horizontal_gradient_batch,
    left_jacobian,
    random_polynomial,
    sub_gradient,
    sub_laplacian,
    x_coordinate,
    x_square_norm,
    xi_apply,
    xi_xj_apply,
    z_coordinate,
)
from carnot_ineq.norm import norm_field

seeds = st.integers(0, 2**32 - 1)
dims = st.sampled_from([(2, 1), (3, 2), (4, 2)])


def P(x, z):
    return Point(np.array(x, float), np.array(z, float))


def z_partial(G, f, p, k):
    e = np.zeros(G.m)
    e[k] = 1.0
    return float(real(f.fn(p.x + 0 * Dual(0.0, 1.0), p.z + Dual(0.0, 1.0) * e).b))


def test_coordinate_examples(H1, rng):
    for _ in range(10):
        p = random_point(H1, rng)
        assert xi_apply(H1, 1, x_coordinate(H1, 1), p) == 1.0
        assert xi_apply(H1, 1, x_coordinate(H1, 1), p, "dual_number") == 1.0
        for i in (1, 2):
            assert xi_apply(H1, i, constant_field(3.0), p, "dual_number") == 0.0
    assert xi_apply(H1, 2, z_coordinate(H1, 1), P([1, 0], [0])) == pytest.approx(-0.5, abs=1e-15)
    assert xi_apply(H1, 2, z_coordinate(H1, 1), P([1, 0], [0]), "central_difference") == pytest.approx(-0.5, abs=1e-9)


def test_index_errors(H1):
    with pytest.raises(IndexOutOfRange):
        xi_apply(H1, 3, x_coordinate(H1, 1), P([0, 0], [0]))
    with pytest.raises(IndexOutOfRange):
        xi_apply(H1, 0, x_coordinate(H1, 1), P([0, 0], [0]))
    with pytest.raises(IndexOutOfRange):
        z_coordinate(H1, 2)


def test_sub_gradient_examples(H1, rng):
    N = norm_field(H1)
    assert np.array_equal(sub_gradient(H1, N, P([0, 0], [1.3])), np.zeros(2))
    assert np.allclose(sub_gradient(H1, N.with_mode("dual_number"), P([0, 0], [1.3])), 0.0, atol=1e-15)
    f = x_square_norm()
    for _ in range(10):
        p = random_point(H1, rng)
        assert np.allclose(sub_gradient(H1, f, p), 2 * p.x, rtol=0, atol=0)
        assert np.allclose(sub_gradient(H1, f.with_mode("dual_number"), p), 2 * p.x, atol=1e-13)


def test_sub_laplacian_examples(H1, G42, rng):
    x1sq = field(lambda x, z: x[..., 0] ** 2)
    for G in (H1, G42):
        p = random_point(G, rng)
        assert sub_laplacian(G, x1sq, p) == pytest.approx(2.0, abs=1e-12)
        assert sub_laplacian(G, x1sq, p, "central_difference") == pytest.approx(2.0, abs=1e-4)
        assert sub_laplacian(G, z_coordinate(G, 1), p) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(InvalidParameter):
        sub_laplacian(H1, x1sq, P([1, 0], [0]), "central_difference", stencil="bogus")


def test_laplacian_left_invariance(G42, rng):
    f = random_polynomial(G42, 3)
    for _ in range(10):
        h, p = random_point(G42, rng), random_point(G42, rng)
        lhs = sub_laplacian(G42, compose_left_translation(G42, f, h), p)
        rhs = sub_laplacian(G42, f, group_op(G42, h, p))
        assert lhs == pytest.approx(rhs, rel=1e-4, abs=1e-4)
        lhs_fd = sub_laplacian(G42, compose_left_translation(G42, f, h), p, "central_difference", stencil="fourth")
        assert lhs_fd == pytest.approx(rhs, rel=1e-4, abs=1e-4)


def test_left_jacobian(H1, G42, rng):
    J = left_jacobian(H1, P([0, 0], [0]))
    assert np.array_equal(J.matrix, np.eye(3))
    J = left_jacobian(H1, P([1, 0], [0]))
    assert np.allclose(J.matrix[2, :2], [0.0, -0.5], atol=0)
    assert J.check(2)
    p = random_point(G42, rng)
    J = left_jacobian(G42, p)
    assert J.check(4)
    for i in range(1, 5):
        coeff = 0.5 * np.einsum("kl,l->k", G42.lambdas[:, i - 1, :], p.x)
        assert np.allclose(J.matrix[4:, i - 1], coeff, atol=1e-12)
        assert J.matrix[i - 1, i - 1] == 1.0


def test_gradient_self_check(G42, rng):
    pts = [random_point(G42, rng) for _ in range(100)]
    N = norm_field(G42)
    assert gradient_self_check(G42, N, pts) <= 1e-5
    bad = field(lambda x, z: x[..., 0], grad=lambda x, z: np.ones(np.shape(x)))
    with pytest.raises(InvalidParameter):
        gradient_self_check(G42, bad, pts[:3])


def test_dual_vs_central_difference_builtin_fields(G42, rng):
    fields = [x_coordinate(G42, 2), z_coordinate(G42, 1), x_square_norm(), norm_field(G42), random_polynomial(G42, 9)]
    for f in fields:
        for _ in range(5):
            p = random_point(G42, rng)
            gd = sub_gradient(G42, f.with_mode("dual_number"), p)
            gf = sub_gradient(G42, f.with_mode("central_difference"), p)
            assert np.linalg.norm(gd - gf) <= 1e-4 * max(1.0, np.linalg.norm(gd))


def test_batch_gradient_matches_pointwise(G42):
    x = np.random.default_rng(2).standard_normal((20, 4))
    z = np.random.default_rng(3).standard_normal((20, 2))
    f = z_coordinate(G42, 2)
    batch = horizontal_gradient_batch(G42, f, x, z)
    for i in range(20):
        assert np.allclose(batch[i], sub_gradient(G42, f, Point(x[i], z[i])), atol=1e-8)


@given(seeds, dims)
def test_left_invariance(seed, nm):
    G = random_step_two(*nm, seed=seed % 997)
    rng = np.random.default_rng(seed)
    f = random_polynomial(G, seed)
    h, p = random_point(G, rng), random_point(G, rng)
    fh = compose_left_translation(G, f, h)
    hp = group_op(G, h, p)
    for i in range(1, G.n + 1):
        a, b = xi_apply(G, i, fh, p, "dual_number"), xi_apply(G, i, f, hp, "dual_number")
        assert a == pytest.approx(b, rel=1e-10, abs=1e-10)
        a, b = xi_apply(G, i, fh, p, "central_difference"), xi_apply(G, i, f, hp, "central_difference")
        assert a == pytest.approx(b, rel=1e-5, abs=1e-5)


@given(seeds, dims)
def test_commutator_structure(seed, nm):
    G = random_step_two(*nm, seed=seed % 997)
    rng = np.random.default_rng(seed)
    f = random_polynomial(G, seed, terms=8, max_power=3)
    p = random_point(G, rng)
    dz = [z_partial(G, f, p, k) for k in range(G.m)]
    for i in range(1, G.n + 1):
        for j in range(i + 1, G.n + 1):
            br = xi_xj_apply(G, i, j, f, p) - xi_xj_apply(G, j, i, f, p)
            expect = sum(G.lambdas[k, j - 1, i - 1] * dz[k] for k in range(G.m))
            assert br == pytest.approx(expect, abs=1e-8 * max(1.0, abs(expect)))


@given(seeds)
def test_product_rule(seed):
    G = random_step_two(3, 2, seed=seed % 997)
    rng = np.random.default_rng(seed)
    f, g = random_polynomial(G, seed), random_polynomial(G, seed + 1)
    fg = field(lambda x, z: f.fn(x, z) * g.fn(x, z))
    p = random_point(G, rng)
    fv, gv = float(f(p)), float(g(p))
    for i in range(1, G.n + 1):
        lhs = xi_apply(G, i, fg, p)
        rhs = fv * xi_apply(G, i, g, p) + gv * xi_apply(G, i, f, p)
        assert lhs == pytest.approx(rhs, rel=1e-8, abs=1e-8)
