import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from carnot_ineq.errors import InvalidParameter, OriginSingular, ZeroHorizontal
from carnot_ineq.group import Point, dilate, make_heisenberg, random_point, random_step_two
from carnot_ineq.hcalculus import sub_gradient, sub_laplacian
from carnot_ineq.norm import (
    c_le_one_threshold,
    estimate_lemma2_constants,
    fundamental_solution_field,
    grad_N_batch,
    grad_N_closed,
    grad_N_sq,
    grad_N_sq_batch,
    is_nondegenerate,
    laplacian_N_batch,
    laplacian_N_closed,
    lemma2_ratios,
    norm_batch,
    norm_field,
    norm_N,
    radial_identity_residual,
    random_nondegenerate_step_two,
    sample_shell_points,
)


def P(x, z):
    return Point(np.array(x, float), np.array(z, float))


@pytest.fixture(scope="module")
def Gnd():
    return random_nondegenerate_step_two(4, 2, seed=0)


def test_norm_examples(H1):
    assert norm_N(H1, P([1, 0], [0])) == 1.0
    assert norm_N(H1, P([0, 0], [1])) == 2.0
    assert norm_N(H1, P([0, 0], [0])) == 0.0


def test_origin_and_axis_errors(H1):
    with pytest.raises(OriginSingular):
        grad_N_closed(H1, P([0, 0], [0]))
    with pytest.raises(OriginSingular):
        grad_N_sq(H1, P([0, 0], [0]))
    with pytest.raises(OriginSingular):
        laplacian_N_closed(H1, P([0, 0], [0]))
    with pytest.raises(ZeroHorizontal):
        radial_identity_residual(H1, P([0, 0], [1]))


def test_gradient_vanishes_on_center(H1, G42):
    assert np.array_equal(grad_N_closed(H1, P([0, 0], [0.7])), np.zeros(2))
    assert np.array_equal(grad_N_closed(G42, P([0, 0, 0, 0], [0.3, -1])), np.zeros(4))
    assert laplacian_N_closed(H1, P([0, 0], [0.7])) == 0.0


def test_htype_identities(H1, H2, rng):
    assert grad_N_sq(H1, P([1, 0], [0])) == 1.0
    assert laplacian_N_closed(H1, P([1, 0], [0])) == pytest.approx(3.0, rel=1e-15)
    for G in (H1, H2):
        for _ in range(100):
            p = random_point(G, rng)
            N = norm_N(G, p)
            x2 = float(p.x @ p.x)
            g = grad_N_closed(G, p)
            assert float(g @ g) == pytest.approx(x2 / N**2, rel=1e-12)
            assert laplacian_N_closed(G, p) == pytest.approx((G.q_hom - 1) * x2 / N**3, rel=1e-12)


def test_closed_forms_vs_numerics(G42, rng):
    f = norm_field(G42)
    for _ in range(100):
        p = random_point(G42, rng)
        g = grad_N_closed(G42, p)
        assert float(g @ g) == pytest.approx(grad_N_sq(G42, p), rel=1e-12)
        gfd = sub_gradient(G42, f, p, "central_difference")
        assert np.linalg.norm(g - gfd) <= 1e-5 * np.linalg.norm(g)
        if np.linalg.norm(p.x) >= 0.1:
            lap = laplacian_N_closed(G42, p)
            lfd = sub_laplacian(G42, f, p, "central_difference")
            assert lfd == pytest.approx(lap, rel=1e-3, abs=1e-6)
            assert sub_laplacian(G42, f, p, "dual_number") == pytest.approx(lap, rel=1e-10, abs=1e-12)


def test_radial_identity(G42, H1, rng):
    for _ in range(200):
        p = random_point(G42, rng)
        x = np.linalg.norm(p.x)
        rel = (x / norm_N(G42, p)) ** 3
        assert abs(radial_identity_residual(G42, p)) <= 1e-12 * rel
        lam = float(rng.uniform(0.1, 10))
        assert abs(radial_identity_residual(G42, dilate(lam, p))) <= 1e-12 * rel
    for zv in (-3.0, 0.0, 0.25, 8.0):
        assert abs(radial_identity_residual(H1, P([1, 0], [zv]))) <= 1e-15


def test_lemma2_htype_oracle(H1):
    rep = estimate_lemma2_constants(H1, 10_000, seed=3)
    assert abs(rep.a_hat - 1) <= 1e-9 and abs(rep.c_hat - 1) <= 1e-9
    assert abs(rep.b_hat - 3) <= 1e-6
    assert rep.laplacian_nonnegative
    assert rep.residual_max <= 1e-12
    with pytest.raises(InvalidParameter):
        estimate_lemma2_constants(H1, 999)


def test_lemma2_report_sandwich_and_stability(Gnd):
    rep = estimate_lemma2_constants(Gnd, 20_000, seed=1)
    assert 0 < rep.a_hat <= rep.c_hat and 0 <= rep.b_hat < np.inf
    x, z = sample_shell_points(Gnd, 20_000, 1)
    keep = np.linalg.norm(x, axis=1) / norm_batch(Gnd, x, z) >= 1e-8
    gr, lr, _ = lemma2_ratios(Gnd, x[keep], z[keep])
    assert rep.a_hat <= gr.min() and gr.max() <= rep.c_hat and lr.max() <= rep.b_hat
    x, z = sample_shell_points(Gnd, 20_000, 99)
    N = norm_batch(Gnd, x, z)
    x2 = np.sum(x * x, 1)
    gsq = grad_N_sq_batch(Gnd, x, z)
    assert np.all(0.5 * rep.a_hat * x2 / N**2 <= gsq) and np.all(gsq <= 2 * rep.c_hat * x2 / N**2)
    assert np.all(np.abs(laplacian_N_batch(Gnd, x, z)) <= 1.01 * rep.b_hat * x2 / N**3)


def test_lemma2_deterministic_and_dilation_invariant(Gnd):
    a = estimate_lemma2_constants(Gnd, 5_000, seed=4, polish=0)
    b = estimate_lemma2_constants(Gnd, 5_000, seed=4, polish=0)
    assert a.to_dict() == b.to_dict()
    c = estimate_lemma2_constants(Gnd, 5_000, seed=4, radius_range=(1.0, 100.0), polish=0)
    for key in ("a_hat", "c_hat", "b_hat"):
        assert getattr(c, key) == pytest.approx(getattr(a, key), rel=1e-10)


def test_small_a_gives_c_le_one():
    G = random_step_two(4, 2, seed=5)
    a_small = c_le_one_threshold(G)
    Gs = random_step_two(4, 2, seed=5, a=0.99 * a_small)
    rep = estimate_lemma2_constants(Gs, 20_000, seed=0)
    assert rep.c_hat <= 1 + 1e-12


def test_nondegenerate_group(Gnd):
    assert is_nondegenerate(Gnd)
    assert not Gnd.flags.htype


@given(st.integers(0, 2**32 - 1), st.floats(0.05, 20.0))
def test_degree_zero_homogeneity(seed, lam):
    G = random_step_two(3, 2, seed=seed % 101)
    p = random_point(G, seed)
    q = dilate(lam, p)
    assert norm_N(G, q) == pytest.approx(lam * norm_N(G, p), rel=1e-12)
    assert grad_N_sq(G, q) == pytest.approx(grad_N_sq(G, p), rel=1e-9)
    assert laplacian_N_closed(G, q) * norm_N(G, q) == pytest.approx(
        laplacian_N_closed(G, p) * norm_N(G, p), rel=1e-9, abs=1e-12
    )
    for i in range(2):
        r1 = lemma2_ratios(G, p.x[None], p.z[None])[i][0]
        r2 = lemma2_ratios(G, q.x[None], q.z[None])[i][0]
        assert r2 == pytest.approx(r1, rel=1e-9)


def test_htype_harmonicity(H1, rng):
    u = fundamental_solution_field(H1).with_mode("dual_number")
    checked = 0
    while checked < 50:
        p = random_point(H1, rng)
        N = norm_N(H1, p)
        if N < 0.2:
            continue
        scale = N ** (2 - H1.q_hom) / N**2
        assert abs(sub_laplacian(H1, u, p)) <= 1e-3 * scale
        checked += 1


def test_radial_identity_direct_dot(G42, H1):
    # dotting the closed-form gradient itself: exact up to the cancellation of
    # the skew term, whose rounding scales with a|z|/|x|^2
    for G in (G42, H1):
        x, z = sample_shell_points(G, 20_000, 5)
        N = norm_batch(G, x, z)
        xn = np.linalg.norm(x, axis=1)
        keep = xn / N >= 1e-8
        x, z, N, xn = x[keep], z[keep], N[keep], xn[keep]
        lhs = np.einsum("ij,ij->i", x / xn[:, None], grad_N_batch(G, x, z))
        ref = (xn / N) ** 3
        cond = 1.0 + G.a * np.linalg.norm(z, axis=1) / xn**2
        rel = np.abs(lhs - ref) / ref
        assert np.all(rel <= 1e-12 * cond)
        well = cond <= 10.0
        assert well.sum() > 1000 and np.all(rel[well] <= 1e-12)
