import numpy as np
import pytest

from monfg import (
    LinearProgram,
    LinearUtility,
    MixtureObjective,
    OptConfig,
    PolySumUtility,
    ProductUtility,
    ThresholdUtility,
    finite_difference_grad,
    maximize_over_simplex,
    project_to_simplex,
    simplex_grid,
    solve_lp,
)
from monfg.equilibrium import ce_esr_constraints
from monfg.errors import Infeasible, Unbounded


# ---------------------------------------------------------------------------
# Simplex projection
# ---------------------------------------------------------------------------


def test_projection_keeps_distributions_fixed():
    for p in ([0.2, 0.3, 0.5], [1.0], [0.0, 1.0]):
        np.testing.assert_allclose(project_to_simplex(p), p, atol=1e-15)


def test_projection_examples():
    np.testing.assert_allclose(project_to_simplex([2.0, 0.0]), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(project_to_simplex([0.6, 0.6]), [0.5, 0.5], atol=1e-15)


def test_projection_idempotent_and_valid():
    rng = np.random.default_rng(1)
    for _ in range(200):
        x = rng.uniform(-3, 3, size=int(rng.integers(2, 6)))
        p = project_to_simplex(x)
        assert np.all(p >= 0.0)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(project_to_simplex(p), p, atol=1e-12)


def test_projection_is_nearest_simplex_point():
    # Brute force over the 1e-3 lattice on the 2-simplex: no lattice point may
    # be closer than the projection (up to lattice quantization slack).
    rng = np.random.default_rng(2)
    grid = simplex_grid(3, 1000)
    for _ in range(10):
        x = rng.uniform(-2.0, 2.0, size=3)
        p = project_to_simplex(x)
        dists = np.sum((grid - x) ** 2, axis=1)
        assert np.sum((p - x) ** 2) <= dists.min() + 1e-9


# ---------------------------------------------------------------------------
# maximize_over_simplex
# ---------------------------------------------------------------------------


def test_linear_objective_attains_vertex_max():
    c = np.array([0.3, 0.9, 0.1])
    point, value = maximize_over_simplex(lambda p: float(c @ p), lambda p: c, 3)
    assert value == pytest.approx(0.9, abs=1e-9)
    np.testing.assert_allclose(point, [0.0, 1.0, 0.0], atol=1e-9)


def test_mixture_polysum_reaches_ten():
    V = np.array([[3.0, 1.0], [2.0, 2.0], [1.0, 3.0]])
    obj = MixtureObjective(V, PolySumUtility(weights=(1.0, 1.0), exponents=(2, 2)))
    point, value = maximize_over_simplex(obj, None, 3)
    assert value == pytest.approx(10.0, abs=1e-9)
    assert point[1] == pytest.approx(0.0, abs=1e-9)  # pure L or pure R


def test_mixture_product_segment_midpoint():
    V = np.array([[4.0, 0.0], [0.0, 4.0]])
    obj = MixtureObjective(V, ProductUtility())
    point, value = maximize_over_simplex(obj, None, 2)
    assert value == pytest.approx(4.0, abs=1e-6)
    np.testing.assert_allclose(point, [0.5, 0.5], atol=1e-3)


def test_value_never_below_best_vertex():
    rng = np.random.default_rng(7)
    for _ in range(25):
        k = int(rng.integers(2, 5))
        V = rng.uniform(-3, 3, size=(k, 2))
        u = ProductUtility(nonneg_guard=bool(rng.integers(2)))
        obj = MixtureObjective(V, u)
        _, value = maximize_over_simplex(obj, None, k, OptConfig(seed=int(rng.integers(1000))))
        vertex_best = max(float(obj(np.eye(k)[a])) for a in range(k))
        assert value >= vertex_best - 1e-12


def test_deterministic_given_seed():
    V = np.array([[3.0, 1.0], [2.0, 2.0], [1.0, 3.0]])
    obj = MixtureObjective(V, ProductUtility())
    cfg = OptConfig(seed=42)
    p1, v1 = maximize_over_simplex(obj, None, 3, cfg)
    p2, v2 = maximize_over_simplex(obj, None, 3, cfg)
    assert v1 == v2
    np.testing.assert_array_equal(p1, p2)
    # The generic python path is deterministic too.
    f = lambda p: float(-np.sum((p - 1.0 / 3.0) ** 2))
    g = lambda p: -2.0 * (p - 1.0 / 3.0)
    q1 = maximize_over_simplex(f, g, 3, cfg)
    q2 = maximize_over_simplex(f, g, 3, cfg)
    assert q1[1] == q2[1]
    np.testing.assert_array_equal(q1[0], q2[0])


def test_threshold_mixture_uses_grid_search():
    V = np.array([[3.0, 0.0], [0.0, 3.0]])
    u = ThresholdUtility(objective=1, threshold=1.4, reward=7.0)
    obj = MixtureObjective(V, u)
    point, value = maximize_over_simplex(obj, None, 2)
    assert value == pytest.approx(7.0)
    assert point[1] * 3.0 >= 1.4 - 1e-12


def test_kernel_and_generic_paths_agree():
    rng = np.random.default_rng(19)
    for _ in range(15):
        k = int(rng.integers(2, 5))
        V = rng.uniform(0.0, 4.0, size=(k, 2))
        obj = MixtureObjective(V, PolySumUtility(weights=(1.0, 1.0), exponents=(2, 2)))
        cfg = OptConfig(seed=int(rng.integers(1000)))
        _, fast = maximize_over_simplex(obj, None, k, cfg)
        _, generic = maximize_over_simplex(obj.__call__, obj.grad, k, cfg)
        assert fast == pytest.approx(generic, abs=1e-7)


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


def _simplex_lp(objective, a_ineq=None, b_ineq=None):
    n = len(objective)
    return LinearProgram(
        objective=np.asarray(objective, dtype=float),
        a_ineq=np.zeros((0, n)) if a_ineq is None else np.asarray(a_ineq, dtype=float),
        b_ineq=np.zeros(0) if b_ineq is None else np.asarray(b_ineq, dtype=float),
        a_eq=np.ones((1, n)),
        b_eq=np.ones(1),
    )


def test_lp_simplex_vertex_max():
    x, value = solve_lp(_simplex_lp([1.0, 0.0, 0.0]))
    assert value == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(x, [1.0, 0.0, 0.0], atol=1e-9)


def test_lp_chicken_ce_total_payoff(chicken, identity_utilities):
    a_ineq, f = ce_esr_constraints(chicken, identity_utilities)
    m = chicken.num_joint_actions
    lp = LinearProgram(
        objective=f.sum(axis=0).reshape(m),
        a_ineq=a_ineq,
        b_ineq=np.zeros(a_ineq.shape[0]),
        a_eq=np.ones((1, m)),
        b_eq=np.ones(1),
    )
    _, value = solve_lp(lp)
    assert value >= 10.5 - 1e-9


def test_lp_infeasible():
    # x_1 >= 2 cannot hold on the simplex.
    lp = _simplex_lp([1.0, 1.0], a_ineq=[[1.0, 0.0]], b_ineq=[2.0])
    with pytest.raises(Infeasible):
        solve_lp(lp)


def test_lp_unbounded():
    lp = LinearProgram(
        objective=np.array([1.0]),
        a_ineq=np.zeros((0, 1)),
        b_ineq=np.zeros(0),
        a_eq=np.zeros((0, 1)),
        b_eq=np.zeros(0),
    )
    with pytest.raises(Unbounded):
        solve_lp(lp)


def test_lp_beats_every_feasible_grid_point():
    rng = np.random.default_rng(31)
    grid = simplex_grid(3, 20)  # step 0.05
    for _ in range(10):
        c = rng.uniform(-2, 2, 3)
        a = rng.uniform(-1, 1, size=(2, 3))
        b = rng.uniform(-1.0, 0.2, size=2)
        feasible = grid[(grid @ a.T >= b - 1e-12).all(axis=1)]
        lp = _simplex_lp(c, a_ineq=a, b_ineq=b)
        if feasible.size == 0:
            continue
        _, value = solve_lp(lp)
        assert value >= float((feasible @ c).max()) - 1e-9


# ---------------------------------------------------------------------------
# Finite differences
# ---------------------------------------------------------------------------


def test_finite_difference_grad_examples():
    f = lambda p: p[0] ** 2 + p[1] ** 2
    np.testing.assert_allclose(
        finite_difference_grad(f, [3.0, 1.0], h=1e-5), [6.0, 2.0], atol=1e-4
    )
    np.testing.assert_allclose(
        finite_difference_grad(lambda p: 7.0, [1.0, 2.0]), [0.0, 0.0], atol=1e-12
    )
    np.testing.assert_allclose(
        finite_difference_grad(lambda p: p[0] * p[1], [2.0, 3.0], h=1e-5),
        [3.0, 2.0],
        atol=1e-4,
    )
