"""Simplex-constrained maximization and small dense linear programs.

``maximize_over_simplex`` is the single deviation oracle used everywhere a
best response over mixed strategies is needed: it evaluates every vertex of
the simplex, then runs seeded multi-start projected-gradient ascents and
returns the best point found. For objectives without a usable gradient it
falls back to the vertices plus a dense simplex grid. Results are
deterministic given the config seed: candidates are folded in a fixed order
and exact value-ties go to the later candidate, so a constant objective
yields a seeded interior point rather than a forced corner.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linprog

from . import _kernels
from .core import ThresholdUtility, UtilitySpec, utility_eval, utility_grad
from .errors import Infeasible, SolverError, Unbounded

THRESHOLD_GRID_RESOLUTION = 50
MAX_HALVINGS = 40


@dataclass(frozen=True)
class OptConfig:
    """Multi-start ascent parameters; identical seeds give identical results."""

    num_starts: int = 16
    max_iters: int = 500
    step_init: float = 0.1
    eps_opt: float = 1e-7
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_starts < 1 or self.max_iters < 1:
            raise ValueError("num_starts and max_iters must be positive")
        if self.step_init <= 0.0 or self.eps_opt <= 0.0:
            raise ValueError("step_init and eps_opt must be positive")


def project_to_simplex(x: Sequence[float]) -> np.ndarray:
    """Euclidean projection of a finite vector onto the probability simplex."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("x must be a non-empty 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("x must be finite")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    cond = u - (css - 1.0) / idx > 0.0
    rho = int(np.nonzero(cond)[0][-1])
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class MixtureObjective:
    """u(pi @ vectors): the scalarised value of mixing fixed payoff vectors.

    This is the objective of every SER best response (rows are the per-action
    conditional expected payoff vectors) and of every greedy-strategy
    computation against Q estimates. ``maximize_over_simplex`` recognises this
    type and runs the compiled ascent.
    """

    vectors: np.ndarray
    utility: UtilitySpec

    def __post_init__(self) -> None:
        v = np.ascontiguousarray(np.asarray(self.vectors, dtype=np.float64))
        if v.ndim != 2:
            raise ValueError("vectors must be a (num_actions, num_objectives) array")
        object.__setattr__(self, "vectors", v)

    def __call__(self, pi: np.ndarray) -> float:
        return utility_eval(self.utility, np.asarray(pi) @ self.vectors)

    def grad(self, pi: np.ndarray) -> np.ndarray:
        p = np.asarray(pi) @ self.vectors
        return self.vectors @ utility_grad(self.utility, p)


def _interior_starts(rng: np.random.Generator, num: int, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k), size=num)


def simplex_grid(k: int, resolution: int) -> np.ndarray:
    """All points of the lattice {c / resolution} on the (k-1)-simplex.

    Rows come out in lexicographically ascending probability order, which is
    the tie-breaking order wherever grid points compete.
    """
    rows = []
    for bars in itertools.combinations(range(resolution + k - 1), k - 1):
        prev = -1
        comp = []
        for b in bars:
            comp.append(b - prev - 1)
            prev = b
        comp.append(resolution + k - 2 - prev)
        rows.append(comp)
    return np.asarray(rows, dtype=np.float64) / resolution


def _merge(best: tuple[np.ndarray, float] | None, point: np.ndarray, value: float):
    # Later candidates win exact value-ties, so ascent results take precedence
    # over plain vertex enumeration. At totally indifferent states (constant
    # objective) this returns a seeded interior point rather than forcing a
    # corner, which matters for learners sampling from the result.
    if best is None or value >= best[1]:
        return point, value
    return best


def _python_ascent(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    cfg: OptConfig,
) -> tuple[np.ndarray, float]:
    x = np.asarray(x0, dtype=np.float64)
    fx = float(f(x))
    step = cfg.step_init
    for _ in range(cfg.max_iters):
        g = np.asarray(grad(x), dtype=np.float64)
        accepted = False
        s = step
        for _ in range(MAX_HALVINGS):
            y = project_to_simplex(x + s * g)
            fy = float(f(y))
            if fy > fx:
                accepted = True
                break
            s *= 0.5
        if not accepted:
            break
        improvement = fy - fx
        x, fx = y, fy
        step = s * 2.0
        if improvement < cfg.eps_opt:
            break
    return x, fx


def maximize_over_simplex(
    f: Callable[[np.ndarray], float],
    grad: Callable[[np.ndarray], np.ndarray] | None,
    k: int,
    cfg: OptConfig | None = None,
) -> tuple[np.ndarray, float]:
    """Best point found for ``f`` on the k-simplex.

    Always evaluates the ``k`` vertices. With a gradient (explicit, or derived
    from a :class:`MixtureObjective` with a differentiable utility) it then
    runs ``cfg.num_starts`` projected-gradient ascents with backtracking step
    halving from seeded interior points. Without one it sweeps a dense simplex
    grid instead. The returned value is never below the best vertex value.
    """
    if k < 1:
        raise ValueError("k must be positive")
    cfg = cfg or OptConfig()
    rng = np.random.default_rng(cfg.seed)
    if k == 1:
        point = np.ones(1)
        return point, float(f(point))

    is_mixture = isinstance(f, MixtureObjective)
    if is_mixture and not isinstance(f.utility, ThresholdUtility):
        code, w, e, guard = _kernels.pack_utility(f.utility, f.vectors.shape[1])
        starts = _interior_starts(rng, cfg.num_starts, k)
        point, value = _kernels.mixture_ascent(
            f.vectors, code, w, e, guard, starts,
            cfg.step_init, cfg.max_iters, cfg.eps_opt,
        )
        return point, float(value)

    best = None
    for a in range(k):
        vertex = np.zeros(k)
        vertex[a] = 1.0
        best = _merge(best, vertex, float(f(vertex)))

    if grad is None:
        for row in simplex_grid(k, THRESHOLD_GRID_RESOLUTION):
            best = _merge(best, row, float(f(row)))
        return best

    starts = _interior_starts(rng, cfg.num_starts, k)
    for x0 in starts:
        point, value = _python_ascent(f, grad, x0, cfg)
        best = _merge(best, point, value)
    return best


def finite_difference_grad(
    f: Callable[[np.ndarray], float], p: Sequence[float], h: float = 1e-5
) -> np.ndarray:
    """Central finite differences of ``f`` around ``p``, one coordinate at a time."""
    base = np.asarray(p, dtype=np.float64)
    out = np.empty(base.shape[0])
    for j in range(base.shape[0]):
        hi = base.copy()
        lo = base.copy()
        hi[j] += h
        lo[j] -= h
        out[j] = (float(f(hi)) - float(f(lo))) / (2.0 * h)
    return out


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective @ x subject to A_ineq x >= b_ineq, A_eq x = b_eq, x >= 0."""

    objective: np.ndarray
    a_ineq: np.ndarray
    b_ineq: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.objective, dtype=np.float64))
        n = c.shape[0]
        a_ub = np.asarray(self.a_ineq, dtype=np.float64).reshape(-1, n)
        b_ub = np.atleast_1d(np.asarray(self.b_ineq, dtype=np.float64))
        a_eq = np.asarray(self.a_eq, dtype=np.float64).reshape(-1, n)
        b_eq = np.atleast_1d(np.asarray(self.b_eq, dtype=np.float64))
        if a_ub.shape[0] != b_ub.shape[0] or a_eq.shape[0] != b_eq.shape[0]:
            raise ValueError("constraint matrix/vector row counts disagree")
        for name, arr in (("objective", c), ("a_ineq", a_ub), ("b_ineq", b_ub),
                          ("a_eq", a_eq), ("b_eq", b_eq)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "a_ineq", a_ub)
        object.__setattr__(self, "b_ineq", b_ub)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)

    @property
    def num_vars(self) -> int:
        return self.objective.shape[0]


def solve_lp(lp: LinearProgram) -> tuple[np.ndarray, float]:
    """Exact dense solve of a small LP; raises Infeasible/Unbounded accordingly."""
    res = linprog(
        c=-lp.objective,
        A_ub=-lp.a_ineq if lp.a_ineq.size else None,
        b_ub=-lp.b_ineq if lp.b_ineq.size else None,
        A_eq=lp.a_eq if lp.a_eq.size else None,
        b_eq=lp.b_eq if lp.b_eq.size else None,
        bounds=(0.0, None),
        method="highs",
    )
    if res.status == 2:
        raise Infeasible("linear program is infeasible")
    if res.status == 3:
        raise Unbounded("linear program is unbounded")
    if res.status != 0:
        raise SolverError(f"linear program solver failed: {res.message}")
    x = np.asarray(res.x, dtype=np.float64)
    return x, float(lp.objective @ x)
