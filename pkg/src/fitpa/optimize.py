"""Constrained minimisation of the rate function ``J`` over truncated measures.

The search space holds the cells ``omega(k, a)`` for ``k <= K``.  Mass beyond
``K`` sits in one overflow cell per pair, pinned to the stationary product's
tail ``(mu x mu)(a) * tail(K|a)``, so the free cells live on the scaled simplex
``sum x = 1 - sum overflow``.  Constraints are affine in the free cells.

Each stored cell contributes ``x log(x f / (c R))`` with ``R`` the mass above
it in the same pair (overflow included).  ``x log(x / R)`` is jointly convex
in ``(x, R)`` and ``R`` is linear in the cells, so the objective is convex on
the search space; several starts are still run as a guard.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import brentq, linprog

from .analytics import RateValue, rate_function_J, stationary_degree_law
from .errors import Infeasible, NotConverged
from .measures import DegreePairMeasure
from .model import ColorLaw, FitnessSpec

_SENSES = (">=", "<=", "==")
_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class CellConstraint:
    """``sum coeffs[(k, pair)] * omega(k, pair)  <sense>  rhs``."""

    coeffs: Mapping
    sense: str
    rhs: float

    def __post_init__(self):
        if self.sense not in _SENSES:
            raise ValueError(f"sense must be one of {_SENSES}")
        if not self.coeffs:
            raise ValueError("a constraint needs at least one cell")

    @classmethod
    def cell(cls, k: int, pair, sense: str, value: float) -> "CellConstraint":
        return cls({(k, tuple(pair)): 1.0}, sense, value)

    def holds(self, omega: DegreePairMeasure, slack: float = 1e-12) -> bool:
        """Whether ``omega`` meets the constraint (cells beyond its support count as 0)."""
        lhs = sum(coef * omega[k, pair] for (k, pair), coef in self.coeffs.items())
        if self.sense == ">=":
            return lhs >= self.rhs - slack
        if self.sense == "<=":
            return lhs <= self.rhs + slack
        return abs(lhs - self.rhs) <= slack


def constraint_event(constraints: Sequence[CellConstraint]):
    """Predicate over measures that holds when every constraint holds."""
    constraints = tuple(constraints)

    def event(omega: DegreePairMeasure) -> bool:
        return all(c.holds(omega) for c in constraints)

    return event


@dataclass
class RateMinimum:
    """Best point found, its rate and the per-start convergence trace."""

    omega: DegreePairMeasure
    value: float
    rate: RateValue
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)


class _Problem:
    """Free-cell layout, pinned overflow and the convex objective."""

    def __init__(self, spec: FitnessSpec, mu: ColorLaw, K: int, marginal_mode: str):
        if K < 0:
            raise ValueError("K must be non-negative")
        if marginal_mode not in ("paper", "pair"):
            raise ValueError("marginal_mode must be 'paper' or 'pair'")
        self.spec, self.mu, self.K, self.mode = spec, mu, K, marginal_mode
        size = len(spec.alphabet)
        self.size = size
        pair_law = mu.product()
        self.overflow = np.zeros((size, size))
        self.pi = np.zeros((K + 1, size, size))
        cells, segments = [], []
        for b in range(size):
            for x in range(size):
                law = stationary_degree_law(spec, (b, x), None, K)
                self.overflow[b, x] = pair_law[b, x] * law.exact_tail
                self.pi[:, b, x] = pair_law[b, x] * law.probs
                start = len(cells)
                # cells with f = 0 cannot carry mass at finite rate; they stay at 0
                cells.extend((k, b, x) for k in range(K + 1) if spec.f(k, b, x) > 0)
                segments.append((b, x, start, len(cells)))
        self.cells = np.array(cells, dtype=np.int64).reshape(-1, 3)
        self.segments = segments
        self.scale = 1.0 - float(self.overflow.sum())
        fk = spec.f(self.cells[:, 0].astype(float), self.cells[:, 1], self.cells[:, 2])
        self.logf = np.log(fk / spec.c)
        self.pair_law = pair_law

    @property
    def dim(self) -> int:
        return self.cells.shape[0]

    def index(self, k: int, pair) -> int | None:
        b, x = self.spec.alphabet.pair_index(pair)
        if not 0 <= k <= self.K:
            raise ValueError(f"constraint cell k={k} lies outside 0..{self.K}")
        hit = np.flatnonzero((self.cells[:, 0] == k) & (self.cells[:, 1] == b) & (self.cells[:, 2] == x))
        return int(hit[0]) if hit.size else None

    def measure(self, v: np.ndarray) -> DegreePairMeasure:
        mass = np.zeros((self.K + 1, self.size, self.size))
        mass[self.cells[:, 0], self.cells[:, 1], self.cells[:, 2]] = np.maximum(v, 0.0)
        return DegreePairMeasure(self.spec.alphabet, mass, self.overflow)

    def _marginals(self, v):
        pm = self.overflow.copy()
        np.add.at(pm, (self.cells[:, 1], self.cells[:, 2]), v)
        return pm

    def value_and_grad(self, v: np.ndarray) -> tuple[float, np.ndarray]:
        grad = np.empty_like(v)
        total = 0.0
        for b, x, lo, hi in self.segments:
            if lo == hi:
                continue
            xs = v[lo:hi]
            R = np.concatenate((np.cumsum(xs[:0:-1])[::-1], [0.0])) + self.overflow[b, x]
            lx = np.log(np.maximum(xs, _LOG_FLOOR))
            lr = np.log(R)
            pos = xs > 0
            total += float(np.sum(xs[pos] * (lx[pos] - lr[pos] + self.logf[lo:hi][pos])))
            ratio = xs / R
            grad[lo:hi] = lx - lr + 1.0 + self.logf[lo:hi] - (np.cumsum(ratio) - ratio)
        pm = self._marginals(v)
        if self.mode == "pair":
            ok = pm > 0
            total += float(np.sum(pm[ok] * np.log(pm[ok] / self.pair_law[ok])))
            lg = np.log(np.maximum(pm, _LOG_FLOOR) / self.pair_law) + 1.0
            grad += lg[self.cells[:, 1], self.cells[:, 2]]
        else:
            tm = pm.sum(axis=1)
            ok = tm > 0
            p = self.mu.probabilities
            total += float(np.sum(tm[ok] * np.log(tm[ok] / p[ok])))
            lg = np.log(np.maximum(tm, _LOG_FLOOR) / p) + 1.0
            grad += lg[self.cells[:, 1]]
        return total, grad

    def value(self, v: np.ndarray) -> float:
        return self.value_and_grad(v)[0]

    def hessian(self, v: np.ndarray) -> np.ndarray:
        """Dense Hessian at a point with ``v > 0`` on every cell it is used for.

        Within a pair, with ``R_i`` the mass above cell ``i`` and
        ``S_m = sum_{k<m} x_k / R_k^2``, the entries are ``1/x_i + S_i`` on the
        diagonal and ``S_m - 1/R_m`` with ``m = min(i, j)`` off it.  The colour
        term adds ``1/marginal`` on every block of cells sharing a marginal.
        """
        H = np.zeros((self.dim, self.dim))
        for b, x, lo, hi in self.segments:
            if lo == hi:
                continue
            xs = v[lo:hi]
            R = np.concatenate((np.cumsum(xs[:0:-1])[::-1], [0.0])) + self.overflow[b, x]
            S = np.concatenate(([0.0], np.cumsum(xs / R**2)[:-1]))
            idx = np.arange(hi - lo)
            m = np.minimum.outer(idx, idx)
            block = S[m] - 1.0 / R[m]
            block[idx, idx] = 1.0 / np.maximum(xs, _LOG_FLOOR) + S
            H[lo:hi, lo:hi] = block
        pm = self._marginals(v)
        if self.mode == "pair":
            groups = self.cells[:, 1] * self.size + self.cells[:, 2]
            inv = 1.0 / np.maximum(pm.ravel(), _LOG_FLOOR)
        else:
            groups = self.cells[:, 1]
            inv = 1.0 / np.maximum(pm.sum(axis=1), _LOG_FLOOR)
        same = groups[:, None] == groups[None, :]
        H += np.where(same, inv[groups][:, None], 0.0)
        return H


def _project_simplex(y: np.ndarray, s: float) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum x = s}`` (sort-based)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - s
    idx = np.arange(1, y.shape[0] + 1)
    hits = np.flatnonzero(u - css / idx > 0)
    rho = hits[-1] if hits.size else 0
    return np.maximum(y - css[rho] / (rho + 1), 0.0)


def _feasible(rows, senses, rhs, scale: float, slack: float) -> bool:
    """Feasibility of the cut simplex as a linear programme."""
    signs = np.array([1.0 if s == "<=" else -1.0 for s in senses])
    ineq = np.array([s != "==" for s in senses])
    a_eq = np.vstack([np.ones((1, rows.shape[1]))] + ([rows[~ineq]] if (~ineq).any() else []))
    b_eq = np.concatenate(([scale], rhs[~ineq]))
    result = linprog(
        np.zeros(rows.shape[1]),
        A_ub=(signs[ineq, None] * rows[ineq]) if ineq.any() else None,
        b_ub=(signs[ineq] * rhs[ineq] + slack) if ineq.any() else None,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=(0, None),
        method="highs",
    )
    return result.status == 0


class _Projector:
    """Exact Euclidean projection onto the scaled simplex cut by the constraint rows.

    The projection of ``y`` is ``P(y + A^T t)`` where ``P`` projects onto the
    simplex and ``t`` solves the dual: ``t_i >= 0`` for ``>=`` rows, ``t_i <= 0``
    for ``<=`` rows, free for ``==`` rows, with complementary slackness.  Since
    ``a_i . P(y + A^T t)`` is non-decreasing in ``t_i``, each coordinate of the
    dual is a one-dimensional root; coordinates are cycled until the dual is
    stationary.  The last multipliers warm-start the next call.
    """

    def __init__(self, rows: np.ndarray, senses: list[str], rhs: np.ndarray, scale: float, feas_tol: float):
        self.rows, self.senses, self.rhs = rows, senses, rhs
        self.scale = scale
        self.feas_tol = feas_tol
        self.t = np.zeros(len(rows))
        for i, (row, sense, r) in enumerate(zip(rows, senses, rhs)):
            top, bottom = scale * float(row.max()), scale * float(row.min())
            if (sense != "<=" and top < r - feas_tol) or (sense != ">=" and bottom > r + feas_tol):
                raise Infeasible(f"constraint {i} cannot be met on the simplex")
        if len(rows) > 1 and not _feasible(rows, senses, rhs, scale, feas_tol):
            raise Infeasible("the constraints have no common point on the simplex")

    def violation(self, v: np.ndarray) -> float:
        worst = abs(v.sum() - self.scale) + max(0.0, -float(v.min()))
        for row, sense, r in zip(self.rows, self.senses, self.rhs):
            lhs = float(row @ v)
            if sense == ">=":
                worst = max(worst, r - lhs)
            elif sense == "<=":
                worst = max(worst, lhs - r)
            else:
                worst = max(worst, abs(lhs - r))
        return worst

    def _coordinate(self, i: int, base: np.ndarray, t0: float) -> float:
        """Best ``t_i`` with the other multipliers folded into ``base``."""
        row, sense, r = self.rows[i], self.senses[i], self.rhs[i]

        def phi(t):
            return float(row @ _project_simplex(base + t * row, self.scale)) - r

        if sense == ">=" and phi(0.0) >= 0:
            return 0.0
        if sense == "<=" and phi(0.0) <= 0:
            return 0.0
        # bracket the root of the non-decreasing function phi
        lo, hi = (0.0, 0.0) if sense != "==" else (t0, t0)
        width = max(abs(t0), 1e-3)
        grow_up = phi(hi) < 0
        cap = 1e12 * (1.0 + float(np.max(np.abs(base))))
        while max(abs(lo), abs(hi)) < cap:
            if grow_up:
                lo, hi = hi, hi + width
                if phi(hi) >= 0:
                    break
            else:
                lo, hi = lo - width, lo
                if phi(lo) <= 0:
                    break
            width *= 2.0
        else:
            raise Infeasible(f"constraint {i} cannot be met on the simplex")
        return brentq(phi, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)

    def __call__(self, y: np.ndarray, max_cycles: int = 10_000) -> np.ndarray:
        if not len(self.rows):
            return _project_simplex(y, self.scale)
        t = self.t.copy()
        for _ in range(max_cycles):
            previous = t.copy()
            for i in range(len(t)):
                base = y + self.rows.T @ t - t[i] * self.rows[i]
                t[i] = self._coordinate(i, base, t[i])
            if len(t) == 1 or np.max(np.abs(t - previous)) <= 1e-15 * max(1.0, float(np.max(np.abs(t)))):
                break
        v = _project_simplex(y + self.rows.T @ t, self.scale)
        if self.violation(v) > self.feas_tol:
            raise Infeasible(f"constraints could not be met (violation {self.violation(v):.3g})")
        self.t = t
        return v


def _constraint_rows(problem: _Problem, constraints: Sequence[CellConstraint]):
    rows = np.zeros((len(constraints), problem.dim))
    rhs = np.zeros(len(constraints))
    for i, con in enumerate(constraints):
        rhs[i] = con.rhs
        for (k, pair), coef in con.coeffs.items():
            j = problem.index(k, pair)
            if j is None:
                # a cell with f = 0 is held at zero; it adds nothing to the left side
                continue
            rows[i, j] += coef
    keep = np.any(rows != 0, axis=1)
    for i in np.flatnonzero(~keep):
        con = constraints[i]
        if (con.sense == ">=" and con.rhs > 0) or (con.sense == "<=" and con.rhs < 0) or (con.sense == "==" and con.rhs != 0):
            raise Infeasible(f"constraint {i} only involves cells that must stay empty")
    return rows[keep], [c.sense for c, k in zip(constraints, keep) if k], rhs[keep]


def _starts(problem: _Problem) -> list[tuple[str, np.ndarray]]:
    cells = problem.cells
    pi = problem.pi[cells[:, 0], cells[:, 1], cells[:, 2]]
    uniform = np.full(problem.dim, problem.scale / problem.dim)
    geometric = 0.5 ** cells[:, 0].astype(float) * problem.pair_law[cells[:, 1], cells[:, 2]]
    geometric *= problem.scale / geometric.sum()
    tails = np.empty(problem.dim)
    for b, x, lo, hi in problem.segments:
        law = stationary_degree_law(problem.spec, (b, x), None, problem.K)
        tails[lo:hi] = law.tails[cells[lo:hi, 0]] * problem.pair_law[b, x]
    tails *= problem.scale / tails.sum()
    return [
        ("stationary", pi),
        ("uniform", uniform),
        ("tail-law", tails),
        ("mixture", 0.5 * (pi + uniform)),
        ("geometric", geometric),
    ]


def _residual(project: _Projector, v: np.ndarray, g: np.ndarray) -> float:
    return float(np.max(np.abs(project(v - g) - v))) if v.size else 0.0


def _spg(problem: _Problem, project: _Projector, v, f, g, iterations: int, stop: float, state: dict, memory: int = 10):
    """Spectral projected gradient steps with a non-monotone Armijo search.

    The trial step comes from the Barzilai-Borwein ratio; the direction is
    ``P(v - step g) - v``, tested against the largest of the last ``memory``
    values.  Returns early once the projected gradient falls to ``stop``.
    """
    recent = state.setdefault("recent", [f])
    step = state.get("step", 1.0)
    for _ in range(iterations):
        if _residual(project, v, g) <= stop:
            break
        d = project(v - step * g) - v
        slope = float(g @ d)
        ref = max(recent)
        alpha = 1.0
        while True:
            cand = v + alpha * d
            fc, gc = problem.value_and_grad(cand)
            if fc <= ref + 1e-4 * alpha * slope or alpha < 1e-12:
                break
            alpha *= 0.5
        s_vec, y_vec = cand - v, gc - g
        sy = float(s_vec @ y_vec)
        step = min(max(float(s_vec @ s_vec) / sy, 1e-12), 1e6) if sy > 0 else 1e6
        v, f, g = cand, fc, gc
        recent.append(f)
        del recent[:-memory]
        state["iterations"] = state.get("iterations", 0) + 1
        state["trace"].append((state["iterations"], f))
    state["step"] = step
    return v, f, g


def _newton(problem: _Problem, project: _Projector, v, f, g, state: dict, max_steps: int = 50):
    """Newton steps on the current face: positive cells free, tight constraints kept tight.

    Each step solves the equality-constrained quadratic model, then backtracks
    along the direction, stopping at the first cell or inactive constraint it
    would cross (that cell or constraint joins the face).
    """
    rows, senses, rhs = project.rows, project.senses, project.rhs
    for _ in range(max_steps):
        free = v > 0
        if not np.any(free):
            break
        lhs = rows @ v if len(rows) else np.zeros(0)
        tight = np.array(
            [sense == "==" or abs(l - r) <= 1e-12 * max(1.0, abs(r)) for sense, l, r in zip(senses, lhs, rhs)], dtype=bool
        )
        E = np.vstack([np.ones((1, int(free.sum())))] + ([rows[tight][:, free]] if tight.any() else []))
        H = problem.hessian(v)[np.ix_(free, free)]
        nf, ne = H.shape[0], E.shape[0]
        kkt = np.block([[H, E.T], [E, np.zeros((ne, ne))]])
        rhs_vec = np.concatenate((-g[free], np.zeros(ne)))
        try:
            sol = np.linalg.solve(kkt, rhs_vec)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs_vec, rcond=None)[0]
        d = np.zeros_like(v)
        d[free] = sol[:nf]
        decrement = -float(g @ d)
        if not decrement > 1e-24:
            break
        # longest step keeping cells non-negative and inactive constraints satisfied
        limit, blocking = 1.0, None
        neg = np.flatnonzero(d < 0)
        if neg.size:
            ratios = v[neg] / -d[neg]
            j = int(np.argmin(ratios))
            if ratios[j] < limit:
                limit, blocking = float(ratios[j]), ("cell", int(neg[j]))
        for i in np.flatnonzero(~tight):
            rate = float(rows[i] @ d)
            slack = lhs[i] - rhs[i]
            if senses[i] == ">=" and rate < 0 and slack / -rate < limit:
                limit, blocking = slack / -rate, ("row", i)
            elif senses[i] == "<=" and rate > 0 and -slack / rate < limit:
                limit, blocking = -slack / rate, ("row", i)
        alpha = limit
        while True:
            cand = v + alpha * d
            if blocking is not None and blocking[0] == "cell" and alpha == limit:
                cand[blocking[1]] = 0.0
            cand = np.maximum(cand, 0.0)
            fc, gc = problem.value_and_grad(cand)
            if fc <= f - 1e-4 * alpha * decrement or alpha < 1e-12:
                break
            alpha *= 0.5
        if fc > f:
            break
        v, f, g = cand, fc, gc
        state["iterations"] = state.get("iterations", 0) + 1
        state["trace"].append((state["iterations"], f))
    return v, f, g


def _descend(problem: _Problem, project: _Projector, v0: np.ndarray, tol: float, max_iter: int):
    """Projected gradient until the active set settles, then Newton on the face.

    Stops when the projected gradient ``|P(v - g) - v|`` falls to ``tol``.
    The first-order phase runs until the residual drops below ``1e-4`` (or
    for 500 steps); afterwards Newton polishing alternates with 50
    first-order steps, which let cells enter or leave the face.
    """
    v = project(v0)
    f, g = problem.value_and_grad(v)
    state = {"trace": [(0, f)], "iterations": 0}
    v, f, g = _spg(problem, project, v, f, g, min(500, max_iter), max(tol, 1e-4), state)
    while True:
        residual = _residual(project, v, g)
        if residual <= tol:
            return v, f, True, state["iterations"], state["trace"]
        if state["iterations"] >= max_iter:
            return v, f, False, state["iterations"], state["trace"]
        v, f, g = _newton(problem, project, v, f, g, state)
        if _residual(project, v, g) <= tol:
            continue
        budget = min(50, max(max_iter - state["iterations"], 0))
        if budget == 0:
            continue
        v, f, g = _spg(problem, project, v, f, g, budget, tol, state)


def minimize_rate(
    spec: FitnessSpec,
    mu: ColorLaw,
    constraints: Sequence[CellConstraint] = (),
    K: int = 20,
    tol: float = 1e-10,
    marginal_mode: str = "paper",
    max_iter: int = 20_000,
    jobs: int = 1,
) -> RateMinimum:
    """Minimise ``J`` over measures on ``{0..K} x X^2`` meeting ``constraints``.

    Projected gradient and face-restricted Newton steps from five starts: the stationary product, the uniform
    point, the tail law, their mixture and a geometric profile, each projected
    onto the feasible set.  Raises :class:`Infeasible` when the projection
    cannot satisfy the constraints and :class:`NotConverged` (carrying the
    best result) when no start converges within ``max_iter`` iterations.
    """
    problem = _Problem(spec, mu, K, marginal_mode)
    rows, senses, rhs = _constraint_rows(problem, list(constraints))
    starts = _starts(problem)

    def run(item):
        name, v0 = item
        project = _Projector(rows, senses, rhs, problem.scale, feas_tol=1e-9)
        return name, _descend(problem, project, v0, tol, max_iter)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]

    trace = []
    best = None
    for name, (v, f, ok, iters, steps) in results:
        trace.extend((name, it, val) for it, val in steps)
        if best is None or f < best[1]:
            best = (v, f, ok, iters)
    v, f, ok, iters = best
    omega = problem.measure(v)
    result = RateMinimum(omega, f, rate_function_J(omega, spec, mu, marginal_mode), ok, iters, trace)
    if not any(r[1][2] for r in results):
        raise NotConverged(f"no start converged within {max_iter} iterations (best J={f:.6g})", best=result)
    return result


def _compositions(parts: int, total: int):
    """All non-negative integer vectors of length ``parts`` summing to ``total``."""
    for bars in combinations(range(total + parts - 1), parts - 1):
        prev = -1
        out = []
        for b in bars:
            out.append(b - prev - 1)
            prev = b
        out.append(total + parts - 2 - prev)
        yield out


def grid_search_rate(
    spec: FitnessSpec,
    mu: ColorLaw,
    constraints: Sequence[CellConstraint] = (),
    K: int = 3,
    resolution: int = 60,
    min_width: float = 1e-10,
    marginal_mode: str = "paper",
) -> tuple[float, np.ndarray]:
    """Dense grid search over the same truncated space, for checking :func:`minimize_rate`.

    Evaluates every feasible grid point with spacing ``scale/resolution``,
    then re-grids a 5-point-per-axis box around the incumbent, moving while
    that improves and halving the box when it does not.  Only meant
    for a handful of free cells.  Returns ``(J_min, free-cell vector)``.
    """
    problem = _Problem(spec, mu, K, marginal_mode)
    rows, senses, rhs = _constraint_rows(problem, list(constraints))
    dim, s = problem.dim, problem.scale

    def feasible(pts):
        ok = np.all(pts >= -1e-15, axis=1)
        for row, sense, r in zip(rows, senses, rhs):
            lhs = pts @ row
            if sense == ">=":
                ok &= lhs >= r - 1e-12
            elif sense == "<=":
                ok &= lhs <= r + 1e-12
            else:
                ok &= np.abs(lhs - r) <= 1e-12
        return ok

    def best_of(pts):
        pts = pts[feasible(pts)]
        if not len(pts):
            return math.inf, None
        vals = np.array([problem.value(p) for p in pts])
        i = int(np.argmin(vals))
        return float(vals[i]), pts[i]

    grid = np.array(list(_compositions(dim, resolution)), dtype=float) * (s / resolution)
    best_val, best = best_of(grid)
    if best is None:
        raise Infeasible("no grid point satisfies the constraints")
    width = s / resolution
    offsets = np.array(list(np.ndindex(*([5] * (dim - 1)))), dtype=float) - 2.0
    while width > min_width * s and dim > 1:
        pts = best[None, : dim - 1] + offsets * width
        pts = np.hstack((pts, s - pts.sum(axis=1, keepdims=True)))
        val, cand = best_of(pts)
        if cand is not None and val < best_val - 1e-15:
            best_val, best = val, cand
        else:
            width /= 2.0
    return best_val, best
