"""Sequential growth of coloured preferential-attachment trees.

Three interchangeable parent samplers realise the same attachment law:

``naive``
    scans all existing vertices each step (reference, O(m) per step);
``linear``
    O(|X|) per step for affine weights, using per-colour endpoint lists;
``fenwick``
    O(|X| log n) per step for arbitrary degree weights, using one Fenwick
    tree per (vertex colour, newcomer colour).

Bulk generation runs in compiled kernels (:mod:`fitpa._kernels`).  The
:class:`GrowthState` class mirrors the same data structures in plain Python so
that the distribution each sampler implies can be read off and compared.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import ZeroTotalWeight
from .model import ColorLaw, FitnessSpec
from .rng import draw_colors, make_rng
from .tree import ColoredTree

SAMPLERS = ("naive", "linear", "fenwick")
_KIND = {"naive": 0, "linear": 1, "fenwick": 2}


@dataclass(frozen=True, eq=False)
class DegreeWeight:
    """Attachment weight ``table[min(k, K), b, x] * f(k, b, x) ** power``.

    ``f`` is the affine rule given by ``gamma``/``beta``; ``power`` is one of
    -1, 0, 1.  With ``power == -1`` cells where ``f == 0`` get weight 0.
    """

    table: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    power: int

    def __post_init__(self):
        table = np.ascontiguousarray(self.table, dtype=float)
        if table.ndim != 3 or table.shape[1:] != self.gamma.shape:
            raise ValueError("table must have shape (K+1, |X|, |X|)")
        if self.power not in (-1, 0, 1):
            raise ValueError("power must be -1, 0 or 1")
        if np.any(table < 0) or not np.all(np.isfinite(table)):
            raise ValueError("weight table entries must be finite and non-negative")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "gamma", np.ascontiguousarray(self.gamma, dtype=float))
        object.__setattr__(self, "beta", np.ascontiguousarray(self.beta, dtype=float))

    @classmethod
    def affine(cls, spec: FitnessSpec) -> "DegreeWeight":
        size = len(spec.alphabet)
        return cls(np.ones((1, size, size)), spec.gamma, spec.beta, 1)

    @classmethod
    def constant(cls, size: int, value: float = 1.0) -> "DegreeWeight":
        zeros = np.zeros((size, size))
        return cls(np.full((1, size, size), float(value)), zeros, zeros, 0)

    @property
    def kmax(self) -> int:
        return self.table.shape[0] - 1

    @property
    def is_affine(self) -> bool:
        return self.power == 1 and self.kmax == 0 and bool(np.all(self.table == 1.0))

    def __call__(self, k, b: int, x: int):
        k = np.asarray(k)
        t = self.table[np.minimum(k, self.kmax), b, x]
        if self.power == 0:
            return t * 1.0
        fv = self.gamma[b, x] * k + self.beta[b, x]
        if self.power == 1:
            return t * fv
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(fv > 0, t / np.where(fv > 0, fv, 1.0), 0.0)

    def kernel_args(self):
        return self.table, self.gamma, self.beta, self.power


def as_weight(obj) -> DegreeWeight:
    if isinstance(obj, DegreeWeight):
        return obj
    if isinstance(obj, FitnessSpec):
        return DegreeWeight.affine(obj)
    raise TypeError(f"expected FitnessSpec or DegreeWeight, got {type(obj).__name__}")


class FenwickTree:
    """Growable binary indexed tree over non-negative weights (0-based slots)."""

    def __init__(self, capacity: int = 16):
        self._size = max(1, capacity)
        self._tree = [0.0] * (self._size + 1)
        self._values: list[float] = []

    def __len__(self) -> int:
        return len(self._values)

    def _grow(self):
        values = self._values
        self._size *= 2
        tree = [0.0] * (self._size + 1)
        for i in range(1, self._size + 1):
            if i <= len(values):
                tree[i] += values[i - 1]
            j = i + (i & -i)
            if j <= self._size:
                tree[j] += tree[i]
        self._tree = tree

    def append(self, value: float) -> None:
        if len(self._values) == self._size:
            self._grow()
        self._values.append(0.0)
        self.set(len(self._values) - 1, value)

    def __getitem__(self, i: int) -> float:
        return self._values[i]

    def set(self, i: int, value: float) -> None:
        delta = value - self._values[i]
        self._values[i] = value
        j = i + 1
        while j <= self._size:
            self._tree[j] += delta
            j += j & -j

    def prefix(self, i: int) -> float:
        """Sum of slots ``0..i-1``."""
        s = 0.0
        while i > 0:
            s += self._tree[i]
            i -= i & -i
        return s

    def total(self) -> float:
        return self.prefix(len(self._values))

    def search(self, r: float) -> int:
        """0-based slot whose cumulative interval contains ``r``."""
        pos = 0
        step = 1 << (self._size.bit_length() - 1)
        while step:
            t = pos + step
            if t <= self._size and self._tree[t] <= r:
                pos = t
                r -= self._tree[t]
            step >>= 1
        return min(pos, len(self._values) - 1)


class GrowthState:
    """Mutable growth state shared by the Python-level step functions.

    Keeps in-degrees, per-colour vertex lists, degree sums ``D`` and counts
    ``S``, per-colour endpoint lists (one entry per child) and, when a weight
    function is supplied, the Fenwick trees over each colour class.
    """

    def __init__(self, spec: FitnessSpec, weight_fn: Callable | None = None):
        self.spec = spec
        self.size = len(spec.alphabet)
        self.weight_fn = weight_fn if weight_fn is not None else DegreeWeight.affine(spec)
        self.colors: list[int] = []
        self.degrees: list[int] = []
        self.parents: list[int] = []
        self.attach: list[int] = []
        self.members: list[list[int]] = [[] for _ in range(self.size)]
        self.position: list[int] = []
        self.endpoints: list[list[int]] = [[] for _ in range(self.size)]
        self.D = np.zeros(self.size, dtype=np.int64)
        self.S = np.zeros(self.size, dtype=np.int64)
        self.trees = [[FenwickTree() for _ in range(self.size)] for _ in range(self.size)]

    @classmethod
    def from_tree(cls, tree: ColoredTree, spec: FitnessSpec, weight_fn=None, upto: int | None = None):
        """Replay the first ``upto`` vertices of ``tree`` (all by default)."""
        state = cls(spec, weight_fn)
        upto = tree.n if upto is None else upto
        state.add_root(int(tree.colors[0]))
        for m in range(1, upto):
            state.attach_vertex(int(tree.colors[m]), int(tree.parents[m]))
        return state

    @property
    def m(self) -> int:
        return len(self.colors)

    def _w(self, k: int, b: int, x: int) -> float:
        return float(self.weight_fn(k, b, x))

    def _append(self, color: int) -> None:
        v = len(self.colors)
        self.colors.append(color)
        self.degrees.append(0)
        self.position.append(len(self.members[color]))
        self.members[color].append(v)
        self.S[color] += 1
        for x in range(self.size):
            self.trees[color][x].append(self._w(0, color, x))

    def add_root(self, color: int) -> None:
        if self.colors:
            raise ValueError("root already present")
        self.parents.append(-1)
        self.attach.append(0)
        self._append(color)

    def attach_vertex(self, color: int, parent: int) -> None:
        """Add a vertex of ``color`` as a child of ``parent``."""
        b = self.colors[parent]
        k = self.degrees[parent]
        self.parents.append(parent)
        self.attach.append(k)
        self.degrees[parent] = k + 1
        self.endpoints[b].append(parent)
        self.D[b] += 1
        pos = self.position[parent]
        for x in range(self.size):
            self.trees[b][x].set(pos, self._w(k + 1, b, x))
        self._append(color)

    def to_tree(self) -> ColoredTree:
        return ColoredTree(self.spec.alphabet, self.colors, self.parents, self.attach)

    # Distributions implied by each sampler's structures.

    def linear_distribution(self, newcomer: int) -> np.ndarray:
        x = newcomer
        g, bt = self.spec.gamma[:, x], self.spec.beta[:, x]
        total = float(np.dot(g, self.D) + np.dot(bt, self.S))
        if total <= 0:
            raise ZeroTotalWeight(f"no vertex can receive colour {x}", step=self.m + 1)
        colors = np.asarray(self.colors)
        p = np.zeros(self.m)
        for b in range(self.size):
            ends = np.bincount(np.asarray(self.endpoints[b], dtype=np.int64), minlength=self.m)
            mask = colors == b
            p[mask] = g[b] * ends[mask] + bt[b]
        return p / total

    def fenwick_distribution(self, newcomer: int) -> np.ndarray:
        x = newcomer
        totals = [self.trees[b][x].total() for b in range(self.size)]
        total = sum(t for t in totals if t > 0)
        if total <= 0:
            raise ZeroTotalWeight(f"no vertex can receive colour {x}", step=self.m + 1)
        p = np.zeros(self.m)
        for b in range(self.size):
            tree = self.trees[b][x]
            for slot, v in enumerate(self.members[b]):
                p[v] = tree[slot]
        return p / total


def attachment_distribution(state: GrowthState, newcomer_color: int, weight=None) -> np.ndarray:
    """Reference attachment law over existing vertices, computed in O(m).

    ``p(i) = w(N(i), (X(i), x)) / sum_j w(N(j), (X(j), x))`` where ``w`` defaults
    to the state's fitness rule.
    """
    w = state.weight_fn if weight is None else weight
    x = newcomer_color
    weights = np.array([float(w(k, b, x)) for k, b in zip(state.degrees, state.colors)])
    total = weights.sum()
    if not total > 0:
        raise ZeroTotalWeight(f"all {state.m} existing vertices have weight 0", step=state.m + 1)
    return weights / total


def linear_step(state: GrowthState, newcomer_color: int, rng: np.random.Generator) -> int:
    """Pick a parent with one uniform using the colour-class decomposition, then attach."""
    x = newcomer_color
    g, bt = state.spec.gamma[:, x], state.spec.beta[:, x]
    class_w = g * state.D + bt * state.S
    total = class_w.sum()
    if total <= 0:
        raise ZeroTotalWeight("all colour classes have weight 0", step=state.m + 1)
    r = rng.random() * total
    b = -1
    for b_ in range(state.size):
        if class_w[b_] <= 0:
            continue
        b = b_
        if r < class_w[b_]:
            break
        r -= class_w[b_]
    gd = g[b] * state.D[b]
    if r < gd or bt[b] <= 0:
        ends = state.endpoints[b]
        chosen = ends[min(int(r / g[b]), len(ends) - 1)]
    else:
        mem = state.members[b]
        chosen = mem[min(int((r - gd) / bt[b]), len(mem) - 1)]
    state.attach_vertex(x, chosen)
    return chosen


def fenwick_step(state: GrowthState, newcomer_color: int, rng: np.random.Generator) -> int:
    """Pick a parent by prefix search in the Fenwick trees for ``newcomer_color``, then attach."""
    x = newcomer_color
    totals = [state.trees[b][x].total() for b in range(state.size)]
    total = sum(t for t in totals if t > 0)
    if total <= 0:
        raise ZeroTotalWeight("all Fenwick trees are empty", step=state.m + 1)
    r = rng.random() * total
    b = -1
    for b_, t in enumerate(totals):
        if t <= 0:
            continue
        b = b_
        if r < t:
            break
        r -= t
    chosen = state.members[b][state.trees[b][x].search(r)]
    state.attach_vertex(x, chosen)
    return chosen


def _check_sampler(sampler: str, weight: DegreeWeight) -> None:
    if sampler not in _KIND:
        raise ValueError(f"unknown sampler {sampler!r}; choose from {SAMPLERS}")
    if sampler == "linear" and not weight.is_affine:
        raise ValueError("the linear sampler needs the affine fitness weights")


def grow(weight, probabilities: np.ndarray, alphabet, n: int, seed: int, sampler: str = "fenwick") -> ColoredTree:
    """Grow one tree with colour law ``probabilities`` and degree weight ``weight``."""
    weight = as_weight(weight)
    _check_sampler(sampler, weight)
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    colors = draw_colors(rng, np.asarray(probabilities), n)
    u = rng.random(max(n - 1, 0))
    parents = np.empty(n, dtype=np.int64)
    attach = np.empty(n, dtype=np.int64)
    if sampler == "linear":
        status = _kernels.grow_linear(colors, u, weight.gamma, weight.beta, parents, attach)
    elif sampler == "fenwick":
        status = _kernels.grow_fenwick(colors, u, *weight.kernel_args(), parents, attach)
    else:
        status = _kernels.grow_naive(colors, u, *weight.kernel_args(), parents, attach)
    if status:
        raise ZeroTotalWeight("total attachment weight is zero", step=int(status) + 1)
    return ColoredTree(alphabet, colors, parents, attach)


def generate(spec: FitnessSpec, mu: ColorLaw, n: int, seed: int, sampler: str = "linear") -> ColoredTree:
    """Grow an ``n``-vertex tree under the fitness rule; reproducible from ``seed``.

    The stream draws all ``n`` colours first, then one uniform per attachment
    step.  Failing steps are reported 1-based in :class:`ZeroTotalWeight`.
    """
    return grow(DegreeWeight.affine(spec), mu.probabilities, spec.alphabet, n, seed, sampler)


@dataclass(frozen=True)
class TreeBatch:
    """``replicas`` trees of equal size stored row-wise."""

    alphabet: object
    colors: np.ndarray
    parents: np.ndarray
    attach: np.ndarray

    def __len__(self) -> int:
        return self.colors.shape[0]

    def tree(self, r: int) -> ColoredTree:
        return ColoredTree(self.alphabet, self.colors[r], self.parents[r], self.attach[r])


def grow_batch(weight, probabilities, alphabet, n: int, replicas: int, seed: int, sampler: str = "fenwick") -> TreeBatch:
    """Grow many small trees from a single stream (colours then uniforms, row-major)."""
    weight = as_weight(weight)
    _check_sampler(sampler, weight)
    rng = make_rng(seed)
    colors = draw_colors(rng, np.asarray(probabilities), (replicas, n))
    u = rng.random((replicas, max(n - 1, 1)))
    parents = np.empty((replicas, n), dtype=np.int64)
    attach = np.empty((replicas, n), dtype=np.int64)
    status = np.zeros(replicas, dtype=np.int64)
    _kernels.grow_batch(_KIND[sampler], colors, u, *weight.kernel_args(), parents, attach, status)
    bad = np.flatnonzero(status)
    if bad.size:
        raise ZeroTotalWeight(f"replica {int(bad[0])}: total attachment weight is zero", step=int(status[bad[0]]) + 1)
    return TreeBatch(alphabet, colors, parents, attach)


def generate_batch(spec: FitnessSpec, mu: ColorLaw, n: int, replicas: int, seed: int, sampler: str = "linear") -> TreeBatch:
    return grow_batch(DegreeWeight.affine(spec), mu.probabilities, spec.alphabet, n, replicas, seed, sampler)
