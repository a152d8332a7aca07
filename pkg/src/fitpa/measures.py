"""Empirical degree-and-pair measures, path snapshots and exact log-likelihoods.

The edge created when vertex ``m`` arrives (``m = 2..n`` in 1-based counting,
``n - 1`` events in all) contributes one atom at
``(parent in-degree just before the edge, (parent colour, newcomer colour))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ImpossibleTree, TooSmall, ZeroProbColor
from .model import ColorAlphabet, ColorLaw, ColorPair, FitnessSpec
from .report import table
from .tree import ColoredTree


@dataclass(frozen=True, eq=False)
class DegreePairMeasure:
    """Finite measure on (degree, colour pair).

    ``mass[k, b, x]`` is the mass of degree ``k`` and pair ``(b, x)`` for
    ``k <= kmax``.  ``overflow[b, x]`` optionally holds mass on degrees beyond
    ``kmax`` that is understood to be distributed like the tail of the
    stationary degree law for that pair; it is what lets a finitely stored
    measure stand in for the (infinitely supported) stationary product.
    Empirical measures never carry overflow.
    """

    alphabet: ColorAlphabet
    mass: np.ndarray
    overflow: np.ndarray | None = None

    def __post_init__(self):
        size = len(self.alphabet)
        mass = np.array(self.mass, dtype=float)
        if mass.ndim != 3 or mass.shape[1:] != (size, size):
            raise ValueError(f"mass must have shape (K+1, {size}, {size})")
        overflow = np.zeros((size, size)) if self.overflow is None else np.array(self.overflow, dtype=float)
        if np.any(mass < 0) or np.any(overflow < 0):
            raise ValueError("measure entries must be non-negative")
        mass.flags.writeable = False
        overflow.flags.writeable = False
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "overflow", overflow)

    @classmethod
    def from_cells(cls, alphabet, cells: dict, overflow=None) -> "DegreePairMeasure":
        """Build from ``{(k, (target, newcomer)): mass}`` with symbolic colours."""
        if not isinstance(alphabet, ColorAlphabet):
            alphabet = ColorAlphabet(tuple(alphabet))
        size = len(alphabet)
        kmax = max((k for k, _ in cells), default=0)
        mass = np.zeros((kmax + 1, size, size))
        for (k, pair), v in cells.items():
            b, x = alphabet.pair_index(pair)
            mass[k, b, x] += v
        return cls(alphabet, mass, overflow)

    @property
    def kmax(self) -> int:
        return self.mass.shape[0] - 1

    @property
    def total(self) -> float:
        return float(self.mass.sum() + self.overflow.sum())

    @property
    def has_overflow(self) -> bool:
        return bool(np.any(self.overflow > 0))

    def __getitem__(self, key) -> float:
        k, pair = key
        b, x = self.alphabet.pair_index(pair)
        return float(self.mass[k, b, x]) if 0 <= k <= self.kmax else 0.0

    def pair_marginal(self) -> np.ndarray:
        """``omega_2(a)``: total mass per pair, overflow included."""
        return self.mass.sum(axis=0) + self.overflow

    def target_marginal(self) -> np.ndarray:
        """Colour marginal of the parent (first) slot of the pair marginal."""
        return self.pair_marginal().sum(axis=1)

    def degree_marginal(self) -> np.ndarray:
        return self.mass.sum(axis=(1, 2))

    def items(self) -> Iterator[tuple[int, ColorPair, float]]:
        """Non-zero cells, k ascending then pairs in alphabet order."""
        sym = self.alphabet.symbols
        for k, b, x in zip(*np.nonzero(self.mass)):
            yield int(k), ColorPair(sym[b], sym[x]), float(self.mass[k, b, x])

    def padded(self, kmax: int) -> np.ndarray:
        if kmax < self.kmax:
            raise ValueError("cannot shrink the stored support")
        out = np.zeros((kmax + 1,) + self.mass.shape[1:])
        out[: self.kmax + 1] = self.mass
        return out

    def to_table(self) -> str:
        rows = [(k, a.target, a.newcomer, v) for k, a, v in self.items()]
        if self.has_overflow:
            sym = self.alphabet.symbols
            for b, x in zip(*np.nonzero(self.overflow)):
                rows.append((f">{self.kmax}", sym[b], sym[x], float(self.overflow[b, x])))
        return table(("k", "a1", "a2", "mass[probability]"), rows)


@dataclass(frozen=True)
class PathMeasure:
    checkpoints: tuple[tuple[float, DegreePairMeasure], ...]

    def __post_init__(self):
        times = [t for t, _ in self.checkpoints]
        if any(not 0 < t <= 1 for t in times) or any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError(f"checkpoint times must be strictly increasing in (0, 1]: {times}")

    @property
    def times(self) -> list[float]:
        return [t for t, _ in self.checkpoints]

    def to_table(self) -> str:
        rows = []
        for t, snap in self.checkpoints:
            rows.extend((t, k, a.target, a.newcomer, v) for k, a, v in snap.items())
        return table(("t", "k", "a1", "a2", "mass[probability]"), rows)


def _pair_codes(tree: ColoredTree) -> np.ndarray:
    size = len(tree.alphabet)
    return tree.colors[tree.parents[1:]] * size + tree.colors[1:]


def degree_pair_measure(tree: ColoredTree) -> DegreePairMeasure:
    """Empirical degree-and-pair measure: each of the ``n - 1`` edge events has mass ``1/(n-1)``."""
    n = tree.n
    if n < 2:
        raise TooSmall("the degree-and-pair measure needs at least one edge (n >= 2)")
    size = len(tree.alphabet)
    deg = tree.attach_degree[1:]
    kmax = int(deg.max())
    codes = deg * size * size + _pair_codes(tree)
    counts = np.bincount(codes, minlength=(kmax + 1) * size * size)
    return DegreePairMeasure(tree.alphabet, counts.reshape(kmax + 1, size, size) / (n - 1))


def degrees_at(tree: ColoredTree, m: int) -> np.ndarray:
    """In-degrees of vertices ``0..m-1`` when the ``m``-th vertex (1-based) arrives."""
    return np.bincount(tree.parents[1 : m - 1], minlength=m - 1)


def checkpoint_index(n: int, t: float) -> int:
    return int(math.floor(n * t + 1e-9))


def path_measure(tree: ColoredTree, checkpoint_times: Sequence[float]) -> PathMeasure:
    """Snapshots of the degree law restricted to the newcomer's colour slice.

    At ``m = floor(n t)`` the snapshot puts mass ``1/(m-1)`` at
    ``(N(j), (X(j), X(m)))`` for every earlier vertex ``j``, with ``N(j)`` the
    in-degree when vertex ``m`` arrives.  Pairs whose newcomer colour differs
    from ``X(m)`` get nothing, exactly as the indicator in the definition
    prescribes.  At ``t = 1`` the snapshot is the degree-and-pair measure.
    See :func:`degree_snapshot` for the unrestricted degree law.
    """
    n = tree.n
    size = len(tree.alphabet)
    snaps = []
    for t in checkpoint_times:
        m = checkpoint_index(n, t)
        if m < 2:
            raise TooSmall(f"checkpoint t={t} gives floor(n t) = {m} < 2")
        if t >= 1.0:
            snaps.append((float(t), degree_pair_measure(tree)))
            continue
        deg = degrees_at(tree, m)
        x = int(tree.colors[m - 1])
        kmax = int(deg.max())
        mass = np.zeros((kmax + 1, size, size))
        np.add.at(mass, (deg, tree.colors[: m - 1], x), 1.0 / (m - 1))
        snaps.append((float(t), DegreePairMeasure(tree.alphabet, mass)))
    return PathMeasure(tuple(snaps))


def degree_snapshot(tree: ColoredTree, m: int | None = None) -> np.ndarray:
    """Degree law of all vertices present when vertex ``m`` arrives, by colour.

    Returns an array ``[k, b]`` summing to one; ``m=None`` uses the final tree.
    """
    if m is None:
        deg = tree.in_degrees()
        colors = tree.colors
    else:
        deg = degrees_at(tree, m)
        colors = tree.colors[: m - 1]
    out = np.zeros((int(deg.max()) + 1, len(tree.alphabet)))
    np.add.at(out, (deg, colors), 1.0 / deg.shape[0])
    return out


def log_factorial(n: int) -> float:
    """``log(n!)``; exact summation up to 1000, log-gamma beyond."""
    if n <= 1000:
        return math.fsum(math.log(i) for i in range(2, n + 1))
    return math.lgamma(n + 1)


@dataclass(frozen=True)
class LogLikReport:
    """Sequential log-likelihood of a tree and its three-term split (nats)."""

    n: int
    log_prob: float
    color_term: float
    numerator_term: float
    normalizer_term: float
    stirling_corrected_rate: float

    @property
    def raw_rate(self) -> float:
        """``-(1/n) log P(X)`` without the ``log((n-1)!)`` correction."""
        return -self.log_prob / self.n

    @property
    def log_factorial_term(self) -> float:
        return log_factorial(self.n - 1)


def normalizers(tree: ColoredTree, spec: FitnessSpec) -> np.ndarray:
    """Exact total weight ``W_m`` seen by each arriving vertex ``m = 1..n-1`` (0-based).

    ``W_m = sum_b gamma(b, x) D_b + beta(b, x) S_b`` with ``D_b`` the number of
    earlier edges into colour-``b`` vertices and ``S_b`` the number of earlier
    colour-``b`` vertices; both are integers, so no rounding accumulates.
    """
    n = tree.n
    x = tree.colors[1:]
    parent_colors = tree.colors[tree.parents[1:]]
    W = np.zeros(n - 1)
    for b in range(len(tree.alphabet)):
        S = np.cumsum(tree.colors[:-1] == b)
        D = np.concatenate(([0], np.cumsum(parent_colors[:-1] == b)))
        W += spec.gamma[b, x] * D + spec.beta[b, x] * S
    return W


def log_likelihood(tree: ColoredTree, spec: FitnessSpec, mu: ColorLaw) -> LogLikReport:
    """``log P(X)`` replayed step by step under the fitness rule."""
    if tree.alphabet != spec.alphabet or mu.alphabet != spec.alphabet:
        raise ValueError("tree, spec and colour law must share one alphabet")
    p = mu.probabilities[tree.colors]
    if np.any(p <= 0):
        raise ZeroProbColor("a vertex colour has probability zero")
    color_term = float(np.log(p).sum())
    n = tree.n
    if n == 1:
        return LogLikReport(1, color_term, color_term, 0.0, 0.0, -color_term)
    b = tree.colors[tree.parents[1:]]
    x = tree.colors[1:]
    chosen = spec.gamma[b, x] * tree.attach_degree[1:] + spec.beta[b, x]
    W = normalizers(tree, spec)
    if np.any(chosen <= 0) or np.any(W <= 0):
        step = int(np.flatnonzero((chosen <= 0) | (W <= 0))[0]) + 2
        raise ImpossibleTree(f"attachment at step m={step} has probability zero")
    numerator = float(np.log(chosen).sum())
    normalizer = -float(np.log(W).sum())
    log_prob = color_term + numerator + normalizer
    rate = -(log_prob + log_factorial(n - 1)) / n
    return LogLikReport(n, log_prob, color_term, numerator, normalizer, rate)


def empirical_entropy_rate(tree: ColoredTree, spec: FitnessSpec, mu: ColorLaw) -> float:
    """``D_n = -(log P(X) + log((n-1)!)) / n``."""
    if tree.n < 2:
        raise TooSmall("entropy rate needs n >= 2")
    return log_likelihood(tree, spec, mu).stirling_corrected_rate
