"""Colour alphabet, colour law and the linear fitness attachment rule.

The attachment weight of an existing vertex with in-degree ``k`` under colour
pair ``a = (target, newcomer)`` is ``f(k, a) = gamma(a) * k + beta(a)`` with
``gamma(a) + beta(a) = c`` for every pair.  Pair-indexed tables are stored as
``(|X|, |X|)`` arrays indexed ``[target, newcomer]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .errors import InvalidColorLaw, ModelError, NonConstantSum, NonPositiveSlope

SUM_TOLERANCE = 1e-9


class ColorPair(NamedTuple):
    target: str
    newcomer: str


@dataclass(frozen=True)
class ColorAlphabet:
    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(str(s) for s in self.symbols)
        if not symbols:
            raise ModelError("alphabet must contain at least one colour")
        if len(set(symbols)) != len(symbols):
            raise ModelError(f"duplicate colour symbols in {symbols}")
        for s in symbols:
            if not s or any(ch.isspace() or ch == "," for ch in s):
                raise ModelError(f"colour symbol {s!r} must be non-empty without spaces or commas")
        object.__setattr__(self, "symbols", symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self.symbols.index(symbol)
        except ValueError:
            raise ModelError(f"unknown colour {symbol!r}; alphabet is {self.symbols}") from None

    def pairs(self) -> list[ColorPair]:
        """All pairs in deterministic (target, newcomer) alphabet order."""
        return [ColorPair(b, x) for b in self.symbols for x in self.symbols]

    def pair_index(self, pair) -> tuple[int, int]:
        b, x = pair
        return self.index(b), self.index(x)


def _as_alphabet(alphabet) -> ColorAlphabet:
    if isinstance(alphabet, ColorAlphabet):
        return alphabet
    return ColorAlphabet(tuple(alphabet))


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ColorLaw:
    alphabet: ColorAlphabet
    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.shape != (len(self.alphabet),):
            raise InvalidColorLaw(f"expected {len(self.alphabet)} probabilities, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0) or np.any(p > 1):
            raise InvalidColorLaw(f"colour probabilities must lie in (0, 1]: {p.tolist()}")
        if abs(p.sum() - 1.0) > 1e-12:
            raise InvalidColorLaw(f"colour probabilities sum to {p.sum()!r}, not 1")
        object.__setattr__(self, "probabilities", _readonly(p))

    @classmethod
    def from_weights(cls, alphabet, weights) -> "ColorLaw":
        """Normalise positive weights (sequence or mapping symbol -> weight)."""
        alphabet = _as_alphabet(alphabet)
        if isinstance(weights, Mapping):
            missing = set(alphabet.symbols) - set(weights)
            if missing:
                raise InvalidColorLaw(f"no weight given for colours {sorted(missing)}")
            extra = set(weights) - set(alphabet.symbols)
            if extra:
                raise InvalidColorLaw(f"weights given for undeclared colours {sorted(extra)}")
            w = np.array([float(weights[s]) for s in alphabet.symbols])
        else:
            w = np.asarray(weights, dtype=float)
        if w.shape != (len(alphabet),) or np.any(w <= 0) or not np.all(np.isfinite(w)):
            raise InvalidColorLaw(f"colour weights must be {len(alphabet)} positive numbers")
        return cls(alphabet, w / w.sum())

    @classmethod
    def uniform(cls, alphabet) -> "ColorLaw":
        alphabet = _as_alphabet(alphabet)
        return cls(alphabet, np.full(len(alphabet), 1.0 / len(alphabet)))

    def __getitem__(self, symbol: str) -> float:
        return float(self.probabilities[self.alphabet.index(symbol)])

    def product(self) -> np.ndarray:
        """The pair law mu (x) mu as an ``(|X|, |X|)`` array."""
        return np.outer(self.probabilities, self.probabilities)


@dataclass(frozen=True)
class FitnessSpec:
    """Linear attachment rule; build with :func:`build_fitness_spec`."""

    alphabet: ColorAlphabet
    gamma: np.ndarray
    beta: np.ndarray
    c: float

    def f(self, k, target: int, newcomer: int):
        """Attachment weight with integer colour indices; vectorised over ``k``."""
        return self.gamma[target, newcomer] * k + self.beta[target, newcomer]

    def weight(self, k, b: int, x: int):
        return self.f(k, b, x)

    def __call__(self, k, b: int, x: int):
        return self.f(k, b, x)


def _pair_table(values, alphabet: ColorAlphabet, name: str) -> np.ndarray:
    size = len(alphabet)
    if isinstance(values, Mapping):
        table = np.full((size, size), np.nan)
        for key, v in values.items():
            i, j = alphabet.pair_index(key)
            table[i, j] = float(v)
        if np.isnan(table).any():
            missing = [p for p in alphabet.pairs() if np.isnan(table[alphabet.pair_index(p)])]
            raise ModelError(f"{name} does not cover pairs {missing}")
        return table
    table = np.asarray(values, dtype=float)
    if table.ndim == 0:
        return np.full((size, size), float(table))
    if table.shape != (size, size):
        raise ModelError(f"{name} must be a {size}x{size} table, got shape {table.shape}")
    return table


def build_fitness_spec(gamma, beta, alphabet: ColorAlphabet | Sequence[str] | None = None) -> FitnessSpec:
    """Validate slope/intercept tables and derive the common constant ``c``.

    ``gamma`` and ``beta`` are either mappings ``(target, newcomer) -> value``
    covering every pair, scalars, or ``(|X|, |X|)`` tables indexed
    ``[target, newcomer]``.  When ``alphabet`` is omitted it is read off the
    mapping keys in first-seen order.

    ``c`` is taken from the first pair.  Pairs within ``SUM_TOLERANCE`` of it
    are accepted and their intercept is reset to ``c - gamma`` so the stored
    tables satisfy ``gamma + beta == c`` to rounding.
    """
    if alphabet is None:
        if not isinstance(gamma, Mapping):
            raise ModelError("alphabet is required unless gamma is a pair mapping")
        seen: list[str] = []
        for b, x in gamma:
            for s in (b, x):
                if s not in seen:
                    seen.append(s)
        alphabet = seen
    alphabet = _as_alphabet(alphabet)
    g = _pair_table(gamma, alphabet, "gamma")
    bt = _pair_table(beta, alphabet, "beta")
    if not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise NonPositiveSlope(f"every gamma(a) must be a positive real, got {g.tolist()}")
    if not np.all(np.isfinite(bt)) or np.any(bt < 0):
        raise ModelError(f"every beta(a) must be a non-negative real, got {bt.tolist()}")
    c = float(g[0, 0] + bt[0, 0])
    sums = g + bt
    bad = np.abs(sums - c) > SUM_TOLERANCE
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        raise NonConstantSum(
            f"gamma+beta = {sums[i, j]!r} for pair {alphabet.symbols[i], alphabet.symbols[j]}"
            f" differs from c = {c!r}"
        )
    bt = np.maximum(c - g, 0.0)
    return FitnessSpec(alphabet, _readonly(g), _readonly(bt), c)


def fitness(spec: FitnessSpec, k, a) -> float:
    """``f(k, a) = gamma(a) * k + beta(a)`` for a symbolic colour pair."""
    i, j = spec.alphabet.pair_index(a)
    return spec.f(k, i, j)


@dataclass(frozen=True)
class WeakPreferenceReport:
    satisfied: bool
    min_gamma: float
    reason: str


def check_weak_preference(spec: FitnessSpec) -> WeakPreferenceReport:
    """Check that sum_k 1/f(k, a) diverges for every pair.

    For a linear rule 1/(gamma*k + beta) >= 1/(c*(k+1)) whenever gamma <= c,
    so the series dominates a multiple of the harmonic series.
    """
    min_gamma = float(spec.gamma.min())
    return WeakPreferenceReport(
        satisfied=True,
        min_gamma=min_gamma,
        reason=(
            "linear rule: 1/(gamma k + beta) >= 1/(c (k + 1)) with gamma <= c, "
            f"so the series diverges by comparison with the harmonic series (min gamma = {min_gamma!r})"
        ),
    )
