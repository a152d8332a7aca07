"""Exponential change of measure and importance sampling of rare degree events.

A tilt reweights the colour law to ``mu~(a) = exp(h(a) - U_h) mu(a)`` with
``U_h = log sum_a exp(h(a)) mu(a)`` and replaces the attachment weight by
``exp(g(k, a)) / f(k, a)``, where ``g`` is stored up to ``K_max`` and held
constant beyond.  The base model itself needs ``g = 2 log f`` (unbounded), so
it is reachable only through the explicit identity tilt.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _kernels
from .errors import DegenerateTilt, ImpossibleTree
from .growth import DegreeWeight, TreeBatch, grow, grow_batch
from .measures import DegreePairMeasure, degree_pair_measure
from .model import ColorLaw, FitnessSpec
from .rng import replica_seed
from .tree import ColoredTree


@dataclass(frozen=True, eq=False)
class TiltSpec:
    """``h`` over colours and ``g[k, b, x]`` for ``k <= K_max``."""

    h: np.ndarray
    g: np.ndarray
    identity: bool = False

    def __post_init__(self):
        h = np.asarray(self.h, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if h.ndim != 1 or g.ndim != 3 or g.shape[1:] != (h.shape[0], h.shape[0]):
            raise ValueError("h must have shape (|X|,) and g shape (K_max+1, |X|, |X|)")
        if not (np.all(np.isfinite(h)) and np.all(np.isfinite(g))):
            raise ValueError("tilt entries must be finite")
        if self.identity and np.any(h != 0):
            raise ValueError("the identity tilt has h = 0")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)

    @classmethod
    def identity_for(cls, size: int) -> "TiltSpec":
        return cls(np.zeros(size), np.zeros((1, size, size)), identity=True)

    @classmethod
    def constant(cls, size: int, h=None, g: float = 0.0) -> "TiltSpec":
        h = np.zeros(size) if h is None else h
        return cls(h, np.full((1, size, size), float(g)))

    @property
    def kmax(self) -> int:
        return self.g.shape[0] - 1


@dataclass(frozen=True, eq=False)
class TiltedModel:
    """Tilted colour law, tilted attachment weight and the log-normaliser ``U_h``.

    ``zero_support`` lists ``(k, b, x)`` cells (``k <= K_max``) where ``f = 0``:
    the tilted weight is set to 0 there, so those cells are never reached.
    """

    spec: FitnessSpec
    mu: ColorLaw
    tilt: TiltSpec
    mu_tilde: ColorLaw
    weight: DegreeWeight
    U_h: float
    zero_support: tuple = ()

    @property
    def identity(self) -> bool:
        return self.tilt.identity

    def weight_fn(self, k, b: int, x: int):
        return self.weight(k, b, x)


def build_tilted(spec: FitnessSpec, mu: ColorLaw, tilt: TiltSpec) -> TiltedModel:
    size = len(spec.alphabet)
    if tilt.h.shape[0] != size:
        raise ValueError("tilt and spec use alphabets of different sizes")
    if tilt.identity:
        return TiltedModel(spec, mu, tilt, mu, DegreeWeight.affine(spec), 0.0)
    p = mu.probabilities
    top = float(tilt.h.max())
    U = top + math.log(float(np.sum(np.exp(tilt.h - top) * p)))
    mu_tilde = ColorLaw(spec.alphabet, np.exp(tilt.h - U) * p / np.sum(np.exp(tilt.h - U) * p))
    with np.errstate(over="ignore"):
        table = np.exp(tilt.g)
    if not np.all(np.isfinite(table)):
        raise DegenerateTilt("exp(g) overflows; reduce the tilt")
    k = np.arange(tilt.kmax + 1, dtype=float)[:, None, None]
    fk = spec.gamma[None] * k + spec.beta[None]
    zero = tuple((int(a), int(b), int(c)) for a, b, c in np.argwhere(fk <= 0))
    with np.errstate(divide="ignore"):
        ratio = np.where(fk > 0, table / np.where(fk > 0, fk, 1.0), 0.0)
    if not np.all(np.isfinite(ratio)):
        raise DegenerateTilt("tilted weight exp(g)/f is not finite")
    weight = DegreeWeight(table, spec.gamma, spec.beta, -1)
    return TiltedModel(spec, mu, tilt, mu_tilde, weight, U, zero)


def generate_tilted(model: TiltedModel, n: int, seed: int) -> ColoredTree:
    """Grow under the tilted law with the Fenwick sampler."""
    return grow(model.weight, model.mu_tilde.probabilities, model.spec.alphabet, n, seed, "fenwick")


def _log_prob(colors, parents, log_mu, weight: DegreeWeight) -> tuple[float, int]:
    num, den, status = _kernels.replay_log_attach(colors, parents, *weight.kernel_args())
    if status:
        return -math.inf, int(status) + 1
    return float(log_mu[colors].sum()) + num - den, 0


@dataclass(frozen=True)
class LogRatio:
    """``log P_base(tree) - log P_tilted(tree)``; infinite when one side is impossible."""

    value: float
    base_step: int = 0
    tilted_step: int = 0

    @property
    def possible(self) -> bool:
        return self.base_step == 0 and self.tilted_step == 0

    def __float__(self) -> float:
        return self.value


def log_likelihood_ratio(tree: ColoredTree, spec: FitnessSpec, mu: ColorLaw, model: TiltedModel) -> LogRatio:
    """Exact ``log dP/dP~`` of one tree by replaying it under both models.

    A tree impossible under the tilted law gets ``+inf``, one impossible under
    the base law ``-inf``; the failing 1-based steps are recorded.  A tree
    impossible under both raises :class:`ImpossibleTree`.
    """
    if model.identity:
        return LogRatio(0.0)
    colors = np.ascontiguousarray(tree.colors)
    parents = np.ascontiguousarray(tree.parents)
    base, bstep = _log_prob(colors, parents, np.log(mu.probabilities), DegreeWeight.affine(spec))
    tilted, tstep = _log_prob(colors, parents, np.log(model.mu_tilde.probabilities), model.weight)
    if bstep and tstep:
        raise ImpossibleTree(f"tree is impossible under both laws (steps {bstep}, {tstep})")
    if tstep:
        return LogRatio(math.inf, 0, tstep)
    if bstep:
        return LogRatio(-math.inf, bstep, 0)
    return LogRatio(base - tilted)


def _batch_log_prob(batch: TreeBatch, law: ColorLaw, weight: DegreeWeight) -> np.ndarray:
    reps = len(batch)
    num = np.empty(reps)
    den = np.empty(reps)
    status = np.zeros(reps, dtype=np.int64)
    _kernels.replay_batch(batch.colors, batch.parents, *weight.kernel_args(), num, den, status)
    logp = np.log(law.probabilities)[batch.colors].sum(axis=1) + num - den
    logp[status != 0] = -math.inf
    return logp


def batch_log_ratios(batch: TreeBatch, spec: FitnessSpec, mu: ColorLaw, model: TiltedModel) -> np.ndarray:
    """``log dP/dP~`` for every tree of a batch grown under ``model``."""
    if model.identity:
        return np.zeros(len(batch))
    base = _batch_log_prob(batch, mu, DegreeWeight.affine(spec))
    tilted = _batch_log_prob(batch, model.mu_tilde, model.weight)
    # trees grown under the tilt have tilted probability > 0
    return base - tilted


@dataclass(frozen=True)
class ImportanceEstimate:
    p_hat: float
    std_err: float
    log_rate: float
    replicas: int
    seed: int
    hits: int

    @property
    def degenerate(self) -> bool:
        """True when no replica hit the event."""
        return self.hits == 0


_CHUNK_CELLS = 4_000_000


def importance_estimate(
    event: Callable[[DegreePairMeasure], bool],
    spec: FitnessSpec,
    mu: ColorLaw,
    tilt: TiltSpec | TiltedModel,
    n: int,
    replicas: int,
    seed: int,
    jobs: int = 1,
) -> ImportanceEstimate:
    """Estimate ``P(event(M_X))`` under the base law from trees grown under the tilt.

    ``p_hat`` is the replica mean of ``1{event} exp(log dP/dP~)``, ``std_err``
    its sample standard deviation over ``sqrt(replicas)`` and ``log_rate`` is
    ``log(p_hat)/n`` (``-inf`` when ``p_hat = 0``).  Replicas are grown in
    chunks; chunk ``i`` uses the stream ``replica_seed(seed, i)``, so results
    do not depend on ``jobs``.
    """
    if replicas < 2:
        raise ValueError("importance sampling needs at least two replicas")
    if n < 2:
        raise ValueError("n must be at least 2 for the degree-and-pair measure")
    model = tilt if isinstance(tilt, TiltedModel) else build_tilted(spec, mu, tilt)
    per_chunk = max(1, _CHUNK_CELLS // n)
    bounds = [(lo, min(lo + per_chunk, replicas)) for lo in range(0, replicas, per_chunk)]

    def run(i):
        lo, hi = bounds[i]
        batch = grow_batch(
            model.weight, model.mu_tilde.probabilities, spec.alphabet, n, hi - lo, replica_seed(seed, i), "fenwick"
        )
        ratios = batch_log_ratios(batch, spec, mu, model)
        values = np.zeros(hi - lo)
        for r in range(hi - lo):
            if event(degree_pair_measure(batch.tree(r))):
                values[r] = math.exp(ratios[r]) if ratios[r] > -math.inf else 0.0
        return values

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(run, range(len(bounds))))
    else:
        parts = [run(i) for i in range(len(bounds))]
    values = np.concatenate(parts)
    p_hat = float(values.mean())
    std_err = float(values.std(ddof=1) / math.sqrt(replicas))
    log_rate = math.log(p_hat) / n if p_hat > 0 else -math.inf
    return ImportanceEstimate(p_hat, std_err, log_rate, replicas, seed, int(np.count_nonzero(values)))
