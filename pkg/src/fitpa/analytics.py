"""Closed-form limits: stationary degree law, rate functions and entropy rates.

All entropic quantities are in nats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedConditional
from .measures import DegreePairMeasure, PathMeasure
from .model import ColorLaw, FitnessSpec

MAX_TERMS = 20_000_000
_BLOCK = 1 << 16


@dataclass(frozen=True)
class ConditionalDegreeLaw:
    """Truncated stationary law ``pi(0..K | a)`` plus the exact mass beyond ``K``.

    ``tails[k] = 1 - sum_{j<=k} pi(j|a) = prod_{i<=k} f(i,a)/(c+f(i,a))``.
    """

    pair: tuple[int, int]
    probs: np.ndarray
    tails: np.ndarray

    @property
    def kmax(self) -> int:
        return self.probs.shape[0] - 1

    @property
    def exact_tail(self) -> float:
        return float(self.tails[-1])


def _tail_products(spec: FitnessSpec, b: int, x: int, tol: float | None, kmax: int | None) -> np.ndarray:
    c = spec.c
    blocks = []
    last = 1.0
    start = 0
    while True:
        stop = start + _BLOCK if kmax is None else kmax + 1
        k = np.arange(start, stop, dtype=float)
        fk = spec.f(k, b, x)
        tails = last * np.cumprod(fk / (c + fk))
        if tol is not None and kmax is None:
            hit = np.flatnonzero(tails <= tol)
            if hit.size:
                blocks.append(tails[: hit[0] + 1])
                break
        blocks.append(tails)
        if kmax is not None or stop >= MAX_TERMS:
            break
        last = tails[-1]
        start = stop
    return np.concatenate(blocks)


def stationary_degree_law(spec: FitnessSpec, a, tol: float | None = 1e-12, kmax: int | None = None) -> ConditionalDegreeLaw:
    """``pi_f(k|a) = c/(c+f(k,a)) prod_{i<k} f(i,a)/(c+f(i,a))``.

    Evaluated through the stable recurrence ``pi(k) = c tail(k-1)/(c+f(k))``,
    ``tail(k) = tail(k-1) f(k)/(c+f(k))``, truncated at the first ``K`` with
    ``tail(K) <= tol`` (or at ``kmax`` when given).  ``a`` is a symbolic pair
    or a pair of alphabet indices.
    """
    if tol is not None and not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    b, x = _pair_indices(spec, a)
    tails = _tail_products(spec, b, x, tol, kmax)
    k = np.arange(tails.shape[0], dtype=float)
    prev = np.concatenate(([1.0], tails[:-1]))
    probs = spec.c * prev / (spec.c + spec.f(k, b, x))
    return ConditionalDegreeLaw((b, x), probs, tails)


def _pair_indices(spec: FitnessSpec, a) -> tuple[int, int]:
    b, x = a
    if isinstance(b, (int, np.integer)) and isinstance(x, (int, np.integer)):
        return int(b), int(x)
    return spec.alphabet.pair_index(a)


def _product_measure(spec, mu, tol, kmax, use_tails: bool) -> DegreePairMeasure:
    size = len(spec.alphabet)
    if kmax is None:
        kmax = max(
            stationary_degree_law(spec, (b, x), tol).kmax for b in range(size) for x in range(size)
        )
    mass = np.zeros((kmax + 1, size, size))
    overflow = np.zeros((size, size))
    pair_law = mu.product()
    for b in range(size):
        for x in range(size):
            law = stationary_degree_law(spec, (b, x), None, kmax)
            if use_tails:
                # mass of the tail law beyond kmax is sum_{k>kmax} tail(k); recover it
                # from the unit total of the tail law.
                mass[:, b, x] = law.tails * pair_law[b, x]
                overflow[b, x] = max(pair_law[b, x] - mass[:, b, x].sum(), 0.0)
            else:
                mass[:, b, x] = law.probs * pair_law[b, x]
                overflow[b, x] = law.exact_tail * pair_law[b, x]
    return DegreePairMeasure(spec.alphabet, mass, overflow)


def stationary_product(spec: FitnessSpec, mu: ColorLaw, tol: float = 1e-12, kmax: int | None = None) -> DegreePairMeasure:
    """``pi_f(k|a) (mu x mu)(a)`` stored up to a common cutoff; the rest goes to overflow."""
    return _product_measure(spec, mu, tol, kmax, use_tails=False)


def attachment_degree_product(spec: FitnessSpec, mu: ColorLaw, tol: float = 1e-12, kmax: int | None = None) -> DegreePairMeasure:
    """Tail law ``(1 - sum_{j<=k} pi_f(j|a)) (mu x mu)(a)``.

    Each vertex of final degree ``d`` is the parent in edge events at degrees
    ``0..d-1``, so the fraction of events at degree ``k`` tends to ``P(D > k)``:
    this is where the degree-and-pair measure of a simulated tree actually
    settles (for colour-symmetric rules).  The tail law sums to one.
    """
    return _product_measure(spec, mu, tol, kmax, use_tails=True)


def tail_operator(omega: DegreePairMeasure, a, k: int) -> float:
    """``1 - sum_{j<=k} omega(j|a)``, clamped to ``[0, 1]``; ``k = -1`` gives 1."""
    b, x = omega.alphabet.pair_index(a) if isinstance(a[0], str) else a
    total = omega.pair_marginal()[b, x]
    if total <= 0:
        raise UndefinedConditional(f"omega has no mass on pair {a}")
    if k < 0:
        return 1.0
    above = omega.mass[k + 1 :, b, x].sum() + omega.overflow[b, x]
    return float(min(max(above / total, 0.0), 1.0))


def relative_entropy(p, m) -> float:
    """``sum_{p>0} p log(p/m)``; ``m`` need not be normalised; ``+inf`` off absolute continuity."""
    p = np.asarray(p, dtype=float)
    m = np.asarray(m, dtype=float)
    support = p > 0
    if np.any(m[support] <= 0):
        return math.inf
    return float(np.sum(p[support] * np.log(p[support] / m[support])))


@dataclass(frozen=True)
class RateValue:
    value: float
    color_term: float
    conditional_term: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def _color_term(omega: DegreePairMeasure, mu: ColorLaw, marginal_mode: str) -> float:
    if marginal_mode == "paper":
        return relative_entropy(omega.target_marginal(), mu.probabilities)
    if marginal_mode == "pair":
        return relative_entropy(omega.pair_marginal().ravel(), mu.product().ravel())
    raise ValueError("marginal_mode must be 'paper' or 'pair'")


def _fitness_grid(spec: FitnessSpec, kmax: int) -> np.ndarray:
    k = np.arange(kmax + 1, dtype=float)[:, None, None]
    return spec.gamma[None] * k + spec.beta[None]


def rate_function_J(omega: DegreePairMeasure, spec: FitnessSpec, mu: ColorLaw, marginal_mode: str = "paper") -> RateValue:
    """``H(colour marginal || mu) + sum_a omega_2(a) H(omega(.|a) || (c/f(.,a)) omega_hat(.|a))``.

    ``marginal_mode='paper'`` compares the parent-colour marginal with ``mu``;
    ``'pair'`` compares the pair marginal with ``mu x mu``.  The conditional
    sum runs over colour pairs, weighted by ``omega_2(a)``.  Since
    ``omega(k|a)/omega_hat(k|a) = omega(k,a) / omega(>k, a)`` the pair weight
    cancels and each stored cell contributes
    ``omega(k,a) log(omega(k,a) f(k,a) / (c omega(>k,a)))``.

    Overflow mass follows the stationary tail shape, for which every term is
    zero.  A finitely supported pair without overflow has ``omega(>k,a) = 0``
    at its last atom, so its rate is ``+inf``.  A cell with ``f(k,a) = 0``
    carrying mass is impossible under the model and also gives ``+inf``.
    """
    color = _color_term(omega, mu, marginal_mode)
    mass = omega.mass
    at_or_above = np.cumsum(mass[::-1], axis=0)[::-1]
    above = np.concatenate((at_or_above[1:], np.zeros((1,) + mass.shape[1:]))) + omega.overflow[None]
    fk = _fitness_grid(spec, omega.kmax)
    support = mass > 0
    if np.any(fk[support] <= 0) or np.any(above[support] <= 0):
        conditional = math.inf
    else:
        m = mass[support]
        conditional = float(np.sum(m * np.log(m * fk[support] / (spec.c * above[support]))))
    return RateValue(color + conditional, color, conditional)


def integrated_conditional(nu: PathMeasure, kmax: int) -> tuple[np.ndarray, np.ndarray]:
    """``int_0^1 nu_t(k|a) dt`` on ``k <= kmax`` for the piecewise-constant path.

    Snapshot ``i`` holds on ``(t_{i-1}, t_i]`` with ``t_0 = 0``.  Pieces whose
    snapshot has no mass on a pair contribute nothing to that pair.  Returns
    the integral and the per-pair total integrated conditional mass
    (overflow included).
    """
    first = nu.checkpoints[0][1]
    size = len(first.alphabet)
    integral = np.zeros((kmax + 1, size, size))
    covered = np.zeros((size, size))
    prev = 0.0
    for t, snap in nu.checkpoints:
        dt = t - prev
        prev = t
        pm = snap.pair_marginal()
        ok = pm > 0
        mass = snap.mass[: kmax + 1]
        cond = np.divide(mass, pm[None], out=np.zeros_like(mass), where=ok[None])
        integral[: cond.shape[0]] += dt * cond
        covered += dt * ok
    return integral, covered


def rate_function_K(
    omega: DegreePairMeasure,
    nu: PathMeasure,
    spec: FitnessSpec,
    mu: ColorLaw,
    marginal_mode: str = "paper",
) -> RateValue:
    """Path-dependent rate: the reference tail is ``(c/f) int_0^1 nu_t(.|a) dt``.

    Raises :class:`UndefinedConditional` when a pair charged by ``omega``
    never carries mass along the path.  Overflow mass of ``omega`` is treated
    as in :func:`rate_function_J` (zero contribution).
    """
    color = _color_term(omega, mu, marginal_mode)
    integral, covered = integrated_conditional(nu, omega.kmax)
    pm = omega.pair_marginal()
    charged = omega.mass.sum(axis=0) > 0
    if np.any(charged & (covered <= 0)):
        b, x = np.argwhere(charged & (covered <= 0))[0]
        sym = omega.alphabet.symbols
        raise UndefinedConditional(f"path never charges pair {(sym[b], sym[x])}")
    fk = _fitness_grid(spec, omega.kmax)
    with np.errstate(divide="ignore"):
        ref = np.where(fk > 0, spec.c / np.where(fk > 0, fk, 1.0), np.inf) * integral
    cond = np.divide(omega.mass, pm[None], out=np.zeros_like(omega.mass), where=pm[None] > 0)
    conditional = _weighted_terms_scaled(omega.mass, cond, ref)
    return RateValue(color + conditional, color, conditional)


def _weighted_terms_scaled(weights: np.ndarray, p: np.ndarray, ref: np.ndarray) -> float:
    support = weights > 0
    r = ref[support]
    if np.any(~(r > 0)) or np.any(np.isinf(r)):
        return math.inf
    return float(np.sum(weights[support] * np.log(p[support] / r)))


@dataclass(frozen=True)
class EntropyRate:
    """Entropy-rate evaluation with a one-sided rigorous truncation bound.

    The exact value lies in ``[value - error_bound, value]``.  ``signed_limit``
    is ``-value``: the limit expression written with the signs of the
    likelihood itself.
    """

    value: float
    error_bound: float
    color_entropy: float
    degree_term: float
    kmax: int

    @property
    def signed_limit(self) -> float:
        return -self.value


def _color_entropy(mu: ColorLaw) -> float:
    p = mu.probabilities
    return float(-np.sum(p * np.log(p))) + 0.0


def entropy_rate(spec: FitnessSpec, mu: ColorLaw, tol: float = 1e-12) -> EntropyRate:
    """``h = -sum mu log mu - sum_a (mu x mu)(a) sum_k pi_f(k|a) log(f(k,a)/c)``.

    The k-sum stops at ``tail(K) <= tol``.  Writing ``L(k) = log(f(k,a)/c)``
    and summing by parts, the remainder is ``tail(K) L(K+1) + S`` with
    ``0 <= S <= tail(K) (c + f(K+2)) / (alpha f(K+1))``, ``alpha = c/gamma(a)``,
    using ``tail(k) <= tail(K) ((c + f(K+1)) / (c + f(k+1)))**alpha``.  The
    first part is added exactly and ``S`` goes into the error bound.
    """
    color = _color_entropy(mu)
    pair_law = mu.product()
    size = len(spec.alphabet)
    degree_sum = 0.0
    bound = 0.0
    kmax = 0
    for b in range(size):
        for x in range(size):
            law = stationary_degree_law(spec, (b, x), tol)
            if spec.beta[b, x] <= 0:
                return EntropyRate(math.inf, 0.0, color, -math.inf, law.kmax)
            K = law.kmax
            kmax = max(kmax, K)
            k = np.arange(K + 1, dtype=float)
            L = np.log(spec.f(k, b, x) / spec.c)
            tK = law.exact_tail
            f1 = spec.f(K + 1, b, x)
            alpha = spec.c / spec.gamma[b, x]
            partial = math.fsum(law.probs * L) + tK * math.log(f1 / spec.c)
            degree_sum += pair_law[b, x] * partial
            bound += pair_law[b, x] * tK * (spec.c + spec.f(K + 2, b, x)) / (alpha * f1)
    return EntropyRate(float(color - degree_sum), float(bound), color, float(-degree_sum), kmax)


def attachment_entropy_rate(spec: FitnessSpec, mu: ColorLaw, tol: float = 1e-12) -> EntropyRate:
    """Limit of ``D_n`` when the degree-and-pair measure follows the tail law.

    ``-sum mu log mu - sum_a (mu x mu)(a) sum_k tail(k|a) log(f(k,a)/c)``,
    which is what ``-(log P + log (n-1)!)/n`` converges to for colour-symmetric
    rules (normaliser ``W_m ~ c m``).  For ``k >= 1`` the summand is
    non-negative and, for ``alpha = c/gamma > 1``, the remainder beyond ``K``
    is at most ``tail(K) u (log(u/c)/(alpha-1) + 1/(alpha-1)**2) / gamma``
    with ``u = c + f(K+1)``, valid once ``u >= c e``.
    """
    color = _color_entropy(mu)
    pair_law = mu.product()
    size = len(spec.alphabet)
    degree_sum = 0.0
    bound = 0.0
    kmax = 0
    for b in range(size):
        for x in range(size):
            g = spec.gamma[b, x]
            alpha = spec.c / g
            if spec.beta[b, x] <= 0 or alpha <= 1:
                return EntropyRate(math.inf, math.inf, color, -math.inf, 0)
            law = stationary_degree_law(spec, (b, x), tol)
            K = law.kmax
            while spec.c + spec.f(K + 1, b, x) < spec.c * math.e:
                K += 1
            if K != law.kmax:
                law = stationary_degree_law(spec, (b, x), None, K)
            kmax = max(kmax, K)
            k = np.arange(K + 1, dtype=float)
            L = np.log(spec.f(k, b, x) / spec.c)
            degree_sum += pair_law[b, x] * math.fsum(law.tails * L)
            u = spec.c + spec.f(K + 1, b, x)
            rem = law.exact_tail * u * (math.log(u / spec.c) / (alpha - 1) + 1 / (alpha - 1) ** 2) / g
            bound += pair_law[b, x] * rem
    # the omitted remainder is non-negative and enters h with a minus sign
    return EntropyRate(float(color - degree_sum), float(bound), color, float(-degree_sum), kmax)


def bits_bound(n: int, h: float) -> float:
    """Bits needed to transmit an ``n``-vertex tree at entropy rate ``h`` nats."""
    if h < 0:
        raise ValueError("h must be non-negative")
    return n * h / math.log(2)
