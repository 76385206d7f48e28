"""Retrieval dynamics for classical, polynomial and exponential interactions.

All three update rules decide neuron i from the stored-pattern overlaps
m_mu = <xi^mu, sigma>, which the network state caches and patches
incrementally:

  classical    h_i = sum_mu xi_i^mu m_mu                  (sign rule, exact int)
  degree-n     h_i = sum_mu xi_i^mu m_mu^(n-1)            (exact wide integer)
  exponential  D_i = 2 sinh(1) sum_mu s_mu exp(m_mu - s_mu),  s_mu = sigma_i xi_i^mu

The classical field keeps the j = i self-term (it is the full double sum
over stored couplings). The degree-n field equals N^(n-1) times the
Hebbian tensor contraction; the positive factor never changes the sign,
which is the contract. The exponential rule is the interaction-function
difference F(x) = e^x applied around neuron i, rewritten so that only
integer exponents appear; signs are evaluated with the maximum exponent
subtracted, and exact cancellation is detected by grouping equal
exponents, so no finite N can overflow and ties are exact.

New spins are +1 on a positive quantity and -1 on a negative one. A tie
(exactly zero) follows the model's tie policy: "keep" leaves the neuron
unchanged, "plus_one" sets +1. Ties are counted on the evolved state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import mpmath
import numpy as np

from .patterns import Pattern, PatternStore
from .seeding import derive_seed

__all__ = [
    "CLASSICAL",
    "POLYNOMIAL",
    "EXPONENTIAL",
    "KEEP_CURRENT",
    "PLUS_ONE",
    "ModelSpec",
    "NetworkState",
    "UpdateDecision",
    "classical_local_field",
    "polynomial_local_field",
    "exp_delta_energy_sign",
    "exp_signal_noise_logs",
    "decide_update",
    "synchronous_step",
    "asynchronous_pass",
    "FixedPointResult",
    "run_to_fixed_point",
]

CLASSICAL = "classical"
POLYNOMIAL = "polynomial"
EXPONENTIAL = "exponential"
_KINDS = (CLASSICAL, POLYNOMIAL, EXPONENTIAL)

KEEP_CURRENT = "keep"
PLUS_ONE = "plus_one"
_TIE_POLICIES = (KEEP_CURRENT, PLUS_ONE)

_COSH1 = math.cosh(1.0)
_SINH1 = math.sinh(1.0)
_LOG_2SINH1 = math.log(2.0 * _SINH1)

# int64 is safe for the fast polynomial path as long as M * N^(n-1) stays
# below this; larger instances fall back to exact Python integers.
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class ModelSpec:
    """Which interaction drives the dynamics, plus the tie-breaking policy."""

    kind: str
    degree: int = 2
    tie_policy: str = KEEP_CURRENT

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}, expected one of {_KINDS}")
        if self.kind == POLYNOMIAL and self.degree < 2:
            raise ValueError(f"polynomial degree must be >= 2, got {self.degree}")
        if self.tie_policy not in _TIE_POLICIES:
            raise ValueError(f"unknown tie policy {self.tie_policy!r}")

    @classmethod
    def classical(cls, tie_policy: str = KEEP_CURRENT) -> "ModelSpec":
        return cls(CLASSICAL, tie_policy=tie_policy)

    @classmethod
    def polynomial(cls, degree: int, tie_policy: str = KEEP_CURRENT) -> "ModelSpec":
        return cls(POLYNOMIAL, degree=degree, tie_policy=tie_policy)

    @classmethod
    def exponential(cls, tie_policy: str = KEEP_CURRENT) -> "ModelSpec":
        return cls(EXPONENTIAL, tie_policy=tie_policy)


@dataclass(frozen=True)
class UpdateDecision:
    """Outcome of evaluating one neuron against the current configuration.

    ``delta_sign`` is the exact sign (+1/0/-1) of the model's local
    quantity. For the exponential model with a designated reference
    pattern, ``signal_log``/``noise_log`` carry log magnitudes of the
    reference term and of the remaining-pattern sum (-inf for an empty
    sum, None when not applicable).
    """

    neuron: int
    new_value: int
    delta_sign: int
    signal_log: float | None = None
    noise_log: float | None = None


class NetworkState:
    """Current configuration sigma plus cached overlaps with every stored pattern.

    Single-writer: dynamics operations return evolved copies and never
    mutate their input. The overlap cache is patched exactly (integer
    arithmetic) on every spin flip.
    """

    __slots__ = ("store", "_sigma", "_overlaps", "tie_count", "reference_index")

    def __init__(
        self,
        store: PatternStore,
        sigma_signs: np.ndarray,
        overlaps: np.ndarray,
        tie_count: int = 0,
        reference_index: int | None = None,
    ):
        self.store = store
        self._sigma = sigma_signs
        self._overlaps = overlaps
        self.tie_count = tie_count
        self.reference_index = reference_index

    @classmethod
    def from_pattern(
        cls,
        store: PatternStore,
        pattern: Pattern,
        reference_index: int | None = None,
    ) -> "NetworkState":
        if pattern.n_neurons != store.n_neurons:
            raise ValueError("configuration length does not match the store")
        if reference_index is not None and not 0 <= reference_index < store.n_patterns:
            raise IndexError(f"reference index {reference_index} out of range")
        overlaps = store.overlaps_with(pattern)
        return cls(store, pattern.signs.copy(), overlaps, 0, reference_index)

    @property
    def n_neurons(self) -> int:
        return self.store.n_neurons

    @property
    def sigma(self) -> Pattern:
        return Pattern.from_signs(self._sigma)

    @property
    def sigma_signs(self) -> np.ndarray:
        view = self._sigma.view()
        view.setflags(write=False)
        return view

    @property
    def overlaps(self) -> np.ndarray:
        view = self._overlaps.view()
        view.setflags(write=False)
        return view

    def copy(self) -> "NetworkState":
        return NetworkState(
            self.store,
            self._sigma.copy(),
            self._overlaps.copy(),
            self.tie_count,
            self.reference_index,
        )

    def _flip(self, i: int) -> None:
        new_value = -int(self._sigma[i])
        self._sigma[i] = new_value
        self._overlaps += 2 * new_value * self.store.bit_column(i).astype(np.int64)

    def check_consistency(self) -> None:
        """Recompute all overlaps from scratch and compare with the cache."""
        expected = self.store.signs.astype(np.int64) @ self._sigma.astype(np.int64)
        if not np.array_equal(expected, self._overlaps):
            raise AssertionError("overlap cache is out of sync with the configuration")
        if ((self._overlaps - self.n_neurons) % 2).any():
            raise AssertionError("overlap parity violated")


def _sign_of(v) -> int:
    return (v > 0) - (v < 0)


def classical_local_field(state: NetworkState, i: int) -> int:
    """h_i = sum_j J_ij sigma_j with J_ij = sum_mu xi_i^mu xi_j^mu.

    Evaluated through the overlap cache as sum_mu xi_i^mu m_mu; includes
    the j = i self-term. Exact integer.
    """
    col = state.store.bit_column(i).astype(np.int64)
    return int(col @ state._overlaps)


def polynomial_local_field(state: NetworkState, i: int, degree: int) -> int:
    """sum_mu xi_i^mu m_mu^(n-1): N^(n-1) times the degree-n tensor rule.

    Exact for any size: int64 when the magnitude bound M * N^(n-1) fits,
    arbitrary-precision Python integers otherwise.
    """
    if degree < 2:
        raise ValueError(f"degree must be >= 2, got {degree}")
    col = state.store.bit_column(i)
    o = state._overlaps
    if state.store.n_patterns * state.n_neurons ** (degree - 1) < _INT64_SAFE:
        return int(col.astype(np.int64) @ (o ** (degree - 1)))
    return sum(int(c) * int(m) ** (degree - 1) for c, m in zip(col, o))


def _signed_exp_sum(exponents: np.ndarray, weights: np.ndarray) -> tuple[int, float]:
    """Exact sign and log magnitude of sum_k w_k * exp(e_k), integer w_k, e_k.

    Equal exponents are grouped into net integer coefficients, so exact
    cancellations are detected structurally (exp of distinct integers is
    linearly independent over the rationals). The remaining sum is
    evaluated with the maximum exponent factored out; if the float64
    result falls inside its rounding-error bound, precision escalates
    through mpmath until the sign is certain.
    """
    if exponents.size == 0:
        return 0, -math.inf
    e_min = int(exponents.min())
    net = np.bincount(
        (exponents - e_min).astype(np.int64), weights=weights.astype(np.float64)
    )
    nz = np.nonzero(net)[0]
    if nz.size == 0:
        return 0, -math.inf
    coef = net[nz]
    k_abs = nz + e_min
    k_max = int(k_abs.max())
    rel = (k_abs - k_max).astype(np.float64)
    scaled = np.exp(rel)
    total = float(coef @ scaled)
    mass = float(np.abs(coef) @ scaled)
    guard = mass * (nz.size + 8) * 2.0**-50
    if abs(total) > guard:
        return _sign_of(total), k_max + math.log(abs(total))

    # Rare near-cancellation: escalate precision until the sign is certain.
    prec = 128
    while True:
        with mpmath.workprec(prec):
            terms = [mpmath.mpf(int(c)) * mpmath.exp(int(r)) for c, r in zip(coef, k_abs - k_max)]
            total_mp = mpmath.fsum(terms)
            mass_mp = mpmath.fsum(abs(t) for t in terms)
            err = mass_mp * mpmath.mpf(2.0) ** (-prec + 16)
            if abs(total_mp) > err or prec >= 4096:
                if total_mp == 0:
                    return 0, -math.inf
                return _sign_of(total_mp), k_max + float(mpmath.log(abs(total_mp)))
        prec *= 2


def exp_delta_energy_sign(state: NetworkState, i: int) -> tuple[int, float]:
    """Sign and log magnitude of the exponential-interaction energy gap at i.

    D_i = sum_mu [exp(s_mu + c_mu) - exp(-s_mu + c_mu)]
        = 2 sinh(1) sum_mu s_mu exp(m_mu - s_mu)

    with s_mu = sigma_i xi_i^mu and c_mu the field excluding neuron i.
    Positive means neuron i keeps its spin, negative means it flips.
    The returned log magnitude is -inf exactly when the sum cancels.
    """
    if not 0 <= i < state.n_neurons:
        raise IndexError(f"neuron index {i} out of range")
    s = (int(state._sigma[i]) * state.store.bit_column(i)).astype(np.int64)
    exponents = state._overlaps - s
    sign, log_raw = _signed_exp_sum(exponents, s)
    if sign == 0:
        return 0, -math.inf
    return sign, _LOG_2SINH1 + log_raw


def _exp_signal_noise_at(state: NetworkState, i: int, reference: int) -> tuple[float, float]:
    """Log magnitudes of the reference-pattern term and of the rest at neuron i."""
    s = (int(state._sigma[i]) * state.store.bit_column(i)).astype(np.int64)
    m_ref = int(state._overlaps[reference])
    s_ref = int(s[reference])
    signal_log = _LOG_2SINH1 + (m_ref - s_ref)
    mask = np.arange(state.store.n_patterns) != reference
    _, noise_raw = _signed_exp_sum(state._overlaps[mask] - s[mask], s[mask])
    noise_log = -math.inf if noise_raw == -math.inf else _LOG_2SINH1 + noise_raw
    return signal_log, noise_log


def exp_signal_noise_logs(state: NetworkState, reference: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-neuron log |signal| and log |noise| against a reference pattern.

    The signal is the reference pattern's term of the exponential energy
    gap, log |E_sig,i| = log(2 sinh 1) + m_ref - sigma_i xi_i^ref, exact
    in log space. The noise is the sum over all other patterns, evaluated
    with the maximum exponent factored out; an empty sum gives -inf.
    """
    if not 0 <= reference < state.store.n_patterns:
        raise IndexError(f"reference index {reference} out of range")
    sigma = state._sigma.astype(np.float64)
    m_ref = int(state._overlaps[reference])
    s_ref = state._sigma * state.store.signs[reference]
    signal_logs = _LOG_2SINH1 + (m_ref - s_ref.astype(np.float64))

    mask = np.arange(state.store.n_patterns) != reference
    if not mask.any():
        return signal_logs, np.full(state.n_neurons, -math.inf)
    o = state._overlaps[mask]
    m_shift = int(o.max())
    w = np.exp((o - m_shift).astype(np.float64))
    w_total = float(w.sum())
    u = sigma * (state.store.signs[mask].T.astype(np.float64) @ w)
    noise_raw = _COSH1 * u - _SINH1 * w_total
    with np.errstate(divide="ignore"):
        noise_logs = np.where(
            noise_raw == 0.0,
            -math.inf,
            _LOG_2SINH1 + m_shift + np.log(np.abs(noise_raw)),
        )
    return signal_logs, noise_logs


def decide_update(state: NetworkState, i: int, model: ModelSpec) -> UpdateDecision:
    """Evaluate neuron i under the model; pure, does not touch the state.

    ``delta_sign`` is the sign of the quantity whose positivity forces the
    new spin to +1: the local field for the classical and polynomial
    rules, and sigma_i times the energy-gap sign for the exponential rule
    (a positive gap keeps the current spin, a negative one flips it).
    """
    if not 0 <= i < state.n_neurons:
        raise IndexError(f"neuron index {i} out of range")
    signal_log = noise_log = None
    if model.kind == CLASSICAL:
        sign = _sign_of(classical_local_field(state, i))
    elif model.kind == POLYNOMIAL:
        sign = _sign_of(polynomial_local_field(state, i, model.degree))
    else:
        gap_sign, _ = exp_delta_energy_sign(state, i)
        sign = gap_sign * int(state._sigma[i])
        if state.reference_index is not None:
            signal_log, noise_log = _exp_signal_noise_at(state, i, state.reference_index)
    if sign > 0:
        new_value = 1
    elif sign < 0:
        new_value = -1
    else:
        new_value = int(state._sigma[i]) if model.tie_policy == KEEP_CURRENT else 1
    return UpdateDecision(i, new_value, sign, signal_log, noise_log)


def _batch_signs(state: NetworkState, model: ModelSpec) -> np.ndarray:
    """Decision signs (+1/0/-1) for every neuron from the current config.

    Sign-aligned with the new spin: positive forces +1. Exact, including
    ties: integer arithmetic for classical/polynomial fields; for the
    exponential rule the guarded float64 fast path defers any sum that
    falls inside its rounding-error bound to the exact per-neuron
    evaluator.
    """
    o = state._overlaps
    signs_matrix = state.store.signs
    if model.kind in (CLASSICAL, POLYNOMIAL):
        power = 1 if model.kind == CLASSICAL else model.degree - 1
        if state.store.n_patterns * state.n_neurons**power < _INT64_SAFE:
            fields = signs_matrix.T.astype(np.int64) @ (o**power)
            return np.sign(fields).astype(np.int8)
        return np.array(
            [
                _sign_of(polynomial_local_field(state, i, power + 1))
                for i in range(state.n_neurons)
            ],
            dtype=np.int8,
        )

    # exponential: shifted-exponent accumulation, one matvec for all neurons
    m_shift = int(o.max())
    w = np.exp((o - m_shift).astype(np.float64))
    w_total = float(w.sum())
    u = state._sigma.astype(np.float64) * (signs_matrix.T.astype(np.float64) @ w)
    t = _COSH1 * u - _SINH1 * w_total
    guard = math.e * w_total * (state.store.n_patterns + 8) * 2.0**-50
    gap_signs = np.where(t > guard, 1, np.where(t < -guard, -1, 0)).astype(np.int8)
    for i in np.nonzero(np.abs(t) <= guard)[0]:
        gap_signs[i], _ = exp_delta_energy_sign(state, int(i))
    # a positive gap keeps the current spin, so align with sigma
    return gap_signs * state._sigma


def _apply_tie_policy(
    decision_signs: np.ndarray, current: np.ndarray, tie_policy: str
) -> np.ndarray:
    if tie_policy == KEEP_CURRENT:
        tie_values = current
    else:
        tie_values = np.ones_like(current)
    return np.where(
        decision_signs > 0, 1, np.where(decision_signs < 0, -1, tie_values)
    ).astype(np.int8)


def synchronous_step(state: NetworkState, model: ModelSpec) -> tuple[NetworkState, int]:
    """One parallel update: every neuron decided from the pre-step configuration.

    Returns the evolved state (fresh overlap cache, accumulated tie count)
    and the number of flipped neurons.
    """
    spin_signs = _batch_signs(state, model)
    desired = _apply_tie_policy(spin_signs, state._sigma, model.tie_policy)
    n_changed = int((desired != state._sigma).sum())
    ties = int((spin_signs == 0).sum())
    new_state = NetworkState.from_pattern(
        state.store, Pattern.from_signs(desired), state.reference_index
    )
    new_state.tie_count = state.tie_count + ties
    return new_state, n_changed


def asynchronous_pass(
    state: NetworkState,
    model: ModelSpec,
    order: Sequence[int] | None = None,
    seed: int | None = None,
) -> tuple[NetworkState, int]:
    """One sweep of single-neuron updates, each seeing the partially updated state.

    ``order`` gives an explicit visiting order; with ``seed`` set a random
    permutation is drawn instead; default is sequential 0..N-1. Overlaps
    are patched incrementally on every flip.
    """
    if order is not None and seed is not None:
        raise ValueError("pass either an explicit order or a seed, not both")
    if seed is not None:
        order = np.random.default_rng(seed).permutation(state.n_neurons)
    elif order is None:
        order = range(state.n_neurons)
    new_state = state.copy()
    n_changed = 0
    for i in order:
        i = int(i)
        decision = decide_update(new_state, i, model)
        if decision.delta_sign == 0:
            new_state.tie_count += 1
        if decision.new_value != int(new_state._sigma[i]):
            new_state._flip(i)
            n_changed += 1
    return new_state, n_changed


class FixedPointResult(NamedTuple):
    state: NetworkState
    passes_used: int
    converged: bool
    reason: str


def run_to_fixed_point(
    state: NetworkState,
    model: ModelSpec,
    scheduler: str = "synchronous",
    max_passes: int = 100,
    seed: int | None = None,
) -> FixedPointResult:
    """Iterate passes until no neuron flips, a cycle appears, or the cap hits.

    Schedulers: "synchronous" (parallel steps, with period-2 cycle
    detection), "sequential" (in-order single-neuron sweeps) or
    "random_permutation" (seeded fresh permutation per pass).
    """
    if max_passes < 1:
        raise ValueError("max_passes must be at least 1")
    if scheduler not in ("synchronous", "sequential", "random_permutation"):
        raise ValueError(f"unknown scheduler {scheduler!r}")
    if scheduler == "random_permutation" and seed is None:
        raise ValueError("random_permutation scheduling needs a seed")
    previous_signs: np.ndarray | None = None
    current = state
    for p in range(1, max_passes + 1):
        if scheduler == "synchronous":
            nxt, n_changed = synchronous_step(current, model)
        elif scheduler == "sequential":
            nxt, n_changed = asynchronous_pass(current, model)
        else:
            nxt, n_changed = asynchronous_pass(
                current, model, seed=derive_seed(seed, "pass-order", p)
            )
        if n_changed == 0:
            return FixedPointResult(nxt, p, True, "fixed_point")
        if scheduler == "synchronous" and previous_signs is not None:
            if np.array_equal(nxt._sigma, previous_signs):
                return FixedPointResult(nxt, p, False, "cycle")
        previous_signs = current._sigma
        current = nxt
    return FixedPointResult(current, max_passes, False, "max_passes")
