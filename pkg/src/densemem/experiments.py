"""Deterministic Monte Carlo harness for capacity and basin measurements.

A trial generates a fresh pattern store, corrupts the target pattern on a
Hamming sphere, runs the configured scheduler and compares the outcome
bit-exactly against the uncorrupted target. Every random draw derives
from (master seed, point index, trial index), so sweeps are reproducible
and independent of worker count.

Results stream to CSV with the fixed header::

    model,n,N,M,alpha,rho,n_flips,scheduler,trials,successes,wilson_low,
    wilson_high,mean_residual_fraction,alpha_star,seed

where alpha = log(M-1)/N inverts the load convention M = exp(alpha N)+1,
and the alpha_star column carries the point's theoretical overlay: the
one-step retrieval threshold I(1-2 rho)/2 for the exponential model, the
closed-form pattern budget N^(n-1)/(c_n log N) for the polynomial model
and N/(2 log N) for the classical one.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator

import numpy as np

from . import theory
from .dynamics import (
    EXPONENTIAL,
    POLYNOMIAL,
    ModelSpec,
    NetworkState,
    asynchronous_pass,
    exp_signal_noise_logs,
    run_to_fixed_point,
    synchronous_step,
)
from .patterns import corrupt_on_sphere, generate_patterns
from .seeding import derive_seed

__all__ = [
    "SCHEDULERS",
    "TrialSpec",
    "TrialResult",
    "SweepPoint",
    "SweepResult",
    "TrialProfile",
    "run_trial",
    "run_sweep",
    "iter_sweep",
    "error_fraction_experiment",
    "signal_noise_profile",
    "wilson_interval",
    "CSV_HEADER",
    "results_to_csv",
    "sweep_manifest",
]

SYNC_ONE_STEP = "sync_one_step"
ASYNC_ONE_PASS = "async_one_pass"
TO_FIXED_POINT = "to_fixed_point"
SCHEDULERS = (SYNC_ONE_STEP, ASYNC_ONE_PASS, TO_FIXED_POINT)

ALL_PATTERNS = "all"

# magnitude comparisons in log space tolerate last-ulp noise only
_AUDIT_LOG_TOL = 1e-9

_WILSON_Z = 1.959963984540054  # two-sided 95%

CSV_HEADER = (
    "model,n,N,M,alpha,rho,n_flips,scheduler,trials,successes,"
    "wilson_low,wilson_high,mean_residual_fraction,alpha_star,seed"
)


@dataclass(frozen=True)
class TrialSpec:
    """One retrieval trial: store M patterns, corrupt the target, recover."""

    model: ModelSpec
    n_neurons: int
    n_patterns: int
    n_flips: int
    seed: int
    scheduler: str = SYNC_ONE_STEP
    max_passes: int = 100
    target: int | str = 0

    def __post_init__(self):
        if self.n_patterns < 1:
            raise ValueError("n_patterns must be at least 1")
        if not 0 <= self.n_flips <= self.n_neurons:
            raise ValueError("n_flips must lie in [0, n_neurons]")
        if self.scheduler not in SCHEDULERS:
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        if self.target != ALL_PATTERNS and not 0 <= int(self.target) < self.n_patterns:
            raise ValueError(f"target pattern {self.target} out of range")


@dataclass
class TrialResult:
    """Outcome of one trial; equal results from equal specs (wall time excluded)."""

    success: bool
    n_wrong_bits_after: int
    ties_seen: int
    signal_magnitude_log: float | None = None
    noise_magnitude_log: float | None = None
    audit_violations: int | None = None
    wall_time: float = field(default=0.0, compare=False)


def _run_scheduler(spec: TrialSpec, state: NetworkState) -> NetworkState:
    if spec.scheduler == SYNC_ONE_STEP:
        final, _ = synchronous_step(state, spec.model)
    elif spec.scheduler == ASYNC_ONE_PASS:
        order_seed = derive_seed(spec.seed, "order", state.reference_index or 0)
        final, _ = asynchronous_pass(state, spec.model, seed=order_seed)
    else:
        final = run_to_fixed_point(
            state, spec.model, scheduler="synchronous", max_passes=spec.max_passes
        ).state
    return final


def run_trial(spec: TrialSpec) -> TrialResult:
    """Execute one seeded retrieval trial; a pure function of its TrialSpec.

    For the exponential model under the one-step scheduler the per-neuron
    signal/noise magnitudes are recorded from the pre-update
    configuration, and every recovery failure is audited against the
    necessary condition |noise| >= |signal|.
    """
    t0 = time.perf_counter()
    store = generate_patterns(
        spec.n_neurons, spec.n_patterns, derive_seed(spec.seed, "patterns", 0)
    )
    targets = (
        range(spec.n_patterns) if spec.target == ALL_PATTERNS else [int(spec.target)]
    )
    wrong_total = 0
    ties_total = 0
    signal_log: float | None = None
    noise_log: float | None = None
    audit_violations: int | None = None
    audited = spec.model.kind == EXPONENTIAL and spec.scheduler == SYNC_ONE_STEP
    if audited:
        audit_violations = 0
    for mu in targets:
        corrupted = corrupt_on_sphere(
            store[mu], spec.n_flips, derive_seed(spec.seed, "corruption", mu)
        )
        state = NetworkState.from_pattern(store, corrupted, reference_index=mu)
        if audited:
            sig_logs, noise_logs = exp_signal_noise_logs(state, mu)
            weakest_signal = float(sig_logs.min())
            loudest_noise = float(noise_logs.max())
            signal_log = weakest_signal if signal_log is None else min(signal_log, weakest_signal)
            noise_log = loudest_noise if noise_log is None else max(noise_log, loudest_noise)
        final = _run_scheduler(spec, state)
        wrong = np.nonzero(final.sigma_signs != store.signs[mu])[0]
        wrong_total += wrong.size
        ties_total += final.tie_count
        if audited and wrong.size:
            audit_violations += int(
                (noise_logs[wrong] < sig_logs[wrong] - _AUDIT_LOG_TOL).sum()
            )
    return TrialResult(
        success=(wrong_total == 0),
        n_wrong_bits_after=wrong_total,
        ties_seen=ties_total,
        signal_magnitude_log=signal_log,
        noise_magnitude_log=noise_log,
        audit_violations=audit_violations,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class SweepPoint:
    """One grid point of a sweep; load given directly as M or as alpha.

    When ``alpha`` is used, M = round(exp(alpha N)) + 1. Corruption is
    given as ``n_flips`` or as ``rho`` (rounded down to floor(rho N); the
    actually used rho is reported).
    """

    model_kind: str = EXPONENTIAL
    degree: int = 3
    tie_policy: str = "keep"
    n_neurons: int = 40
    n_patterns: int | None = None
    alpha: float | None = None
    n_flips: int | None = None
    rho: float | None = None
    scheduler: str = SYNC_ONE_STEP
    max_passes: int = 100
    target: int | str = 0

    def model(self) -> ModelSpec:
        return ModelSpec(self.model_kind, degree=self.degree, tie_policy=self.tie_policy)

    def resolved_patterns(self) -> int:
        if self.n_patterns is not None:
            if self.alpha is not None:
                raise ValueError("give n_patterns or alpha, not both")
            return self.n_patterns
        if self.alpha is None:
            raise ValueError("a sweep point needs n_patterns or alpha")
        return int(round(math.exp(self.alpha * self.n_neurons))) + 1

    def resolved_flips(self) -> int:
        if self.n_flips is not None:
            if self.rho is not None:
                raise ValueError("give n_flips or rho, not both")
            return self.n_flips
        if self.rho is None:
            return 0
        if not 0.0 <= self.rho < 0.5:
            raise ValueError(f"rho must lie in [0, 1/2), got {self.rho}")
        return int(math.floor(self.rho * self.n_neurons))


@dataclass(frozen=True)
class SweepResult:
    """Aggregated estimate for one grid point, with a 95% Wilson interval."""

    model_kind: str
    degree: int | None
    n_neurons: int
    n_patterns: int
    alpha: float
    rho: float
    n_flips: int
    scheduler: str
    n_trials: int
    n_success: int
    wilson_low: float
    wilson_high: float
    mean_residual_fraction: float
    theory_overlay: float | None
    master_seed: int

    def csv_row(self) -> str:
        cells = [
            self.model_kind,
            "" if self.degree is None else str(self.degree),
            str(self.n_neurons),
            str(self.n_patterns),
            _fmt_float(self.alpha),
            _fmt_float(self.rho),
            str(self.n_flips),
            self.scheduler,
            str(self.n_trials),
            str(self.n_success),
            _fmt_float(self.wilson_low),
            _fmt_float(self.wilson_high),
            _fmt_float(self.mean_residual_fraction),
            "" if self.theory_overlay is None else _fmt_float(self.theory_overlay),
            str(self.master_seed),
        ]
        return ",".join(cells)


def _fmt_float(v: float) -> str:
    # repr round-trips float64 exactly, so CSV re-ingestion is lossless
    return repr(float(v))


def wilson_interval(successes: int, trials: int, z: float = _WILSON_Z) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = (p + z * z / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denom
    # the exact endpoints are 0 and 1 at the extremes; avoid sqrt roundoff
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


def _theory_overlay(point: SweepPoint, rho_actual: float) -> float | None:
    if point.model_kind == EXPONENTIAL:
        if 0.0 <= rho_actual < 0.5:
            return theory.alpha_star(rho_actual)
        return None
    if point.n_neurons < 2:
        return None
    degree = point.degree if point.model_kind == POLYNOMIAL else 2
    return theory.polynomial_capacity(
        point.n_neurons, degree, theory.capacity_constant(degree)
    )


def _trial_specs(point: SweepPoint, n_trials: int, master_seed: int, point_index: int):
    m = point.resolved_patterns()
    flips = point.resolved_flips()
    point_seed = derive_seed(master_seed, "sweep-point", point_index)
    return [
        TrialSpec(
            model=point.model(),
            n_neurons=point.n_neurons,
            n_patterns=m,
            n_flips=flips,
            seed=derive_seed(point_seed, "trial", t),
            scheduler=point.scheduler,
            max_passes=point.max_passes,
            target=point.target,
        )
        for t in range(n_trials)
    ]


def _aggregate(
    point: SweepPoint,
    specs: list[TrialSpec],
    results: list[TrialResult],
    master_seed: int,
) -> SweepResult:
    m = specs[0].n_patterns
    flips = specs[0].n_flips
    n = point.n_neurons
    rho_actual = flips / n
    alpha_actual = math.log(m - 1) / n if m > 1 else -math.inf
    n_success = sum(r.success for r in results)
    lo, hi = wilson_interval(n_success, len(results))
    n_targets = m if point.target == ALL_PATTERNS else 1
    mean_residual = float(
        np.mean([r.n_wrong_bits_after / (n * n_targets) for r in results])
    )
    return SweepResult(
        model_kind=point.model_kind,
        degree=point.degree if point.model_kind == POLYNOMIAL else None,
        n_neurons=n,
        n_patterns=m,
        alpha=alpha_actual,
        rho=rho_actual,
        n_flips=flips,
        scheduler=point.scheduler,
        n_trials=len(results),
        n_success=n_success,
        wilson_low=lo,
        wilson_high=hi,
        mean_residual_fraction=mean_residual,
        theory_overlay=_theory_overlay(point, rho_actual),
        master_seed=master_seed,
    )


def iter_sweep(
    points: Iterable[SweepPoint],
    n_trials: int,
    master_seed: int,
    parallelism: int = 1,
) -> Iterator[SweepResult]:
    """Yield one aggregated SweepResult per grid point, in grid order.

    Trials are independent tasks; with parallelism > 1 they are fanned out
    to worker processes. Results are keyed by (point, trial) index, so the
    output never depends on worker count or completion order.
    """
    points = list(points)
    if not points:
        raise ValueError("sweep grid is empty")
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if parallelism < 1:
        raise ValueError("parallelism must be at least 1")
    if parallelism == 1:
        for p_idx, point in enumerate(points):
            specs = _trial_specs(point, n_trials, master_seed, p_idx)
            results = [run_trial(s) for s in specs]
            yield _aggregate(point, specs, results, master_seed)
        return
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        for p_idx, point in enumerate(points):
            specs = _trial_specs(point, n_trials, master_seed, p_idx)
            chunk = max(1, len(specs) // (parallelism * 4))
            results = list(pool.map(run_trial, specs, chunksize=chunk))
            yield _aggregate(point, specs, results, master_seed)


def run_sweep(
    points: Iterable[SweepPoint],
    n_trials: int,
    master_seed: int,
    parallelism: int = 1,
) -> list[SweepResult]:
    return list(iter_sweep(points, n_trials, master_seed, parallelism))


def error_fraction_experiment(
    points: Iterable[SweepPoint],
    n_trials: int,
    master_seed: int,
    parallelism: int = 1,
) -> list[SweepResult]:
    """Tolerated-errors regime: iterate to a fixed point and report the
    mean residual wrong-bit fraction instead of all-or-nothing success."""
    forced = [replace(p, scheduler=TO_FIXED_POINT) for p in points]
    return run_sweep(forced, n_trials, master_seed, parallelism)


@dataclass(frozen=True)
class TrialProfile:
    """Per-neuron signal/noise magnitudes for one exponential-model trial."""

    n_neurons: int
    n_flips: int
    signal_logs: np.ndarray
    noise_logs: np.ndarray
    wrong_neurons: np.ndarray
    dominated_neurons: np.ndarray


def signal_noise_profile(spec: TrialSpec) -> TrialProfile:
    """Record log|signal| and log|noise| at every neuron for one trial.

    Checks the per-trial lower bound log|signal| >= N(1-2 rho) +
    log(1 - e^-2) before returning. Exponential model only.
    """
    if spec.model.kind != EXPONENTIAL:
        raise ValueError("signal/noise profiling applies to the exponential model only")
    if spec.target == ALL_PATTERNS:
        raise ValueError("profiling needs a single designated target pattern")
    mu = int(spec.target)
    store = generate_patterns(
        spec.n_neurons, spec.n_patterns, derive_seed(spec.seed, "patterns", 0)
    )
    corrupted = corrupt_on_sphere(
        store[mu], spec.n_flips, derive_seed(spec.seed, "corruption", mu)
    )
    state = NetworkState.from_pattern(store, corrupted, reference_index=mu)
    sig_logs, noise_logs = exp_signal_noise_logs(state, mu)
    bound = (spec.n_neurons - 2 * spec.n_flips) + math.log1p(-math.exp(-2.0))
    if (sig_logs < bound - _AUDIT_LOG_TOL).any():
        raise AssertionError(
            f"signal magnitude fell below its guaranteed floor {bound}"
        )
    final = _run_scheduler(spec, state)
    wrong = np.nonzero(final.sigma_signs != store.signs[mu])[0]
    dominated = np.nonzero(noise_logs >= sig_logs - _AUDIT_LOG_TOL)[0]
    return TrialProfile(
        n_neurons=spec.n_neurons,
        n_flips=spec.n_flips,
        signal_logs=sig_logs,
        noise_logs=noise_logs,
        wrong_neurons=wrong,
        dominated_neurons=dominated,
    )


def results_to_csv(results: Iterable[SweepResult]) -> str:
    lines = [CSV_HEADER]
    lines.extend(r.csv_row() for r in results)
    return "\n".join(lines) + "\n"


def sweep_manifest(config: dict, master_seed: int, parallelism: int) -> str:
    """JSON provenance record written alongside sweep CSV output."""
    from . import __version__

    return json.dumps(
        {
            "artifact": "densemem",
            "version": __version__,
            "master_seed": master_seed,
            "parallelism": parallelism,
            "csv_header": CSV_HEADER,
            "config": config,
        },
        indent=2,
        sort_keys=True,
    )
