"""Estimator-style interface so the memory composes with sklearn tooling."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .dynamics import (
    ModelSpec,
    NetworkState,
    asynchronous_pass,
    run_to_fixed_point,
    synchronous_step,
)
from .patterns import Pattern, PatternStore
from .seeding import derive_seed


class DenseAssociativeMemory(TransformerMixin, BaseEstimator):
    """Associative memory with selectable interaction function.

    ``fit`` stores the rows of X as +/-1 patterns (Hebbian storage: the
    dynamics only ever read pattern/configuration overlaps). ``predict``
    runs the retrieval dynamics from each query row and returns the
    resulting configurations; ``transform`` is an alias, so the estimator
    drops into sklearn pipelines as a denoising step.

    Parameters
    ----------
    interaction : {"exponential", "polynomial", "classical"}
        Which local update rule drives retrieval.
    degree : int
        Interaction degree for the polynomial rule (>= 2; ignored
        otherwise).
    tie_policy : {"keep", "plus_one"}
        What a neuron does when its local quantity is exactly zero.
    scheduler : {"sync_one_step", "async_one_pass", "to_fixed_point"}
        One parallel update, one sequential pass, or synchronous
        iteration until convergence (capped at ``max_passes``).
    max_passes : int
        Iteration cap for the "to_fixed_point" scheduler.
    pass_seed : int
        Seed for the random update order of "async_one_pass".

    Attributes
    ----------
    store_ : PatternStore
        The fitted patterns.
    n_features_in_ : int
        Number of neurons N.
    """

    def __init__(
        self,
        interaction: str = "exponential",
        degree: int = 3,
        tie_policy: str = "keep",
        scheduler: str = "sync_one_step",
        max_passes: int = 100,
        pass_seed: int = 0,
    ):
        self.interaction = interaction
        self.degree = degree
        self.tie_policy = tie_policy
        self.scheduler = scheduler
        self.max_passes = max_passes
        self.pass_seed = pass_seed

    def _model(self) -> ModelSpec:
        return ModelSpec(self.interaction, degree=self.degree, tie_policy=self.tie_policy)

    def _validate_bipolar(self, X) -> np.ndarray:
        arr = check_array(X, dtype="numeric", ensure_2d=True)
        if not np.isin(arr, (-1, 1)).all():
            raise ValueError("X must contain only -1 and +1 entries")
        return arr.astype(np.int8)

    def fit(self, X, y=None):
        """Store the rows of X (shape (n_patterns, n_neurons), entries +/-1)."""
        self._model()  # validate hyperparameters early
        if self.scheduler not in ("sync_one_step", "async_one_pass", "to_fixed_point"):
            raise ValueError(f"unknown scheduler {self.scheduler!r}")
        arr = self._validate_bipolar(X)
        self.store_ = PatternStore.from_signs(arr)
        self.n_features_in_ = arr.shape[1]
        return self

    def predict(self, X) -> np.ndarray:
        """Retrieve from each query row; returns int8 +/-1 configurations."""
        check_is_fitted(self, "store_")
        arr = self._validate_bipolar(X)
        if arr.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {arr.shape[1]} features, but the memory was fitted "
                f"with {self.n_features_in_}"
            )
        model = self._model()
        out = np.empty_like(arr)
        for k, row in enumerate(arr):
            state = NetworkState.from_pattern(self.store_, Pattern.from_signs(row))
            if self.scheduler == "sync_one_step":
                final, _ = synchronous_step(state, model)
            elif self.scheduler == "async_one_pass":
                final, _ = asynchronous_pass(
                    state, model, seed=derive_seed(self.pass_seed, "row-order", k)
                )
            else:
                final = run_to_fixed_point(
                    state, model, scheduler="synchronous", max_passes=self.max_passes
                ).state
            out[k] = final.sigma_signs
        return out

    def transform(self, X) -> np.ndarray:
        return self.predict(X)

    def score(self, X, y) -> float:
        """Fraction of rows retrieved exactly: predict(X) compared to y."""
        target = self._validate_bipolar(y)
        retrieved = self.predict(X)
        if target.shape != retrieved.shape:
            raise ValueError("y must have the same shape as X")
        return float((retrieved == target).all(axis=1).mean())
