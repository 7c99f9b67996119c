"""Classical single-imputation baselines: column means and an iterative
least-squares chained-regression scheme (a deliberately small stand-in for
full MICE).

Both expose fit/transform so the strict evaluation mode can fit on training
rows and apply to held-out rows; fitting on a dataset also yields its own
completion, which is the plain single-dataset imputation path.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .nn import Array
from .data import Dataset, IncompleteDataset

MICE_LITE_SWEEPS = 5
RIDGE_LAMBDA = 1e-6     # damping on the normal equations for collinear columns


def _column_means(inc: IncompleteDataset) -> Array:
    obs_counts = inc.mask.sum(axis=0)
    empty = np.flatnonzero(obs_counts == 0)
    if empty.size:
        names = [inc.dataset.schema[j].name for j in empty]
        raise ValueError(f"columns with no observed values cannot be imputed: {names}")
    return (inc.dataset.features * inc.mask).sum(axis=0) / obs_counts


class MeanImputer:
    """Fill each missing cell with its column's observed mean."""

    def __init__(self):
        self.means_: Array | None = None
        self.completed_: Array | None = None

    def fit(self, inc: IncompleteDataset) -> "MeanImputer":
        self.means_ = _column_means(inc)
        self.completed_ = self._fill(inc)
        return self

    def transform(self, inc: IncompleteDataset) -> Array:
        if self.means_ is None:
            raise ValueError("imputer is not fitted")
        return self._fill(inc)

    def _fill(self, inc: IncompleteDataset) -> Array:
        x = inc.dataset.features.copy()
        miss = inc.mask == 0
        x[miss] = np.broadcast_to(self.means_, x.shape)[miss]
        return x


class MiceLiteImputer:
    """Chained linear regressions: initialize missing cells with column
    means, then repeatedly re-regress each column on all the others over the
    rows where it is observed, overwriting its missing cells with the
    (ridge-damped, [0,1]-clamped) predictions.

    transform() replays the fitted per-sweep regressions on new rows.
    """

    def __init__(self, sweeps: int = MICE_LITE_SWEEPS, ridge: float = RIDGE_LAMBDA):
        if sweeps < 1:
            raise ValueError(f"need at least 1 sweep, got {sweeps}")
        self.sweeps = sweeps
        self.ridge = ridge
        self.means_: Array | None = None
        self.betas_: list[list[Array]] | None = None   # [sweep][column] -> (d,) coefs + intercept
        self.completed_: Array | None = None

    def fit(self, inc: IncompleteDataset) -> "MiceLiteImputer":
        self.means_ = _column_means(inc)
        x = inc.dataset.features.copy()
        mask = inc.mask
        d = x.shape[1]
        miss = mask == 0
        x[miss] = np.broadcast_to(self.means_, x.shape)[miss]

        self.betas_ = []
        for _ in range(self.sweeps):
            sweep_betas = []
            for j in range(d):
                others = [k for k in range(d) if k != j]
                obs = mask[:, j] == 1
                beta = self._fit_column(x[obs][:, others], x[obs, j])
                sweep_betas.append(beta)
                rows = np.flatnonzero(~obs)
                if rows.size:
                    x[rows, j] = self._predict(beta, x[rows][:, others])
            self.betas_.append(sweep_betas)
        self.completed_ = x
        return self

    def transform(self, inc: IncompleteDataset) -> Array:
        if self.betas_ is None:
            raise ValueError("imputer is not fitted")
        x = inc.dataset.features.copy()
        mask = inc.mask
        d = x.shape[1]
        miss = mask == 0
        x[miss] = np.broadcast_to(self.means_, x.shape)[miss]
        for sweep_betas in self.betas_:
            for j in range(d):
                others = [k for k in range(d) if k != j]
                rows = np.flatnonzero(mask[:, j] == 0)
                if rows.size:
                    x[rows, j] = self._predict(sweep_betas[j], x[rows][:, others])
        return x

    def _fit_column(self, a: Array, y: Array) -> Array:
        # least squares with intercept; tiny ridge keeps collinear columns solvable
        z = np.column_stack([a, np.ones(a.shape[0])])
        gram = z.T @ z + self.ridge * np.eye(z.shape[1])
        return np.linalg.solve(gram, z.T @ y)

    def _predict(self, beta: Array, a: Array) -> Array:
        pred = a @ beta[:-1] + beta[-1]
        return np.clip(pred, 0.0, 1.0)


def baseline_mean_impute(incomplete: IncompleteDataset) -> Dataset:
    """Completed dataset with missing cells replaced by column means."""
    completed = MeanImputer().fit(incomplete).completed_
    return replace(incomplete.dataset, features=completed)


def baseline_mice_lite(incomplete: IncompleteDataset, sweeps: int = MICE_LITE_SWEEPS,
                       rng=None) -> Dataset:
    """Completed dataset from the chained-regression sweeps.

    rng is accepted for interface uniformity with the other imputers; the
    sweep itself is deterministic.
    """
    completed = MiceLiteImputer(sweeps=sweeps).fit(incomplete).completed_
    return replace(incomplete.dataset, features=completed)
