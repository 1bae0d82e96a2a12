"""Exact Gaussian process regression with posterior tempering.

The predictive at a test point x* is Gaussian with

    mean     = k*^T (K + sigma_eps^2 I)^{-1} y
    variance = k** - k*^T (K + sigma_eps^2 I)^{-1} k* + sigma_eps^2

and tempering at temperature T leaves the mean alone while multiplying the
variance by T.  Tempering is therefore a post-processing step on the
predictive, which is what makes the temperature sweep cheap: the posterior
is computed once per model and re-tempered per grid point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .data import LabeledDataset
from .exceptions import (
    EmptyInputError,
    LengthMismatchError,
    NonPositiveTemperatureError,
    ZeroVarianceError,
)
from .kernels import KernelSpec, gram, gram_diag
from .linalg import SpdFactor, cholesky
from .records import SweepRecord, SweepResult, select_best

_LOG_2PI = float(np.log(2.0 * np.pi))

# Default sweep grid: 40 log-spaced temperatures covering 1e-2 .. 1e2.
DEFAULT_TEMPERATURE_GRID = tuple(float(t) for t in np.logspace(-2.0, 2.0, 40))


@dataclass(frozen=True)
class RegressionModel:
    """Kernel plus observation noise standard deviation."""

    kernel: KernelSpec
    noise_std: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.noise_std) and self.noise_std >= 0.0):
            raise ValueError(f"noise_std must be finite and >= 0, got {self.noise_std!r}")


@dataclass(frozen=True)
class PredictiveGaussian:
    """Marginal predictive distribution at one test input."""

    mean: float
    variance: float

    def __post_init__(self):
        if not np.isfinite(self.mean):
            raise ValueError("predictive mean must be finite")
        if not (np.isfinite(self.variance) and self.variance >= 0.0):
            raise ValueError(f"predictive variance must be finite and >= 0, got {self.variance!r}")


class ConditionedRegression:
    """A regression model conditioned on a training set.

    Holds the factored noisy Gram matrix so repeated prediction (and the
    temperature sweep) pay for one Cholesky only.
    """

    def __init__(self, model: RegressionModel, train: LabeledDataset):
        if train.is_classification:
            raise ValueError("regression requires real-valued targets")
        ktt = gram(model.kernel, train.inputs, train.inputs)
        noisy = ktt + model.noise_std**2 * np.eye(train.n)
        self.model = model
        self.train = train
        self.factor: SpdFactor = cholesky(noisy)
        # alpha = (K + sigma^2 I)^{-1} y via two triangular solves
        tmp = solve_triangular(self.factor.lower, train.targets, lower=True, check_finite=False)
        self._alpha = solve_triangular(
            self.factor.lower, tmp, lower=True, trans="T", check_finite=False
        )

    def predict(self, test_inputs) -> list[PredictiveGaussian]:
        test_inputs = np.asarray(test_inputs, dtype=np.float64)
        ks = gram(self.model.kernel, test_inputs, self.train.inputs)  # (p, n)
        means = ks @ self._alpha
        v = solve_triangular(self.factor.lower, ks.T, lower=True, check_finite=False)
        schur = gram_diag(self.model.kernel, test_inputs) - np.einsum("ij,ij->j", v, v)
        # FP cancellation can leave a tiny negative Schur complement
        np.clip(schur, 0.0, None, out=schur)
        var = schur + self.model.noise_std**2
        return [PredictiveGaussian(float(m), float(s)) for m, s in zip(means, var)]


def condition(model: RegressionModel, train: LabeledDataset) -> ConditionedRegression:
    return ConditionedRegression(model, train)


def posterior_predict(model: RegressionModel, train: LabeledDataset, test_inputs) -> list[PredictiveGaussian]:
    """Exact GP posterior predictive at each test input."""
    return condition(model, train).predict(test_inputs)


def temper_predictive(pred: PredictiveGaussian, t: float) -> PredictiveGaussian:
    """Temper a Gaussian predictive: mean kept, variance multiplied by t."""
    t = float(t)
    if not (np.isfinite(t) and t > 0.0):
        raise NonPositiveTemperatureError(f"temperature must be positive and finite, got {t!r}")
    return PredictiveGaussian(pred.mean, pred.variance * t)


def gaussian_test_nll(preds: list[PredictiveGaussian], targets) -> float:
    """Average Gaussian negative log likelihood of targets under predictions."""
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim != 1 or len(preds) != targets.shape[0]:
        raise LengthMismatchError(
            f"{len(preds)} predictions vs {targets.shape} targets"
        )
    if len(preds) == 0:
        raise EmptyInputError("need at least one prediction")
    mu = np.array([p.mean for p in preds])
    var = np.array([p.variance for p in preds])
    if np.any(var <= 0.0):
        raise ZeroVarianceError("test NLL undefined for non-positive predictive variance")
    nll = 0.5 * (np.log(2.0 * np.pi * var) + (targets - mu) ** 2 / var)
    return float(np.mean(nll))


def regression_temperature_sweep(
    model: RegressionModel,
    train: LabeledDataset,
    test: LabeledDataset,
    temperatures=DEFAULT_TEMPERATURE_GRID,
    seed: int | None = None,
) -> SweepResult:
    """Evaluate tempered test NLL across a temperature grid.

    The posterior is conditioned once; each grid point only rescales the
    predictive variances.  Records carry metric ``test_nll``; the result's
    best_temperature is the NLL argmin with ties broken toward the smaller
    temperature.
    """
    temps = [float(t) for t in temperatures]
    if not temps:
        raise EmptyInputError("temperature grid is empty")
    for t in temps:
        if not (np.isfinite(t) and t > 0.0):
            raise NonPositiveTemperatureError(f"temperatures must be positive, got {t!r}")
    if seed is None:
        seed = int(train.provenance.get("seed", 0))
    fit = condition(model, train)
    base = fit.predict(test.inputs)
    records = []
    for t in temps:
        tempered = [temper_predictive(p, t) for p in base]
        nll = gaussian_test_nll(tempered, test.targets)
        records.append(SweepRecord(temperature=t, metrics={"test_nll": nll}, seed=seed))
    best = select_best(records, "test_nll", minimize=True)
    return SweepResult(
        records=records,
        best_temperature=best,
        diagnostics={"jitter_used": fit.factor.jitter_used},
    )
