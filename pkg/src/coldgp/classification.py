"""Tempered latent-Gaussian classification via elliptical slice sampling.

The model: per-class latent functions with independent GP priors whose
covariance is the temperature-scaled Gram matrix t * K(X, X); a softmax
likelihood raised to the power 1/t ties the latents to the labels.  Neither
factor is conjugate, so the latent posterior is explored with elliptical
slice sampling (ESS), which needs only prior draws and log-likelihood
evaluations and has no step-size parameter.

Prediction: given a sampled training latent matrix F, the test latent for
class c is Gaussian with mean k*^T K^{-1} F_c (temperature-free, because t
cancels between the scaled cross-covariance and the scaled inverse) and
variance t * (k** - k*^T K^{-1} k*).  Class probabilities average softmax
draws over both the posterior samples and this conditional.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .data import LabeledDataset
from .exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    LabelOutOfRangeError,
    LengthMismatchError,
    NonFiniteLikelihoodError,
    NonPositiveTemperatureError,
)
from .kernels import KernelSpec, gram, gram_diag
from .linalg import SpdFactor, cholesky
from .records import SweepRecord, SweepResult, select_best
from .rng import RngStream, derive_seed

PROB_FLOOR = 1e-12
_MAX_BRACKET_SHRINKS = 10_000


@dataclass(frozen=True)
class EssConfig:
    """Chain layout for the latent sampler.

    Total retained samples = n_chains * n_samples_per_chain; each chain runs
    burn_in discarded transitions and then keeps every thinning-th state.
    """

    n_chains: int = 4
    burn_in: int = 1000
    n_samples_per_chain: int = 500
    thinning: int = 5

    def __post_init__(self):
        if self.n_chains < 1:
            raise ValueError("n_chains must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.n_samples_per_chain < 1:
            raise ValueError("n_samples_per_chain must be >= 1")
        if self.thinning < 1:
            raise ValueError("thinning must be >= 1")


@dataclass(frozen=True)
class LatentState:
    """Latent matrix (n_train, class_count) with its cached log-likelihood."""

    latent: np.ndarray
    log_likelihood: float


@dataclass(frozen=True)
class LatentSampleSet:
    """Retained posterior samples plus everything needed to replay the run.

    ``samples`` is ordered by (chain index, sample index).  ``stats`` carries
    sampler diagnostics: transition counts, proposals per transition, and the
    jitter used when factoring the scaled prior.
    """

    samples: list
    temperature: float
    kernel: KernelSpec
    train_inputs: np.ndarray
    train_labels: np.ndarray
    config: EssConfig
    seed: int
    stats: dict = field(default_factory=dict)

    @property
    def n_train(self) -> int:
        return self.train_inputs.shape[0]

    @property
    def class_count(self) -> int:
        return self.samples[0].shape[1]


def tempered_log_likelihood(latent, labels, t: float) -> float:
    """Log of the softmax likelihood raised to 1/t.

    (1/t) * sum_i [ latent[i, labels[i]] - logsumexp(latent[i, :]) ].
    """
    t = float(t)
    if not (np.isfinite(t) and t > 0.0):
        raise NonPositiveTemperatureError(f"temperature must be positive, got {t!r}")
    f = np.asarray(latent, dtype=np.float64)
    if f.ndim != 2:
        raise DimensionMismatchError(f"latent must be (n, class_count), got shape {f.shape}")
    n, c = f.shape
    if n < 1 or c < 2:
        raise EmptyInputError(f"latent needs n >= 1 rows and >= 2 classes, got {f.shape}")
    y = np.asarray(labels)
    if y.ndim != 1 or y.shape[0] != n:
        raise LengthMismatchError(f"labels shape {y.shape} does not match {n} rows")
    if not np.issubdtype(y.dtype, np.integer):
        raise LabelOutOfRangeError("labels must be integers")
    if y.min() < 0 or y.max() >= c:
        raise LabelOutOfRangeError(f"labels outside [0, {c})")
    m = f.max(axis=1)
    lse = m + np.log(np.sum(np.exp(f - m[:, None]), axis=1))
    return float(np.sum(f[np.arange(n), y] - lse) / t)


def _ess_step(f, ll, log_lik, prior_lower, rng: RngStream):
    """One slice-sampling transition on the ellipse through f and a prior draw.

    Returns (new latent, its log-likelihood, proposals consumed).  The slice
    always contains the current state (threshold is ll + log u with u < 1 and
    the proposal at angle 0 is f itself), so bracket shrinkage terminates.
    """
    if np.isnan(ll):
        raise NonFiniteLikelihoodError("current state has NaN log-likelihood")
    nu = prior_lower @ rng.standard_normal(f.shape)
    with np.errstate(divide="ignore"):
        log_y = ll + float(np.log(rng.uniform()))
    theta = float(rng.uniform(0.0, 2.0 * np.pi))
    lo, hi = theta - 2.0 * np.pi, theta
    for k in range(_MAX_BRACKET_SHRINKS):
        prop = f * np.cos(theta) + nu * np.sin(theta)
        ll_prop = float(log_lik(prop))
        if np.isnan(ll_prop):
            raise NonFiniteLikelihoodError("proposal log-likelihood is NaN")
        if ll_prop > log_y:
            return prop, ll_prop, k + 1
        if theta < 0.0:
            lo = theta
        else:
            hi = theta
        theta = float(rng.uniform(lo, hi))
    raise RuntimeError("slice bracket failed to terminate")  # unreachable in exact arithmetic


def ess_transition(state: LatentState, log_likelihood, prior_factor: SpdFactor, rng: RngStream) -> LatentState:
    """One elliptical slice sampling transition.

    ``log_likelihood`` maps a latent matrix to a scalar log-likelihood; the
    classification sampler binds the tempered softmax here, and the unit
    tests substitute constant or Gaussian surrogates.  The prior is the
    zero-mean Gaussian factored by ``prior_factor``, applied independently to
    each latent column.
    """
    f = state.latent
    if f.ndim != 2 or prior_factor.dimension != f.shape[0]:
        raise DimensionMismatchError(
            f"latent shape {f.shape} does not match prior dimension {prior_factor.dimension}"
        )
    new_f, new_ll, _ = _ess_step(f, state.log_likelihood, log_likelihood, prior_factor.lower, rng)
    return LatentState(new_f, new_ll)


def _worker_count() -> int:
    try:
        w = int(os.environ.get("COLDGP_THREADS", "1"))
    except ValueError:
        return 1
    return max(w, 1)


def sample_latent_posterior(kernel: KernelSpec, train: LabeledDataset, t: float,
                            config: EssConfig = EssConfig(), seed: int = 0) -> LatentSampleSet:
    """Run ESS chains on the tempered latent posterior.

    Chain c draws from RngStream(seed, c); chains are independent and may be
    executed in parallel (COLDGP_THREADS) without changing any result, since
    aggregation is ordered by chain index.  Chains start from the zero latent
    matrix.
    """
    if not train.is_classification:
        raise ValueError("classification requires a labeled classification dataset")
    t = float(t)
    if not (np.isfinite(t) and t > 0.0):
        raise NonPositiveTemperatureError(f"temperature must be positive, got {t!r}")
    x, y, c = train.inputs, train.targets, train.class_count
    prior = cholesky(t * gram(kernel, x, x))

    def log_lik(f):
        return tempered_log_likelihood(f, y, t)

    def run_chain(chain: int):
        rng = RngStream(seed, chain)
        f = np.zeros((train.n, c))
        ll = log_lik(f)
        proposals = 0
        kept = []
        for _ in range(config.burn_in):
            f, ll, k = _ess_step(f, ll, log_lik, prior.lower, rng)
            proposals += k
        for _ in range(config.n_samples_per_chain):
            for _ in range(config.thinning):
                f, ll, k = _ess_step(f, ll, log_lik, prior.lower, rng)
                proposals += k
            kept.append(f)  # states are fresh arrays, never mutated in place
        return kept, proposals

    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_chain, range(config.n_chains)))
    else:
        results = [run_chain(chain) for chain in range(config.n_chains)]

    samples = [f for kept, _ in results for f in kept]
    transitions = config.n_chains * (config.burn_in + config.n_samples_per_chain * config.thinning)
    proposals = sum(p for _, p in results)
    stats = {
        "transitions": transitions,
        "proposals": proposals,
        "proposals_per_transition": proposals / max(transitions, 1),
        "prior_jitter": prior.jitter_used,
    }
    return LatentSampleSet(samples=samples, temperature=t, kernel=kernel, train_inputs=x,
                           train_labels=y, config=config, seed=int(seed), stats=stats)


def _conditional_precompute(kernel: KernelSpec, train_inputs, test_inputs):
    """Shared, temperature-free pieces of the test-latent conditional.

    Returns (b, schur) with b = K(X,X)^{-1} K(X, X*) of shape (n, p) and
    schur the vector k** - k*^T K^{-1} k* (clipped at zero).  The empty
    training set degenerates to the prior: b empty, schur = k**.
    """
    test_inputs = np.asarray(test_inputs, dtype=np.float64)
    kss = gram_diag(kernel, test_inputs)
    n = train_inputs.shape[0]
    if n == 0:
        return np.zeros((0, test_inputs.shape[0])), kss
    if train_inputs.shape[1] != test_inputs.shape[1]:
        raise DimensionMismatchError(
            f"train dim {train_inputs.shape[1]} vs test dim {test_inputs.shape[1]}"
        )
    factor = cholesky(gram(kernel, train_inputs, train_inputs))
    ks = gram(kernel, test_inputs, train_inputs)  # (p, n)
    v = solve_triangular(factor.lower, ks.T, lower=True, check_finite=False)
    b = solve_triangular(factor.lower, v, lower=True, trans="T", check_finite=False)
    schur = kss - np.einsum("ij,ij->j", v, v)
    np.clip(schur, 0.0, None, out=schur)
    return b, schur


def latent_conditional_moments(kernel: KernelSpec, train_inputs, latent, test_inputs, t: float):
    """Per-class conditional mean and per-point variance of test latents.

    The mean does not depend on t; only the variance carries the temperature.
    """
    t = float(t)
    if not (np.isfinite(t) and t > 0.0):
        raise NonPositiveTemperatureError(f"temperature must be positive, got {t!r}")
    train_inputs = np.asarray(train_inputs, dtype=np.float64)
    b, schur = _conditional_precompute(kernel, train_inputs, test_inputs)
    return b.T @ np.asarray(latent, dtype=np.float64), t * schur


def _row_softmax(f):
    m = f.max(axis=1)
    e = np.exp(f - m[:, None])
    return e / e.sum(axis=1)[:, None]


def _chain_prob_means(samples: LatentSampleSet, test_inputs, draws_per_sample: int,
                      rng: RngStream, precomputed=None):
    """Predictive class probabilities averaged within each chain.

    Randomness is consumed in (chain, sample, draw) order, so the result is
    identical however the caller later combines chains.
    """
    if draws_per_sample < 1:
        raise EmptyInputError("draws_per_sample must be >= 1")
    if not samples.samples:
        raise EmptyInputError("sample set is empty")
    if precomputed is None:
        precomputed = _conditional_precompute(samples.kernel, samples.train_inputs, test_inputs)
    b, schur = precomputed
    sd = np.sqrt(samples.temperature * schur)
    n_chains = samples.config.n_chains
    per_chain = samples.config.n_samples_per_chain
    if len(samples.samples) != n_chains * per_chain:
        raise LengthMismatchError(
            f"{len(samples.samples)} samples inconsistent with config "
            f"({n_chains} chains x {per_chain})"
        )
    p = np.asarray(test_inputs).shape[0]
    c = samples.class_count
    chain_means = np.empty((n_chains, p, c))
    for ci in range(n_chains):
        acc = np.zeros((p, c))
        for f in samples.samples[ci * per_chain:(ci + 1) * per_chain]:
            mean = b.T @ f
            for _ in range(draws_per_sample):
                draw = mean + sd[:, None] * rng.standard_normal((p, c))
                acc += _row_softmax(draw)
        chain_means[ci] = acc / (per_chain * draws_per_sample)
    return chain_means


def predictive_class_probs(samples: LatentSampleSet, test_inputs, draws_per_sample: int = 8,
                           rng: RngStream | None = None) -> np.ndarray:
    """Monte Carlo predictive class probabilities, one row per test input.

    Averages softmax over retained posterior samples and, for each sample,
    ``draws_per_sample`` draws of the test latents from their conditional.
    Rows sum to one up to floating point.
    """
    if rng is None:
        rng = RngStream(samples.seed, samples.config.n_chains)
    chain_means = _chain_prob_means(samples, test_inputs, draws_per_sample, rng)
    return chain_means.mean(axis=0)


def classification_metrics(probs, labels):
    """(mean log predictive probability, top-1 accuracy).

    Probabilities are floored at 1e-12 inside the log; argmax ties resolve
    to the smallest class index.
    """
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels)
    if probs.ndim != 2:
        raise DimensionMismatchError(f"probs must be (n, class_count), got {probs.shape}")
    if labels.ndim != 1 or labels.shape[0] != probs.shape[0]:
        raise LengthMismatchError(f"labels shape {labels.shape} vs {probs.shape[0]} prob rows")
    if probs.shape[0] == 0:
        raise EmptyInputError("no rows")
    if not np.issubdtype(labels.dtype, np.integer):
        raise LabelOutOfRangeError("labels must be integers")
    if labels.min() < 0 or labels.max() >= probs.shape[1]:
        raise LabelOutOfRangeError(f"labels outside [0, {probs.shape[1]})")
    picked = probs[np.arange(probs.shape[0]), labels]
    mean_log = float(np.mean(np.log(np.maximum(picked, PROB_FLOOR))))
    accuracy = float(np.mean(np.argmax(probs, axis=1) == labels))
    return mean_log, accuracy


def classification_temperature_sweep(kernel: KernelSpec, train: LabeledDataset,
                                     test: LabeledDataset, temperatures,
                                     config: EssConfig = EssConfig(), seed: int = 0,
                                     draws_per_sample: int = 8) -> SweepResult:
    """Posterior sampling and test metrics across a temperature grid.

    Grid position j gets its own derived master seed, so temperatures are
    independent and the grid can be re-partitioned without changing results.
    Records carry test_log_likelihood and top1_accuracy, plus between-chain
    Monte Carlo standard errors in ``extras``.  best_temperature maximizes
    test log-likelihood (ties toward smaller temperature).
    """
    temps = [float(t) for t in temperatures]
    if not temps:
        raise EmptyInputError("temperature grid is empty")
    for t in temps:
        if not (np.isfinite(t) and t > 0.0):
            raise NonPositiveTemperatureError(f"temperatures must be positive, got {t!r}")
    if not test.is_classification or test.class_count != train.class_count:
        raise ValueError("train/test class counts differ or test set is not classification")
    precomputed = _conditional_precompute(kernel, train.inputs, test.inputs)
    records = []
    diagnostics = {}
    for j, t in enumerate(temps):
        seed_t = derive_seed(seed, j)
        sample_set = sample_latent_posterior(kernel, train, t, config, seed_t)
        rng = RngStream(seed_t, config.n_chains)
        chain_means = _chain_prob_means(sample_set, test.inputs, draws_per_sample, rng,
                                        precomputed=precomputed)
        ll, acc = classification_metrics(chain_means.mean(axis=0), test.targets)
        per_chain = [classification_metrics(cm, test.targets) for cm in chain_means]
        if config.n_chains > 1:
            se_ll = float(np.std([m[0] for m in per_chain], ddof=1) / np.sqrt(config.n_chains))
            se_acc = float(np.std([m[1] for m in per_chain], ddof=1) / np.sqrt(config.n_chains))
        else:
            se_ll = se_acc = 0.0
        records.append(SweepRecord(
            temperature=t,
            metrics={"test_log_likelihood": ll, "top1_accuracy": acc},
            seed=int(seed),
            extras={"mc_se_log_likelihood": se_ll, "mc_se_accuracy": se_acc},
        ))
        diagnostics[t] = dict(sample_set.stats)
    best = select_best(records, "test_log_likelihood", minimize=False)
    return SweepResult(records=records, best_temperature=best, diagnostics=diagnostics)
