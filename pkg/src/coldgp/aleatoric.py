"""Relabel-disagreement probe for label noise under tempered posteriors.

Two-class setup with one training point, observed label fixed, and latent
difference d = f_obs - f_other.  Under a tempered softmax likelihood and a
centered Gaussian prior on the two latents with per-class variance c * t,
the difference has prior N(0, 2 c t) and tempered-posterior density
proportional to sigmoid(d)^(1/t) * N(d; 0, 2 c t).  The probe value is the
posterior probability that an independent relabel of the point disagrees
with the observed label:

    p(c, t) = E[ sigmoid(-d) ]  under that posterior.

Both the numerator and the normalizer are one-dimensional integrals,
evaluated with composite Simpson quadrature in log space on a fixed
symmetric window, with panel doubling until the value stabilizes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .exceptions import (
    EmptyInputError,
    IndexOutOfRangeError,
    LabelOutOfRangeError,
    LengthMismatchError,
    NonPositiveScaleError,
    NonPositiveTemperatureError,
    QuadratureNotConvergedError,
)
from .linalg import log_sum_exp

_INITIAL_PANELS = 256
_MAX_PANELS = 2 ** 20


@dataclass(frozen=True)
class ProbeConfig:
    """Quadrature settings for one (latent_scale, temperature) evaluation."""

    latent_scale: float
    temperature: float
    quadrature_tolerance: float = 1e-8
    integration_half_width_sigmas: float = 40.0

    def __post_init__(self):
        if not (np.isfinite(self.latent_scale) and self.latent_scale > 0.0):
            raise NonPositiveScaleError(f"latent_scale must be positive, got {self.latent_scale!r}")
        if not (np.isfinite(self.temperature) and self.temperature > 0.0):
            raise NonPositiveTemperatureError(
                f"temperature must be positive, got {self.temperature!r}")
        if not (np.isfinite(self.quadrature_tolerance) and self.quadrature_tolerance > 0.0):
            raise ValueError("quadrature_tolerance must be positive")
        if not (np.isfinite(self.integration_half_width_sigmas)
                and self.integration_half_width_sigmas > 0.0):
            raise ValueError("integration_half_width_sigmas must be positive")


@dataclass(frozen=True)
class ProbePoint:
    """One evaluated grid point; ratio is probability / probability at t = 1."""

    latent_scale: float
    temperature: float
    probability: float
    ratio: float


def _simpson_log_weights(n_points: int):
    # weights 1, 4, 2, 4, ..., 2, 4, 1 (n_points odd)
    w = np.full(n_points, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return np.log(w)


def _probe_value(cfg: ProbeConfig, panels: int) -> float:
    c, t = cfg.latent_scale, cfg.temperature
    half = cfg.integration_half_width_sigmas * np.sqrt(2.0 * c * t)
    d = np.linspace(-half, half, 2 * panels + 1)
    # log sigmoid(d) = -log(1 + exp(-d)); the Gaussian normalizer cancels.
    log_post = -np.logaddexp(0.0, -d) / t - d * d / (4.0 * c * t)
    log_w = _simpson_log_weights(d.size)
    log_den = log_sum_exp(log_post + log_w)
    log_num = log_sum_exp(log_post - np.logaddexp(0.0, d) + log_w)
    return float(np.exp(log_num - log_den))


def relabel_prob_quadrature(latent_scale: float, temperature: float,
                            quadrature_tolerance: float = 1e-8,
                            integration_half_width_sigmas: float = 40.0) -> float:
    """Disagreement probability p(latent_scale, temperature) by quadrature.

    Panel count doubles until successive values agree to the relative
    tolerance; raises QuadratureNotConvergedError if the panel budget runs
    out first.
    """
    cfg = ProbeConfig(latent_scale=float(latent_scale), temperature=float(temperature),
                      quadrature_tolerance=float(quadrature_tolerance),
                      integration_half_width_sigmas=float(integration_half_width_sigmas))
    panels = _INITIAL_PANELS
    prev = _probe_value(cfg, panels)
    while panels <= _MAX_PANELS:
        panels *= 2
        cur = _probe_value(cfg, panels)
        if abs(cur - prev) <= cfg.quadrature_tolerance * max(abs(cur), 1e-300):
            return cur
        prev = cur
    raise QuadratureNotConvergedError(
        f"no convergence to {cfg.quadrature_tolerance!r} within {_MAX_PANELS} panels "
        f"(latent_scale={latent_scale!r}, temperature={temperature!r})")


def relabel_prob_zero_temperature(latent_scale: float) -> float:
    """Limit of the probe as temperature goes to zero.

    The tempered posterior concentrates at the minimizer d* of
    softplus(-d) + d^2 / (4 c); the limit is sigmoid(-d*).
    """
    c = float(latent_scale)
    if not (np.isfinite(c) and c > 0.0):
        raise NonPositiveScaleError(f"latent_scale must be positive, got {c!r}")

    def grad(d):
        # d/dd [softplus(-d) + d^2/(4c)] = -sigmoid(-d) + d/(2c)
        return d / (2.0 * c) - expit(-d)

    d_star = brentq(grad, 0.0, 2.0 * c + 1.0, xtol=1e-12, rtol=1e-14)
    return float(expit(-d_star))


def relabel_ratio_curve(latent_scale: float, temperatures,
                        quadrature_tolerance: float = 1e-8,
                        integration_half_width_sigmas: float = 40.0) -> list:
    """Probe values across a temperature grid, normalized by the t = 1 value.

    Returns one ProbePoint per requested temperature, in the given order.
    The t = 1 reference is computed once, so a grid containing 1.0 reports
    ratio exactly 1.0 there.
    """
    temps = [float(t) for t in temperatures]
    if not temps:
        raise EmptyInputError("temperature grid is empty")
    for t in temps:
        if not (np.isfinite(t) and t > 0.0):
            raise NonPositiveTemperatureError(f"temperatures must be positive, got {t!r}")
    base = relabel_prob_quadrature(latent_scale, 1.0, quadrature_tolerance,
                                   integration_half_width_sigmas)
    points = []
    for t in temps:
        if t == 1.0:
            p = base
        else:
            p = relabel_prob_quadrature(latent_scale, t, quadrature_tolerance,
                                        integration_half_width_sigmas)
        points.append(ProbePoint(latent_scale=float(latent_scale), temperature=t,
                                 probability=p, ratio=p / base))
    return points


def relabel_disagreement_mc(latent_samples, labels, index: int) -> float:
    """Monte Carlo counterpart of the probe on posterior latent samples.

    Averages, over sampled latent matrices, the softmax probability that a
    fresh relabel of training point ``index`` differs from its observed
    label.
    """
    samples = list(latent_samples)
    if not samples:
        raise EmptyInputError("no latent samples")
    labels = np.asarray(labels)
    n, c = np.asarray(samples[0]).shape
    if labels.ndim != 1 or labels.shape[0] != n:
        raise LengthMismatchError(f"labels shape {labels.shape} vs {n} latent rows")
    if not np.issubdtype(labels.dtype, np.integer):
        raise LabelOutOfRangeError("labels must be integers")
    if labels.min() < 0 or labels.max() >= c:
        raise LabelOutOfRangeError(f"labels outside [0, {c})")
    if not (0 <= index < n):
        raise IndexOutOfRangeError(f"index {index} outside [0, {n})")
    total = 0.0
    for f in samples:
        row = np.asarray(f, dtype=np.float64)[index]
        e = np.exp(row - row.max())
        total += 1.0 - e[labels[index]] / e.sum()
    return total / len(samples)
