"""Kernel descriptions and Gram assembly.

Two families:

``rbf``
    k(x, x') = scale * rbf_variance * exp(-||x - x'||^2 / (2 * rbf_lengthscale^2))

``nngp``
    The infinite-width limit of a fully connected rectifier network at
    initialization.  Layer zero is an affine map of the inner product,

        K0(x, x') = sigma_b2 + sigma_w2 * (x . x') / d,

    and each of ``depth`` hidden layers applies the arc-cosine update

        q     = sqrt(K(x, x) * K(x', x'))
        rho   = clip(K(x, x') / q, -1, 1)      # clip: FP drift can leave [-1, 1]
        theta = arccos(rho)
        K'    = sigma_b2 + sigma_w2 / (2 pi) * q * (sin theta + (pi - theta) cos theta)

    The final matrix is multiplied by ``scale``.  Defaults are the critical
    initialization sigma_w2 = 2, sigma_b2 = 0 with two hidden layers.

``scale`` is the tempering hook: :func:`scale_kernel` multiplies it, and a
Gram matrix scales linearly with it.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    NonFiniteInputError,
    NonPositiveScaleError,
)

FAMILIES = ("rbf", "nngp")


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of a kernel.

    RBF parameters are ignored by the nngp family and vice versa; the
    constructor only validates the fields the family actually uses.
    """

    family: str
    rbf_lengthscale: float = 1.0
    rbf_variance: float = 1.0
    depth: int = 2
    sigma_w2: float = 2.0
    sigma_b2: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; expected one of {FAMILIES}")
        if not (np.isfinite(self.scale) and self.scale > 0.0):
            raise NonPositiveScaleError(f"scale must be positive and finite, got {self.scale!r}")
        if self.family == "rbf":
            if not (np.isfinite(self.rbf_lengthscale) and self.rbf_lengthscale > 0.0):
                raise ValueError(f"rbf_lengthscale must be positive, got {self.rbf_lengthscale!r}")
            if not (np.isfinite(self.rbf_variance) and self.rbf_variance > 0.0):
                raise ValueError(f"rbf_variance must be positive, got {self.rbf_variance!r}")
        else:
            if int(self.depth) != self.depth or self.depth < 1:
                raise ValueError(f"depth must be an integer >= 1, got {self.depth!r}")
            if not (np.isfinite(self.sigma_w2) and self.sigma_w2 > 0.0):
                raise ValueError(f"sigma_w2 must be positive, got {self.sigma_w2!r}")
            if not (np.isfinite(self.sigma_b2) and self.sigma_b2 >= 0.0):
                raise ValueError(f"sigma_b2 must be non-negative, got {self.sigma_b2!r}")

    @staticmethod
    def rbf(lengthscale: float = 1.0, variance: float = 1.0, scale: float = 1.0) -> "KernelSpec":
        return KernelSpec(family="rbf", rbf_lengthscale=lengthscale, rbf_variance=variance, scale=scale)

    @staticmethod
    def nngp(depth: int = 2, sigma_w2: float = 2.0, sigma_b2: float = 0.0, scale: float = 1.0) -> "KernelSpec":
        return KernelSpec(family="nngp", depth=depth, sigma_w2=sigma_w2, sigma_b2=sigma_b2, scale=scale)


def scale_kernel(spec: KernelSpec, t: float) -> KernelSpec:
    """Return a copy of ``spec`` whose Gram matrices are multiplied by t."""
    t = float(t)
    if not (np.isfinite(t) and t > 0.0):
        raise NonPositiveScaleError(f"scale factor must be positive and finite, got {t!r}")
    return dataclasses.replace(spec, scale=spec.scale * t)


def _check_inputs(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatchError(f"inputs must be 2-D (n, d) arrays, got {a.shape} and {b.shape}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptyInputError("gram needs at least one row per side")
    if a.shape[1] != b.shape[1]:
        raise DimensionMismatchError(
            f"input dimensions differ: {a.shape[1]} vs {b.shape[1]}"
        )
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise NonFiniteInputError("kernel inputs contain NaN or infinity")
    return a, b


def _rbf_gram(spec: KernelSpec, a, b) -> np.ndarray:
    d2 = cdist(a, b, "sqeuclidean")
    amp = spec.scale * spec.rbf_variance
    return amp * np.exp(-d2 / (2.0 * spec.rbf_lengthscale**2))


def _nngp_self_cov(spec: KernelSpec, a) -> np.ndarray:
    # diag recursion: theta = 0, so each layer maps k -> sigma_b2 + sigma_w2 * k / 2
    k = spec.sigma_b2 + spec.sigma_w2 * np.einsum("ij,ij->i", a, a) / a.shape[1]
    for _ in range(int(spec.depth)):
        k = spec.sigma_b2 + 0.5 * spec.sigma_w2 * k
    return k


def _nngp_gram(spec: KernelSpec, a, b, symmetric: bool) -> np.ndarray:
    d = a.shape[1]
    w, bias = spec.sigma_w2, spec.sigma_b2
    k = bias + w * (a @ b.T) / d
    if symmetric:
        # one gemm can leave (i, j) and (j, i) a few ulp apart; average once so
        # the elementwise recursion below preserves exact symmetry
        k = 0.5 * (k + k.T)
    ka = bias + w * np.einsum("ij,ij->i", a, a) / d
    kb = ka if symmetric else bias + w * np.einsum("ij,ij->i", b, b) / d
    for _ in range(int(spec.depth)):
        q = np.sqrt(np.multiply.outer(ka, kb))
        rho = np.divide(k, q, out=np.zeros_like(k), where=q > 0.0)
        np.clip(rho, -1.0, 1.0, out=rho)
        theta = np.arccos(rho)
        k = bias + (w / (2.0 * np.pi)) * q * (np.sin(theta) + (np.pi - theta) * np.cos(theta))
        ka = bias + 0.5 * w * ka
        kb = ka if symmetric else bias + 0.5 * w * kb
    return spec.scale * k


def gram(spec: KernelSpec, a, b) -> np.ndarray:
    """Kernel matrix between row sets ``a`` (n, d) and ``b`` (m, d).

    When ``a`` and ``b`` are the same object the result is exactly symmetric.
    """
    same = a is b
    a, b = _check_inputs(a, b)
    if same:
        b = a
    if spec.family == "rbf":
        out = _rbf_gram(spec, a, b)
    else:
        out = _nngp_gram(spec, a, b, symmetric=same)
    if same:
        out = 0.5 * (out + out.T)
    return out


def gram_diag(spec: KernelSpec, a) -> np.ndarray:
    """Vector of self-covariances k(x_i, x_i) for the rows of ``a``."""
    a, _ = _check_inputs(a, a)
    if spec.family == "rbf":
        return np.full(a.shape[0], spec.scale * spec.rbf_variance)
    return spec.scale * _nngp_self_cov(spec, a)


def kernel_eval(spec: KernelSpec, x, xp) -> float:
    """Kernel value for a single pair of input vectors."""
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    if x.ndim != 1 or xp.ndim != 1:
        raise DimensionMismatchError("kernel_eval expects 1-D input vectors")
    return float(gram(spec, x[None, :], xp[None, :])[0, 0])
