"""Datasets: synthetic generators, the CIFAR-10 binary loader, normalization,
and a columnar text format for persisting generated data.

CIFAR-10 binary layout (the classic batch files): each record is exactly
3073 bytes, one label byte in [0, 9] followed by 3072 pixel bytes laid out
as 1024 red, 1024 green, 1024 blue values in row-major 32x32 order.  Pixels
map to [0, 1] by dividing by 255; the byte record is recoverable exactly by
rounding back, which is what the round-trip tests rely on.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    EmptyInputError,
    LabelOutOfRangeError,
    MalformedRecordError,
    NonFiniteInputError,
    ZeroVarianceError,
)
from .rng import RngStream

CIFAR_TRAIN_FILES = tuple(f"data_batch_{i}.bin" for i in range(1, 6))
CIFAR_TEST_FILE = "test_batch.bin"
_CIFAR_RECORD = 3073
_SPLITS = ("train", "test")


@dataclass(frozen=True)
class LabeledDataset:
    """Inputs plus targets, tagged with split and provenance.

    ``class_count`` is None for regression (float targets) and the number of
    classes for classification (integer labels in [0, class_count)).
    """

    inputs: np.ndarray
    targets: np.ndarray
    class_count: int | None
    split_tag: str
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=np.float64)
        object.__setattr__(self, "inputs", inputs)
        if inputs.ndim != 2:
            raise DimensionMismatchError(f"inputs must be (n, d), got shape {inputs.shape}")
        if inputs.shape[0] < 1:
            raise EmptyInputError("dataset needs at least one example")
        if not np.all(np.isfinite(inputs)):
            raise NonFiniteInputError("inputs contain NaN or infinity")
        if self.split_tag not in _SPLITS:
            raise ValueError(f"split_tag must be one of {_SPLITS}, got {self.split_tag!r}")
        targets = np.asarray(self.targets)
        if targets.ndim != 1 or targets.shape[0] != inputs.shape[0]:
            raise DimensionMismatchError(
                f"targets shape {targets.shape} does not match {inputs.shape[0]} inputs"
            )
        if self.class_count is None:
            targets = targets.astype(np.float64)
            if not np.all(np.isfinite(targets)):
                raise NonFiniteInputError("regression targets contain NaN or infinity")
        else:
            if int(self.class_count) < 2:
                raise ValueError(f"class_count must be >= 2, got {self.class_count!r}")
            object.__setattr__(self, "class_count", int(self.class_count))
            if not np.issubdtype(targets.dtype, np.integer):
                if not np.all(targets == np.floor(targets)):
                    raise LabelOutOfRangeError("classification labels must be integers")
            targets = targets.astype(np.int64)
            if targets.size and (targets.min() < 0 or targets.max() >= self.class_count):
                raise LabelOutOfRangeError(
                    f"labels must lie in [0, {self.class_count}), got range "
                    f"[{targets.min()}, {targets.max()}]"
                )
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return self.inputs.shape[0]

    @property
    def d(self) -> int:
        return self.inputs.shape[1]

    @property
    def is_classification(self) -> bool:
        return self.class_count is not None


def gen_rbf_regression(n_train, n_test, noise_std, kernel, seed):
    """Draw a 1-D regression problem from an RBF prior.

    Scalar inputs are iid standard normal; the latent function is one draw
    from the zero-mean GP with the given kernel over all inputs jointly;
    targets add iid N(0, noise_std^2).  The first n_train positions form the
    train split, the rest the test split.  Draw order (inputs, latent, noise)
    is fixed, all on stream 0 of the seed.
    """
    from .kernels import gram  # local import: kernels has no data dependency
    from .linalg import cholesky, mvn_sample

    if kernel.family != "rbf":
        raise ValueError(f"generator requires an rbf kernel, got family {kernel.family!r}")
    n_train, n_test = int(n_train), int(n_test)
    if n_train < 1 or n_test < 1:
        raise EmptyInputError("need n_train >= 1 and n_test >= 1")
    noise_std = float(noise_std)
    if not (np.isfinite(noise_std) and noise_std >= 0.0):
        raise ValueError(f"noise_std must be finite and >= 0, got {noise_std!r}")
    n = n_train + n_test
    rng = RngStream(seed, 0)
    x = rng.standard_normal(n)[:, None]
    factor = cholesky(gram(kernel, x, x))
    latent = mvn_sample(np.zeros(n), factor, rng)
    y = latent + noise_std * rng.standard_normal(n)
    prov = {"name": "rbf-regression", "seed": int(seed), "noise_std": noise_std}
    train = LabeledDataset(x[:n_train], y[:n_train], None, "train", dict(prov))
    test = LabeledDataset(x[n_train:], y[n_train:], None, "test", dict(prov))
    return train, test


def gen_cluster_classification(n_per_class, class_count, dim, separation, seed):
    """Gaussian clusters with unit noise at separated basis-vector centers.

    Class c sits at separation * e_{c mod dim}, negated once the basis is
    exhausted, so up to 2*dim distinct centers are available.  The train
    split has n_per_class points per class, the test split n_per_class // 2
    (at least one).  Points are drawn class by class on stream 0 (train) and
    stream 1 (test).
    """
    n_per_class, class_count, dim = int(n_per_class), int(class_count), int(dim)
    if n_per_class < 1:
        raise EmptyInputError("n_per_class must be >= 1")
    if class_count < 2:
        raise ValueError(f"class_count must be >= 2, got {class_count}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if class_count > 2 * dim:
        raise ValueError(f"at most {2 * dim} distinct centers in dimension {dim}")
    separation = float(separation)
    if not (np.isfinite(separation) and separation >= 0.0):
        raise ValueError(f"separation must be finite and >= 0, got {separation!r}")

    centers = np.zeros((class_count, dim))
    for c in range(class_count):
        centers[c, c % dim] = separation * (1.0 if c < dim else -1.0)

    def draw(stream: int, count: int):
        r = RngStream(seed, stream)
        xs, ys = [], []
        for c in range(class_count):
            xs.append(centers[c] + r.standard_normal((count, dim)))
            ys.append(np.full(count, c, dtype=np.int64))
        return np.concatenate(xs), np.concatenate(ys)

    n_test_per_class = max(1, n_per_class // 2)
    prov = {"name": "clusters", "seed": int(seed), "separation": separation}
    xtr, ytr = draw(0, n_per_class)
    xte, yte = draw(1, n_test_per_class)
    train = LabeledDataset(xtr, ytr, class_count, "train", dict(prov))
    test = LabeledDataset(xte, yte, class_count, "test", dict(prov))
    return train, test


def _read_cifar_file(path: str):
    if not os.path.isfile(path):
        raise FileNotFoundError(f"missing CIFAR-10 batch file: {path}")
    raw = np.fromfile(path, dtype=np.uint8)
    if raw.size == 0 or raw.size % _CIFAR_RECORD != 0:
        raise MalformedRecordError(
            f"{path}: size {raw.size} is not a positive multiple of {_CIFAR_RECORD}"
        )
    records = raw.reshape(-1, _CIFAR_RECORD)
    labels = records[:, 0]
    if labels.max() > 9:
        bad = int(np.argmax(labels > 9))
        raise MalformedRecordError(
            f"{path}: record {bad} has label byte {int(labels[bad])} > 9"
        )
    return labels.astype(np.int64), records[:, 1:]


def _normalize_keep(keep_classes):
    if keep_classes is None:
        return list(range(10))
    keep = sorted(int(c) for c in keep_classes) if isinstance(keep_classes, (set, frozenset)) \
        else [int(c) for c in keep_classes]
    if not keep:
        raise EmptyInputError("keep_classes is empty")
    if len(set(keep)) != len(keep):
        raise ValueError(f"keep_classes has duplicates: {keep}")
    for c in keep:
        if not 0 <= c <= 9:
            raise LabelOutOfRangeError(f"keep_classes entries must be in [0, 9], got {c}")
    return keep


def load_cifar10(dir_path, keep_classes=None, n_train=2000, n_test=1000, seed=0):
    """Load and subsample the CIFAR-10 binary batches under ``dir_path``.

    keep_classes selects a class subset (a set is taken in sorted order, a
    sequence in the order given); selected labels are remapped to
    0..len(keep)-1 in that order.  Subsampling is without replacement via a
    seeded permutation, stream 0 for train and stream 1 for test.  Pixels
    are scaled to [0, 1]; no further normalization is applied here.
    """
    n_train, n_test = int(n_train), int(n_test)
    if n_train < 1 or n_test < 1:
        raise EmptyInputError("need n_train >= 1 and n_test >= 1")
    keep = _normalize_keep(keep_classes)
    remap = {old: new for new, old in enumerate(keep)}

    def gather(files, count, stream):
        all_pixels, all_labels, origin = [], [], []
        for name in files:
            labels, pixels = _read_cifar_file(os.path.join(str(dir_path), name))
            mask = np.isin(labels, keep)
            idx = np.nonzero(mask)[0]
            all_pixels.append(pixels[idx])
            all_labels.append(labels[idx])
            origin.extend((name, int(i)) for i in idx)
        pixels = np.concatenate(all_pixels)
        labels = np.concatenate(all_labels)
        if count > pixels.shape[0]:
            raise ValueError(
                f"requested {count} examples but only {pixels.shape[0]} match classes {keep}"
            )
        perm = RngStream(seed, stream).permutation(pixels.shape[0])[:count]
        chosen = [origin[i] for i in perm]
        y = np.array([remap[int(l)] for l in labels[perm]], dtype=np.int64)
        return pixels[perm].astype(np.float64) / 255.0, y, chosen

    xtr, ytr, rec_tr = gather(CIFAR_TRAIN_FILES, n_train, 0)
    xte, yte, rec_te = gather((CIFAR_TEST_FILE,), n_test, 1)
    base = {"name": "cifar10", "dir": str(dir_path), "seed": int(seed), "keep_classes": keep}
    train = LabeledDataset(xtr, ytr, len(keep), "train", {**base, "records": rec_tr})
    test = LabeledDataset(xte, yte, len(keep), "test", {**base, "records": rec_te})
    return train, test


def input_stats(data: LabeledDataset):
    """Scalar mean and standard deviation over every input entry."""
    return float(np.mean(data.inputs)), float(np.std(data.inputs))


def normalize_inputs(data: LabeledDataset, scheme: str, stats=None) -> LabeledDataset:
    """Apply an input normalization scheme.

    ``"none"`` returns the dataset unchanged.  ``"global-standardize"``
    subtracts a scalar mean and divides by a scalar std computed over all
    input entries; pass ``stats=(mean, std)`` from the train split when
    normalizing a test split (required, so test data never leaks into the
    statistics).
    """
    if scheme == "none":
        return data
    if scheme != "global-standardize":
        raise ValueError(f"unknown normalization scheme {scheme!r}")
    if stats is None:
        if data.split_tag != "train":
            raise ValueError(
                "global-standardize on a non-train split requires stats from the train split"
            )
        stats = input_stats(data)
    mean, std = float(stats[0]), float(stats[1])
    if std <= 0.0:
        raise ZeroVarianceError("cannot standardize: input standard deviation is zero")
    return LabeledDataset(
        (data.inputs - mean) / std,
        data.targets,
        data.class_count,
        data.split_tag,
        {**data.provenance, "normalize": "global-standardize"},
    )


def save_dataset(data: LabeledDataset, path):
    """Write a dataset in the columnar text format.

    One header line naming the columns (x0..x{d-1} then ``target`` for
    regression or ``label`` for classification), then one comma-separated
    row per example.  Floats are written with repr, so a round trip through
    :func:`load_dataset` reproduces them bit-exactly.
    """
    cols = [f"x{j}" for j in range(data.d)]
    cols.append("label" if data.is_classification else "target")
    with open(path, "w", encoding="ascii") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(data.n):
            row = [repr(float(v)) for v in data.inputs[i]]
            if data.is_classification:
                row.append(str(int(data.targets[i])))
            else:
                row.append(repr(float(data.targets[i])))
            fh.write(",".join(row) + "\n")


def load_dataset(path, split_tag: str = "train", class_count: int | None = None) -> LabeledDataset:
    """Read a dataset written by :func:`save_dataset`.

    The header's last column decides the kind: ``label`` means
    classification (class_count defaults to max label + 1), ``target`` means
    regression.
    """
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if not header:
            raise MalformedRecordError(f"{path}: missing header line")
        cols = header.split(",")
        kind = cols[-1]
        if kind not in ("target", "label") or cols[:-1] != [f"x{j}" for j in range(len(cols) - 1)]:
            raise MalformedRecordError(f"{path}: unrecognized header {header!r}")
        d = len(cols) - 1
        xs, ys = [], []
        for line_no, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != d + 1:
                raise MalformedRecordError(
                    f"{path}:{line_no}: expected {d + 1} fields, got {len(parts)}"
                )
            xs.append([float(v) for v in parts[:d]])
            ys.append(parts[d])
    if not xs:
        raise EmptyInputError(f"{path}: no data rows")
    inputs = np.asarray(xs, dtype=np.float64)
    if kind == "target":
        return LabeledDataset(inputs, np.array([float(v) for v in ys]), None, split_tag,
                              {"name": "file", "path": str(path)})
    labels = np.array([int(v) for v in ys], dtype=np.int64)
    if class_count is None:
        class_count = int(labels.max()) + 1 if labels.size else 2
        class_count = max(class_count, 2)
    return LabeledDataset(inputs, labels, class_count, split_tag,
                          {"name": "file", "path": str(path)})
