"""Image datasets, preprocessing to ``2^n`` pixels, and amplitude encodings."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

CONTAINER_MAGIC = b"QVDS"
CONTAINER_VERSION = 1
_CONTAINER_HEADER = struct.Struct("<4sIIIIII")


class DatasetError(Exception):
    """Base class for dataset problems."""


class IdxFormatError(DatasetError):
    pass


class DatasetMismatchError(DatasetError):
    pass


class EncodingError(DatasetError, ValueError):
    pass


@dataclass(frozen=True)
class Dataset:
    """Images stored as a float array of shape ``(num_samples, height, width)``."""

    images: np.ndarray
    labels: np.ndarray
    num_classes: int

    def __post_init__(self):
        if self.images.ndim != 3:
            raise ValueError(f"images must be (N, H, W), got {self.images.shape}")
        if len(self.images) != len(self.labels):
            raise DatasetMismatchError(
                f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels outside [0, {self.num_classes})")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def shape(self) -> tuple[int, int]:
        return self.images.shape[1], self.images.shape[2]

    @property
    def pixels(self) -> np.ndarray:
        """Flattened row-major pixel vectors, ``(num_samples, H*W)``."""
        return self.images.reshape(len(self), -1)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx)
        return Dataset(self.images[idx], self.labels[idx], self.num_classes)


# --- IDX files -----------------------------------------------------------------------

def _read_idx(path: Path, magic: int) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: truncated header")
    found = struct.unpack(">I", raw[:4])[0]
    if found != magic:
        raise IdxFormatError(f"{path}: bad magic 0x{found:08x}, expected 0x{magic:08x}")
    ndim = magic & 0xFF
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IdxFormatError(f"{path}: truncated header")
    dims = struct.unpack(">" + "I" * ndim, raw[4:header])
    count = math.prod(dims)
    if len(raw) - header < count:
        raise IdxFormatError(f"{path}: truncated data ({len(raw) - header} of {count} bytes)")
    return np.frombuffer(raw, dtype=np.uint8, count=count, offset=header).reshape(dims)


def load_idx(images_path, labels_path, num_classes: int = 10) -> Dataset:
    images = _read_idx(images_path, IDX_IMAGES_MAGIC)
    labels = _read_idx(labels_path, IDX_LABELS_MAGIC)
    if len(images) != len(labels):
        raise DatasetMismatchError(
            f"{images_path} has {len(images)} images but {labels_path} has {len(labels)} labels")
    return Dataset(images.astype(np.float64) / 255.0, labels.astype(np.int64), num_classes)


def write_idx(images_path, labels_path, images: np.ndarray, labels: np.ndarray) -> None:
    """Write unsigned-byte IDX files (images are uint8 or floats in [0, 1])."""
    images = np.asarray(images)
    if images.dtype != np.uint8:
        images = np.rint(np.clip(images, 0, 1) * 255).astype(np.uint8)
    labels = np.asarray(labels).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *images.shape))
        f.write(images.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        f.write(labels.tobytes())


# --- preprocessing -------------------------------------------------------------------

def target_shape(target_pixels: int) -> tuple[int, int]:
    """Grid for ``2^k`` pixels: square for even ``k``, twice as wide for odd ``k``."""
    k = int(target_pixels).bit_length() - 1
    if target_pixels < 1 or (1 << k) != target_pixels:
        raise ValueError(f"target pixel count {target_pixels} is not a power of two")
    return 2 ** (k // 2), 2 ** (k - k // 2)


def _resize_axis(x: np.ndarray, axis: int, size: int) -> np.ndarray:
    cur = x.shape[axis]
    if cur == size:
        return x
    if cur < size:
        extra = size - cur
        if extra % 2:
            raise ValueError(f"cannot pad {cur} to {size} symmetrically")
        pad = [(0, 0)] * x.ndim
        pad[axis] = (extra // 2, extra // 2)
        return np.pad(x, pad)
    if cur % size:
        # pad up to the next multiple, then block-average
        padded = -(-cur // size) * size
        return _resize_axis(_resize_axis(x, axis, padded), axis, size)
    factor = cur // size
    shape = x.shape[:axis] + (size, factor) + x.shape[axis + 1:]
    return x.reshape(shape).mean(axis=axis + 1)


def preprocess(d: Dataset, target_pixels: int) -> Dataset:
    """Resize every image to ``target_pixels`` by zero padding and block averaging."""
    h, w = target_shape(target_pixels)
    out = _resize_axis(_resize_axis(d.images, 1, h), 2, w)
    return Dataset(np.clip(out, 0.0, 1.0), d.labels, d.num_classes)


# --- encodings -----------------------------------------------------------------------

def _check_pixels(pixels: np.ndarray, min_len: int = 1) -> np.ndarray:
    pixels = np.asarray(pixels, dtype=np.float64)
    n = pixels.shape[-1]
    if n < min_len or n & (n - 1):
        raise EncodingError(f"pixel count {n} is not a power of two >= {min_len}")
    return pixels


def amplitude_encode(pixels: np.ndarray) -> np.ndarray:
    """Normalized pixel vector as real amplitudes; works on a batch along axis 0."""
    pixels = _check_pixels(pixels)
    norm = np.linalg.norm(pixels, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise EncodingError("cannot amplitude-encode an all-zero image")
    return (pixels / norm).astype(complex)


def compressed_amplitude_encode(pixels: np.ndarray) -> np.ndarray:
    """Pack pixel pairs into complex amplitudes ``p[2j] + i p[2j+1]`` (one qubit fewer)."""
    pixels = _check_pixels(pixels, min_len=2)
    amps = pixels[..., 0::2] + 1j * pixels[..., 1::2]
    norm = np.linalg.norm(amps, axis=-1, keepdims=True)
    if np.any(norm == 0):
        raise EncodingError("cannot amplitude-encode an all-zero image")
    return amps / norm


ENCODERS = {"amplitude": amplitude_encode, "compressed": compressed_amplitude_encode}


def qubits_for(pixels: int, encoding: str = "amplitude") -> int:
    n = int(pixels).bit_length() - 1
    return n - 1 if encoding == "compressed" else n


# --- batching and splits -------------------------------------------------------------

def batches(d: Dataset, batch_size: int, seed: int) -> Iterator[np.ndarray]:
    """Index arrays of one shuffled pass over ``d``; the last batch may be short."""
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    order = np.random.default_rng(seed).permutation(len(d))
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


def split(d: Dataset, test_size: int, seed: int) -> tuple[Dataset, Dataset]:
    """Random (train, test) split with ``test_size`` test samples."""
    if not 0 < test_size < len(d):
        raise ValueError(f"test_size {test_size} invalid for {len(d)} samples")
    order = np.random.default_rng(seed).permutation(len(d))
    return d.subset(np.sort(order[test_size:])), d.subset(np.sort(order[:test_size]))


def synthetic_dataset(seed: int, num_classes: int, pixels_per_image: int,
                      samples_per_class: int, noise: float = 0.1) -> Dataset:
    """Gaussian bumps at class-specific positions plus uniform noise of amplitude ``noise``.

    Class centres sit on a circle around the image centre; samples are ordered by class.
    """
    if num_classes < 1 or samples_per_class < 1:
        raise ValueError("counts must be positive")
    h, w = target_shape(pixels_per_image)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    cy, cx = (h - 1) / 2, (w - 1) / 2
    radius = 0.3 * min(h, w)
    width = max(min(h, w) / 6, 0.5)
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for c in range(num_classes):
        ang = 2 * np.pi * c / num_classes
        py, px = cy + radius * np.sin(ang), cx + radius * np.cos(ang)
        template = np.exp(-((yy - py) ** 2 + (xx - px) ** 2) / (2 * width**2))
        jitter = noise * rng.uniform(-1, 1, size=(samples_per_class, h, w))
        images.append(np.clip(template + jitter, 0.0, 1.0))
        labels.append(np.full(samples_per_class, c))
    return Dataset(np.concatenate(images), np.concatenate(labels).astype(np.int64), num_classes)


# --- binary container ----------------------------------------------------------------

def write_container(path, d: Dataset) -> None:
    """Header ``<4sIIIIII``: magic, version, count, height, width, num_classes, reserved;
    then ``count`` little-endian int32 labels and float32 pixels in row-major order."""
    h, w = d.shape
    with open(path, "wb") as f:
        f.write(_CONTAINER_HEADER.pack(CONTAINER_MAGIC, CONTAINER_VERSION, len(d), h, w,
                                       d.num_classes, 0))
        f.write(d.labels.astype("<i4").tobytes())
        f.write(d.images.astype("<f4").tobytes())


def read_container(path) -> Dataset:
    raw = Path(path).read_bytes()
    if len(raw) < _CONTAINER_HEADER.size:
        raise DatasetError(f"{path}: truncated header")
    magic, version, count, h, w, k, _ = _CONTAINER_HEADER.unpack_from(raw)
    if magic != CONTAINER_MAGIC or version != CONTAINER_VERSION:
        raise DatasetError(f"{path}: not a version-{CONTAINER_VERSION} dataset container")
    off = _CONTAINER_HEADER.size
    need = off + 4 * count + 4 * count * h * w
    if len(raw) != need:
        raise DatasetError(f"{path}: expected {need} bytes, found {len(raw)}")
    labels = np.frombuffer(raw, "<i4", count, off).astype(np.int64)
    images = np.frombuffer(raw, "<f4", count * h * w, off + 4 * count).reshape(count, h, w)
    return Dataset(images.copy(), labels, k)


def dataset_stats(d: Dataset) -> dict:
    counts = np.bincount(d.labels, minlength=d.num_classes)
    return {
        "num_samples": len(d),
        "shape": list(d.shape),
        "num_classes": d.num_classes,
        "class_counts": [int(c) for c in counts],
        "min": float(d.images.min()) if len(d) else None,
        "max": float(d.images.max()) if len(d) else None,
        "mean": float(d.images.mean()) if len(d) else None,
    }
