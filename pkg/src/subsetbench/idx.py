"""IDX binary container parsing for MNIST-format image and label files.

The canonical distribution stores images as IDX3 (magic 0x00000803,
big-endian u32 dims, then raw unsigned bytes) and labels as IDX1 (magic
0x00000801). Gzipped files are detected by their two-byte signature and
decompressed transparently. Pixels are normalized to [0, 1] exactly as
raw_byte / 255 at load time so distances and all models share one scale.
"""

import gzip
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

IMAGE_ROWS = 28
IMAGE_COLS = 28
N_PIXELS = IMAGE_ROWS * IMAGE_COLS
N_CLASSES = 10

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801

TRAIN_IMAGES_NAME = "train-images-idx3-ubyte"
TRAIN_LABELS_NAME = "train-labels-idx1-ubyte"
TEST_IMAGES_NAME = "t10k-images-idx3-ubyte"
TEST_LABELS_NAME = "t10k-labels-idx1-ubyte"


class IdxFormatError(ValueError):
    """Raised when a file violates the IDX container contract."""


def _read_raw(path) -> bytes:
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def load_idx_images(path) -> np.ndarray:
    """Parse an IDX3 image file into a float64 array of shape (count, 784).

    Pixel values are raw_byte / 255, so they lie on the 1/255 grid in [0, 1].
    """
    raw = _read_raw(path)
    if len(raw) < 16:
        raise IdxFormatError(f"{path}: truncated header, {len(raw)} bytes < 16")
    magic, count, rows, cols = struct.unpack(">IIII", raw[:16])
    if magic == LABELS_MAGIC:
        raise IdxFormatError(
            f"{path}: magic 0x{magic:08x} marks a labels file passed where images expected"
        )
    if magic != IMAGES_MAGIC:
        raise IdxFormatError(f"{path}: bad magic 0x{magic:08x}, expected 0x{IMAGES_MAGIC:08x}")
    if rows != IMAGE_ROWS or cols != IMAGE_COLS:
        raise IdxFormatError(f"{path}: dims field says {rows}x{cols}, expected 28x28")
    expected = 16 + count * N_PIXELS
    if len(raw) != expected:
        raise IdxFormatError(
            f"{path}: count field says {count} images ({expected} bytes) but file holds {len(raw)}"
        )
    data = np.frombuffer(raw, dtype=np.uint8, count=count * N_PIXELS, offset=16)
    return data.reshape(count, N_PIXELS).astype(np.float64) / 255.0


def load_idx_labels(path) -> np.ndarray:
    """Parse an IDX1 label file into an int64 array of class ids in 0..9."""
    raw = _read_raw(path)
    if len(raw) < 8:
        raise IdxFormatError(f"{path}: truncated header, {len(raw)} bytes < 8")
    magic, count = struct.unpack(">II", raw[:8])
    if magic == IMAGES_MAGIC:
        raise IdxFormatError(
            f"{path}: magic 0x{magic:08x} marks an images file passed where labels expected"
        )
    if magic != LABELS_MAGIC:
        raise IdxFormatError(f"{path}: bad magic 0x{magic:08x}, expected 0x{LABELS_MAGIC:08x}")
    if len(raw) != 8 + count:
        raise IdxFormatError(
            f"{path}: count field says {count} labels but file holds {len(raw) - 8}"
        )
    labels = np.frombuffer(raw, dtype=np.uint8, count=count, offset=8)
    if labels.size and labels.max() > 9:
        raise IdxFormatError(f"{path}: label byte {labels.max()} out of range 0..9")
    return labels.astype(np.int64)


def write_idx_images(path, images) -> None:
    """Write images (n, 784) in [0, 1] back to IDX3 bytes (inverse of load)."""
    images = np.asarray(images, dtype=np.float64)
    if images.ndim != 2 or images.shape[1] != N_PIXELS:
        raise ValueError(f"expected shape (n, {N_PIXELS}), got {images.shape}")
    payload = np.rint(images * 255.0).astype(np.uint8)
    header = struct.pack(">IIII", IMAGES_MAGIC, images.shape[0], IMAGE_ROWS, IMAGE_COLS)
    Path(path).write_bytes(header + payload.tobytes())


def write_idx_labels(path, labels) -> None:
    """Write class ids back to IDX1 bytes (inverse of load)."""
    labels = np.asarray(labels)
    header = struct.pack(">II", LABELS_MAGIC, labels.shape[0])
    Path(path).write_bytes(header + labels.astype(np.uint8).tobytes())


@dataclass
class LabeledDataset:
    """Parallel image/label arrays with per-class position lists."""

    images: np.ndarray  # (n, 784) float64 in [0, 1]
    labels: np.ndarray  # (n,) int64 in 0..9
    class_index: list  # class_index[k]: sorted array of positions with label k

    def __len__(self) -> int:
        return len(self.labels)

    def per_class_counts(self) -> list:
        return [len(ix) for ix in self.class_index]

    def subset(self, positions) -> "LabeledDataset":
        """Materialize the dataset restricted to the given positions."""
        positions = np.asarray(positions, dtype=np.int64)
        return build_dataset(self.images[positions], self.labels[positions])


def build_dataset(images, labels) -> LabeledDataset:
    """Assemble a LabeledDataset, indexing positions by class."""
    images = np.ascontiguousarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if images.ndim != 2:
        raise ValueError(f"images must be 2-D (n, pixels), got ndim={images.ndim}")
    if len(images) != len(labels):
        raise ValueError(f"length mismatch: {len(images)} images vs {len(labels)} labels")
    if labels.size and (labels.min() < 0 or labels.max() >= N_CLASSES):
        raise ValueError(f"labels outside 0..{N_CLASSES - 1}")
    if images.size and (images.min() < 0.0 or images.max() > 1.0):
        raise ValueError("pixel values outside [0, 1]")
    class_index = [np.flatnonzero(labels == k) for k in range(N_CLASSES)]
    images.flags.writeable = False
    labels.flags.writeable = False
    return LabeledDataset(images=images, labels=labels, class_index=class_index)


def _find_idx_file(data_dir: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz"):
        candidate = data_dir / name
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"{stem}[.gz] not found under {data_dir}")


def load_dataset_pair(images_path, labels_path) -> LabeledDataset:
    return build_dataset(load_idx_images(images_path), load_idx_labels(labels_path))


def load_train_test(data_dir) -> tuple:
    """Load the fixed train/test split from canonical file names in data_dir."""
    data_dir = Path(data_dir)
    train = load_dataset_pair(
        _find_idx_file(data_dir, TRAIN_IMAGES_NAME), _find_idx_file(data_dir, TRAIN_LABELS_NAME)
    )
    test = load_dataset_pair(
        _find_idx_file(data_dir, TEST_IMAGES_NAME), _find_idx_file(data_dir, TEST_LABELS_NAME)
    )
    return train, test
