"""Class-balanced subset generation.

Random subsets draw n images per class uniformly without replacement.
Selected subsets oversample n+m per class and then discard the m excess
according to one of four RMSD-based strategies, each with a positive and
a negative direction:

  uniqueness   iteratively eliminates one member of the closest (positive)
               or farthest (negative) surviving pair, judged by its
               second-nearest (second-farthest) surviving neighbor
  global_mean  scores each image by its mean RMSD to the 10 class-mean
               images; positive keeps the n largest scores
  other_mean   scores by the maximum RMSD to the other 9 class means;
               positive keeps the n largest ("least like other digits")
  own_mean     scores by RMSD to the image's own class mean; positive
               keeps the n smallest ("most like their own class")

Tie rule everywhere: ties resolve toward the lower parent index (keep the
lower index in top-n selections, eliminate the lower index in uniqueness;
tied pairs resolve to the lexicographically smallest index pair). Pools
are kept in ascending parent-index order so pool position order equals
parent index order.
"""

from dataclasses import dataclass, replace

import numpy as np

from .idx import N_CLASSES, LabeledDataset
from .metrics import class_mean_images, pairwise_rmsd, rmsd_to_references
from .seeds import derive_seed

STRATEGIES = ("random", "uniqueness", "global_mean", "other_mean", "own_mean")
SELECTED_STRATEGIES = ("uniqueness", "global_mean", "other_mean", "own_mean")
DIRECTIONS = ("positive", "negative")


class SelectionError(ValueError):
    """Raised when a subset recipe cannot be satisfied."""


def make_subset_id(n, strategy, direction, m, replicate) -> str:
    return f"n{n:04d}-{strategy}-{direction}-m{m:04d}-r{replicate:03d}"


@dataclass
class SubsetSpec:
    """Recipe for one subset: per-class parent indices plus provenance."""

    subset_id: str
    strategy: str
    direction: str
    n: int
    m: int
    seed: int
    replicate: int
    class_indices: list  # 10 sorted int64 arrays of length n

    def all_indices(self) -> np.ndarray:
        return np.concatenate(self.class_indices)

    def total_size(self) -> int:
        return sum(len(ix) for ix in self.class_indices)


def sample_random_balanced(parent: LabeledDataset, n: int, seed: int, replicate: int = 0) -> SubsetSpec:
    """Draw n indices per class uniformly without replacement."""
    pools = _draw_pools(parent, n, 0, seed)
    return SubsetSpec(
        subset_id=make_subset_id(n, "random", "none", 0, replicate),
        strategy="random",
        direction="none",
        n=n,
        m=0,
        seed=seed,
        replicate=replicate,
        class_indices=pools,
    )


def oversample_pool(parent: LabeledDataset, n: int, m: int, seed: int) -> list:
    """Per-class lists of n+m distinct parent indices, uniform without replacement."""
    return _draw_pools(parent, n, m, seed)


def _draw_pools(parent, n, m, seed):
    rng = np.random.default_rng(seed)
    pools = []
    for k in range(N_CLASSES):
        available = parent.class_index[k]
        if n + m > len(available):
            raise SelectionError(
                f"class {k}: pool of {n + m} exceeds the {len(available)} parent images"
            )
        chosen = rng.choice(available, size=n + m, replace=False)
        pools.append(np.sort(chosen).astype(np.int64))
    return pools


def _second_extreme(row, largest):
    """Second-smallest (or second-largest) finite entry of a masked distance row."""
    if largest:
        return np.partition(row, row.size - 2)[row.size - 2]
    return np.partition(row, 1)[1]


def select_uniqueness(pool_images, n: int, direction: str) -> np.ndarray:
    """Iterative pair elimination; returns sorted kept positions into the pool.

    Positive selection: find the surviving pair with the smallest RMSD; of
    its two members, eliminate the one whose second-nearest surviving
    neighbor is closer. Negative selection mirrors this with the farthest
    pair and second-farthest neighbors, eliminating the member whose
    second-farthest neighbor is farther. Repeats until n images remain.
    Second-neighbor distances are recomputed within the surviving pool
    after every elimination.
    """
    pool_images = np.asarray(pool_images, dtype=np.float64)
    p = pool_images.shape[0]
    if n > p:
        raise SelectionError(f"cannot keep {n} images from a pool of {p}")
    if n == p:
        return np.arange(p)
    positive = _check_direction(direction) == "positive"
    sentinel = np.inf if positive else -np.inf

    work = pairwise_rmsd(pool_images)
    np.fill_diagonal(work, sentinel)
    alive = np.ones(p, dtype=bool)
    for _ in range(p - n):
        if alive.sum() < 3:
            raise SelectionError(
                "uniqueness elimination needs at least 3 surviving images "
                "to define a second neighbor"
            )
        flat = np.argmin(work) if positive else np.argmax(work)
        i, j = divmod(int(flat), p)  # i < j on ties: row-major scan
        d_i = _second_extreme(work[i], largest=not positive)
        d_j = _second_extreme(work[j], largest=not positive)
        if positive:
            drop = i if d_i <= d_j else j  # tie eliminates the lower index
        else:
            drop = i if d_i >= d_j else j
        work[drop, :] = sentinel
        work[:, drop] = sentinel
        alive[drop] = False
    return np.flatnonzero(alive)


def _check_direction(direction):
    if direction not in DIRECTIONS:
        raise SelectionError(f"unknown direction {direction!r}")
    return direction


def _keep_by_score(scores, positions, n, keep_largest):
    """Top-n (or bottom-n) positions by score; ties keep the lower position."""
    scores = np.asarray(scores, dtype=np.float64)
    key = -scores if keep_largest else scores
    order = np.lexsort((positions, key))
    return np.sort(positions[order[:n]])


def select_global_mean(pool_images, mean_images, n: int, direction: str) -> np.ndarray:
    """Score = mean RMSD to the 10 class means; positive keeps the n largest."""
    positive = _check_direction(direction) == "positive"
    scores = rmsd_to_references(pool_images, mean_images).mean(axis=1)
    return _keep_by_score(scores, np.arange(len(scores)), n, keep_largest=positive)


def select_other_mean(pool_images, class_of_pool: int, mean_images, n: int, direction: str) -> np.ndarray:
    """Score = max RMSD to the other classes' means; positive keeps the n largest."""
    positive = _check_direction(direction) == "positive"
    others = [k for k in range(len(mean_images)) if k != class_of_pool]
    scores = rmsd_to_references(pool_images, np.asarray(mean_images)[others]).max(axis=1)
    return _keep_by_score(scores, np.arange(len(scores)), n, keep_largest=positive)


def select_own_mean(pool_images, class_of_pool: int, mean_images, n: int, direction: str) -> np.ndarray:
    """Score = RMSD to the image's own class mean; positive keeps the n smallest."""
    positive = _check_direction(direction) == "positive"
    scores = rmsd_to_references(pool_images, np.asarray(mean_images)[class_of_pool : class_of_pool + 1])[:, 0]
    return _keep_by_score(scores, np.arange(len(scores)), n, keep_largest=not positive)


def build_selected_spec(
    parent: LabeledDataset,
    mean_images,
    strategy: str,
    direction: str,
    n: int,
    m: int,
    seed: int,
    replicate: int,
) -> SubsetSpec:
    """Oversample n+m per class, apply the strategy, and record the survivors."""
    if strategy not in SELECTED_STRATEGIES:
        raise SelectionError(f"unknown selection strategy {strategy!r}")
    if m < 1:
        raise SelectionError("selected subsets require m >= 1 excess images")
    pools = oversample_pool(parent, n, m, seed)
    kept_lists = []
    for k in range(N_CLASSES):
        pool_images = parent.images[pools[k]]
        if strategy == "uniqueness":
            kept = select_uniqueness(pool_images, n, direction)
        elif strategy == "global_mean":
            kept = select_global_mean(pool_images, mean_images, n, direction)
        elif strategy == "other_mean":
            kept = select_other_mean(pool_images, k, mean_images, n, direction)
        else:
            kept = select_own_mean(pool_images, k, mean_images, n, direction)
        kept_lists.append(pools[k][kept])
    return SubsetSpec(
        subset_id=make_subset_id(n, strategy, direction, m, replicate),
        strategy=strategy,
        direction=direction,
        n=n,
        m=m,
        seed=seed,
        replicate=replicate,
        class_indices=kept_lists,
    )


@dataclass(frozen=True)
class SelectionGrid:
    """Sizes, oversample grid, and replicate counts for one experiment."""

    sizes: tuple = (10, 30, 100, 300, 1000)
    m_values: tuple = (6, 10, 20, 30, 60, 100, 200, 300, 600, 1000)
    strategies: tuple = SELECTED_STRATEGIES
    directions: tuple = DIRECTIONS
    random_replicates: int = 100
    selected_replicates: int = 5

    def selected_per_size(self) -> int:
        return (
            len(self.strategies)
            * len(self.directions)
            * len(self.m_values)
            * self.selected_replicates
        )

    def spec_count(self) -> int:
        return len(self.sizes) * (self.random_replicates + self.selected_per_size())

    def scaled(self, factor: float) -> "SelectionGrid":
        """Shrink replicate counts by `factor`, thinning the m grid once the
        per-cell replicate count would drop below one. Sizes never shrink:
        the scaling-law checks need the full size axis."""
        if not 0.0 < factor <= 1.0:
            raise ValueError(f"scale factor must be in (0, 1], got {factor}")
        if factor == 1.0:
            return self
        random_reps = max(1, round(self.random_replicates * factor))
        cell = self.selected_replicates * factor
        if cell >= 1.0:
            return replace(self, random_replicates=random_reps, selected_replicates=round(cell))
        n_m = max(1, round(len(self.m_values) * cell))
        step = len(self.m_values) / n_m
        kept_m = tuple(self.m_values[int((i + 0.5) * step)] for i in range(n_m))
        return replace(
            self, random_replicates=random_reps, selected_replicates=1, m_values=kept_m
        )


def generate_grid(parent: LabeledDataset, grid: SelectionGrid, master_seed: int) -> list:
    """Deterministic fan-out of one SubsetSpec per grid cell and replicate.

    Each spec's RNG seed is derived by hashing (master_seed, cell
    coordinates, replicate), so any sub-grid regenerates the identical
    specs. Replicates draw independent oversample pools.
    """
    needs_means = any(s != "uniqueness" for s in grid.strategies)
    means = class_mean_images(parent) if needs_means else None
    specs = []
    for n in grid.sizes:
        for rep in range(grid.random_replicates):
            seed = derive_seed(master_seed, "spec", n, "random", "none", 0, rep)
            specs.append(sample_random_balanced(parent, n, seed, replicate=rep))
        for strategy in grid.strategies:
            for direction in grid.directions:
                for m in grid.m_values:
                    for rep in range(grid.selected_replicates):
                        seed = derive_seed(master_seed, "spec", n, strategy, direction, m, rep)
                        specs.append(
                            build_selected_spec(
                                parent, means, strategy, direction, n, m, seed, rep
                            )
                        )
    return specs


def subset_overlap(a: SubsetSpec, b: SubsetSpec) -> float:
    """Percent of images the two equal-size subsets have in common."""
    if a.n != b.n:
        raise SelectionError(f"overlap undefined for sizes n={a.n} vs n={b.n}")
    shared = len(np.intersect1d(a.all_indices(), b.all_indices(), assume_unique=True))
    return 100.0 * shared / a.total_size()


def write_spec_file(path, specs) -> None:
    """One plain-text record per subset; stable field order (see README)."""
    lines = ["# subsetbench specs v1"]
    for spec in specs:
        lines.append(f"subset_id={spec.subset_id}")
        lines.append(f"strategy={spec.strategy}")
        lines.append(f"direction={spec.direction}")
        lines.append(f"n={spec.n}")
        lines.append(f"m={spec.m}")
        lines.append(f"seed={spec.seed}")
        lines.append(f"replicate={spec.replicate}")
        for k in range(N_CLASSES):
            joined = ",".join(str(int(i)) for i in spec.class_indices[k])
            lines.append(f"class_{k}={joined}")
        lines.append("")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_spec_file(path) -> list:
    specs = []
    record = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                if record:
                    specs.append(_record_to_spec(record))
                    record = {}
                continue
            if line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            record[key] = value
    if record:
        specs.append(_record_to_spec(record))
    return specs


def _record_to_spec(record) -> SubsetSpec:
    class_indices = []
    for k in range(N_CLASSES):
        text = record[f"class_{k}"]
        values = [int(tok) for tok in text.split(",")] if text else []
        class_indices.append(np.asarray(values, dtype=np.int64))
    return SubsetSpec(
        subset_id=record["subset_id"],
        strategy=record["strategy"],
        direction=record["direction"],
        n=int(record["n"]),
        m=int(record["m"]),
        seed=int(record["seed"]),
        replicate=int(record["replicate"]),
        class_indices=class_indices,
    )
