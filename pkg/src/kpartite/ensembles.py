"""Random k-producible and k-separable states.

These are the soundness oracles for the criteria: every state produced here
is, by construction, a convex mixture of pure states that factor over a
partition obeying the requested constraint.

All functions take an explicit ``numpy.random.Generator``; the same seed
gives bit-identical states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import config
from .qstate import DenseState, PureStateSparse, StateError, check_dims, pure_from_vector

MAX_PART_SIZE = "max_part_size"
EXACTLY_K_PARTS = "exactly_k_parts"
MODES = (MAX_PART_SIZE, EXACTLY_K_PARTS)

MAX_REJECTIONS = 100_000


@dataclass(frozen=True)
class PartitionSpec:
    """Disjoint site sets covering ``range(n_sites)``; sites are 0-based."""

    parts: tuple[tuple[int, ...], ...]

    @property
    def n_sites(self) -> int:
        return sum(len(p) for p in self.parts)

    def check(self, n_sites: int, mode: str | None = None, k: int | None = None) -> None:
        sites = sorted(s for part in self.parts for s in part)
        if sites != list(range(n_sites)):
            raise StateError(f"{self.parts} is not a partition of {n_sites} sites")
        if mode == MAX_PART_SIZE and max(len(p) for p in self.parts) > k:
            raise StateError(f"{self.parts} has a part larger than {k}")
        if mode == EXACTLY_K_PARTS and len(self.parts) != k:
            raise StateError(f"{self.parts} does not have exactly {k} parts")


@lru_cache(maxsize=None)
def _completions(remaining: int, blocks: int, target: int | None) -> int:
    """Restricted-growth completions; ``target`` fixes the final block count."""
    if remaining == 0:
        return 1 if target is None or blocks == target else 0
    if target is not None and blocks > target:
        return 0
    return blocks * _completions(remaining - 1, blocks, target) + _completions(
        remaining - 1, blocks + 1, target
    )


def _uniform_set_partition(n: int, rng: np.random.Generator, target: int | None) -> list[list[int]]:
    """Uniform set partition of ``range(n)``, optionally with exactly ``target`` blocks."""
    blocks: list[list[int]] = [[0]]
    for site in range(1, n):
        rem = n - site - 1
        w_join = _completions(rem, len(blocks), target)
        w_new = _completions(rem, len(blocks) + 1, target)
        u = rng.integers(0, len(blocks) * w_join + w_new)
        if u < len(blocks) * w_join:
            blocks[u // w_join].append(site)
        else:
            blocks.append([site])
    return blocks


def random_partition(n_sites: int, mode: str, k: int, rng: np.random.Generator) -> PartitionSpec:
    """Uniformly random partition under a part-size cap or a fixed part count."""
    if mode not in MODES:
        raise StateError(f"unknown mode {mode!r}")
    if mode == MAX_PART_SIZE and not 1 <= k <= n_sites:
        raise StateError(f"max part size must be in [1, {n_sites}], got {k}")
    if mode == EXACTLY_K_PARTS and not 2 <= k <= n_sites:
        raise StateError(f"part count must be in [2, {n_sites}], got {k}")

    if mode == EXACTLY_K_PARTS:
        blocks = _uniform_set_partition(n_sites, rng, k)
    elif k == 1:
        blocks = [[i] for i in range(n_sites)]
    else:
        for _ in range(MAX_REJECTIONS):
            blocks = _uniform_set_partition(n_sites, rng, None)
            if max(len(b) for b in blocks) <= k:
                break
        else:
            raise StateError(f"rejection sampling failed for N={n_sites}, max part {k}")
    spec = PartitionSpec(tuple(tuple(b) for b in blocks))
    spec.check(n_sites, mode, k)
    return spec


def haar_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def random_pure_dense(partition: PartitionSpec, dims, rng: np.random.Generator) -> np.ndarray:
    """State vector of a tensor product of Haar-random states, one per part."""
    dims = check_dims(dims)
    partition.check(len(dims))
    tensor = np.ones((), dtype=np.complex128)
    order: list[int] = []
    for part in partition.parts:
        local_dims = [dims[s] for s in part]
        block = haar_vector(math.prod(local_dims), rng).reshape(local_dims)
        tensor = np.multiply.outer(tensor, block)
        order.extend(part)
    # axes are in `order`; move them back to site order
    tensor = np.transpose(tensor, np.argsort(order))
    return tensor.reshape(-1)


def random_pure_for_partition(partition: PartitionSpec, dims, rng: np.random.Generator) -> PureStateSparse:
    return pure_from_vector(random_pure_dense(partition, dims, rng), dims)


def random_mixed(
    dims,
    mode: str,
    k: int,
    n_components: int,
    rng: np.random.Generator,
    cap: int | None = None,
) -> DenseState:
    """Dirichlet-weighted mixture of ``n_components`` pure states, each on its own random partition."""
    dims = check_dims(dims)
    cap = config.DENSE_CAP if cap is None else cap
    D = math.prod(dims)
    if D > cap:
        raise StateError(f"dimension {D} exceeds dense cap {cap}")
    if n_components < 1:
        raise StateError("need at least one component")
    weights = rng.dirichlet(np.ones(n_components))
    m = np.zeros((D, D), dtype=np.complex128)
    for w in weights:
        part = random_partition(len(dims), mode, k, rng)
        v = random_pure_dense(part, dims, rng)
        m += w * np.outer(v, v.conj())
    m = (m + m.conj().T) / 2
    return DenseState(m / np.trace(m).real, dims)


def random_density(dims, rng: np.random.Generator, rank: int | None = None) -> DenseState:
    """Ginibre-random density matrix of the given rank (full rank by default); no structure imposed."""
    dims = check_dims(dims)
    D = math.prod(dims)
    rank = D if rank is None else rank
    x = rng.standard_normal((D, rank)) + 1j * rng.standard_normal((D, rank))
    m = x @ x.conj().T
    m = (m + m.conj().T) / 2
    return DenseState(m / np.trace(m).real, dims)
