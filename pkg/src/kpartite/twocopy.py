"""Two-copy permutation expectation values.

For a product fiducial ``|Phi> = |phi1>|phi2>`` the two-copy quantities reduce
to single-copy matrix elements::

    <Phi| rho (x) rho P |Phi>              = |<phi1|rho|phi2>|^2
    <Phi| P_a^+ rho (x) rho P_a |Phi>      = <a|rho|a> <b|rho|b>

where ``a`` takes ``phi2``'s local factors on the sites in the mask and
``phi1``'s elsewhere, and ``b`` is the opposite choice. The reductions are the
production path; :func:`oracle_two_copy` builds ``rho (x) rho`` and the
permutation matrices explicitly and exists to check them.

Masks are plain integers; bit ``i`` set means site ``i`` is in the subset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from . import config
from .qstate import (
    DenseState,
    DensityOperator,
    MixtureState,
    Product,
    StateError,
    as_local_vectors,
    as_product,
    label_to_flat,
    matrix_element,
    product_dense,
    strides,
)


@dataclass(frozen=True, eq=False)
class SwapFiducial:
    """The pair of product vectors ``(phi1, phi2)`` forming ``|Phi>``."""

    phi1: Product
    phi2: Product

    @classmethod
    def basis(cls, x, y) -> "SwapFiducial":
        return cls(tuple(int(a) for a in x), tuple(int(a) for a in y))

    def checked(self, dims) -> "SwapFiducial":
        return SwapFiducial(as_product(self.phi1, dims), as_product(self.phi2, dims))

    @property
    def is_basis(self) -> bool:
        return not isinstance(self.phi1[0], np.ndarray) and not isinstance(self.phi2[0], np.ndarray)

    def swapped(self) -> "SwapFiducial":
        return SwapFiducial(self.phi2, self.phi1)


def full_mask(n_sites: int) -> int:
    return (1 << n_sites) - 1


def mask_sites(mask: int, n_sites: int) -> tuple[int, ...]:
    return tuple(i for i in range(n_sites) if mask >> i & 1)


def _check_proper(mask: int, n_sites: int) -> None:
    if not 0 < mask < full_mask(n_sites):
        raise StateError(f"subset mask {mask:#b} must be nonempty and proper for N={n_sites}")


def enumerate_proper_subsets(n_sites: int) -> Iterator[int]:
    """All ``2^N - 2`` nonempty proper subsets as masks, in binary-reflected Gray-code order."""
    if not 2 <= n_sites <= 30:
        raise StateError(f"N must be in [2, 30], got {n_sites}")
    full = full_mask(n_sites)
    for i in range(1, 1 << n_sites):
        g = i ^ (i >> 1)
        if g != full:
            yield g


def _mixed_product(fid: SwapFiducial, mask: int, n_sites: int) -> Product:
    """Product vector taking ``phi2`` on the mask and ``phi1`` off it."""
    return tuple(fid.phi2[i] if mask >> i & 1 else fid.phi1[i] for i in range(n_sites))


def swap_expectation(rho: DensityOperator, fid: SwapFiducial) -> float:
    """``<Phi|rho (x) rho P|Phi> = |<phi1|rho|phi2>|^2``."""
    fid = fid.checked(rho.dims)
    return abs(matrix_element(rho, fid.phi1, fid.phi2)) ** 2


def partial_swap_expectation(rho: DensityOperator, fid: SwapFiducial, mask: int) -> float:
    """``<Phi|P_a^+ rho (x) rho P_a|Phi>`` for the subset ``mask``."""
    n = rho.n_sites
    _check_proper(mask, n)
    fid = fid.checked(rho.dims)
    a = _mixed_product(fid, mask, n)
    b = _mixed_product(fid, full_mask(n) ^ mask, n)
    return matrix_element(rho, a, a).real * matrix_element(rho, b, b).real


# ---------------------------------------------------------------------------
# Vectorised diagonals over all masks
# ---------------------------------------------------------------------------

def _mask_bits(masks: np.ndarray, n_sites: int) -> np.ndarray:
    return (masks[:, None] >> np.arange(n_sites, dtype=np.int64)) & 1


def mask_diagonals(rho: DensityOperator, fid: SwapFiducial, masks: np.ndarray) -> np.ndarray:
    """Real diagonal elements ``<a_m|rho|a_m>`` for every mask ``m`` in ``masks``."""
    dims = rho.dims
    n = len(dims)
    fid = fid.checked(dims)
    masks = np.asarray(masks, dtype=np.int64)
    bits = _mask_bits(masks, n)
    if fid.is_basis:
        x = np.asarray(fid.phi1, dtype=np.int64)
        y = np.asarray(fid.phi2, dtype=np.int64)
        st = strides(dims)
        flat = label_to_flat(fid.phi1, dims) + bits @ ((y - x) * st)
        return rho.basis_elements(flat, flat).real

    xs = as_local_vectors(fid.phi1, dims)
    ys = as_local_vectors(fid.phi2, dims)
    # local factor chosen per mask and site: (n_masks, d_i)
    local = [np.where(bits[:, i, None] == 1, ys[i][None, :], xs[i][None, :]) for i in range(n)]
    if isinstance(rho, DenseState):
        vecs = np.ones((len(masks), 1), dtype=np.complex128)
        for a in local:
            vecs = (vecs[:, :, None] * a[:, None, :]).reshape(len(masks), -1)
        return np.einsum("md,md->m", vecs.conj(), vecs @ rho.matrix.T).real
    out = np.zeros(len(masks))
    for w, s in rho.components:
        labels = s.labels
        factors = np.ones((len(masks), s.n_terms), dtype=np.complex128)
        for i, a in enumerate(local):
            factors *= np.conj(a)[:, labels[:, i]]
        out += w * np.abs(factors @ s.amplitudes) ** 2
    if rho.noise_weight:
        # <a|a> = 1 for normalised local factors
        out += rho.noise_weight / rho.dim
    return out


def partial_swap_sum(rho: DensityOperator, fid: SwapFiducial, chunk: int | None = None) -> float:
    """Sum over all nonempty proper subsets of ``sqrt(<Phi|P_a^+ rho (x) rho P_a|Phi>)``.

    Masks are streamed in blocks so memory stays bounded up to the site cap.
    """
    n = rho.n_sites
    if n > config.MAX_SUBSET_SITES:
        raise StateError(f"subset sum capped at N <= {config.MAX_SUBSET_SITES}, got {n}")
    chunk = config.SUBSET_CHUNK if chunk is None else chunk
    fid = fid.checked(rho.dims)
    full = full_mask(n)
    total = 0.0
    for start in range(1, full, chunk):
        masks = np.arange(start, min(start + chunk, full), dtype=np.int64)
        prod = mask_diagonals(rho, fid, masks) * mask_diagonals(rho, fid, full ^ masks)
        total += float(np.sqrt(np.maximum(prod, 0.0)).sum())
    return total


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def permutation_matrix(dims, mask: int | None = None) -> np.ndarray:
    """Explicit 0/1 matrix of ``P`` (``mask=None``) or ``P_mask`` on two copies.

    Two-copy basis states are ``|i>|j>`` with flat index ``i * D + j``. The
    result is cached and read-only.
    """
    return _permutation_matrix(tuple(int(d) for d in dims), mask)


@lru_cache(maxsize=256)
def _permutation_matrix(dims: tuple[int, ...], mask: int | None) -> np.ndarray:
    n = len(dims)
    D = math.prod(dims)
    mask = full_mask(n) if mask is None else mask
    idx = np.arange(D)
    digits = np.stack(np.unravel_index(idx, dims), axis=1)  # (D, n)
    first = np.repeat(digits, D, axis=0)
    second = np.tile(digits, (D, 1))
    swap = np.array([mask >> i & 1 for i in range(n)], dtype=bool)
    new_first = np.where(swap, second, first)
    new_second = np.where(swap, first, second)
    src = np.arange(D * D)
    dst = (np.ravel_multi_index(new_first.T, dims) * D
           + np.ravel_multi_index(new_second.T, dims))
    out = np.zeros((D * D, D * D))
    out[dst, src] = 1.0
    out.setflags(write=False)
    return out


class TwoCopyOracle:
    """Explicit ``rho (x) rho`` built once, queried for many fiducials and subsets."""

    def __init__(self, rho: DenseState, cap: int | None = None):
        cap = config.TWO_COPY_CAP if cap is None else cap
        D = rho.dim
        if D * D > cap:
            raise StateError(f"two-copy dimension {D * D} exceeds oracle cap {cap}")
        self.dims = rho.dims
        m = rho.matrix
        self.big = np.multiply.outer(m, m).transpose(0, 2, 1, 3).reshape(D * D, D * D)

    def value(self, fid: SwapFiducial, mask: int | None = None) -> float:
        """``<Phi|rho(x)rho P|Phi>``, or ``<Phi|P_a^+ rho(x)rho P_a|Phi>`` for a subset mask."""
        dims = self.dims
        if mask is not None:
            _check_proper(mask, len(dims))
        fid = fid.checked(dims)
        phi = np.outer(product_dense(fid.phi1, dims), product_dense(fid.phi2, dims)).ravel()
        if mask is None:
            value = phi.conj() @ self.big @ (permutation_matrix(dims) @ phi)
        else:
            moved = permutation_matrix(dims, mask) @ phi
            value = moved.conj() @ self.big @ moved
        if abs(value.imag) > 1e-10:
            raise ArithmeticError(f"oracle value has imaginary part {value.imag:.3e}")
        return float(value.real)


def oracle_two_copy(
    rho: DenseState,
    fid: SwapFiducial,
    mask: int | None = None,
    cap: int | None = None,
) -> float:
    """Brute-force ``<Phi|rho(x)rho P|Phi>`` or ``<Phi|P_a^+ rho(x)rho P_a|Phi>``."""
    return TwoCopyOracle(rho, cap).value(fid, mask)
