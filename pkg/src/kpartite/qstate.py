"""Multipartite pure and mixed states.

Two mixed-state representations are provided:

* :class:`DenseState` holds an explicit ``D x D`` density matrix.
* :class:`MixtureState` holds weighted sparse pure components plus an explicit
  white-noise weight. Matrix elements against product vectors are computed
  from the component amplitudes, so no ``D x D`` object is ever built.

Sites are indexed from 0, and flat basis indices follow the Kronecker
convention: site 0 is the most significant digit.

A *product vector* is passed either as a sequence of local basis labels
(``(0, 1, 1)``) or as a sequence of normalised local vectors, one per site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from . import config

Dims = tuple[int, ...]
Label = tuple[int, ...]
LocalVectors = tuple[np.ndarray, ...]
Product = Union[Label, LocalVectors]


class StateError(ValueError):
    """Inconsistent dimensions, labels, amplitudes or weights."""


# ---------------------------------------------------------------------------
# Dimensions, labels and product vectors
# ---------------------------------------------------------------------------

def check_dims(dims: Iterable[int]) -> Dims:
    """Validate a dimension vector and return it as a tuple."""
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise StateError(f"need at least 2 sites, got {len(dims)}")
    if any(d < 2 for d in dims):
        raise StateError(f"local dimensions must be >= 2, got {dims}")
    if math.prod(dims) >= 1 << 62:
        raise StateError(f"total dimension of {dims} overflows a 64-bit index")
    return dims


def strides(dims: Sequence[int]) -> np.ndarray:
    """Flat-index weight of each site."""
    out = np.ones(len(dims), dtype=np.int64)
    for i in range(len(dims) - 2, -1, -1):
        out[i] = out[i + 1] * dims[i + 1]
    return out


def check_label(label: Iterable[int], dims: Dims) -> Label:
    label = tuple(int(x) for x in label)
    if len(label) != len(dims):
        raise StateError(f"label {label} has {len(label)} sites, expected {len(dims)}")
    for x, d in zip(label, dims):
        if not 0 <= x < d:
            raise StateError(f"label {label} out of range for dims {dims}")
    return label


def label_to_flat(label: Sequence[int], dims: Dims) -> int:
    index = 0
    for x, d in zip(label, dims):
        index = index * d + int(x)
    return index


def flat_to_label(index: int, dims: Dims) -> Label:
    out = []
    for d in reversed(dims):
        index, x = divmod(int(index), d)
        out.append(x)
    return tuple(reversed(out))


def local_vector(amplitudes: Sequence[complex]) -> np.ndarray:
    """Normalise a local amplitude vector."""
    v = np.asarray(amplitudes, dtype=np.complex128).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise StateError("local vector has zero norm")
    return v / norm


def _is_label(v) -> bool:
    return all(isinstance(x, (int, np.integer)) for x in v)


def as_product(v, dims: Dims) -> Product:
    """Coerce ``v`` to a validated label tuple or tuple of local vectors."""
    if isinstance(v, np.ndarray) and v.ndim == 1 and np.issubdtype(v.dtype, np.integer):
        v = tuple(int(x) for x in v)
    if _is_label(v):
        return check_label(v, dims)
    if len(v) != len(dims):
        raise StateError(f"product vector has {len(v)} sites, expected {len(dims)}")
    out = []
    for i, (x, d) in enumerate(zip(v, dims)):
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < d:
                raise StateError(f"site {i}: label {x} out of range")
            e = np.zeros(d, dtype=np.complex128)
            e[x] = 1.0
            out.append(e)
            continue
        a = np.asarray(x, dtype=np.complex128).ravel()
        if a.shape != (d,):
            raise StateError(f"site {i}: local vector has shape {a.shape}, expected ({d},)")
        if abs(np.linalg.norm(a) - 1.0) > config.NORM_TOL:
            raise StateError(f"site {i}: local vector is not normalised")
        out.append(a)
    return tuple(out)


def as_local_vectors(v: Product, dims: Dims) -> LocalVectors:
    if isinstance(v[0], np.ndarray):
        return v
    out = []
    for x, d in zip(v, dims):
        e = np.zeros(d, dtype=np.complex128)
        e[x] = 1.0
        out.append(e)
    return tuple(out)


def product_dense(v: Product, dims: Dims) -> np.ndarray:
    """Full state vector of a product vector."""
    if _is_label(v):
        out = np.zeros(math.prod(dims), dtype=np.complex128)
        out[label_to_flat(v, dims)] = 1.0
        return out
    out = np.ones(1, dtype=np.complex128)
    for a in v:
        out = np.kron(out, a)
    return out


# ---------------------------------------------------------------------------
# Sparse pure states
# ---------------------------------------------------------------------------

def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureStateSparse:
    """Normalised pure state stored as sorted (flat index, amplitude) pairs."""

    dims: Dims
    flat: np.ndarray
    amplitudes: np.ndarray
    renormalized: bool = False

    @property
    def n_terms(self) -> int:
        return len(self.flat)

    @cached_property
    def labels(self) -> np.ndarray:
        """``(n_terms, N)`` array of local labels."""
        out = np.empty((len(self.flat), len(self.dims)), dtype=np.int64)
        rest = self.flat.copy()
        for i in range(len(self.dims) - 1, -1, -1):
            rest, out[:, i] = np.divmod(rest, self.dims[i])
        return _freeze(out)

    @property
    def terms(self) -> dict[Label, complex]:
        return {
            flat_to_label(f, self.dims): complex(a)
            for f, a in zip(self.flat, self.amplitudes)
        }

    def amplitude_at(self, flat) -> np.ndarray:
        """Amplitudes at flat indices (vectorised, zero where absent)."""
        flat = np.asarray(flat, dtype=np.int64)
        pos = np.searchsorted(self.flat, flat)
        pos = np.minimum(pos, len(self.flat) - 1)
        hit = self.flat[pos] == flat
        return np.where(hit, self.amplitudes[pos], 0.0)

    def overlap(self, v: Product) -> complex:
        """``<v|self>`` for a validated product vector ``v``."""
        if not isinstance(v[0], np.ndarray):
            return complex(self.amplitude_at(label_to_flat(v, self.dims)))
        factors = np.ones(len(self.flat), dtype=np.complex128)
        labels = self.labels
        for i, a in enumerate(v):
            factors *= np.conj(a)[labels[:, i]]
        return complex(np.dot(factors, self.amplitudes))

    def to_vector(self) -> np.ndarray:
        out = np.zeros(math.prod(self.dims), dtype=np.complex128)
        out[self.flat] = self.amplitudes
        return out


def _sparse_from_arrays(flat: np.ndarray, amps: np.ndarray, dims: Dims) -> PureStateSparse:
    if len(flat) == 0:
        raise StateError("pure state needs at least one term")
    order = np.argsort(flat, kind="stable")
    flat, amps = flat[order], amps[order]
    uniq, inverse = np.unique(flat, return_inverse=True)
    summed = np.zeros(len(uniq), dtype=np.complex128)
    np.add.at(summed, inverse, amps)
    norm = np.linalg.norm(summed)
    if norm == 0:
        raise StateError("pure state has zero norm")
    summed = summed / norm
    keep = np.abs(summed) >= config.PRUNE_TOL
    flat, summed = uniq[keep], summed[keep]
    # pruning only removes sub-1e-15 amplitudes, but keep the norm exact
    summed = summed / np.linalg.norm(summed)
    return PureStateSparse(
        dims=dims,
        flat=_freeze(flat.astype(np.int64)),
        amplitudes=_freeze(summed),
        renormalized=bool(abs(norm - 1.0) > config.RENORM_REPORT_TOL),
    )


def make_pure_sparse(
    terms: Mapping[Sequence[int], complex] | Iterable[tuple[Sequence[int], complex]],
    dims: Iterable[int],
) -> PureStateSparse:
    """Build a normalised sparse pure state from ``(label, amplitude)`` terms.

    Repeated labels are summed. The input is renormalised; ``renormalized`` on
    the result records whether the input norm was off by more than 1e-9.
    """
    dims = check_dims(dims)
    items = list(terms.items()) if isinstance(terms, Mapping) else list(terms)
    if not items:
        raise StateError("empty term list")
    flat = np.array([label_to_flat(check_label(lab, dims), dims) for lab, _ in items],
                    dtype=np.int64)
    amps = np.array([complex(a) for _, a in items], dtype=np.complex128)
    return _sparse_from_arrays(flat, amps, dims)


def pure_from_vector(vector: np.ndarray, dims: Iterable[int]) -> PureStateSparse:
    """Sparse form of a dense state vector."""
    dims = check_dims(dims)
    vector = np.asarray(vector, dtype=np.complex128).ravel()
    if len(vector) != math.prod(dims):
        raise StateError(f"vector length {len(vector)} does not match dims {dims}")
    flat = np.flatnonzero(np.abs(vector) >= config.PRUNE_TOL)
    return _sparse_from_arrays(flat.astype(np.int64), vector[flat], dims)


# ---------------------------------------------------------------------------
# Density operators
# ---------------------------------------------------------------------------

class DensityOperator:
    """Common interface of :class:`DenseState` and :class:`MixtureState`."""

    dims: Dims

    @property
    def n_sites(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def element(self, bra, ket) -> complex:
        return matrix_element(self, bra, ket)

    def basis_elements(self, bra_flat, ket_flat) -> np.ndarray:
        """Elements ``<bra|rho|ket>`` for broadcastable arrays of flat indices."""
        raise NotImplementedError

    def to_dense(self, cap: int | None = None) -> "DenseState":
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class DenseState(DensityOperator):
    matrix: np.ndarray
    dims: Dims

    def __init__(self, matrix, dims: Iterable[int], *, validate: bool = True):
        dims = check_dims(dims)
        m = np.array(matrix, dtype=np.complex128)
        D = math.prod(dims)
        if m.shape != (D, D):
            raise StateError(f"matrix shape {m.shape} does not match dims {dims}")
        if validate:
            tol = config.DENSE_TOL
            if np.max(np.abs(m - m.conj().T)) > tol:
                raise StateError("density matrix is not Hermitian")
            if abs(np.trace(m) - 1.0) > tol:
                raise StateError(f"density matrix has trace {np.trace(m).real:.12g}")
            if np.linalg.eigvalsh(m)[0] < -tol:
                raise StateError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "dims", dims)

    def basis_elements(self, bra_flat, ket_flat) -> np.ndarray:
        return self.matrix[np.asarray(bra_flat), np.asarray(ket_flat)]

    def to_dense(self, cap: int | None = None) -> "DenseState":
        return self


@dataclass(frozen=True, eq=False)
class MixtureState(DensityOperator):
    """``sum_m w_m |phi_m><phi_m| + noise_weight * 1/D``."""

    components: tuple[tuple[float, PureStateSparse], ...]
    noise_weight: float
    dims: Dims

    def __init__(self, components, noise_weight: float = 0.0, dims: Iterable[int] | None = None):
        comps = tuple((float(w), s) for w, s in components)
        if dims is None:
            if not comps:
                raise StateError("dims required for a pure-noise mixture")
            dims = comps[0][1].dims
        dims = check_dims(dims)
        for w, s in comps:
            if not w > 0:
                raise StateError(f"component weight must be positive, got {w}")
            if s.dims != dims:
                raise StateError(f"component dims {s.dims} differ from {dims}")
        noise_weight = float(noise_weight)
        if noise_weight < 0:
            raise StateError(f"noise weight must be >= 0, got {noise_weight}")
        total = sum(w for w, _ in comps) + noise_weight
        if abs(total - 1.0) > config.NORM_TOL:
            raise StateError(f"weights sum to {total!r}, expected 1")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "noise_weight", noise_weight)
        object.__setattr__(self, "dims", dims)

    def basis_elements(self, bra_flat, ket_flat) -> np.ndarray:
        bra = np.asarray(bra_flat, dtype=np.int64)
        ket = np.asarray(ket_flat, dtype=np.int64)
        out = np.zeros(np.broadcast_shapes(bra.shape, ket.shape), dtype=np.complex128)
        for w, s in self.components:
            out += w * s.amplitude_at(bra) * np.conj(s.amplitude_at(ket))
        if self.noise_weight:
            out += (self.noise_weight / self.dim) * (bra == ket)
        return out

    def to_dense(self, cap: int | None = None) -> DenseState:
        cap = config.DENSE_CAP if cap is None else cap
        D = self.dim
        if D > cap:
            raise StateError(f"dimension {D} exceeds dense cap {cap}")
        m = np.eye(D, dtype=np.complex128) * (self.noise_weight / D)
        for w, s in self.components:
            v = np.zeros(D, dtype=np.complex128)
            v[s.flat] = s.amplitudes
            m += w * np.outer(v, v.conj())
        return DenseState(m, self.dims)


def matrix_element(rho: DensityOperator, bra, ket) -> complex:
    """``<bra|rho|ket>`` for product vectors ``bra`` and ``ket``.

    Computational-basis labels take an indexed fast path. For a mixture the
    cost is linear in the number of stored terms times the site count.
    """
    dims = rho.dims
    bra, ket = as_product(bra, dims), as_product(ket, dims)
    if _is_label(bra) and _is_label(ket):
        return complex(rho.basis_elements(label_to_flat(bra, dims), label_to_flat(ket, dims)))
    if isinstance(rho, DenseState):
        b, k = product_dense(bra, dims), product_dense(ket, dims)
        return complex(b.conj() @ rho.matrix @ k)
    bra_v, ket_v = as_local_vectors(bra, dims), as_local_vectors(ket, dims)
    out = 0j
    for w, s in rho.components:
        out += w * s.overlap(bra_v) * np.conj(s.overlap(ket_v))
    if rho.noise_weight:
        inner = math.prod(complex(np.vdot(b, k)) for b, k in zip(bra_v, ket_v))
        out += rho.noise_weight * inner / rho.dim
    return out


def to_dense(rho: DensityOperator, cap: int | None = None) -> DenseState:
    return rho.to_dense(cap)


def pure_density(state: PureStateSparse) -> MixtureState:
    return MixtureState([(1.0, state)], 0.0, state.dims)


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

def check_simplex(p: float, q: float) -> tuple[float, float, float]:
    """Validate ``(p, q)`` and return ``(p, q, 1 - p - q)``."""
    p, q = float(p), float(q)
    if p < 0 or q < 0 or p + q > 1 + config.NORM_TOL:
        raise StateError(f"(p, q) = ({p}, {q}) outside the simplex p, q >= 0, p + q <= 1")
    return p, q, max(0.0, 1.0 - p - q)


def ghz_states(n_sites: int) -> tuple[PureStateSparse, PureStateSparse]:
    """``(|0..0> + |1..1>)/sqrt2`` and ``(|0..0> - i|1..1>)/sqrt2``."""
    dims = check_dims([2] * n_sites)
    zeros, ones = (0,) * n_sites, (1,) * n_sites
    h = 1 / math.sqrt(2)
    g = make_pure_sparse([(zeros, h), (ones, h)], dims)
    gt = make_pure_sparse([(zeros, h), (ones, -1j * h)], dims)
    return g, gt


def w_qutrit_states() -> tuple[PureStateSparse, PureStateSparse]:
    """Four-qutrit ``|W>`` and its image under the cyclic shift ``a -> a+1 mod 3`` on every site."""
    amp = 1 / (2 * math.sqrt(2))
    labels = []
    for i in range(4):
        for s in (1, 2):
            lab = [0] * 4
            lab[i] = s
            labels.append(tuple(lab))
    w = make_pure_sparse([(lab, amp) for lab in labels], (3, 3, 3, 3))
    shifted = make_pure_sparse(
        [(tuple((x + 1) % 3 for x in lab), amp) for lab in labels], (3, 3, 3, 3)
    )
    return w, shifted


def _two_component_mixture(a, b, p, q) -> MixtureState:
    p, q, noise = check_simplex(p, q)
    comps = [(w, s) for w, s in ((p, a), (q, b)) if w > 0]
    # absorb rounding so the weights sum to exactly 1
    if noise < config.NORM_TOL and comps:
        noise = 0.0
        total = sum(w for w, _ in comps)
        comps = [(w / total, s) for w, s in comps]
    return MixtureState(comps, noise, a.dims)


def family_ghz_mix(n_sites: int, p: float, q: float) -> MixtureState:
    """``p|G><G| + q|G~><G~| + (1-p-q) 1/2^N`` on ``n_sites`` qubits."""
    g, gt = ghz_states(n_sites)
    return _two_component_mixture(g, gt, p, q)


def family_w_qutrit_mix(p: float, q: float) -> MixtureState:
    """``p|W><W| + q s|W><W|s + (1-p-q) 1/81`` with ``s`` the cyclic shift on all four qutrits."""
    w, shifted = w_qutrit_states()
    return _two_component_mixture(w, shifted, p, q)


FAMILY_NAMES = ("ghz", "wqutrit", "custom")


@dataclass(frozen=True, eq=False)
class FamilySpec:
    """A two-parameter family ``p A + q B + (1-p-q) 1/D``.

    ``name`` is ``"ghz"`` (with ``n_sites`` qubits), ``"wqutrit"``, or
    ``"custom"`` with two explicit pure components.
    """

    name: str
    n_sites: int = 10
    components: tuple[PureStateSparse, PureStateSparse] | None = None

    def __post_init__(self):
        if self.name not in FAMILY_NAMES:
            raise StateError(f"unknown family {self.name!r}")
        if self.name == "custom":
            if self.components is None or len(self.components) != 2:
                raise StateError("custom family needs exactly two pure components")
            a, b = self.components
            if a.dims != b.dims:
                raise StateError("custom family components have different dims")
        if self.name == "ghz":
            check_dims([2] * self.n_sites)

    @cached_property
    def pure_components(self) -> tuple[PureStateSparse, PureStateSparse]:
        if self.name == "ghz":
            return ghz_states(self.n_sites)
        if self.name == "wqutrit":
            return w_qutrit_states()
        return tuple(self.components)

    @property
    def dims(self) -> Dims:
        return self.pure_components[0].dims

    @property
    def label(self) -> str:
        if self.name == "ghz":
            return f"GhzMix{self.n_sites}"
        if self.name == "wqutrit":
            return "WQutritMix"
        return "Custom"

    def at(self, p: float, q: float) -> MixtureState:
        a, b = self.pure_components
        return _two_component_mixture(a, b, p, q)
