"""Comparison criteria from the literature.

critI   Fisher-information bound for k-producibility,  ``F > s k^2 + (N - s k)^2``.
critII  Fisher-information bound for k-separability,   ``F > (N - k + 1)^2 + k - 1``.
critIII collective SU(d) variance bound for 2-producibility.
critIV  density-element bound for k-separability of N qudits.

``F`` is the quantum Fisher information of ``rho`` for the collective
generator ``H = 1/2 sum_i sigma_z^(i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import config
from .criteria import Conclusion, CriterionVerdict, make_verdict
from .qstate import (
    DenseState,
    DensityOperator,
    MixtureState,
    PureStateSparse,
    StateError,
    strides,
)
from .twocopy import full_mask


# ---------------------------------------------------------------------------
# Collective operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class CollectiveOperator:
    """``sum_i local^(i)`` over all sites of ``dims``.

    The dense matrix is built lazily; :meth:`apply` acts on sparse pure
    states without it.
    """

    local: np.ndarray
    dims: tuple[int, ...]
    name: str = ""

    def __post_init__(self):
        local = np.asarray(self.local, dtype=np.complex128)
        if len(set(self.dims)) != 1 or local.shape != (self.dims[0],) * 2:
            raise StateError("collective operator needs equal local dims matching the generator")
        if np.max(np.abs(local - local.conj().T)) > 1e-12:
            raise StateError("local generator is not Hermitian")
        object.__setattr__(self, "local", local)
        object.__setattr__(self, "dims", tuple(self.dims))

    @cached_property
    def matrix(self) -> np.ndarray:
        D = math.prod(self.dims)
        if D > config.DENSE_CAP:
            raise StateError(f"dimension {D} exceeds dense cap {config.DENSE_CAP}")
        d, n = self.dims[0], len(self.dims)
        out = np.zeros((D, D), dtype=np.complex128)
        for i in range(n):
            out += np.kron(np.kron(np.eye(d**i), self.local), np.eye(d ** (n - i - 1)))
        return out

    def apply(self, flat: np.ndarray, amps: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """``H v`` for a sparse vector given as (flat indices, amplitudes)."""
        d, n = self.dims[0], len(self.dims)
        st = strides(self.dims)
        digits = (flat[:, None] // st[None, :]) % d
        out_flat, out_amp = [], []
        for i in range(n):
            for b in range(d):
                coeff = self.local[b, digits[:, i]] * amps
                nz = coeff != 0
                out_flat.append(flat[nz] + (b - digits[nz, i]) * st[i])
                out_amp.append(coeff[nz])
        all_flat = np.concatenate(out_flat)
        all_amp = np.concatenate(out_amp)
        uniq, inv = np.unique(all_flat, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=np.complex128)
        np.add.at(summed, inv, all_amp)
        return uniq, summed


def sigma_z_half(n_sites: int) -> CollectiveOperator:
    """``1/2 sum_i sigma_z^(i)`` on ``n_sites`` qubits."""
    return CollectiveOperator(np.diag([0.5, -0.5]), (2,) * n_sites, "Jz")


# ---------------------------------------------------------------------------
# Spectra and Fisher information
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues in descending order with orthonormal eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray

    @classmethod
    def of(cls, rho: DenseState) -> "Spectrum":
        vals, vecs = np.linalg.eigh(rho.matrix)
        return cls(vals[::-1].copy(), vecs[:, ::-1].copy())

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def _qfi_sum(values: np.ndarray, h_elements: np.ndarray) -> float:
    lam_sum = values[:, None] + values[None, :]
    lam_diff = values[:, None] - values[None, :]
    keep = lam_sum > config.QFI_PAIR_TOL
    weights = np.zeros_like(lam_sum)
    weights[keep] = 2 * lam_diff[keep] ** 2 / lam_sum[keep]
    return float(np.sum(weights * np.abs(h_elements) ** 2))


def qfi_dense(rho: DenseState, H: CollectiveOperator | np.ndarray) -> float:
    """Fisher information from the full eigendecomposition of ``rho``."""
    if rho.dim > config.DENSE_CAP:
        raise StateError(f"dimension {rho.dim} exceeds dense cap {config.DENSE_CAP}")
    m = rho.matrix
    if np.max(np.abs(m - m.conj().T)) > config.DENSE_TOL:
        raise StateError("density matrix is not Hermitian")
    Hm = H.matrix if isinstance(H, CollectiveOperator) else np.asarray(H)
    spec = Spectrum.of(rho)
    h = spec.vectors.conj().T @ Hm @ spec.vectors
    return _qfi_sum(spec.values, h)


def qfi_mixture(rho: MixtureState, H: CollectiveOperator) -> float:
    """Fisher information of a sparse mixture plus white noise.

    With ``rho = c 1 + A`` and ``A`` supported on the span ``S`` of the
    components, the eigenvectors are those of ``A`` inside ``S`` (eigenvalue
    ``c + mu``) and anything in the complement (eigenvalue ``c``). Pairs inside
    ``S`` are summed directly; pairs straddling ``S`` and its complement use
    ``sum_{l' in S^perp} |<u|H|l'>|^2 = |H u|^2 - sum_{u' in S} |<u'|H|u>|^2``.
    """
    c = rho.noise_weight / rho.dim
    if not rho.components:
        return 0.0
    support = np.unique(np.concatenate([s.flat for _, s in rho.components]))
    cols = np.stack([s.amplitude_at(support) for _, s in rho.components], axis=1)
    weights = np.array([w for w, _ in rho.components])
    # orthonormal basis of S
    u, sv, _ = np.linalg.svd(cols, full_matrices=False)
    basis = u[:, sv > 1e-12 * sv[0]]
    a_small = basis.conj().T @ (cols * weights) @ cols.conj().T @ basis
    mu, rot = np.linalg.eigh(a_small)
    eigvecs = basis @ rot  # columns on `support`

    images = [H.apply(support, eigvecs[:, j]) for j in range(eigvecs.shape[1])]
    r = len(mu)
    h_in = np.zeros((r, r), dtype=np.complex128)
    h_norm2 = np.zeros(r)
    for j, (f, a) in enumerate(images):
        h_norm2[j] = np.vdot(a, a).real
        pos = np.searchsorted(f, support)
        pos = np.minimum(pos, len(f) - 1)
        hit = f[pos] == support
        proj = np.where(hit, a[pos], 0.0)
        h_in[:, j] = eigvecs.conj().T @ proj

    lam = c + mu
    total = _qfi_sum(lam, h_in)
    leak = np.maximum(h_norm2 - np.sum(np.abs(h_in) ** 2, axis=0), 0.0)
    pair_sum = lam + c
    keep = pair_sum > config.QFI_PAIR_TOL
    total += float(np.sum(2 * 2 * mu[keep] ** 2 / pair_sum[keep] * leak[keep]))
    return total


def qfi(rho: DensityOperator, H: CollectiveOperator) -> float:
    """Quantum Fisher information ``sum_{l,l'} 2(l_l - l_l')^2/(l_l + l_l') |<l|H|l'>|^2``."""
    if isinstance(rho, MixtureState):
        return qfi_mixture(rho, H)
    return qfi_dense(rho, H)


# ---------------------------------------------------------------------------
# critI and critII
# ---------------------------------------------------------------------------

def producibility_fisher_bound(n_sites: int, k: int) -> int:
    s = n_sites // k
    return s * k * k + (n_sites - s * k) ** 2


def separability_fisher_bound(n_sites: int, k: int) -> int:
    return (n_sites - k + 1) ** 2 + k - 1


def _require_qubits(rho: DensityOperator) -> None:
    if any(d != 2 for d in rho.dims):
        raise StateError(f"Fisher-information criteria need qubits, got dims {rho.dims}")


def fisher_producibility(rho: DensityOperator, k: int) -> CriterionVerdict:
    _require_qubits(rho)
    n = rho.n_sites
    if not 1 <= k <= n - 1:
        raise StateError(f"k must be in [1, {n - 1}], got {k}")
    F = qfi(rho, sigma_z_half(n))
    return make_verdict("critI", k, F, producibility_fisher_bound(n, k),
                        Conclusion.CONTAINS_K_PLUS_1_PARTITE)


def fisher_separability(rho: DensityOperator, k: int) -> CriterionVerdict:
    _require_qubits(rho)
    n = rho.n_sites
    if not 2 <= k <= n:
        raise StateError(f"k must be in [2, {n}], got {k}")
    F = qfi(rho, sigma_z_half(n))
    return make_verdict("critII", k, F, separability_fisher_bound(n, k), Conclusion.K_NONSEPARABLE)


# ---------------------------------------------------------------------------
# critIII
# ---------------------------------------------------------------------------

def gellmann_generators(d: int) -> list[np.ndarray]:
    """Generalised Gell-Mann matrices normalised to ``tr(g_m g_n) = 2 delta_mn``.

    Order: symmetric and antisymmetric off-diagonal pairs ``(j, k)``, then the
    ``d - 1`` diagonal matrices.
    """
    if d < 2:
        raise StateError(f"d must be >= 2, got {d}")
    out = []
    for j in range(d):
        for k in range(j + 1, d):
            sym = np.zeros((d, d), dtype=np.complex128)
            sym[j, k] = sym[k, j] = 1
            anti = np.zeros((d, d), dtype=np.complex128)
            anti[j, k], anti[k, j] = -1j, 1j
            out += [sym, anti]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        out.append(np.diag(diag * math.sqrt(2 / (l * (l + 1)))).astype(np.complex128))
    return out


def variance_threshold(n_sites: int, d: int) -> int:
    return 2 * n_sites * (d - 2) + (2 if n_sites % 2 else 0)


@lru_cache(maxsize=8)
def _collective_generators(n_sites: int, d: int) -> tuple[CollectiveOperator, ...]:
    return tuple(CollectiveOperator(g, (d,) * n_sites, f"G{m}")
                 for m, g in enumerate(gellmann_generators(d)))


def collective_variance_sum(rho: DensityOperator) -> float:
    """``sum_m tr(rho G_m^2) - tr(rho G_m)^2`` over the SU(d) collective generators."""
    if len(set(rho.dims)) != 1:
        raise StateError(f"critIII needs equal local dims, got {rho.dims}")
    n, d = rho.n_sites, rho.dims[0]
    total = 0.0
    for G in _collective_generators(n, d):
        if isinstance(rho, MixtureState):
            # white noise: tr(G)/D = 0 and tr(G^2)/D = N tr(g^2)/d = 2N/d
            mean = 0.0
            second = rho.noise_weight * 2 * n / d
            for w, s in rho.components:
                f, a = G.apply(s.flat, s.amplitudes)
                mean += w * np.vdot(s.amplitude_at(f), a).real
                second += w * np.vdot(a, a).real
        else:
            Gm = G.matrix
            mean = np.trace(rho.matrix @ Gm).real
            second = np.trace(rho.matrix @ Gm @ Gm).real
        total += second - mean**2
    return float(total)


def collective_variance_test(rho: DensityOperator) -> CriterionVerdict:
    """Collective variance below ``2N(d-2)`` (even N) or ``2N(d-2)+2`` (odd N) ⇒ not 2-producible.

    Reported with ``lhs`` = threshold and ``rhs`` = variance sum so that a
    positive margin means violation.
    """
    total = collective_variance_sum(rho)
    threshold = variance_threshold(rho.n_sites, rho.dims[0])
    return make_verdict("critIII", 2, threshold, total, Conclusion.CONTAINS_K_PLUS_1_PARTITE)


# ---------------------------------------------------------------------------
# critIV and its swap-type sibling, written with 1-based flat indices
# ---------------------------------------------------------------------------

def _dense_equal_dims(rho: DensityOperator) -> tuple[np.ndarray, int, int]:
    if len(set(rho.dims)) != 1:
        raise StateError(f"critIV needs equal local dims, got {rho.dims}")
    return rho.to_dense().matrix, rho.n_sites, rho.dims[0]


def single_excitation_separability(rho: DensityOperator, k: int, printed_coefficient: bool = False) -> CriterionVerdict:
    """Single-excitation element bound for k-separability of N qudits.

    Uses ``rho_{a,b}`` with 1-based indices ``p d^(N-i) + 1``. The diagonal sum
    carries the coefficient ``(d-1)(N-k)``; ``printed_coefficient=True``
    uses the bare ``(N-k)``, which is unsound for ``d > 2``.
    """
    m, n, d = _dense_equal_dims(rho)
    if not 2 <= k <= n - 1:
        raise StateError(f"k must be in [2, {n - 1}], got {k}")

    def el(a: int, b: int) -> complex:  # 1-based
        return m[a - 1, b - 1]

    lhs = cross = single = 0.0
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            for p in range(1, d):
                for q in range(1, d):
                    lhs += abs(el(p * d ** (n - i) + 1, q * d ** (n - j) + 1))
                    idx = p * d ** (n - i) + q * d ** (n - j) + 1
                    cross += math.sqrt(max(el(1, 1).real * el(idx, idx).real, 0.0))
    for i in range(1, n + 1):
        for p in range(1, d):
            idx = p * d ** (n - i) + 1
            single += el(idx, idx).real
    coeff = (n - k) if printed_coefficient else (d - 1) * (n - k)
    return make_verdict("critIV", k, lhs, cross + coeff * single, Conclusion.K_NONSEPARABLE)


def antidiagonal_separability(rho: DensityOperator, k: int) -> CriterionVerdict:
    """``(2^k - 2)|rho_{1,D}| <= sum_a sqrt(rho_{a,a} rho_{abar,abar})`` in 1-based flat indices.

    ``a`` has digit ``d_i - 1`` on the subset and 0 elsewhere; ``abar`` the reverse.
    """
    m = rho.to_dense().matrix
    n, D = rho.n_sites, rho.dim
    if not 2 <= k <= n:
        raise StateError(f"k must be in [2, {n}], got {k}")
    st = strides(rho.dims)
    top = [int((dd - 1) * s) for dd, s in zip(rho.dims, st)]
    lhs = (2**k - 2) * abs(m[0, D - 1])
    rhs = 0.0
    for mask in range(1, full_mask(n)):
        a = sum(top[i] for i in range(n) if mask >> i & 1)
        b = (D - 1) - a
        rhs += math.sqrt(max(m[a, a].real * m[b, b].real, 0.0))
    return make_verdict("antidiag", k, lhs, rhs, Conclusion.K_NONSEPARABLE)
