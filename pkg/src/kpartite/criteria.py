"""k-producibility and k-separability inequalities built from density-matrix elements.

Four families of inequalities are evaluated:

* swap criteria (:func:`swap_producibility`, :func:`swap_separability`) with a
  product fiducial pair ``(phi1, phi2)``; they compare one off-diagonal
  element against all ``2^N - 2`` "mixed pattern" diagonal pairs;
* element criteria (:func:`element_producibility`, :func:`element_separability`,
  :func:`pairwise_separability`) with a base label ``x`` and a set ``Omega`` of
  local levels; they compare single-excitation coherences against
  geometric means of diagonals.

All inequalities are sufficient conditions: a violation certifies the stated
entanglement property, a non-violation certifies nothing.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import config
from .qstate import DensityOperator, Label, StateError, check_label, label_to_flat, strides
from .twocopy import SwapFiducial, partial_swap_sum, swap_expectation


class Conclusion(enum.Enum):
    CONTAINS_K_PLUS_1_PARTITE = "ContainsKPlus1PartiteEntanglement"
    K_NONSEPARABLE = "KNonseparable"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CriterionVerdict:
    """Outcome of one inequality.

    ``lhs`` is always the side that exceeds the other on violation, so
    ``margin = lhs - rhs`` is positive exactly when the criterion fires.
    """

    criterion: str
    k: int
    lhs: float
    rhs: float
    margin: float
    violated: bool
    conclusion: Conclusion
    warnings: tuple[str, ...] = ()

    FIELDS = ("criterion", "k", "lhs", "rhs", "margin", "violated", "conclusion")

    def record(self) -> str:
        """One tab-separated line in :attr:`FIELDS` order."""
        return "\t".join([
            self.criterion,
            str(self.k),
            f"{self.lhs:.12g}",
            f"{self.rhs:.12g}",
            f"{self.margin:.12g}",
            "true" if self.violated else "false",
            self.conclusion.value,
        ])

    def describe(self) -> str:
        if self.conclusion is Conclusion.CONTAINS_K_PLUS_1_PARTITE:
            return f"contains {self.k + 1}-partite entanglement"
        if self.conclusion is Conclusion.K_NONSEPARABLE:
            return f"{self.k}-nonseparable"
        return "inconclusive"


def violation_tolerance(lhs: float, rhs: float) -> float:
    return config.VIOLATION_RTOL * (1.0 + abs(lhs) + abs(rhs))


def make_verdict(
    criterion: str,
    k: int,
    lhs: float,
    rhs: float,
    on_violation: Conclusion,
    notes: tuple[str, ...] = (),
) -> CriterionVerdict:
    lhs, rhs = float(lhs), float(rhs)
    margin = lhs - rhs
    violated = margin > violation_tolerance(lhs, rhs)
    return CriterionVerdict(
        criterion=criterion,
        k=k,
        lhs=lhs,
        rhs=rhs,
        margin=margin,
        violated=violated,
        conclusion=on_violation if violated else Conclusion.INCONCLUSIVE,
        warnings=notes,
    )


def r_of(n_sites: int, k: int) -> int:
    """Minimum number of parts of a k-producible split of ``n_sites`` (``ceil(N/k)``)."""
    if not 1 <= k <= n_sites - 1:
        raise StateError(f"k must be in [1, {n_sites - 1}], got {k}")
    return -(-n_sites // k)


# ---------------------------------------------------------------------------
# Swap criteria
# ---------------------------------------------------------------------------

def _swap_sides(rho: DensityOperator, fid: SwapFiducial, prefactor: int) -> tuple[float, float]:
    lhs = prefactor * math.sqrt(swap_expectation(rho, fid))
    return lhs, partial_swap_sum(rho, fid)


def swap_producibility(rho: DensityOperator, fid: SwapFiducial, k: int) -> CriterionVerdict:
    """k-producibility test: ``(2^r - 2)|<phi1|rho|phi2>| <= sum_a sqrt(<a|rho|a><b|rho|b>)``."""
    r = r_of(rho.n_sites, k)
    lhs, rhs = _swap_sides(rho, fid, 2**r - 2)
    return make_verdict("thm1", k, lhs, rhs, Conclusion.CONTAINS_K_PLUS_1_PARTITE)


def swap_separability(rho: DensityOperator, fid: SwapFiducial, k: int) -> CriterionVerdict:
    """k-separability test with prefactor ``2^k - 2``."""
    n = rho.n_sites
    if not 2 <= k <= n:
        raise StateError(f"k must be in [2, {n}], got {k}")
    lhs, rhs = _swap_sides(rho, fid, 2**k - 2)
    return make_verdict("thm3", k, lhs, rhs, Conclusion.K_NONSEPARABLE)


# ---------------------------------------------------------------------------
# Element criteria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ElementFiducial:
    """Base label ``x`` and ordered set ``omega`` of local levels.

    ``psi^s_i`` is the base label with site ``i`` replaced by level ``s``.
    """

    base: Label
    omega: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(int(x) for x in self.base))
        object.__setattr__(self, "omega", tuple(int(s) for s in self.omega))
        if not self.omega:
            raise StateError("omega must contain at least one level")
        if len(set(self.omega)) != len(self.omega):
            raise StateError(f"duplicate levels in omega {self.omega}")

    def validate(self, dims) -> list[str]:
        """Check against ``dims``; return diagnostic notes."""
        if len(set(dims)) != 1:
            raise StateError(f"element criteria need equal local dimensions, got {dims}")
        d = dims[0]
        check_label(self.base, dims)
        for s in self.omega:
            if not 0 <= s < d:
                raise StateError(f"omega level {s} out of range for local dimension {d}")
        hits = sorted({i for i, x in enumerate(self.base) if x in self.omega})
        if hits:
            return [f"omega shares levels with the base label at sites {hits}; "
                    "psi^s_i coincides with the base state there"]
        return []


@dataclass(frozen=True)
class _ElementSums:
    lhs: float          # sum |<psi^s_i|rho|psi^t_j>| over s, t and ordered i != j
    cross: float        # sum sqrt(<psi|rho|psi><psi^st_ij|rho|psi^st_ij>)
    single: float       # sum over s, i of <psi^s_i|rho|psi^s_i>
    notes: tuple[str, ...]


def _element_arrays(rho: DensityOperator, fid: ElementFiducial):
    """Flat indices of ``psi^s_i`` (shape ``(T, N)``) and the base index."""
    dims = rho.dims
    notes = fid.validate(dims)
    st = strides(dims)
    base = np.asarray(fid.base, dtype=np.int64)
    omega = np.asarray(fid.omega, dtype=np.int64)
    b0 = label_to_flat(fid.base, dims)
    # single[s, i] = flat(psi^s_i)
    shift = (omega[:, None] - base[None, :]) * st[None, :]
    return b0, shift, notes


def _element_sums(rho: DensityOperator, fid: ElementFiducial) -> _ElementSums:
    b0, shift, notes = _element_arrays(rho, fid)
    T, n = shift.shape
    single = b0 + shift
    # ordered (i, j) pairs with i != j, all (s, t)
    ii, jj = np.nonzero(~np.eye(n, dtype=bool))
    s_idx, t_idx = np.meshgrid(np.arange(T), np.arange(T), indexing="ij")
    s_idx, t_idx = s_idx.ravel(), t_idx.ravel()
    bra = single[s_idx[:, None], ii[None, :]]
    ket = single[t_idx[:, None], jj[None, :]]
    double = b0 + shift[s_idx[:, None], ii[None, :]] + shift[t_idx[:, None], jj[None, :]]

    off = np.abs(rho.basis_elements(bra, ket))
    d_base = rho.basis_elements(b0, b0).real
    d_double = rho.basis_elements(double, double).real
    d_single = rho.basis_elements(single, single).real
    return _ElementSums(
        lhs=float(off.sum()),
        cross=float(np.sqrt(np.maximum(d_base * d_double, 0.0)).sum()),
        single=float(d_single.sum()),
        notes=tuple(notes),
    )


def _check_element_k(n: int, k: int) -> None:
    if not 2 <= k <= n - 1:
        raise StateError(f"k must be in [2, {n - 1}], got {k}")


def element_producibility(rho: DensityOperator, fid: ElementFiducial, k: int) -> CriterionVerdict:
    """k-producibility test with element fiducials; diagonal coefficient ``T(k-1)``."""
    _check_element_k(rho.n_sites, k)
    sums = _element_sums(rho, fid)
    rhs = sums.cross + len(fid.omega) * (k - 1) * sums.single
    return make_verdict("thm2", k, sums.lhs, rhs, Conclusion.CONTAINS_K_PLUS_1_PARTITE, sums.notes)


def element_separability(rho: DensityOperator, fid: ElementFiducial, k: int) -> CriterionVerdict:
    """k-separability test with element fiducials; diagonal coefficient ``T(N-k)``."""
    n = rho.n_sites
    _check_element_k(n, k)
    sums = _element_sums(rho, fid)
    rhs = sums.cross + len(fid.omega) * (n - k) * sums.single
    return make_verdict("thm4", k, sums.lhs, rhs, Conclusion.K_NONSEPARABLE, sums.notes)


def pairwise_separability(rho: DensityOperator, fid: ElementFiducial) -> list[CriterionVerdict]:
    """Pairwise full-separability tests, one per site pair ``i < j`` and ``(s, t)``.

    Each checks ``|<psi^s_i|rho|psi^t_j>| <= sqrt(<psi|rho|psi><psi^st_ij|rho|psi^st_ij>)``;
    any violation means the state is not fully separable.
    """
    b0, shift, notes = _element_arrays(rho, fid)
    T, n = shift.shape
    d_base = rho.basis_elements(b0, b0).real
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for a in range(T):
                for b in range(T):
                    z = rho.basis_elements(b0 + shift[a, i], b0 + shift[b, j])
                    dbl = b0 + shift[a, i] + shift[b, j]
                    rhs = math.sqrt(max(d_base * rho.basis_elements(dbl, dbl).real, 0.0))
                    name = f"thm2k1[{i},{j};{fid.omega[a]},{fid.omega[b]}]"
                    out.append(make_verdict(name, 1, abs(z), rhs,
                                            Conclusion.CONTAINS_K_PLUS_1_PARTITE, tuple(notes)))
    return out

