"""Local-observable decompositions of the criteria's measured quantities.

The off-diagonal element ``<phi1|rho|phi2>`` is read from two observables::

    M  = |phi1><phi2| + |phi2><phi1|           <M>  =  2 Re <phi1|rho|phi2>
    M~ = -i|phi1><phi2| + i|phi2><phi1|        <M~> = -2 Im <phi1|rho|phi2>

and each is an alternating sum of ``N`` tensor products of local operators,
``sum_l (-1)^l M_l = N M``. The single-excitation coherences
``<psi^s_i|rho|psi^t_j>`` are read the same way from ``M^st_ij`` and
``M~^st_ij``, which are products of two-site local factors with projectors
on the remaining sites.

Dense matrices only: this module is a verification aid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from . import config
from .criteria import ElementFiducial
from .qstate import StateError, as_local_vectors, as_product, product_dense
from .twocopy import SwapFiducial, full_mask


def _kron_all(ops) -> np.ndarray:
    return reduce(np.kron, ops)


def _check_cap(dims) -> None:
    D = math.prod(dims)
    if D > config.DENSE_CAP:
        raise StateError(f"dimension {D} exceeds dense cap {config.DENSE_CAP}")


@dataclass(frozen=True, eq=False)
class SwapObservables:
    M: np.ndarray
    M_tilde: np.ndarray
    M_l: tuple[np.ndarray, ...]
    M_tilde_l: tuple[np.ndarray, ...]


@dataclass(frozen=True, eq=False)
class ElementObservables:
    M: np.ndarray
    M_tilde: np.ndarray
    local_i: np.ndarray
    local_tilde_i: np.ndarray
    local_j: np.ndarray
    local_tilde_j: np.ndarray


def _local_phase_factor(x: np.ndarray, y: np.ndarray, angle: float) -> np.ndarray:
    yx = np.outer(y, x.conj())
    xy = np.outer(x, y.conj())
    return math.cos(angle) * (yx + xy) + math.sin(angle) * (1j * yx - 1j * xy)


def build_swap_observables(fid: SwapFiducial, dims) -> SwapObservables:
    """``M``, ``M~`` and their local decompositions ``M_l``, ``M~_l`` for ``l = 1..N``.

    The alternating-sum identities hold for any local fiducials; orthogonality
    of ``x_n`` and ``y_n`` is not required.
    """
    dims = tuple(dims)
    _check_cap(dims)
    fid = fid.checked(dims)
    n = len(dims)
    v1, v2 = product_dense(fid.phi1, dims), product_dense(fid.phi2, dims)
    M = np.outer(v1, v2.conj()) + np.outer(v2, v1.conj())
    M_tilde = -1j * np.outer(v1, v2.conj()) + 1j * np.outer(v2, v1.conj())
    xs = as_local_vectors(fid.phi1, dims)
    ys = as_local_vectors(fid.phi2, dims)
    M_l, M_tilde_l = [], []
    for l in range(1, n + 1):
        a, b = l * math.pi / n, (l * math.pi + math.pi / 2) / n
        M_l.append(_kron_all([_local_phase_factor(x, y, a) for x, y in zip(xs, ys)]))
        M_tilde_l.append(_kron_all([_local_phase_factor(x, y, b) for x, y in zip(xs, ys)]))
    return SwapObservables(M, M_tilde, tuple(M_l), tuple(M_tilde_l))


def alternating_sum(ops) -> np.ndarray:
    """``sum_{l=1}^N (-1)^l ops[l-1]``."""
    return sum((-1) ** l * op for l, op in enumerate(ops, start=1))


def swap_rhs_projector(fid: SwapFiducial, mask: int, dims) -> np.ndarray:
    """Projector onto ``phi2`` on the mask sites and ``phi1`` elsewhere."""
    dims = tuple(dims)
    _check_cap(dims)
    fid = fid.checked(dims)
    if not 0 < mask < full_mask(len(dims)):
        raise StateError("mask must be a nonempty proper subset")
    xs = as_local_vectors(fid.phi1, dims)
    ys = as_local_vectors(fid.phi2, dims)
    local = [np.outer(ys[i], ys[i].conj()) if mask >> i & 1 else np.outer(xs[i], xs[i].conj())
             for i in range(len(dims))]
    return _kron_all(local)


def _basis(d: int, s: int) -> np.ndarray:
    e = np.zeros(d, dtype=np.complex128)
    e[s] = 1.0
    return e


def build_element_observables(fid: ElementFiducial, i: int, j: int, s: int, t: int, dims) -> ElementObservables:
    """``M^st_ij`` and ``M~^st_ij`` from their two-site local factors (sites 0-based).

    ``<M^st_ij> = 4 Re<psi^s_i|rho|psi^t_j>`` and ``<M~^st_ij> = -4 Im<psi^s_i|rho|psi^t_j>``.
    """
    dims = tuple(dims)
    _check_cap(dims)
    fid.validate(dims)
    n = len(dims)
    if i == j or not (0 <= i < n and 0 <= j < n):
        raise StateError(f"need distinct sites in [0, {n}), got i={i}, j={j}")
    if s not in fid.omega or t not in fid.omega:
        raise StateError(f"levels ({s}, {t}) not in omega {fid.omega}")
    d = dims[0]
    x = fid.base

    def factors(site: int, level: int) -> tuple[np.ndarray, np.ndarray]:
        e_s, e_x = _basis(d, level), _basis(d, x[site])
        plain = np.outer(e_s, e_x) + np.outer(e_x, e_s)
        tilde = 1j * np.outer(e_s, e_x) - 1j * np.outer(e_x, e_s)
        return plain, tilde

    Mi, Mti = factors(i, s)
    Mj, Mtj = factors(j, t)

    def place(op_i: np.ndarray, op_j: np.ndarray) -> np.ndarray:
        ops = []
        for site in range(n):
            if site == i:
                ops.append(op_i)
            elif site == j:
                ops.append(op_j)
            else:
                e = _basis(d, x[site])
                ops.append(np.outer(e, e))
        return _kron_all(ops)

    M = place(Mi, Mj) + place(Mti, Mtj)
    M_tilde = place(Mi, Mtj) - place(Mti, Mj)
    return ElementObservables(M, M_tilde, Mi, Mti, Mj, Mtj)


def element_rhs_projector(label, dims) -> np.ndarray:
    """``|label><label|`` as a product of local projectors."""
    dims = tuple(dims)
    label = as_product(label, dims)
    return _kron_all([np.outer(_basis(d, a), _basis(d, a)) for a, d in zip(label, dims)])
