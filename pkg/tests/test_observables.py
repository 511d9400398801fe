import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpartite import observables
from kpartite.criteria import ElementFiducial
from kpartite.ensembles import haar_vector, random_density
from kpartite.qstate import StateError, matrix_element
from kpartite.twocopy import SwapFiducial


def _orthogonal_local_fiducial(n, rng):
    xs, ys = [], []
    for _ in range(n):
        q, _ = np.linalg.qr(haar_vector(4, rng).reshape(2, 2))
        xs.append(q[:, 0])
        ys.append(q[:, 1])
    return SwapFiducial(tuple(xs), tuple(ys))


def test_swap_observable_expectations(rng):
    fid = SwapFiducial((0,) * 3, (1,) * 3)
    obs = observables.build_swap_observables(fid, (2,) * 3)
    for _ in range(100):
        rho = random_density((2,) * 3, rng)
        z = matrix_element(rho, fid.phi1, fid.phi2)
        assert np.trace(rho.matrix @ obs.M).real / 2 == pytest.approx(z.real, abs=1e-12)
        assert np.trace(rho.matrix @ obs.M_tilde).real == pytest.approx(-2 * z.imag, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_alternating_sum_identities_basis(n):
    obs = observables.build_swap_observables(SwapFiducial((0,) * n, (1,) * n), (2,) * n)
    assert np.max(np.abs(observables.alternating_sum(obs.M_l) - n * obs.M)) < 1e-12
    assert np.max(np.abs(observables.alternating_sum(obs.M_tilde_l) - n * obs.M_tilde)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3, 4]))
def test_alternating_sum_identities_random_orthogonal(seed, n):
    fid = _orthogonal_local_fiducial(n, np.random.default_rng(seed))
    obs = observables.build_swap_observables(fid, (2,) * n)
    assert np.max(np.abs(observables.alternating_sum(obs.M_l) - n * obs.M)) < 1e-12
    assert np.max(np.abs(observables.alternating_sum(obs.M_tilde_l) - n * obs.M_tilde)) < 1e-12
    for op in (obs.M, obs.M_tilde, *obs.M_l, *obs.M_tilde_l):
        assert np.max(np.abs(op - op.conj().T)) < 1e-12


def test_element_observable_expectations(rng):
    fid = ElementFiducial((0, 0, 0), (1,))
    # sites 1 and 2 in one-based numbering are 0 and 1 here
    obs = observables.build_element_observables(fid, 0, 1, 1, 1, (2,) * 3)
    for _ in range(100):
        rho = random_density((2,) * 3, rng)
        z = matrix_element(rho, (1, 0, 0), (0, 1, 0))
        assert np.trace(rho.matrix @ obs.M).real == pytest.approx(4 * z.real, abs=1e-11)
        assert np.trace(rho.matrix @ obs.M_tilde).real == pytest.approx(-4 * z.imag, abs=1e-11)


def test_element_observables_qutrits(rng):
    fid = ElementFiducial((0, 2, 1), (1, 2))
    rho = random_density((3,) * 3, rng)
    for i, j in itertools.permutations(range(3), 2):
        for s, t in itertools.product(fid.omega, repeat=2):
            obs = observables.build_element_observables(fid, i, j, s, t, (3,) * 3)
            bra = tuple(s if n == i else x for n, x in enumerate(fid.base))
            ket = tuple(t if n == j else x for n, x in enumerate(fid.base))
            z = matrix_element(rho, bra, ket)
            assert np.trace(rho.matrix @ obs.M) == pytest.approx(4 * z.real, abs=1e-11)
            assert np.trace(rho.matrix @ obs.M_tilde) == pytest.approx(-4 * z.imag, abs=1e-11)


def test_rhs_projectors(rng):
    rho = random_density((2,) * 3, rng)
    proj = observables.element_rhs_projector((1, 0, 1), (2,) * 3)
    assert np.trace(rho.matrix @ proj) == pytest.approx(rho.matrix[5, 5], abs=1e-15)
    fid = SwapFiducial((0, 0, 0), (1, 1, 1))
    proj = observables.swap_rhs_projector(fid, 0b001, (2,) * 3)
    # mask bit 0 is site 0: label (1, 0, 0)
    assert np.trace(rho.matrix @ proj) == pytest.approx(rho.matrix[4, 4], abs=1e-15)


def test_element_observable_errors():
    fid = ElementFiducial((0, 0, 0), (1,))
    with pytest.raises(StateError):
        observables.build_element_observables(fid, 1, 1, 1, 1, (2,) * 3)
    with pytest.raises(StateError):
        observables.build_element_observables(fid, 0, 1, 0, 1, (2,) * 3)
