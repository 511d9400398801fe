import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpartite import criteria
from kpartite.criteria import Conclusion, ElementFiducial
from kpartite.ensembles import random_density
from kpartite.qstate import (
    StateError,
    family_ghz_mix,
    family_w_qutrit_mix,
    ghz_states,
    make_pure_sparse,
    pure_density,
    w_qutrit_states,
)
from kpartite.twocopy import SwapFiducial

GHZ_FID = SwapFiducial((0,) * 10, (1,) * 10)
W_FID = ElementFiducial((0, 0, 0, 0), (1, 2))
P3 = (511 / 512) / (7 + 511 / 512)
P4 = (511 / 512) / (3 + 511 / 512)


@pytest.mark.parametrize("n, k, r", [(10, 3, 4), (10, 5, 2), (9, 3, 3), (10, 1, 10), (10, 9, 2)])
def test_r_of(n, k, r):
    assert criteria.r_of(n, k) == r


def test_swap_producibility_pure_ghz():
    v = criteria.swap_producibility(pure_density(ghz_states(10)[0]), GHZ_FID, 3)
    assert (v.lhs, v.rhs) == pytest.approx((7.0, 0.0), abs=1e-14)
    assert v.violated and v.conclusion is Conclusion.CONTAINS_K_PLUS_1_PARTITE


def test_swap_producibility_ghz_mix():
    v = criteria.swap_producibility(family_ghz_mix(10, 0.2, 0.1), GHZ_FID, 3)
    assert v.lhs == pytest.approx(14 * abs(0.1 + 0.05j), abs=1e-12)
    assert v.lhs == pytest.approx(1.5652475842, abs=1e-9)
    assert v.rhs == pytest.approx(1022 * 0.7 / 1024, abs=1e-12)
    assert v.margin == pytest.approx(v.lhs - v.rhs)
    assert v.violated


@pytest.mark.parametrize("fid", [GHZ_FID, SwapFiducial((0, 1) * 5, (1, 1) * 5), SwapFiducial((0,) * 10, (0,) * 10)])
@pytest.mark.parametrize("k", [1, 3, 9])
def test_swap_producibility_maximally_mixed(fid, k):
    v = criteria.swap_producibility(family_ghz_mix(10, 0, 0), fid, k)
    assert not v.violated and v.conclusion is Conclusion.INCONCLUSIVE


@pytest.mark.parametrize("p, violated", [(P3 - 1e-6, False), (P3 + 1e-6, True)])
def test_swap_producibility_closed_form_threshold(p, violated):
    assert criteria.swap_producibility(family_ghz_mix(10, p, 0), GHZ_FID, 3).violated is violated


def test_swap_separability_pure_ghz_genuine():
    v = criteria.swap_separability(pure_density(ghz_states(10)[0]), GHZ_FID, 2)
    assert (v.lhs, v.rhs) == pytest.approx((1.0, 0.0), abs=1e-14)
    assert v.violated and v.conclusion is Conclusion.K_NONSEPARABLE


@pytest.mark.parametrize("p, violated", [(P4 - 1e-6, False), (P4 + 1e-6, True)])
def test_swap_separability_closed_form_threshold(p, violated):
    assert criteria.swap_separability(family_ghz_mix(10, p, 0), GHZ_FID, 3).violated is violated


def test_swap_separability_basis_product_mixture():
    a = make_pure_sparse({(0, 1, 0): 1}, (2, 2, 2))
    b = make_pure_sparse({(1, 1, 1): 1}, (2, 2, 2))
    from kpartite.qstate import MixtureState
    rho = MixtureState([(0.5, a), (0.5, b)])
    v = criteria.swap_separability(rho, SwapFiducial((0, 0, 0), (1, 1, 1)), 3)
    assert v.lhs == 0 and not v.violated


def test_swap_k_ranges():
    rho = family_ghz_mix(4, 0.5, 0)
    fid = SwapFiducial((0,) * 4, (1,) * 4)
    for k in (0, 4):
        with pytest.raises(StateError):
            criteria.swap_producibility(rho, fid, k)
    for k in (1, 5):
        with pytest.raises(StateError):
            criteria.swap_separability(rho, fid, k)


@pytest.mark.parametrize("k, rhs", [(2, 2.0), (3, 4.0)])
def test_element_producibility_pure_w(k, rhs):
    v = criteria.element_producibility(pure_density(w_qutrit_states()[0]), W_FID, k)
    assert v.lhs == pytest.approx(6.0, abs=1e-12)
    assert v.rhs == pytest.approx(rhs, abs=1e-12)
    assert v.violated


def test_element_producibility_w_threshold():
    p_star = 16 / 97
    assert not criteria.element_producibility(family_w_qutrit_mix(p_star - 1e-6, 0), W_FID, 2).violated
    assert criteria.element_producibility(family_w_qutrit_mix(p_star + 1e-6, 0), W_FID, 2).violated


def test_element_separability_pure_w():
    v = criteria.element_separability(pure_density(w_qutrit_states()[0]), W_FID, 2)
    assert (v.lhs, v.rhs) == pytest.approx((6.0, 4.0), abs=1e-12)
    assert v.violated and v.conclusion is Conclusion.K_NONSEPARABLE


@pytest.mark.parametrize("p", [0.0, 0.1, 0.3, 0.5, 0.9, 1.0])
def test_element_separability_w_closed_form(p):
    v = criteria.element_separability(family_w_qutrit_mix(p, 0), W_FID, 3)
    assert v.lhs == pytest.approx(6 * p, abs=1e-12)
    assert v.rhs == pytest.approx(48 * (1 - p) / 81 + 2 * (p + 8 * (1 - p) / 81), abs=1e-12)


@pytest.mark.parametrize("k", [2, 3])
def test_element_criteria_maximally_mixed(k):
    rho = family_w_qutrit_mix(0, 0)
    for fid in (W_FID, ElementFiducial((1, 2, 0, 1), (0,))):
        for fn in (criteria.element_producibility, criteria.element_separability):
            v = fn(rho, fid, k)
            assert v.lhs == 0 and not v.violated


def test_element_k_range():
    rho = family_w_qutrit_mix(1, 0)
    for k in (1, 4):
        with pytest.raises(StateError):
            criteria.element_separability(rho, W_FID, k)
        with pytest.raises(StateError):
            criteria.element_producibility(rho, W_FID, k)


def test_element_fiducial_validation():
    with pytest.raises(StateError):
        ElementFiducial((0, 0), (1, 1))
    with pytest.raises(StateError):
        ElementFiducial((0, 0), ())
    with pytest.raises(StateError):
        W_FID.validate((3, 3, 3, 2))
    with pytest.raises(StateError):
        ElementFiducial((0, 0, 0, 0), (3,)).validate((3,) * 4)
    notes = ElementFiducial((1, 1, 1, 1), (1, 2)).validate((3,) * 4)
    assert notes and "omega" in notes[0]
    v = criteria.element_separability(family_w_qutrit_mix(0, 1), ElementFiducial((1, 1, 1, 1), (1, 2)), 3)
    assert v.warnings


def test_k1_product_state_never_fires():
    rho = pure_density(make_pure_sparse({(0, 0, 0, 0): 1}, (2,) * 4))
    for v in criteria.pairwise_separability(rho, ElementFiducial((0,) * 4, (1,))):
        assert v.lhs == 0 and not v.violated


def test_k1_bell_pair():
    h = 1 / math.sqrt(2)
    bell = make_pure_sparse({(0, 1, 0, 0): h, (1, 0, 0, 0): h}, (2,) * 4)
    verdicts = criteria.pairwise_separability(pure_density(bell), ElementFiducial((0,) * 4, (1,)))
    assert len(verdicts) == 6
    first = verdicts[0]
    assert first.criterion == "thm2k1[0,1;1,1]"
    assert (first.lhs, first.rhs) == pytest.approx((0.5, 0.0))
    assert first.violated
    assert not any(v.violated for v in verdicts[1:])


def test_k1_maximally_mixed():
    for v in criteria.pairwise_separability(family_ghz_mix(4, 0, 0), ElementFiducial((0,) * 4, (1,))):
        assert v.lhs == 0


def test_record_format():
    v = criteria.swap_producibility(family_ghz_mix(10, 0.2, 0.1), GHZ_FID, 3)
    fields = v.record().split("\t")
    assert fields[0] == "thm1" and fields[1] == "3"
    assert float(fields[2]) == pytest.approx(1.56524758, rel=1e-8)
    assert fields[5] == "true" and fields[6] == "ContainsKPlus1PartiteEntanglement"
    assert len(fields) == len(criteria.CriterionVerdict.FIELDS)
    assert v.describe() == "contains 4-partite entanglement"


def test_tolerance_keeps_equality_unviolated():
    v = criteria.make_verdict("x", 2, 1.0 + 1e-12, 1.0, Conclusion.K_NONSEPARABLE)
    assert not v.violated


# --- properties -----------------------------------------------------------

unit = st.floats(0, 1, allow_nan=False)


def _simplex(p, q):
    return (p / (p + q), q / (p + q)) if p + q > 1 else (p, q)


@settings(max_examples=40, deadline=None)
@given(unit, unit, st.integers(1, 5))
def test_ghz_family_pq_symmetry(p, q, k):
    p, q = _simplex(p, q)
    fid = SwapFiducial((0,) * 6, (1,) * 6)
    a = criteria.swap_producibility(family_ghz_mix(6, p, q), fid, k)
    b = criteria.swap_producibility(family_ghz_mix(6, q, p), fid, k)
    assert a.lhs == pytest.approx(b.lhs, abs=1e-14)
    assert a.rhs == pytest.approx(b.rhs, abs=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_level_monotonicity(seed):
    r = np.random.default_rng(seed)
    rho = random_density((2,) * 4, r, rank=int(r.integers(1, 4)))
    fid = SwapFiducial(tuple(int(x) for x in r.integers(0, 2, 4)), tuple(int(x) for x in r.integers(0, 2, 4)))
    efid = ElementFiducial(tuple(int(x) for x in r.integers(0, 2, 4)), (int(r.integers(0, 2)),))
    # producibility criteria weaken as k grows; separability criteria strengthen
    t1 = [criteria.swap_producibility(rho, fid, k).violated for k in (1, 2, 3)]
    t2 = [criteria.element_producibility(rho, efid, k).violated for k in (2, 3)]
    t3 = [criteria.swap_separability(rho, fid, k).violated for k in (2, 3, 4)]
    t4 = [criteria.element_separability(rho, efid, k).violated for k in (2, 3)]
    for seq in (t1, t2):
        assert all(a or not b for a, b in zip(seq, seq[1:]))
    for seq in (t3, t4):
        assert all(b or not a for a, b in zip(seq, seq[1:]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_swap_fiducial_order_is_irrelevant(seed):
    r = np.random.default_rng(seed)
    rho = random_density((2, 3, 2), r)
    fid = SwapFiducial(tuple(int(r.integers(d)) for d in rho.dims), tuple(int(r.integers(d)) for d in rho.dims))
    a = criteria.swap_separability(rho, fid, 2)
    b = criteria.swap_separability(rho, fid.swapped(), 2)
    assert (a.lhs, a.rhs) == pytest.approx((b.lhs, b.rhs), abs=1e-14)
