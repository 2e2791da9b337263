import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heraldiq.correction import CLASSES, best_fidelity
from heraldiq.detect import (
    FANOUT,
    PNR,
    THRESHOLD,
    DetectError,
    DetectorModel,
    HeraldSpec,
    apply_loss,
    apply_losses,
    fanout_click_distribution,
    herald,
    postselect,
    split_by_herald,
)
from heraldiq.fock import PureState, Register, fidelity, target_bell
from heraldiq.propagate import evolve

from oracles import detector_by_photons, fanout_by_assignment


@given(st.integers(0, 6), st.floats(0, 1), st.floats(0, 0.5), st.sampled_from([PNR, THRESHOLD]))
@settings(max_examples=80, deadline=None)
def test_response_matches_photon_enumeration(n, eta, pdc, kind):
    got = DetectorModel(kind, eta, pdc).response(n)
    ref = detector_by_photons(n, eta, pdc, kind)
    for k in set(got) | set(ref):
        assert got.get(k, 0.0) == pytest.approx(ref.get(k, 0.0), abs=1e-12)


@given(st.integers(0, 7), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_fanout_matches_assignment_enumeration(k, b):
    got = fanout_click_distribution(k, b)
    assert sum(got.values()) == 1
    ref = fanout_by_assignment(k, b) if k else {0: 1.0}
    for c in set(got) | set(ref):
        assert float(got.get(c, 0)) == pytest.approx(ref.get(c, 0.0), abs=1e-12)


def test_fanout_two_photons_two_branches():
    d = fanout_click_distribution(2, 2)
    assert d == {1: Fraction(1, 2), 2: Fraction(1, 2)}
    assert fanout_click_distribution(3, 2)[2] == Fraction(3, 4)


@given(st.integers(0, 6), st.sampled_from([PNR, THRESHOLD, FANOUT]), st.floats(0, 1), st.floats(0, 0.9))
@settings(max_examples=60, deadline=None)
def test_response_is_a_distribution(n, kind, eta, pdc):
    r = DetectorModel(kind, eta, pdc, 3).response(n)
    assert sum(r.values()) == pytest.approx(1, abs=1e-12)
    assert all(v >= 0 for v in r.values())


def test_detector_validation():
    with pytest.raises(DetectError):
        DetectorModel("apd")
    with pytest.raises(DetectError):
        DetectorModel(PNR, 1.5)
    with pytest.raises(DetectError):
        DetectorModel(PNR, 1.0, 1.0)


def test_herald_spec_exclusive():
    with pytest.raises(DetectError):
        HeraldSpec((0, 1))
    with pytest.raises(DetectError):
        HeraldSpec((0, 1), patterns=((1, 0),), total=1)
    spec = HeraldSpec((0, 1, 2, 3), one_per_pair=((0, 1), (2, 3)))
    assert spec.accepts((1, 0, 0, 1))
    assert not spec.accepts((2, 0, 0, 1))


def test_split_by_herald_partitions_norm():
    psi = _hom_plus_herald()
    parts = split_by_herald(psi, (2,))
    assert sum(p.norm2 for p in parts.values()) == pytest.approx(psi.norm2)


def _hom_plus_herald():
    # |11> on a 50:50 splitter with an extra photon in herald mode 2
    u = [[1 / math.sqrt(2), 1j / math.sqrt(2), 0], [1j / math.sqrt(2), 1 / math.sqrt(2), 0], [0, 0, 1]]
    return evolve(PureState.basis((1, 1, 1)), u)


def test_herald_ideal_pnr():
    res = herald(_hom_plus_herald(), HeraldSpec((2,), patterns=((1,),)))
    assert res.success_prob == pytest.approx(1)
    assert res.target_modes == (0, 1)
    st_ = res.patterns[0].state
    assert abs(st_.amplitude((1, 1))) < 1e-15


def test_dark_counts_on_vacuum_pattern_exact():
    psi = PureState(3, {(1, 0, 0): math.sqrt(0.3), (0, 1, 0): math.sqrt(0.7)})
    for pdc in (0.0, 0.01, 0.2):
        res = herald(psi, HeraldSpec((1, 2), patterns=((0, 0),)), DetectorModel(PNR, 1.0, pdc))
        assert res.success_prob == pytest.approx(0.3 * (1 - pdc) ** 2, abs=1e-15)


def test_threshold_accepts_multiphoton():
    psi = PureState.basis((1, 2))
    res = herald(psi, HeraldSpec((1,), patterns=((1,),)), DetectorModel(THRESHOLD))
    assert res.success_prob == pytest.approx(1)
    res = herald(psi, HeraldSpec((1,), patterns=((1,),)), DetectorModel(PNR))
    assert res.success_prob == 0


def test_false_positive_from_target_loss_with_threshold_herald():
    # lost photon leaves target vacuum; the surviving branch is amplitude-damped
    # to sqrt(0.6)|10> + sqrt(0.5)|01>, which also leaves the ideal span
    psi = PureState(3, {(1, 0, 1): math.sqrt(0.5), (0, 1, 1): math.sqrt(0.5)})
    lossy = apply_losses(psi, {0: 0.6})
    res = herald(lossy, HeraldSpec((2,), patterns=((1,),)), DetectorModel(THRESHOLD), ideal_state=psi)
    survivor = 0.3 + 0.5
    kept = (math.sqrt(0.3) + math.sqrt(0.5)) ** 2 / 2
    assert res.false_positive_prob == pytest.approx(0.5 * 0.4 + survivor - kept, abs=1e-12)
    assert res.success_prob == pytest.approx(1)
    assert res.false_negative_prob == 0


def test_false_negative_from_dark_counts():
    psi = PureState(2, {(1, 0): 1.0})
    res = herald(psi, HeraldSpec((1,), patterns=((0,),)), DetectorModel(PNR, 1.0, 0.1), ideal_state=psi)
    assert res.false_negative_prob == pytest.approx(0.1)


@given(st.floats(0, 1), st.integers(0, 4))
@settings(max_examples=40, deadline=None)
def test_loss_binomial(eta, n):
    ens = apply_loss(PureState.basis((n,)), 0, eta)
    assert ens.trace == pytest.approx(1, abs=1e-12)
    for w, s in ens.components:
        k = next(iter(s.terms))[0] if s.terms else 0
        assert w * s.norm2 == pytest.approx(math.comb(n, k) * eta**k * (1 - eta) ** (n - k), abs=1e-12)


def test_postselect_dual_rail():
    psi = PureState(4, {(1, 0, 0, 1): 0.5, (2, 0, 0, 0): math.sqrt(0.75)})
    p, out = postselect(psi, Register.dual_rail([(0, 1), (2, 3)]))
    assert p == pytest.approx(0.25)
    assert out.terms.keys() == {(1, 0, 0, 1)}


def test_correction_classes():
    reg = Register.dual_rail([(0, 1), (2, 3)])
    t = target_bell("phi+", reg)
    phased = PureState(4, {(1, 0, 1, 0): 1 / math.sqrt(2), (0, 1, 0, 1): 1j / math.sqrt(2)})
    flipped = target_bell("psi+", reg)
    assert best_fidelity(phased, t, reg, "none")[0] == pytest.approx(0.5)
    assert best_fidelity(phased, t, reg, "phase")[0] == pytest.approx(1)
    assert best_fidelity(flipped, t, reg, "phase")[0] == pytest.approx(0, abs=1e-15)
    f, corr = best_fidelity(flipped, t, reg, "pauli")
    assert f == pytest.approx(1)
    assert sum(corr.shifts) == 1
    assert CLASSES == ("none", "phase", "pauli")


@given(st.lists(st.floats(-math.pi, math.pi), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_phase_correction_undoes_rail_phases(ph):
    reg = Register.dual_rail([(0, 1), (2, 3)])
    t = target_bell("psi-", reg)
    terms = {}
    for occ, a in t.terms.items():
        d = reg.read(occ)
        terms[occ] = a * complex(math.cos(ph[d[0]] + ph[2 + d[1]]), math.sin(ph[d[0]] + ph[2 + d[1]]))
    f, _ = best_fidelity(PureState(4, terms), t, reg, "phase")
    assert f == pytest.approx(1, abs=1e-12)
    assert fidelity(PureState(4, terms), t) <= f + 1e-12
