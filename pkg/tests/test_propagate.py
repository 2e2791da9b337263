import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heraldiq.fock import PureState, target_noon
from heraldiq.interferometer import bs_matrix, dft, haar_unitary
from heraldiq.permanent import PermanentError, permanent, permanents
from heraldiq.propagate import (
    KLM_NS_UNITARY,
    CapExceeded,
    LabeledInput,
    coincidence_probability,
    evolve,
    evolve_labeled,
    ns_gate_check,
    transition_amplitudes,
)

from oracles import creation_expansion, naive_permanent


@pytest.mark.parametrize("n", range(0, 7))
def test_permanent_matches_permutation_sum(n):
    rng = np.random.default_rng(100 + n)
    for _ in range(5):
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        assert abs(permanent(a) - naive_permanent(a)) <= 1e-10 * max(1.0, abs(naive_permanent(a)))


def test_permanent_known_values():
    assert permanent(np.ones((4, 4))) == pytest.approx(24)
    assert permanent(np.eye(5)) == pytest.approx(1)
    assert permanent([[1, 2], [3, 4]]) == pytest.approx(10)


def test_permanents_batch_matches_single():
    rng = np.random.default_rng(7)
    stack = rng.standard_normal((6, 4, 4)) + 1j * rng.standard_normal((6, 4, 4))
    batch = permanents(stack)
    for a, p in zip(stack, batch):
        assert p == pytest.approx(permanent(a), abs=1e-12)


def test_permanent_rejects_oversize_and_nonsquare():
    with pytest.raises(PermanentError):
        permanent(np.ones((3, 4)))
    with pytest.raises(PermanentError):
        permanent(np.ones((13, 13)))


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_permanent_invariant_under_row_permutation_and_transpose(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    p = permanent(a)
    perm = rng.permutation(n)
    assert permanent(a[perm]) == pytest.approx(p, rel=1e-9, abs=1e-9)
    assert permanent(a.T) == pytest.approx(p, rel=1e-9, abs=1e-9)


def _inputs(n, m):
    return [occ for occ in product(range(n + 1), repeat=m) if sum(occ) == n]


def test_evolve_matches_creation_expansion_spot():
    u = haar_unitary(3, np.random.default_rng(1))
    out = evolve(PureState.basis((1, 1, 1)), u)
    ref = creation_expansion(u, (1, 1, 1))
    for occ, a in ref.items():
        assert out.amplitude(occ) == pytest.approx(a, abs=1e-12)


def test_hom_bunching():
    out = evolve(PureState.basis((1, 1)), bs_matrix(math.pi / 4))
    assert abs(out.amplitude((1, 1))) < 1e-15
    assert abs(abs(out.inner(target_noon(2))) - 1) < 1e-12


def test_evolve_preserves_norm_and_photon_number():
    rng = np.random.default_rng(3)
    u = haar_unitary(5, rng)
    psi = PureState(5, {(1, 1, 0, 1, 0): 0.6, (2, 0, 0, 0, 1): 0.8j})
    out = evolve(psi, u)
    assert out.norm2 == pytest.approx(1, abs=1e-12)
    assert out.photon_numbers() == {3}


def test_evolve_vacuum_and_identity():
    assert evolve(PureState.basis((0, 0, 0)), dft(3)).amplitude((0, 0, 0)) == 1
    psi = PureState(3, {(2, 1, 0): 1.0})
    assert evolve(psi, np.eye(3)).amplitude((2, 1, 0)) == pytest.approx(1)


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_evolve_composes(seed):
    rng = np.random.default_rng(seed)
    u, v = haar_unitary(4, rng), haar_unitary(4, rng)
    psi = PureState.basis((1, 0, 2, 0))
    a = evolve(evolve(psi, u), v)
    b = evolve(psi, v @ u)
    assert (a - b).norm2 < 1e-20


def test_transition_amplitudes_agree_with_evolve():
    u = haar_unitary(4, np.random.default_rng(11))
    out = evolve(PureState.basis((1, 1, 1, 0)), u)
    occs = [(3, 0, 0, 0), (0, 1, 1, 1), (1, 0, 2, 0)]
    amps = transition_amplitudes(u, (1, 1, 1, 0), occs)
    for o, a in zip(occs, amps):
        assert a == pytest.approx(out.amplitude(o), abs=1e-12)


def test_caps():
    with pytest.raises(CapExceeded):
        evolve(PureState.basis((7, 6)), np.eye(2))
    with pytest.raises(CapExceeded):
        evolve(PureState.basis((1, 0, 1)), np.eye(3), max_photons=1)


@pytest.mark.parametrize("v", [0.0, 0.25, 0.81, 1.0])
def test_partial_distinguishability_hom_dip(v):
    # amplitude overlap sqrt(v) per photon pair gives |<phi1|phi2>|^2 = v
    ens = evolve_labeled(LabeledInput.obb((1, 1), math.sqrt(v)), bs_matrix(math.pi / 4))
    assert coincidence_probability(ens, (1, 1)) == pytest.approx((1 - v) / 2, abs=1e-10)
    assert ens.trace == pytest.approx(1, abs=1e-12)


def test_identical_labeled_matches_pure_evolution():
    u = haar_unitary(3, np.random.default_rng(5))
    ens = evolve_labeled(LabeledInput.identical((1, 1, 1)), u)
    pure = evolve(PureState.basis((1, 1, 1)), u)
    for occ in _inputs(3, 3):
        assert coincidence_probability(ens, occ) == pytest.approx(abs(pure.amplitude(occ)) ** 2, abs=1e-12)


def test_fully_distinguishable_is_classical():
    # orthogonal internal states: output statistics from |U_ji|^2 only
    u = haar_unitary(2, np.random.default_rng(9))
    ens = evolve_labeled(LabeledInput.obb((1, 1), 0.0), u)
    q = np.abs(u) ** 2
    assert coincidence_probability(ens, (1, 1)) == pytest.approx(q[0, 0] * q[1, 1] + q[1, 0] * q[0, 1], abs=1e-12)


def test_klm_ns_gate():
    chk = ns_gate_check(KLM_NS_UNITARY, 1, 1, 1)
    assert chk.is_ns
    assert chk.success_prob == pytest.approx(0.25, abs=1e-12)
    assert not ns_gate_check(np.eye(3)).is_ns
