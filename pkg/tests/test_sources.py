import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heraldiq.detect import PNR, THRESHOLD, DetectorModel
from heraldiq.sources import (
    JSAGrid,
    SingleEmitter,
    TMSVSource,
    double_gaussian_jsa,
    g2_from_distribution,
    heralded_g2,
    herald_single,
    hom_visibility,
    jsi_purity_bound,
    read_jsa_csv,
    schmidt_metrics,
    thermal_distribution,
    tmsv_state,
    truncation_error,
    write_jsa_csv,
)

from oracles import schmidt_number_dense


def test_rank_one_jsa():
    a = np.outer(np.exp(-np.linspace(-2, 2, 16) ** 2), np.exp(-np.linspace(-3, 3, 16) ** 2 / 2))
    met = schmidt_metrics(JSAGrid.from_array(a))
    assert met.schmidt_number == pytest.approx(1, abs=1e-12)
    assert met.purity == pytest.approx(1, abs=1e-12)
    assert met.g2_unheralded == pytest.approx(2, abs=1e-12)


@pytest.mark.parametrize("seed", range(20))
def test_schmidt_number_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(rng.integers(4, 24, 2))
    a = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    assert schmidt_metrics(JSAGrid.from_array(a)).schmidt_number == pytest.approx(schmidt_number_dense(a), abs=1e-10)


@given(st.floats(-0.95, 0.95))
@settings(max_examples=25, deadline=None)
def test_purity_in_unit_interval_and_decreasing_with_correlation(r):
    p = schmidt_metrics(double_gaussian_jsa(48, r)).purity
    assert 0 < p <= 1 + 1e-12
    assert schmidt_metrics(double_gaussian_jsa(48, 0.0)).purity >= p - 1e-9


def test_double_gaussian_purity_closed_form():
    # continuous limit: P = sqrt(1 - r^2) for a correlated Gaussian
    for r in (0.0, 0.3, 0.6):
        p = schmidt_metrics(double_gaussian_jsa(128, r, span=8.0)).purity
        assert p == pytest.approx(math.sqrt(1 - r**2), abs=1e-6)


def test_jsi_bound_is_upper_bound_with_chirp():
    jsa = double_gaussian_jsa(64, 0.0, chirp=0.8)
    true_p = schmidt_metrics(jsa).purity
    bound = jsi_purity_bound(np.abs(jsa.amplitudes) ** 2)
    assert bound >= true_p
    assert bound == pytest.approx(1, abs=1e-9)
    assert true_p < 0.99


@given(st.floats(-0.8, 0.8), st.floats(-1.0, 1.0))
@settings(max_examples=20, deadline=None)
def test_jsi_bound_never_below_true_purity(r, chirp):
    jsa = double_gaussian_jsa(32, r, chirp=chirp)
    assert jsi_purity_bound(np.abs(jsa.amplitudes) ** 2) >= schmidt_metrics(jsa).purity - 1e-12


def test_jsa_csv_roundtrip(tmp_path):
    jsa = double_gaussian_jsa(8, 0.4, chirp=0.3)
    path = tmp_path / "jsa.csv"
    write_jsa_csv(jsa, path)
    back = read_jsa_csv(path)
    assert np.allclose(back.amplitudes, jsa.amplitudes, atol=1e-15)
    assert np.allclose(back.idler_axis, jsa.idler_axis)


def test_tmsv_truncation_tail():
    src = TMSVSource(0.2, n_max=10)
    assert truncation_error(src) < 1e-10
    assert 1 - tmsv_state(src).norm2 == pytest.approx(truncation_error(src), abs=1e-15)
    pp = src.pair_probs()
    assert pp[1] / pp[0] == pytest.approx(math.tanh(0.2) ** 2)


def test_tmsv_marginal_is_thermal():
    src = TMSVSource(0.5, n_max=30)
    mean = math.sinh(0.5) ** 2
    th = thermal_distribution(mean, 30)
    for k, p in enumerate(src.pair_probs()):
        assert p == pytest.approx(th[k], abs=1e-14)
    assert g2_from_distribution(th) == pytest.approx(2, abs=1e-8)


def test_heralded_g2():
    src = TMSVSource(0.2, n_max=12)
    assert heralded_g2(src, DetectorModel(PNR)) == pytest.approx(0, abs=1e-15)
    g = heralded_g2(src, DetectorModel(THRESHOLD))
    assert 0 < g < 0.2
    p, ens = herald_single(src, DetectorModel(PNR))
    assert p == pytest.approx(src.pair_probs()[1])


def test_hom_visibility_and_emitter():
    assert hom_visibility([1, 0], [1, 0]) == pytest.approx(1)
    assert hom_visibility([1, 0], [0, 1]) == pytest.approx(0)
    assert hom_visibility([1, 1], [1, 0]) == pytest.approx(0.5)
    inp = SingleEmitter(indistinguishability=0.9).labeled_input((1, 1))
    assert len(inp.photons) == 2
