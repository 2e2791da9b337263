import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from heraldiq.detect import THRESHOLD, DetectorModel, HeraldSpec
from heraldiq.fock import PureState, Register, fidelity, target_bell
from heraldiq.interferometer import compile_circuit
from heraldiq.propagate import evolve
from heraldiq.schemes import (
    SchemeDefinition,
    SchemeError,
    TargetSpec,
    builtin_names,
    builtin_registry,
    dump_scheme,
    get_scheme,
    load_scheme,
    rationalize,
    run,
)
from heraldiq.schemes.formulas import (
    TABLE_VALUES,
    bell_sms,
    bell_sms_bled,
    calculate,
    ghz_sms,
    ghz_subtraction,
    ghz_unit_cells,
    multiplex,
    w_subtraction,
)
from heraldiq.schemes.registry import FILE_SLOTS, SMS_PATTERN_TAGS


def test_formula_values_exact():
    assert bell_sms(2) == Fraction(4, 27)
    assert bell_sms(3) == Fraction(4, 81)
    assert bell_sms_bled(2) == Fraction(8, 9)
    assert ghz_subtraction(3) == Fraction(1, 64)
    assert ghz_subtraction(3, feed_forward=True) == Fraction(1, 32)
    assert ghz_unit_cells(3) == Fraction(1, 32)
    assert w_subtraction(3) == Fraction(1, 3 * 2**7)
    assert ghz_sms(3) == Fraction(1, 64)
    assert ghz_sms(4) == Fraction(1, 128)


def test_calculate_dispatch_and_errors():
    assert calculate("bell-sms", d=3) == Fraction(4, 81)
    with pytest.raises(ValueError):
        calculate("nope")
    with pytest.raises(ValueError):
        calculate("bell-sms")
    with pytest.raises(ValueError):
        bell_sms(1)


@given(st.fractions(0, 1), st.integers(1, 200))
@settings(max_examples=60, deadline=None)
def test_multiplex_exact_and_bounded(p, n):
    v = multiplex(p, n)
    assert v == 1 - (1 - p) ** n
    assert p <= v <= 1
    assert multiplex(p, n + 1) >= v


def test_table_rows_match_reported_fractions():
    reported = {key: v for _, key, _, _, v, _ in TABLE_VALUES}
    assert reported["bell-4p6m"] == Fraction(2, 27)
    assert reported["bell-4p8m"] == Fraction(3, 16)
    assert reported["bell-5p5m"] == Fraction(12, 125)
    assert reported["bell-6p6m"] == Fraction(4, 27)
    assert reported["bell-4p5m"] == Fraction(1, 9)
    assert reported["ghz-6p10m"] == Fraction(1, 54)
    assert reported["noon-4-vacuum-8m"] == Fraction(3, 256)


def test_registry_names_and_slots():
    names = builtin_names()
    assert set(FILE_SLOTS) <= set(names)
    assert [s.name for s in builtin_registry()] == names
    with pytest.raises(SchemeError):
        get_scheme("bell-unknown")
    for name in ("bell-4p8m", "ghz-6p10m", "ghz-6p12m"):
        s = get_scheme(name)
        assert s.status == "external" and not s.runnable
        with pytest.raises(SchemeError):
            run(s)


def test_hom_noon():
    r = run(get_scheme("hom-noon2"))
    assert r.success_prob == pytest.approx(1)
    assert r.fidelity == pytest.approx(1, abs=1e-12)


def test_postselected_bell():
    r = run(get_scheme("bell-postselected"))
    assert r.success_prob == pytest.approx(0.5, abs=1e-12)
    assert r.success_exact == Fraction(1, 2)
    (w, kept), = r.conditional.components
    ref = PureState(4, {(1, 0, 0, 1): 0.5, (0, 1, 1, 0): 0.5})
    assert ((kept.scaled(math.sqrt(w))) - ref).norm2 < 1e-24


def test_5p5m():
    r = run(get_scheme("bell-5p5m"))
    assert r.success_exact == Fraction(12, 125)
    assert abs(r.success_prob - 12 / 125) < 1e-9
    assert r.fidelity == pytest.approx(1, abs=1e-9)


def test_5p5m_herald_mode_symmetry():
    # any single herald mode gives the same success by cyclic symmetry of the DFT
    s = get_scheme("bell-5p5m")
    psi = evolve(PureState.basis(s.input), compile_circuit(s.circuit))
    probs = []
    for h in range(5):
        probs.append(sum(abs(a) ** 2 for o, a in psi.terms.items() if o[h] == 3))
    assert max(probs) - min(probs) < 1e-12


def test_6p6m_tags_rederived():
    s = get_scheme("bell-6p6m")
    r = run(s)
    assert abs(r.success_prob - 4 / 27) < 1e-9
    seen = {}
    reg = s.relative_register()
    for pat in r.patterns:
        assert pat.probability == pytest.approx(1 / 27, abs=1e-12)
        st_ = r.herald_result.pattern(pat.pattern).state
        fp = fidelity(st_, target_bell("phi+", reg, 4))
        fm = fidelity(st_, target_bell("phi-", reg, 4))
        seen[pat.pattern] = "phi+" if fp > 1 - 1e-9 else "phi-" if fm > 1 - 1e-9 else None
    assert seen == SMS_PATTERN_TAGS
    assert (2, 2) not in seen
    assert r.fidelity == pytest.approx(1, abs=1e-9)


def test_6p6m_matches_formula():
    assert run(get_scheme("bell-6p6m")).success_exact == bell_sms(2)


def test_discovered_files_run():
    for name in ("bell-4p6m", "bell-4p5m"):
        s = get_scheme(name)
        assert s.status == "reconstructed"
        r = run(s)
        assert r.fidelity > 1 - 1e-9
    assert run(get_scheme("bell-4p6m")).success_prob >= 2 / 27


def test_json_roundtrip(tmp_path):
    for name in ("bell-5p5m", "bell-6p6m", "bell-postselected", "bell-4p6m"):
        s = get_scheme(name)
        p = tmp_path / f"{name}.json"
        dump_scheme(s, p)
        back = load_scheme(p)
        assert back.name == s.name
        assert back.expected_success == s.expected_success
        assert run(back).success_prob == pytest.approx(run(s).success_prob, abs=1e-14)


def test_scheme_validation():
    reg = Register.dual_rail([(0, 1), (2, 3)])
    base = get_scheme("bell-5p5m")
    with pytest.raises(SchemeError):
        SchemeDefinition(
            name="bad", circuit=base.circuit, input=(1, 1, 1, 1),
            herald=HeraldSpec((4,), patterns=((3,),)), target=TargetSpec("bell", {"state": "psi+"}, reg),
        )
    with pytest.raises(SchemeError):
        TargetSpec("banana", {}, reg)


def test_noisy_run_accounts_events():
    s = get_scheme("bell-5p5m")
    ideal = run(s)
    r = run(s, detectors=[DetectorModel("pnr", 0.9)])
    assert r.success_prob < ideal.success_prob
    assert r.false_negative_prob > 0
    s = get_scheme("bell-4p6m")
    r = run(s, detectors=[DetectorModel(THRESHOLD)] * 2)
    assert r.false_positive_prob > 0
    assert r.success_prob > run(s).success_prob


def test_rationalize():
    assert rationalize(12 / 125) == Fraction(12, 125)
    assert rationalize(math.pi) is None
