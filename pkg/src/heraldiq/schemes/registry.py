"""Built-in schemes.

Circuits printed explicitly are constructed here. Schemes whose circuits are
only known numerically live as JSON files under ``schemes/data``; a slot whose
file is missing is listed with status ``"external"`` and is not runnable.
"""

from __future__ import annotations

import math
from fractions import Fraction
from importlib import resources

from ..detect import DetectorModel, HeraldSpec
from ..fock import Register
from ..interferometer import DFT, BeamSplitter, Circuit, Swap
from .definition import SchemeDefinition, SchemeError, TargetSpec, load_scheme

_Q = math.pi / 4

# Per-pattern Bell variant heralded by the two-block SMS circuit; obtained by
# simulating the circuit (see tests) and stored here.
SMS_PATTERN_TAGS = {(0, 4): "phi+", (1, 3): "phi-", (3, 1): "phi-", (4, 0): "phi+"}


def postselected_bell() -> SchemeDefinition:
    """Two single photons on two real 50:50 splitters followed by a mode swap.

    Keeping only one photon in each of the rail pairs (0,1) and (2,3) leaves
    ``(|1001> + |0110>)/sqrt(2)``.
    """
    circ = Circuit(4, (BeamSplitter(0, 1, _Q, -math.pi / 2), BeamSplitter(2, 3, _Q, -math.pi / 2), Swap(1, 2)))
    return SchemeDefinition(
        name="bell-postselected",
        circuit=circ,
        input=(1, 0, 1, 0),
        herald=None,
        postselect=True,
        target=TargetSpec("bell", {"state": "psi+"}, Register.dual_rail([(0, 1), (2, 3)])),
        expected_success=Fraction(1, 2),
        provenance="two-splitter postselected source; probability derived by simulation",
    )


def bell_5p5m() -> SchemeDefinition:
    return SchemeDefinition(
        name="bell-5p5m",
        circuit=Circuit(5, (DFT(tuple(range(5))),)),
        input=(1, 1, 1, 1, 1),
        herald=HeraldSpec((4,), patterns=((3,),)),
        target=TargetSpec("bell", {"state": "psi+"}, Register.dual_rail([(0, 1), (2, 3)])),
        detectors=(DetectorModel.ideal(),),
        expected_success=Fraction(12, 125),
        correction="phase",
        provenance="5-mode DFT with five single photons; herald three photons in mode 4",
    )


def bell_6p6m() -> SchemeDefinition:
    circ = Circuit(6, (DFT((0, 1, 2)), DFT((3, 4, 5)), BeamSplitter(0, 3, _Q, -math.pi / 2)))
    return SchemeDefinition(
        name="bell-6p6m",
        circuit=circ,
        input=(1,) * 6,
        herald=HeraldSpec((0, 3), total=4, corrections=SMS_PATTERN_TAGS),
        target=TargetSpec("bell", {"state": "phi+"}, Register.dual_rail([(1, 4), (2, 5)])),
        detectors=(DetectorModel.ideal(), DetectorModel.ideal()),
        expected_success=Fraction(4, 27),
        provenance="two 3-mode DFT blocks; their top outputs meet on a 50:50 splitter; any 4-photon PNR pattern heralds",
    )


def hom_noon2() -> SchemeDefinition:
    return SchemeDefinition(
        name="hom-noon2",
        circuit=Circuit(2, (BeamSplitter(0, 1),)),
        input=(1, 1),
        herald=None,
        target=TargetSpec("noon", {"n": 2}, Register(((0, 1),))),
        expected_success=Fraction(1),
        provenance="two-photon interference on a 50:50 splitter",
    )


# name -> (photons, modes, reported success, target kind, register groups)
FILE_SLOTS = {
    "bell-4p6m": (4, 6, Fraction(2, 27), "bell", ((0, 1), (2, 3))),
    "bell-4p8m": (4, 8, Fraction(3, 16), "bell", ((0, 1), (2, 3))),
    "bell-4p5m": (4, 5, Fraction(1, 9), "bell", ((0, 1), (2, 3))),
    "ghz-6p10m": (6, 10, Fraction(1, 54), "ghz", ((0, 1), (2, 3), (4, 5))),
    "ghz-6p12m": (6, 12, Fraction(1, 64), "ghz", ((0, 1), (2, 3), (4, 5))),
}


def _placeholder(name: str) -> SchemeDefinition:
    n, m, p, kind, groups = FILE_SLOTS[name]
    return SchemeDefinition(
        name=name,
        circuit=Circuit(m),
        input=(0,) * m,
        herald=None,
        target=TargetSpec(kind, {}, Register(groups)),
        expected_success=p,
        provenance=f"{n} photons, {m} modes; circuit not bundled",
        status="external",
    )


def slot_scheme(name: str) -> SchemeDefinition:
    if name not in FILE_SLOTS:
        raise SchemeError(f"no scheme-file slot named {name!r}")
    res = resources.files("heraldiq.schemes").joinpath("data", f"{name}.json")
    if not res.is_file():
        return _placeholder(name)
    with resources.as_file(res) as path:
        return load_scheme(path)


_BUILDERS = {
    "bell-postselected": postselected_bell,
    "bell-5p5m": bell_5p5m,
    "bell-6p6m": bell_6p6m,
    "hom-noon2": hom_noon2,
}


def builtin_registry() -> list[SchemeDefinition]:
    return [f() for f in _BUILDERS.values()] + [slot_scheme(n) for n in FILE_SLOTS]


def builtin_names() -> list[str]:
    return list(_BUILDERS) + list(FILE_SLOTS)


def get_scheme(name: str) -> SchemeDefinition:
    if name in _BUILDERS:
        return _BUILDERS[name]()
    if name in FILE_SLOTS:
        return slot_scheme(name)
    raise SchemeError(f"unknown builtin scheme {name!r}; choose from {builtin_names()}")
