"""Executable scheme definitions and their JSON scheme-file format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from ..correction import CLASSES
from ..detect import DetectorModel, HeraldSpec
from ..fock import FockError, Occupation, PureState, Register, target_bell, target_ghz, target_noon, target_phi_alpha, target_w
from ..interferometer import DFT, BeamSplitter, Circuit, PhaseShift, Swap, UnitaryBlock

SCHEME_FORMAT_VERSION = 1
STATUSES = ("verified", "reconstructed", "external")
TARGET_KINDS = ("bell", "ghz", "w", "noon", "phi_alpha")


class SchemeError(ValueError):
    pass


@dataclass(frozen=True)
class TargetSpec:
    """Target state by kind; ``register`` holds absolute circuit modes."""

    kind: str
    params: dict
    register: Register

    def __post_init__(self):
        if self.kind not in TARGET_KINDS:
            raise SchemeError(f"unknown target kind {self.kind!r}")

    def build(self, reg: Register, m: int) -> PureState:
        """Target on ``m`` modes using the (already relocated) register ``reg``."""
        p = self.params
        if self.kind == "bell":
            return target_bell(p.get("state", "phi+"), reg, m)
        if self.kind == "ghz":
            return target_ghz(int(p.get("n", reg.n)), int(p.get("d", 2)), reg, m)
        if self.kind == "w":
            return target_w(int(p.get("n", reg.n)), reg, m)
        if self.kind == "phi_alpha":
            return target_phi_alpha(float(p["alpha"]), reg, m)
        n = int(p.get("n", 2))
        a, b = reg.groups[0][:2]
        terms = {}
        for (occ, amp) in target_noon(n).terms.items():
            full = [0] * m
            full[a], full[b] = occ
            terms[tuple(full)] = amp
        return PureState(m, terms)


@dataclass(frozen=True)
class SchemeDefinition:
    name: str
    circuit: Circuit
    input: Occupation
    herald: HeraldSpec | None
    target: TargetSpec
    detectors: tuple[DetectorModel, ...] = ()
    expected_success: Fraction | None = None
    correction: str = "none"
    postselect: bool = False
    provenance: str = ""
    status: str = "verified"
    notes: str = ""

    def __post_init__(self):
        object.__setattr__(self, "input", tuple(int(c) for c in self.input))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if len(self.input) != self.circuit.m:
            raise SchemeError(f"{self.name}: input has {len(self.input)} modes, circuit has {self.circuit.m}")
        if self.expected_success is not None and not 0 < self.expected_success <= 1:
            raise SchemeError(f"{self.name}: expected success must lie in (0, 1]")
        if self.correction not in CLASSES:
            raise SchemeError(f"{self.name}: unknown correction class {self.correction!r}")
        if self.status not in STATUSES:
            raise SchemeError(f"{self.name}: unknown status {self.status!r}")
        if self.herald is not None:
            if self.postselect:
                raise SchemeError(f"{self.name}: choose heralding or postselection, not both")
            if any(not 0 <= x < self.m for x in self.herald.modes):
                raise SchemeError(f"{self.name}: herald mode outside the circuit")
            if self.detectors and len(self.detectors) != len(self.herald.modes):
                raise SchemeError(f"{self.name}: one detector per herald mode is required")
            if set(self.herald.modes) & set(self.target.register.modes):
                raise SchemeError(f"{self.name}: register overlaps herald modes")
        if self.target.register.min_modes() > self.m:
            raise SchemeError(f"{self.name}: register outside the circuit")

    @property
    def m(self) -> int:
        return self.circuit.m

    @property
    def photons(self) -> int:
        return sum(self.input)

    @property
    def target_modes(self) -> tuple[int, ...]:
        if self.herald is None:
            return tuple(range(self.m))
        return self.herald.target_modes(self.m)

    def relative_register(self) -> Register:
        pos = {mode: k for k, mode in enumerate(self.target_modes)}
        return Register(tuple(tuple(pos[x] for x in g) for g in self.target.register.groups))

    def target_state(self, tag: str | None = None) -> PureState:
        reg = self.relative_register()
        if tag is not None:
            return target_bell(tag, reg, len(self.target_modes))
        return self.target.build(reg, len(self.target_modes))

    def herald_detectors(self) -> tuple[DetectorModel, ...]:
        if self.herald is None:
            return ()
        return self.detectors or tuple(DetectorModel.ideal() for _ in self.herald.modes)

    @property
    def runnable(self) -> bool:
        return self.status != "external"


# --- JSON ---------------------------------------------------------------------


def _element_to_json(el) -> dict:
    if isinstance(el, BeamSplitter):
        return {"type": "bs", "modes": [el.i, el.j], "theta": el.theta, "phi": el.phi}
    if isinstance(el, PhaseShift):
        return {"type": "ps", "mode": el.i, "phi": el.phi}
    if isinstance(el, Swap):
        return {"type": "swap", "modes": [el.i, el.j]}
    if isinstance(el, DFT):
        return {"type": "dft", "modes": list(el.modes)}
    if isinstance(el, UnitaryBlock):
        return {
            "type": "unitary",
            "modes": list(el.modes),
            "real": el.matrix.real.tolist(),
            "imag": el.matrix.imag.tolist(),
        }
    raise SchemeError(f"cannot serialize element {el!r}")


def _element_from_json(d: dict):
    kind = d.get("type")
    try:
        if kind == "bs":
            i, j = d["modes"]
            return BeamSplitter(int(i), int(j), float(d.get("theta", math.pi / 4)), float(d.get("phi", 0.0)))
        if kind == "ps":
            return PhaseShift(int(d["mode"]), float(d["phi"]))
        if kind == "swap":
            i, j = d["modes"]
            return Swap(int(i), int(j))
        if kind == "dft":
            return DFT(tuple(d["modes"]))
        if kind == "unitary":
            mat = np.asarray(d["real"], dtype=float) + 1j * np.asarray(d.get("imag", np.zeros_like(d["real"])), dtype=float)
            return UnitaryBlock(mat, tuple(d["modes"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemeError(f"malformed {kind} element: {exc}") from exc
    raise SchemeError(f"unknown element type {kind!r}")


def _pattern_key(p) -> str:
    return ",".join(str(c) for c in p)


def _detector_to_json(d: DetectorModel) -> dict:
    out = {"kind": d.kind, "efficiency": d.efficiency, "dark_count": d.dark_count}
    if d.kind == "fanout":
        out["branches"] = d.branches
    return out


def scheme_to_dict(s: SchemeDefinition) -> dict[str, Any]:
    out: dict[str, Any] = {
        "format_version": SCHEME_FORMAT_VERSION,
        "name": s.name,
        "modes": s.m,
        "elements": [_element_to_json(e) for e in s.circuit.elements],
        "input": list(s.input),
    }
    if s.herald is not None:
        h: dict[str, Any] = {"modes": list(s.herald.modes)}
        if s.herald.patterns is not None:
            h["patterns"] = [list(p) for p in s.herald.patterns]
        elif s.herald.total is not None:
            h["predicate"] = {"total": s.herald.total}
        else:
            h["predicate"] = {"one_per_pair": [list(p) for p in s.herald.one_per_pair]}
        if s.herald.corrections:
            h["corrections"] = {_pattern_key(k): v for k, v in sorted(s.herald.corrections.items())}
        out["herald"] = h
    out["postselect"] = s.postselect
    out["detectors"] = [_detector_to_json(d) for d in s.detectors]
    out["target"] = {
        "kind": s.target.kind,
        "params": dict(s.target.params),
        "register": [list(g) for g in s.target.register.groups],
    }
    out["correction"] = s.correction
    out["expected_success"] = None if s.expected_success is None else str(s.expected_success)
    out["provenance"] = s.provenance
    out["status"] = s.status
    if s.notes:
        out["notes"] = s.notes
    return out


def scheme_from_dict(d: dict[str, Any]) -> SchemeDefinition:
    try:
        m = int(d["modes"])
        circuit = Circuit(m, tuple(_element_from_json(e) for e in d.get("elements", [])))
        herald = None
        if d.get("herald") is not None:
            h = d["herald"]
            pred = h.get("predicate", {})
            corr = {tuple(int(c) for c in k.split(",")): v for k, v in h.get("corrections", {}).items()}
            herald = HeraldSpec(
                tuple(h["modes"]),
                patterns=tuple(tuple(p) for p in h["patterns"]) if "patterns" in h else None,
                total=pred.get("total"),
                one_per_pair=tuple(tuple(p) for p in pred["one_per_pair"]) if "one_per_pair" in pred else None,
                corrections=corr,
            )
        dets = tuple(
            DetectorModel(x.get("kind", "pnr"), float(x.get("efficiency", 1.0)), float(x.get("dark_count", 0.0)), int(x.get("branches", 2)))
            for x in d.get("detectors", [])
        )
        t = d["target"]
        target = TargetSpec(t["kind"], dict(t.get("params", {})), Register(tuple(tuple(g) for g in t["register"])))
        exp = d.get("expected_success")
        return SchemeDefinition(
            name=str(d["name"]),
            circuit=circuit,
            input=tuple(d["input"]),
            herald=herald,
            target=target,
            detectors=dets,
            expected_success=None if exp is None else Fraction(exp),
            correction=d.get("correction", "none"),
            postselect=bool(d.get("postselect", False)),
            provenance=d.get("provenance", ""),
            status=d.get("status", "reconstructed"),
            notes=d.get("notes", ""),
        )
    except SchemeError:
        raise
    except (KeyError, TypeError, ValueError, FockError) as exc:
        raise SchemeError(f"invalid scheme file: {exc}") from exc


def dump_scheme(s: SchemeDefinition, path: str | Path | None = None) -> str:
    text = json.dumps(scheme_to_dict(s), indent=2, sort_keys=False) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def load_scheme(path: str | Path) -> SchemeDefinition:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemeError(f"{path}: not valid JSON ({exc})") from exc
    return scheme_from_dict(data)


__all__ = [
    "SCHEME_FORMAT_VERSION",
    "SchemeDefinition",
    "SchemeError",
    "TargetSpec",
    "dump_scheme",
    "load_scheme",
    "scheme_from_dict",
    "scheme_to_dict",
]
