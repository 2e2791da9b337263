"""Fidelity up to local feed-forward corrections on a qudit register.

Two correction classes are supported: ``"phase"`` (independent phase per rail
of every qudit) and ``"pauli"`` (cyclic relabelling of each qudit's rails,
i.e. X-type flips, combined with rail phases). ``"none"`` is plain fidelity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product

from .fock import PureState, Register, StateEnsemble, as_ensemble, fidelity

CLASSES = ("none", "phase", "pauli")


@dataclass(frozen=True)
class Correction:
    shifts: tuple[int, ...]
    phases: tuple[tuple[float, ...], ...]

    def describe(self) -> str:
        flips = "".join("X" if s else "I" for s in self.shifts) if any(self.shifts) else ""
        return (flips + " " if flips else "") + "phases=" + ",".join(
            "(" + ",".join(f"{p:.4f}" for p in ph) + ")" for ph in self.phases
        )


def _digit_amps(state: PureState, target: PureState, reg: Register) -> tuple[list, list]:
    keys, pairs = [], []
    for occ, t in target.sorted_terms():
        digits = reg.read(occ)
        if digits is None:
            continue
        keys.append(digits)
        pairs.append((t.conjugate(), state.amplitude(occ)))
    return keys, pairs


def _apply_shift(target: PureState, reg: Register, shifts: tuple[int, ...]) -> PureState:
    terms = {}
    for occ, a in target.terms.items():
        digits = reg.read(occ)
        if digits is None:
            terms[occ] = terms.get(occ, 0j) + a
            continue
        new = tuple((d + s) % len(g) for d, s, g in zip(digits, shifts, reg.groups))
        terms[reg.embed(new, target.m)] = a
    return PureState(target.m, terms)


def _apply_phases(target: PureState, reg: Register, phases) -> PureState:
    terms = {}
    for occ, a in target.terms.items():
        digits = reg.read(occ)
        ph = 0.0 if digits is None else sum(phases[q][d] for q, d in enumerate(digits))
        terms[occ] = a * cmath.exp(-1j * ph)
    return PureState(target.m, terms)


def align_phases(state: PureState, target: PureState, reg: Register, sweeps: int = 50) -> tuple[tuple[float, ...], ...]:
    """Rail phases maximizing ``|<target| P(phases) |state>|`` by coordinate ascent.

    Each coordinate step is exact (the overlap is ``A + e^{i x} B``).
    """
    keys, pairs = _digit_amps(state, target, reg)
    phases = [[0.0] * len(g) for g in reg.groups]
    if not keys:
        return tuple(tuple(p) for p in phases)

    def terms():
        return [tc * s * cmath.exp(1j * sum(phases[q][d] for q, d in enumerate(k))) for k, (tc, s) in zip(keys, pairs)]

    prev = -1.0
    for _ in range(sweeps):
        for q, g in enumerate(reg.groups):
            for r in range(1, len(g)):
                vals = terms()
                b = sum(v for k, v in zip(keys, vals) if k[q] == r)
                a = sum(v for k, v in zip(keys, vals) if k[q] != r)
                if abs(b) == 0:
                    continue
                step = (cmath.phase(a) - cmath.phase(b)) if abs(a) > 0 else -cmath.phase(b)
                phases[q][r] += step
        cur = abs(sum(terms()))
        if cur - prev < 1e-15:
            break
        prev = cur
    return tuple(tuple(((p + math.pi) % (2 * math.pi)) - math.pi for p in ph) for ph in phases)


def corrected_target(target: PureState, reg: Register, corr: Correction) -> PureState:
    """Target as seen before the correction is applied to the state."""
    return _apply_phases(_apply_shift(target, reg, corr.shifts), reg, corr.phases)


def best_fidelity(
    state: PureState | StateEnsemble,
    target: PureState,
    reg: Register,
    cls: str = "phase",
) -> tuple[float, Correction]:
    """Fidelity after the best correction in ``cls``.

    For mixtures the correction is fitted to the heaviest component and then
    evaluated on the whole ensemble.
    """
    if cls not in CLASSES:
        raise ValueError(f"unknown correction class {cls!r}")
    identity = Correction(tuple(0 for _ in reg.groups), tuple(tuple(0.0 for _ in g) for g in reg.groups))
    if cls == "none":
        return fidelity(state, target), identity
    ens = as_ensemble(state)
    if not ens.components:
        return 0.0, identity
    lead = max(ens.components, key=lambda c: c[0] * c[1].norm2)[1]
    shift_space = product(*(range(len(g)) for g in reg.groups)) if cls == "pauli" else [identity.shifts]
    best = (-1.0, identity)
    for shifts in shift_space:
        shifted = _apply_shift(target, reg, tuple(shifts))
        phases = align_phases(lead, shifted, reg)
        corr = Correction(tuple(shifts), phases)
        f = fidelity(ens, corrected_target(target, reg, corr))
        if f > best[0] + 1e-12:
            best = (f, corr)
    return best
