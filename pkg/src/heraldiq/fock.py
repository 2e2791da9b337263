"""Sparse Fock-basis states, dual-rail encoding and canonical target states.

Occupations are plain tuples of non-negative ints (``(1, 0, 1, 0)`` is one
photon in modes 0 and 2). States are sparse maps from occupation to complex
amplitude; they may be subnormalized, in which case the squared norm carries
the probability of whatever conditioning produced them.
"""

from __future__ import annotations

import cmath
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product
from types import MappingProxyType

import numpy as np

Occupation = tuple[int, ...]

NORM_TOL = 1e-12


class FockError(ValueError):
    """Invalid occupation, register or state construction."""


def occupation(counts: Iterable[int], m: int | None = None) -> Occupation:
    occ = tuple(int(c) for c in counts)
    if any(c < 0 for c in occ):
        raise FockError(f"negative photon count in {occ}")
    if m is not None and len(occ) != m:
        raise FockError(f"occupation {occ} has {len(occ)} modes, expected {m}")
    return occ


def vacuum(m: int) -> Occupation:
    return (0,) * m


@dataclass(frozen=True)
class PureState:
    """Sparse superposition over Fock occupations of ``m`` modes."""

    m: int
    terms: Mapping[Occupation, complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for occ, amp in self.terms.items():
            occ = occupation(occ, self.m)
            amp = complex(amp)
            if amp != 0:
                clean[occ] = clean.get(occ, 0j) + amp
        object.__setattr__(self, "terms", MappingProxyType(clean))

    @classmethod
    def basis(cls, occ: Sequence[int], amp: complex = 1.0) -> PureState:
        occ = occupation(occ)
        return cls(len(occ), {occ: amp})

    @classmethod
    def from_pairs(cls, m: int, pairs: Iterable[tuple[Sequence[int], complex]]) -> PureState:
        terms: dict[Occupation, complex] = {}
        for occ, amp in pairs:
            occ = occupation(occ, m)
            terms[occ] = terms.get(occ, 0j) + complex(amp)
        return cls(m, terms)

    @property
    def norm2(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.terms.values()))

    def amplitude(self, occ: Sequence[int]) -> complex:
        return self.terms.get(tuple(occ), 0j)

    def photon_numbers(self) -> set[int]:
        return {sum(o) for o in self.terms}

    def inner(self, other: PureState) -> complex:
        """``<self|other>``."""
        _check_same_m(self, other)
        shared = sorted(self.terms.keys() & other.terms.keys())
        return sum((self.terms[o].conjugate() * other.terms[o] for o in shared), 0j)

    def scaled(self, c: complex) -> PureState:
        return PureState(self.m, {o: c * a for o, a in self.terms.items()})

    def normalized(self) -> PureState:
        n2 = self.norm2
        if n2 == 0:
            raise FockError("cannot normalize the zero state")
        return self.scaled(1 / math.sqrt(n2))

    def __add__(self, other: PureState) -> PureState:
        _check_same_m(self, other)
        terms = dict(self.terms)
        for o, a in other.terms.items():
            terms[o] = terms.get(o, 0j) + a
        return PureState(self.m, terms)

    def __sub__(self, other: PureState) -> PureState:
        return self + other.scaled(-1)

    def tensor(self, other: PureState) -> PureState:
        return PureState(
            self.m + other.m,
            {a + b: x * y for a, x in self.terms.items() for b, y in other.terms.items()},
        )

    def permuted(self, order: Sequence[int]) -> PureState:
        """New state whose mode ``k`` is this state's mode ``order[k]``."""
        if sorted(order) != list(range(self.m)):
            raise FockError(f"{order} is not a permutation of {self.m} modes")
        return PureState(self.m, {tuple(o[i] for i in order): a for o, a in self.terms.items()})

    def pruned(self, atol: float = 1e-14) -> PureState:
        return PureState(self.m, {o: a for o, a in self.terms.items() if abs(a) > atol})

    def sorted_terms(self) -> list[tuple[Occupation, complex]]:
        return sorted(self.terms.items())

    def __repr__(self) -> str:
        body = " + ".join(f"({a.real:.4g}{a.imag:+.4g}j)|{''.join(map(str, o))}>" for o, a in self.sorted_terms()[:8])
        more = "" if len(self.terms) <= 8 else f" + ... ({len(self.terms)} terms)"
        return f"PureState(m={self.m}, {body or '0'}{more})"


def _check_same_m(a: PureState, b: PureState) -> None:
    if a.m != b.m:
        raise FockError(f"mode count mismatch: {a.m} vs {b.m}")


@dataclass(frozen=True)
class StateEnsemble:
    """Convex mixture of (possibly subnormalized) pure states.

    The represented density operator is ``sum(w * |phi><phi|)``.
    """

    components: tuple[tuple[float, PureState], ...] = ()

    def __post_init__(self):
        comps = tuple((float(w), s) for w, s in self.components if w > 0 and s.terms)
        if any(w < 0 for w, _ in self.components):
            raise FockError("negative ensemble weight")
        ms = {s.m for _, s in comps}
        if len(ms) > 1:
            raise FockError(f"mixed mode counts in ensemble: {sorted(ms)}")
        object.__setattr__(self, "components", comps)
        if self.trace > 1 + 1e-9:
            raise FockError(f"ensemble trace {self.trace} exceeds 1")

    @classmethod
    def pure(cls, state: PureState, weight: float = 1.0) -> StateEnsemble:
        return cls(((weight, state),))

    @property
    def m(self) -> int | None:
        return self.components[0][1].m if self.components else None

    @property
    def trace(self) -> float:
        return float(sum(w * s.norm2 for w, s in self.components))

    def scaled(self, c: float) -> StateEnsemble:
        return StateEnsemble(tuple((w * c, s) for w, s in self.components))

    def __add__(self, other: StateEnsemble) -> StateEnsemble:
        return StateEnsemble(self.components + other.components)

    def map(self, fn) -> StateEnsemble:
        return StateEnsemble(tuple((w, fn(s)) for w, s in self.components))

    def density_matrix(self, basis: Sequence[Occupation]) -> np.ndarray:
        """Dense density matrix restricted to ``basis`` (mainly for checks)."""
        index = {o: k for k, o in enumerate(basis)}
        rho = np.zeros((len(basis), len(basis)), dtype=complex)
        for w, s in self.components:
            v = np.zeros(len(basis), dtype=complex)
            for o, a in s.terms.items():
                if o in index:
                    v[index[o]] = a
            rho += w * np.outer(v, v.conj())
        return rho


def as_ensemble(state: PureState | StateEnsemble) -> StateEnsemble:
    return state if isinstance(state, StateEnsemble) else StateEnsemble.pure(state)


# --- dual-rail / qudit registers -------------------------------------------


@dataclass(frozen=True)
class Register:
    """Groups of modes forming one-hot encoded qudits.

    A dual-rail qubit is a group of two modes; logical ``|k>`` puts one photon
    in the ``k``-th mode of its group.
    """

    groups: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        groups = tuple(tuple(int(x) for x in g) for g in self.groups)
        flat = [x for g in groups for x in g]
        if len(set(flat)) != len(flat):
            raise FockError(f"register modes overlap: {groups}")
        if any(x < 0 for x in flat):
            raise FockError("negative mode index in register")
        if any(len(g) < 2 for g in groups):
            raise FockError("each register group needs at least two modes")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def dual_rail(cls, pairs: Iterable[Sequence[int]]) -> Register:
        pairs = tuple(tuple(p) for p in pairs)
        if any(len(p) != 2 for p in pairs):
            raise FockError("dual-rail pairs must have exactly two modes")
        return cls(pairs)

    @classmethod
    def consecutive(cls, n: int, d: int = 2, start: int = 0) -> Register:
        return cls(tuple(tuple(range(start + d * k, start + d * (k + 1))) for k in range(n)))

    @property
    def n(self) -> int:
        return len(self.groups)

    @property
    def modes(self) -> tuple[int, ...]:
        return tuple(x for g in self.groups for x in g)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.groups)

    def min_modes(self) -> int:
        return max(self.modes) + 1

    def embed(self, digits: Sequence[int], m: int | None = None) -> Occupation:
        if len(digits) != self.n:
            raise FockError(f"{len(digits)} digits for a {self.n}-qudit register")
        m = self.min_modes() if m is None else m
        occ = [0] * m
        for g, k in zip(self.groups, digits):
            if not 0 <= k < len(g):
                raise FockError(f"digit {k} out of range for group {g}")
            occ[g[k]] = 1
        return tuple(occ)

    def read(self, occ: Occupation) -> tuple[int, ...] | None:
        """Logical digits of ``occ``, or None if any group is not one-hot."""
        digits = []
        for g in self.groups:
            sub = [occ[x] for x in g]
            if sum(sub) != 1:
                return None
            digits.append(sub.index(1))
        return tuple(digits)


def qudit_state(
    amplitudes: Mapping[Sequence[int], complex], reg: Register, m: int | None = None
) -> PureState:
    m = reg.min_modes() if m is None else m
    return PureState(m, {reg.embed(k, m): a for k, a in amplitudes.items()})


def encode_qubits(bits: str, reg: Register, m: int | None = None) -> PureState:
    if len(bits) != reg.n:
        raise FockError(f"{len(bits)} bits for a register of {reg.n} qubits")
    if set(bits) - {"0", "1"}:
        raise FockError(f"not a bit string: {bits!r}")
    return qudit_state({tuple(int(b) for b in bits): 1.0}, reg, m)


@dataclass(frozen=True)
class Decoded:
    amplitudes: dict[tuple[int, ...], complex]
    leakage: float

    @property
    def computational_weight(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))


def decode_qubits(state: PureState, reg: Register) -> Decoded:
    """Split ``state`` into logical amplitudes and non-computational leakage.

    Modes outside the register must be empty for a term to count as logical.
    """
    if reg.min_modes() > state.m:
        raise FockError("register references modes beyond the state")
    outside = [i for i in range(state.m) if i not in set(reg.modes)]
    amps: dict[tuple[int, ...], complex] = {}
    leak = 0.0
    for occ, a in state.sorted_terms():
        digits = reg.read(occ)
        if digits is None or any(occ[i] for i in outside):
            leak += abs(a) ** 2
        else:
            amps[digits] = amps.get(digits, 0j) + a
    return Decoded(amps, leak)


# --- target constructors ---------------------------------------------------

_R2 = 1 / math.sqrt(2)

BELL = {
    "phi+": {(0, 0): _R2, (1, 1): _R2},
    "phi-": {(0, 0): _R2, (1, 1): -_R2},
    "psi+": {(0, 1): _R2, (1, 0): _R2},
    "psi-": {(0, 1): _R2, (1, 0): -_R2},
}

_BELL_ALIASES = {"Φ+": "phi+", "Φ-": "phi-", "Φ−": "phi-", "Ψ+": "psi+", "Ψ-": "psi-", "Ψ−": "psi-"}


def _default_register(n: int, d: int = 2) -> Register:
    return Register.consecutive(n, d)


def target_bell(kind: str, reg: Register | None = None, m: int | None = None) -> PureState:
    key = _BELL_ALIASES.get(kind, kind).lower()
    if key not in BELL:
        raise FockError(f"unknown Bell state {kind!r}")
    return qudit_state(BELL[key], reg or _default_register(2), m)


def target_ghz(n: int, d: int = 2, reg: Register | None = None, m: int | None = None) -> PureState:
    if n < 2 or d < 2:
        raise FockError("GHZ needs n >= 2 parties and d >= 2 levels")
    reg = reg or _default_register(n, d)
    if reg.n != n or set(reg.dims) != {d}:
        raise FockError("register shape does not match (n, d)")
    amp = 1 / math.sqrt(d)
    return qudit_state({(k,) * n: amp for k in range(d)}, reg, m)


def target_noon(n: int) -> PureState:
    if n < 1:
        raise FockError("NOON needs n >= 1")
    return PureState(2, {(n, 0): _R2, (0, n): _R2})


def target_w(n: int, reg: Register | None = None, m: int | None = None) -> PureState:
    if n < 2:
        raise FockError("W needs n >= 2")
    amp = 1 / math.sqrt(n)
    return qudit_state({tuple(int(j == k) for j in range(n)): amp for k in range(n)}, reg or _default_register(n), m)


def target_phi_alpha(alpha: float, reg: Register | None = None, m: int | None = None) -> PureState:
    """``cos(a)|11> + sin(a)|00>`` in dual rail, i.e. ``cos(a)|0101> + sin(a)|1010>``."""
    return qudit_state({(1, 1): math.cos(alpha), (0, 0): math.sin(alpha)}, reg or _default_register(2), m)


def werner_ensemble(lam: float, reg: Register | None = None, m: int | None = None) -> StateEnsemble:
    if not 0 <= lam <= 1:
        raise FockError("Werner weight must lie in [0, 1]")
    reg = reg or _default_register(2)
    comps = [(lam, target_bell("psi-", reg, m))]
    for bits in product((0, 1), repeat=2):
        comps.append(((1 - lam) / 4, qudit_state({bits: 1.0}, reg, m)))
    return StateEnsemble(tuple(comps))


def fidelity(state: PureState | StateEnsemble, target: PureState) -> float:
    """Normalized overlap fidelity ``sum w|<t|phi>|^2 / sum w||phi||^2``.

    ``target`` is normalized internally; subnormalized inputs are compared
    after renormalization, so conditional states can be passed directly.
    """
    ens = as_ensemble(state)
    t = target.normalized()
    num = 0.0
    den = 0.0
    for w, s in ens.components:
        num += w * abs(t.inner(s)) ** 2
        den += w * s.norm2
    if den == 0:
        return 0.0
    return float(min(1.0, max(0.0, num / den)))


def global_phase(state: PureState, phase: float) -> PureState:
    return state.scaled(cmath.exp(1j * phase))
