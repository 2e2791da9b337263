"""Detector models, heralding, postselection and false-event accounting.

Imperfect detection is folded into a per-mode response ``P(outcome | n)``
for ``n`` incident photons: binomial loss with the detector efficiency, then
an optional dark count that adds one extra detection event, then the
detector kind (number resolving, threshold, or threshold fan-out).
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .fock import FockError, Occupation, PureState, Register, StateEnsemble, as_ensemble

PNR = "pnr"
THRESHOLD = "threshold"
FANOUT = "fanout"

# Herald configurations with less probability than this are numerical residue
# of exact zeros (interference cancellations) and are dropped.
ZERO_MASS = 1e-24


class DetectError(ValueError):
    pass


@lru_cache(maxsize=256)
def fanout_click_distribution(photons: int, branches: int) -> dict[int, Fraction]:
    """Clicks registered when ``photons`` split uniformly over ``branches`` threshold detectors.

    ``P(c) = C(b, c) * c! * S(k, c) / b^k`` with ``S`` the Stirling numbers of
    the second kind (surjections onto ``c`` of the ``b`` detectors).
    """
    if photons < 0 or branches < 1:
        raise DetectError("need photons >= 0 and branches >= 1")
    if photons == 0:
        return {0: Fraction(1)}
    # surjections onto c labelled bins
    surj = [sum((-1) ** j * math.comb(c, j) * (c - j) ** photons for j in range(c + 1)) for c in range(branches + 1)]
    total = Fraction(1, branches**photons)
    return {c: math.comb(branches, c) * surj[c] * total for c in range(1, min(photons, branches) + 1) if surj[c]}


@dataclass(frozen=True)
class DetectorModel:
    kind: str = PNR
    efficiency: float = 1.0
    dark_count: float = 0.0
    branches: int = 2

    def __post_init__(self):
        if self.kind not in (PNR, THRESHOLD, FANOUT):
            raise DetectError(f"unknown detector kind {self.kind!r}")
        if not 0 <= self.efficiency <= 1:
            raise DetectError("efficiency must be in [0, 1]")
        if not 0 <= self.dark_count < 1:
            raise DetectError("dark-count probability must be in [0, 1)")
        if self.kind == FANOUT and self.branches < 1:
            raise DetectError("fan-out needs at least one branch")

    @classmethod
    def ideal(cls) -> DetectorModel:
        return cls(PNR)

    @property
    def is_ideal_pnr(self) -> bool:
        return self.kind == PNR and self.efficiency == 1 and self.dark_count == 0

    def _events(self, n: int) -> dict[int, float]:
        eta, pdc = self.efficiency, self.dark_count
        events: dict[int, float] = {}
        for k in range(n + 1):
            p = math.comb(n, k) * eta**k * (1 - eta) ** (n - k)
            if p == 0:
                continue
            events[k] = events.get(k, 0.0) + p * (1 - pdc)
            if pdc:
                events[k + 1] = events.get(k + 1, 0.0) + p * pdc
        return events

    def response(self, n: int) -> dict[int, float]:
        """``{outcome: P(outcome | n incident photons)}``."""
        out: dict[int, float] = {}
        for k, p in self._events(n).items():
            if self.kind == PNR:
                dist = {k: 1.0}
            elif self.kind == THRESHOLD:
                dist = {min(k, 1): 1.0}
            else:
                dist = {c: float(q) for c, q in fanout_click_distribution(k, self.branches).items()}
            for o, q in dist.items():
                out[o] = out.get(o, 0.0) + p * q
        return out


@dataclass(frozen=True)
class HeraldSpec:
    """Heralding modes and the outcome patterns accepted as success.

    Exactly one of ``patterns`` (explicit outcome tuples over ``modes``),
    ``total`` (any pattern with that many detections) or ``one_per_pair``
    (index pairs into ``modes`` that must each register one detection) is set.
    ``corrections`` maps an accepted pattern to a correction tag.
    """

    modes: tuple[int, ...]
    patterns: tuple[Occupation, ...] | None = None
    total: int | None = None
    one_per_pair: tuple[tuple[int, int], ...] | None = None
    corrections: Mapping[Occupation, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(x) for x in self.modes))
        if len(set(self.modes)) != len(self.modes):
            raise DetectError("duplicate herald mode")
        chosen = [x is not None for x in (self.patterns, self.total, self.one_per_pair)]
        if sum(chosen) != 1:
            raise DetectError("give exactly one of patterns, total, one_per_pair")
        if self.patterns is not None:
            pats = tuple(tuple(int(c) for c in p) for p in self.patterns)
            for p in pats:
                if len(p) != len(self.modes):
                    raise DetectError(f"pattern {p} does not match {len(self.modes)} herald modes")
            object.__setattr__(self, "patterns", pats)
        if self.one_per_pair is not None:
            pairs = tuple(tuple(int(x) for x in p) for p in self.one_per_pair)
            if any(not 0 <= x < len(self.modes) for p in pairs for x in p):
                raise DetectError("one_per_pair refers to positions outside the herald modes")
            object.__setattr__(self, "one_per_pair", pairs)
        object.__setattr__(self, "corrections", {tuple(k): v for k, v in dict(self.corrections).items()})

    def accepts(self, outcome: Sequence[int]) -> bool:
        outcome = tuple(outcome)
        if self.patterns is not None:
            return outcome in self.patterns
        if self.total is not None:
            return sum(outcome) == self.total
        covered = {x for p in self.one_per_pair for x in p}
        return all(outcome[a] + outcome[b] == 1 for a, b in self.one_per_pair) and not any(
            outcome[i] for i in range(len(outcome)) if i not in covered
        )

    def target_modes(self, m: int) -> tuple[int, ...]:
        if any(not 0 <= x < m for x in self.modes):
            raise DetectError("herald mode outside the state")
        return tuple(i for i in range(m) if i not in set(self.modes))


@dataclass(frozen=True)
class PatternResult:
    pattern: Occupation
    probability: float
    conditional: StateEnsemble
    correction: str | None = None

    @property
    def state(self) -> PureState:
        """The conditional state when it is pure (ideal detectors, pure input)."""
        if len(self.conditional.components) != 1:
            raise DetectError(f"conditional state for {self.pattern} is mixed")
        w, s = self.conditional.components[0]
        return s.scaled(math.sqrt(w))


@dataclass(frozen=True)
class HeraldResult:
    success_prob: float
    patterns: tuple[PatternResult, ...]
    target_modes: tuple[int, ...]
    herald_mass: Mapping[Occupation, float]
    acceptance: Mapping[Occupation, float]
    false_positive_prob: float | None = None
    false_negative_prob: float | None = None

    @property
    def combined(self) -> StateEnsemble:
        comps: tuple = ()
        for p in self.patterns:
            comps += p.conditional.components
        return StateEnsemble(comps)

    def pattern(self, outcome: Sequence[int]) -> PatternResult:
        for p in self.patterns:
            if p.pattern == tuple(outcome):
                return p
        raise KeyError(tuple(outcome))


def _detector_list(detectors, k: int) -> list[DetectorModel]:
    if detectors is None:
        return [DetectorModel.ideal()] * k
    if isinstance(detectors, DetectorModel):
        return [detectors] * k
    dets = list(detectors)
    if len(dets) != k:
        raise DetectError(f"{len(dets)} detectors for {k} herald modes")
    return dets


def split_by_herald(state: PureState, herald_modes: Sequence[int]) -> dict[Occupation, PureState]:
    """``{n: (<n|_H x 1)|psi>}`` as states on the remaining modes."""
    hset = set(herald_modes)
    tmodes = [i for i in range(state.m) if i not in hset]
    parts: dict[Occupation, dict[Occupation, complex]] = {}
    for occ, a in state.sorted_terms():
        n = tuple(occ[i] for i in herald_modes)
        t = tuple(occ[i] for i in tmodes)
        parts.setdefault(n, {})[t] = a
    return {n: PureState(len(tmodes), terms) for n, terms in parts.items()}


def herald(
    state: PureState | StateEnsemble,
    spec: HeraldSpec,
    detectors: DetectorModel | Sequence[DetectorModel] | None = None,
    *,
    ideal_state: PureState | StateEnsemble | None = None,
    fp_threshold: float = 1e-9,
) -> HeraldResult:
    """Condition ``state`` on accepted detector outcomes in the herald modes.

    Conditional states live on the remaining (target) modes in their original
    order and are subnormalized: each pattern's trace is its probability. When
    ``ideal_state`` is given (the same state before any target-mode loss), the
    result also carries false-positive/negative probabilities measured against
    ideal number-resolving detection of ``ideal_state``.
    """
    ens = as_ensemble(state)
    m = ens.m
    if m is None:
        raise DetectError("cannot herald an empty state")
    tmodes = spec.target_modes(m)
    dets = _detector_list(detectors, len(spec.modes))

    mass: dict[Occupation, float] = {}
    acceptance: dict[Occupation, float] = {}
    buckets: dict[Occupation, list[tuple[float, PureState]]] = {}
    resp_cache: dict[tuple[int, int], dict[int, float]] = {}

    def resp(k: int, n: int) -> dict[int, float]:
        if (k, n) not in resp_cache:
            resp_cache[(k, n)] = dets[k].response(n)
        return resp_cache[(k, n)]

    for w, psi in ens.components:
        for n, part in sorted(split_by_herald(psi, spec.modes).items()):
            pn = w * part.norm2
            if pn <= ZERO_MASS:
                continue
            mass[n] = mass.get(n, 0.0) + pn
            per_mode = [sorted(resp(k, c).items()) for k, c in enumerate(n)]
            acc = 0.0
            for combo in product(*per_mode):
                outcome = tuple(o for o, _ in combo)
                if not spec.accepts(outcome):
                    continue
                q = math.prod(p for _, p in combo)
                if q == 0:
                    continue
                acc += q
                buckets.setdefault(outcome, []).append((w * q, part))
            acceptance[n] = acc

    patterns = []
    for outcome in sorted(buckets):
        cond = StateEnsemble(tuple(buckets[outcome]))
        if cond.trace > 0:
            patterns.append(PatternResult(outcome, cond.trace, cond, spec.corrections.get(outcome)))
    success = float(sum(p.probability for p in patterns))
    result = HeraldResult(success, tuple(patterns), tmodes, mass, acceptance)
    if ideal_state is not None:
        ideal = herald(ideal_state, spec, None)
        acc = event_accounting(ideal, result, fp_threshold)
        result = HeraldResult(
            success, tuple(patterns), tmodes, mass, acceptance,
            acc["false_positive_prob"], acc["false_negative_prob"],
        )
    return result


def _orthonormal_span(ens: StateEnsemble) -> list[PureState]:
    basis: list[PureState] = []
    for _, s in ens.components:
        v = s
        for e in basis:
            v = v - e.scaled(e.inner(v))
        if v.norm2 > 1e-20 * max(s.norm2, 1e-300):
            basis.append(v.normalized())
    return basis


def event_accounting(ideal: HeraldResult, noisy: HeraldResult, fp_threshold: float = 1e-9) -> dict[str, float]:
    """False-positive and false-negative probabilities and rates.

    False positive: accepted probability mass under ``noisy`` whose
    conditional state lies outside the ideal conditional state for the same
    pattern (relative infidelity above ``fp_threshold``). False negative:
    probability that an ideally accepted herald configuration is rejected by
    the noisy detectors.
    """
    fp = 0.0
    for pat in noisy.patterns:
        try:
            ref = _orthonormal_span(ideal.pattern(pat.pattern).conditional)
        except KeyError:
            ref = []
        for w, s in pat.conditional.components:
            total = w * s.norm2
            good = w * sum(abs(e.inner(s)) ** 2 for e in ref)
            if total > 0 and (total - good) / total > fp_threshold:
                fp += total - good
    fn = 0.0
    for n, mass in ideal.herald_mass.items():
        ideal_acc = ideal.acceptance.get(n, 0.0)
        if ideal_acc:
            fn += mass * ideal_acc * (1 - noisy.acceptance.get(n, 0.0))
    return {
        "false_positive_prob": fp,
        "false_negative_prob": fn,
        "false_positive_rate": fp / noisy.success_prob if noisy.success_prob > 0 else 0.0,
        "false_negative_rate": fn / ideal.success_prob if ideal.success_prob > 0 else 0.0,
    }


def postselect(state: PureState, reg: Register) -> tuple[float, PureState]:
    """Keep terms with exactly one photon in every register group."""
    kept = {o: a for o, a in state.terms.items() if reg.read(o) is not None}
    out = PureState(state.m, kept)
    return out.norm2, out


def _loss_kraus(state: PureState, mode: int, eta: float, lost: int) -> PureState:
    terms = {}
    for occ, a in state.terms.items():
        n = occ[mode]
        if n < lost:
            continue
        amp = math.sqrt(math.comb(n, lost) * eta ** (n - lost) * (1 - eta) ** lost)
        if amp == 0:
            continue
        new = list(occ)
        new[mode] = n - lost
        terms[tuple(new)] = terms.get(tuple(new), 0j) + a * amp
    return PureState(state.m, terms)


def apply_loss(state: PureState | StateEnsemble, mode: int, eta: float) -> StateEnsemble:
    """Beam-splitter loss on one mode; components indexed by photons lost.

    Each branch is stored normalized with its probability as the weight.
    """
    if not 0 <= eta <= 1:
        raise DetectError("transmissivity must be in [0, 1]")
    ens = as_ensemble(state)
    comps = []
    for w, psi in ens.components:
        if not 0 <= mode < psi.m:
            raise DetectError(f"mode {mode} outside the state")
        if eta == 1:
            comps.append((w, psi))
            continue
        nmax = max(o[mode] for o in psi.terms)
        for lost in range(nmax + 1):
            branch = _loss_kraus(psi, mode, eta, lost)
            p = branch.norm2
            if p > 0:
                comps.append((w * p, branch.scaled(1 / math.sqrt(p))))
    return StateEnsemble(tuple(comps))


def apply_losses(state: PureState | StateEnsemble, etas: Mapping[int, float]) -> StateEnsemble:
    ens = as_ensemble(state)
    for mode, eta in sorted(etas.items()):
        ens = apply_loss(ens, mode, eta)
    return ens
