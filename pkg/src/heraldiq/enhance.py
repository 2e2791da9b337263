"""Success-probability enhancement: multiplexing, fusion, swapping, bleeding, distillation."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np
import scipy.sparse as sp

from .correction import best_fidelity
from .detect import DetectorModel, HeraldSpec, apply_losses, herald
from .fock import BELL, FockError, Occupation, PureState, Register, StateEnsemble, as_ensemble, fidelity, qudit_state
from .interferometer import BeamSplitter, Circuit, compile_circuit
from .propagate import evolve
from .schemes.definition import SchemeDefinition, SchemeError
from .schemes.formulas import multiplex

__all__ = [
    "multiplex",
    "boosted_bsm_success",
    "FusionOutcome",
    "FusionResult",
    "fusion_type2",
    "fusion_type1",
    "SwapResult",
    "entanglement_swap",
    "identify_bell",
    "tap_operator",
    "bleeding_operators",
    "measurement_operator",
    "bleeding_identities",
    "BleedResult",
    "bleed",
    "W_TYPE_INPUT",
    "DistillResult",
    "distill_w_type",
]

_R2 = 1 / math.sqrt(2)


def boosted_bsm_success(ancilla: str = "none") -> Fraction:
    """Dual-rail Bell measurement success: 1/2 unassisted, 3/4 with a Bell-pair ancilla."""
    table = {"none": Fraction(1, 2), "bell": Fraction(3, 4)}
    try:
        return table[ancilla]
    except KeyError:
        raise ValueError(f"ancilla must be one of {sorted(table)}") from None


# --- fusion ---------------------------------------------------------------------


@dataclass(frozen=True)
class FusionOutcome:
    success: bool
    pattern: Occupation
    probability: float
    state: StateEnsemble
    tag: str | None = None


@dataclass(frozen=True)
class FusionResult:
    outcomes: tuple[FusionOutcome, ...]
    measured_modes: tuple[int, ...]
    remaining_modes: tuple[int, ...]

    @property
    def success_prob(self) -> float:
        return float(sum(o.probability for o in self.outcomes if o.success))

    @property
    def total_prob(self) -> float:
        return float(sum(o.probability for o in self.outcomes))

    def successes(self) -> tuple[FusionOutcome, ...]:
        return tuple(o for o in self.outcomes if o.success)


def identify_bell(state: PureState | StateEnsemble, reg: Register) -> tuple[str, float]:
    """Closest of the four Bell states on ``reg`` (no corrections) and its fidelity."""
    ens = as_ensemble(state)
    m = ens.m
    best = ("", -1.0)
    for kind in ("phi+", "phi-", "psi+", "psi-"):
        f = fidelity(ens, qudit_state(BELL[kind], reg, m))
        if f > best[1] + 1e-12:
            best = (kind, f)
    return best


def _measure(
    state: PureState | StateEnsemble,
    circuit: Circuit,
    measured: tuple[int, ...],
    success: HeraldSpec,
    detectors,
    losses: Mapping[int, float] | None,
) -> FusionResult:
    u = compile_circuit(circuit)
    ens = as_ensemble(state)
    if ens.m != circuit.m:
        raise FockError("state and fusion circuit have different mode counts")
    if losses:
        ens = apply_losses(ens, losses)
    out = StateEnsemble(tuple((w, evolve(s, u)) for w, s in ens.components))
    nmax = max((max(s.photon_numbers()) for _, s in out.components), default=0)
    # every outcome over the measured modes, ranked so successes come first
    all_pats = tuple(p for p in product(range(nmax + 2), repeat=len(measured)) if sum(p) <= nmax + len(measured))
    everything = herald(out, HeraldSpec(measured, patterns=all_pats), detectors)
    outcomes = [
        FusionOutcome(success.accepts(p.pattern), p.pattern, p.probability, p.conditional)
        for p in everything.patterns
    ]
    outcomes.sort(key=lambda o: (not o.success, o.pattern))
    return FusionResult(tuple(outcomes), measured, everything.target_modes)


def _check_qubit(q: Sequence[int], m: int) -> tuple[int, int]:
    q = tuple(int(x) for x in q)
    if len(q) != 2 or any(not 0 <= x < m for x in q) or q[0] == q[1]:
        raise FockError(f"qubit {q} is not a pair of distinct modes in 0..{m - 1}")
    return q


def fusion_type2(
    state: PureState | StateEnsemble,
    qubit_a: Sequence[int],
    qubit_b: Sequence[int],
    *,
    detectors: DetectorModel | Sequence[DetectorModel] | None = None,
    losses: Mapping[int, float] | None = None,
) -> FusionResult:
    """Dual-rail Bell measurement on two qubits; both are consumed.

    Rail 0 of A interferes with rail 0 of B on a 50:50 splitter, likewise
    rail 1; the four outputs are detected. One photon in each rail pair
    identifies ``Psi+`` (both photons on the same side) or ``Psi-``
    (opposite sides); bunched outcomes are failures.
    """
    m = as_ensemble(state).m
    a0, a1 = _check_qubit(qubit_a, m)
    b0, b1 = _check_qubit(qubit_b, m)
    circ = Circuit(m, (BeamSplitter(a0, b0), BeamSplitter(a1, b1)))
    measured = (a0, b0, a1, b1)
    spec = HeraldSpec(measured, one_per_pair=((0, 1), (2, 3)))
    res = _measure(state, circ, measured, spec, detectors, losses)
    tagged = []
    for o in res.outcomes:
        tag = None
        if o.success:
            same_side = (o.pattern[0] and o.pattern[2]) or (o.pattern[1] and o.pattern[3])
            tag = "psi+" if same_side else "psi-"
        tagged.append(FusionOutcome(o.success, o.pattern, o.probability, o.state, tag))
    return FusionResult(tuple(tagged), res.measured_modes, res.remaining_modes)


def fusion_type1(
    state: PureState | StateEnsemble,
    qubit_a: Sequence[int],
    qubit_b: Sequence[int],
    *,
    detectors: DetectorModel | Sequence[DetectorModel] | None = None,
    losses: Mapping[int, float] | None = None,
) -> FusionResult:
    """Partial fusion: rail 1 of A meets rail 0 of B on a 50:50 splitter; both outputs are detected.

    Exactly one detected photon is success; the surviving modes (rail 0 of A,
    rail 1 of B) form the fused qubit.
    """
    m = as_ensemble(state).m
    a0, a1 = _check_qubit(qubit_a, m)
    b0, b1 = _check_qubit(qubit_b, m)
    circ = Circuit(m, (BeamSplitter(a1, b0),))
    measured = (a1, b0)
    spec = HeraldSpec(measured, total=1)
    res = _measure(state, circ, measured, spec, detectors, losses)
    tagged = tuple(
        FusionOutcome(o.success, o.pattern, o.probability, o.state, "phase" if o.success else None) for o in res.outcomes
    )
    return FusionResult(tagged, res.measured_modes, res.remaining_modes)


@dataclass(frozen=True)
class SwapResult:
    success_prob: float
    fidelity: float
    outcomes: tuple[FusionOutcome, ...]
    register: Register


def entanglement_swap(
    bell_ab: str | PureState,
    bell_cd: str | PureState,
    *,
    eta: float = 1.0,
    detectors: DetectorModel | Sequence[DetectorModel] | None = None,
) -> SwapResult:
    """Bell measurement on B and C of two pairs; heralds entanglement of A and D.

    Qubits occupy modes A=(0,1), B=(2,3), C=(4,5), D=(6,7). ``eta`` is the
    transmissivity of every B and C mode before the measurement. The fidelity
    is probability-weighted over successful patterns, each compared with the
    Bell state it is closest to.
    """
    pair = Register.dual_rail([(0, 1), (2, 3)])

    def as_pair(x):
        if isinstance(x, str):
            return qudit_state(BELL[x.lower()], pair, 4)
        if x.m != 4:
            raise FockError("each input pair must be a 4-mode state")
        return x

    psi = as_pair(bell_ab).tensor(as_pair(bell_cd))
    losses = {k: eta for k in (2, 3, 4, 5)} if eta != 1.0 else None
    res = fusion_type2(psi, (2, 3), (4, 5), detectors=detectors, losses=losses)
    reg = Register.dual_rail([(0, 1), (2, 3)])
    outs = []
    num = 0.0
    for o in res.successes():
        kind, f = identify_bell(o.state, reg)
        outs.append(FusionOutcome(True, o.pattern, o.probability, o.state, kind))
        num += o.probability * f
    p = res.success_prob
    return SwapResult(p, num / p if p > 0 else 0.0, tuple(outs), reg)


# --- bleeding -------------------------------------------------------------------


def tap_operator(k: int, truncation: int) -> np.ndarray:
    """Kraus operator for ``k`` photons detected after a 50:50 tap of one mode.

    ``<n-k| M_k |n> = sqrt(C(n, k)) 2^(-n/2)``; ``M_0 = 2^(-n/2)`` and
    ``M_1 = a 2^(-n/2)``.
    """
    d = truncation + 1
    mat = np.zeros((d, d))
    for n in range(k, d):
        mat[n - k, n] = math.sqrt(math.comb(n, k)) * 2 ** (-n / 2)
    return mat


def bleeding_operators(truncation: int) -> dict[str, np.ndarray]:
    if truncation < 1:
        raise ValueError("truncation must be at least 1")
    return {"M0": tap_operator(0, truncation), "M1": tap_operator(1, truncation)}


def measurement_operator(pattern: Sequence[int], truncation: int) -> sp.csr_matrix:
    """Tensor product of single-mode tap operators, first mode most significant."""
    out = sp.identity(1, format="csr")
    for k in pattern:
        out = sp.kron(out, sp.csr_matrix(tap_operator(int(k), truncation)), format="csr")
    return out


def _proportional(a: sp.spmatrix, b: sp.spmatrix) -> tuple[complex, float]:
    """Best scalar ``c`` with ``a ~ c b`` and the relative residual."""
    av = a.toarray().ravel() if sp.issparse(a) else np.ravel(a)
    bv = b.toarray().ravel() if sp.issparse(b) else np.ravel(b)
    nb = np.vdot(bv, bv)
    if nb == 0:
        return 0j, float(np.linalg.norm(av))
    c = np.vdot(bv, av) / nb
    return complex(c), float(np.linalg.norm(av - c * bv) / max(np.linalg.norm(av), 1e-300))


def _number_sectors(modes: int, truncation: int) -> dict[int, np.ndarray]:
    idx: dict[int, list[int]] = {}
    for flat, occ in enumerate(product(range(truncation + 1), repeat=modes)):
        idx.setdefault(sum(occ), []).append(flat)
    return {n: np.array(v) for n, v in idx.items()}


def bleeding_identities(truncation: int = 8) -> dict[str, float]:
    """Check the bleeding-operator algebra on four modes.

    * ``sequential``: detecting one photon in mode 0 then one in mode 1
      equals, up to the scalar 2^(1/2), the single-round operator
      ``M_(1100)`` followed by an empty round ``M_(0000)``.
    * ``sector``: on every fixed-total-photon-number sector, the two-round
      product is proportional to ``M_(1100)`` alone (``M_(0000)`` acts as a
      scalar there), so both prepare the same normalized target state.
    * ``commute_projector``: ``M_(0000)`` commutes with the one-photon
      projectors of each mode.
    * ``commute_detection``: ``M_(0000)`` commutes with every single-photon
      detection operator up to the scalar 2^(1/2).

    Returned values are relative residuals (0 means the identity holds), plus
    the fitted scalars.
    """
    t = truncation
    M = lambda p: measurement_operator(p, t)  # noqa: E731
    two_round = M((0, 1, 0, 0)) @ M((1, 0, 0, 0))
    single = M((1, 1, 0, 0))
    c_seq, r_seq = _proportional(two_round, single @ M((0, 0, 0, 0)))

    sectors = _number_sectors(4, t)
    worst = 0.0
    dense_two, dense_one = two_round.tocsr(), single.tocsr()
    for n, cols in sectors.items():
        rows = sectors.get(n - 2)
        if rows is None:
            continue
        a = dense_two[rows][:, cols]
        b = dense_one[rows][:, cols]
        if b.nnz == 0:
            continue
        worst = max(worst, _proportional(a, b)[1])

    empty = M((0, 0, 0, 0))
    proj = np.zeros((t + 1, t + 1))
    proj[1, 1] = 1.0
    r_proj = 0.0
    r_det = 0.0
    c_det = []
    for mode in range(4):
        ops = [sp.identity(t + 1, format="csr")] * 4
        ops[mode] = sp.csr_matrix(proj)
        pk = ops[0]
        for o in ops[1:]:
            pk = sp.kron(pk, o, format="csr")
        r_proj = max(r_proj, float(sp.linalg.norm(empty @ pk - pk @ empty)))
        det = M(tuple(int(i == mode) for i in range(4)))
        c, r = _proportional(det @ empty, empty @ det)
        c_det.append(c)
        r_det = max(r_det, r)
    return {
        "sequential": r_seq,
        "sequential_scalar": c_seq.real,
        "sector": worst,
        "commute_projector": r_proj,
        "commute_detection": r_det,
        "commute_detection_scalar": float(np.mean(np.real(c_det))),
    }


def _tap(state: PureState, modes: Sequence[int], taps: Sequence[int]) -> PureState:
    terms: dict[Occupation, complex] = {}
    for occ, a in state.terms.items():
        amp = a
        new = list(occ)
        for mode, k in zip(modes, taps):
            n = occ[mode]
            if n < k:
                amp = 0
                break
            amp *= math.sqrt(math.comb(n, k)) * 2 ** (-n / 2)
            new[mode] = n - k
        if amp:
            key = tuple(new)
            terms[key] = terms.get(key, 0j) + amp
    return PureState(state.m, terms)


@dataclass(frozen=True)
class BleedResult:
    cumulative: tuple[float, ...]
    per_round: tuple[float, ...]
    required: int
    rounds: int

    @property
    def success_prob(self) -> float:
        return self.cumulative[-1]


def bleed(scheme: SchemeDefinition, max_rounds: int = 6, *, fidelity_tol: float = 1e-9, prune: float = 1e-16) -> BleedResult:
    """Cumulative success of a bleeding protocol built on ``scheme``.

    Round 1 is the scheme's own heralding measurement. Branches whose herald
    registered fewer photons than an accepted pattern needs continue: each
    later round taps every target mode with a 50:50 splitter into a
    number-resolving detector (operators ``M_k``), adding the detections to
    the running count. A branch succeeds once the count equals the required
    number and its target state matches the scheme's target under the declared
    correction class; it fails when the count is exceeded or the state does
    not match. Rounds are disjoint events, so the cumulative success is the
    running sum of per-round successes.
    """
    if scheme.herald is None or not scheme.runnable:
        raise SchemeError(f"{scheme.name} has no herald measurement to bleed")
    h = scheme.herald
    if h.patterns is not None:
        totals = {sum(p) for p in h.patterns}
    elif h.total is not None:
        totals = {h.total}
    else:
        totals = {len(h.one_per_pair)}
    if len(totals) != 1:
        raise SchemeError("bleeding needs every accepted pattern to carry the same photon number")
    required = totals.pop()
    if max_rounds < 1:
        raise ValueError("max_rounds must be at least 1")

    from .schemes.run import run

    first = run(scheme)
    reg = scheme.relative_register()
    tgt = scheme.target_state()
    per_round = [first.success_prob]

    u = compile_circuit(scheme.circuit)
    psi = evolve(PureState.basis(scheme.input), u)
    from .detect import split_by_herald

    branches: list[tuple[int, PureState]] = []
    for n, part in sorted(split_by_herald(psi, h.modes).items()):
        if sum(n) < required and part.norm2 > prune:
            branches.append((sum(n), part))

    mt = len(scheme.target_modes)
    modes = tuple(range(mt))
    for _ in range(1, max_rounds):
        gained = 0.0
        nxt: list[tuple[int, PureState]] = []
        for count, st in branches:
            room = required - count
            for taps in product(range(room + 1), repeat=mt):
                k = sum(taps)
                if k > room:
                    continue
                out = _tap(st, modes, taps)
                p = out.norm2
                if p <= prune:
                    continue
                if count + k == required:
                    f, _ = best_fidelity(out, tgt, reg, scheme.correction)
                    if f >= 1 - fidelity_tol:
                        gained += p
                else:
                    nxt.append((count + k, out))
        per_round.append(gained)
        branches = nxt
    cumulative = tuple(float(x) for x in np.cumsum(per_round))
    return BleedResult(cumulative, tuple(per_round), required, max_rounds)


# --- distillation ---------------------------------------------------------------

W_TYPE_INPUT = PureState(
    4,
    {
        (2, 0, 0, 0): math.sqrt(3 / 4),
        (0, 2, 0, 0): math.sqrt(1 / 12),
        (0, 0, 2, 0): math.sqrt(1 / 12),
        (0, 0, 0, 2): math.sqrt(1 / 12),
    },
)

# (0,2),(1,3) after the inverse splitters on (0,1) and (2,3)
DISTILL_REGISTER = Register.dual_rail([(0, 2), (1, 3)])


@dataclass(frozen=True)
class DistillResult:
    probability: float
    state: PureState
    fidelity: float
    theta: float


def _optimal_theta(state: PureState) -> float:
    big = abs(state.amplitude((2, 0, 0, 0)))
    rest = [abs(state.amplitude(o)) for o in ((0, 2, 0, 0), (0, 0, 2, 0), (0, 0, 0, 2))]
    if big == 0 or not any(rest):
        return 0.0
    ratio = min(1.0, float(np.mean(rest)) / big)
    return math.acos(math.sqrt(ratio))


def distill_w_type(state: PureState = W_TYPE_INPUT, theta: float | None = None) -> DistillResult:
    """Damp the overweighted two-photon term and map the result to a dual-rail Bell pair.

    An ancilla vacuum mode meets mode 0 on a splitter of angle ``theta`` and
    is heralded empty, scaling ``|2>`` in mode 0 by ``cos(theta)^2``. Inverse
    50:50 splitters on (0,1) and (2,3) then send ``(|20>+|02>)/sqrt(2)`` to
    ``|11>``, giving a Bell pair on rails (0,2),(1,3). ``theta=None`` picks
    the angle that equalizes the four terms.
    """
    if state.m != 4:
        raise FockError("distillation input must be a 4-mode state")
    theta = _optimal_theta(state) if theta is None else float(theta)
    ext = state.tensor(PureState.basis((0,)))
    damp = Circuit(5, (BeamSplitter(0, 4, theta, 0.0),))
    after = evolve(ext, compile_circuit(damp))
    kept = herald(after, HeraldSpec((4,), patterns=((0,),)))
    if not kept.patterns:
        return DistillResult(0.0, PureState(4, {}), 0.0, theta)
    cond = kept.patterns[0].state
    back = Circuit(4, (BeamSplitter(0, 1, -math.pi / 4), BeamSplitter(2, 3, -math.pi / 4)))
    out = evolve(cond, compile_circuit(back))
    f = fidelity(out, qudit_state(BELL["phi+"], DISTILL_REGISTER, 4))
    return DistillResult(kept.success_prob, out, f, theta)
