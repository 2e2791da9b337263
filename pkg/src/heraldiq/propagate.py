"""Exact multi-photon evolution of Fock states through a mode unitary."""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement, product

import numpy as np

from .fock import FockError, Occupation, PureState, StateEnsemble
from .interferometer import check_unitary
from .permanent import MAX_PERMANENT_SIZE, permanents

MAX_PHOTONS = 12
MAX_MODES = 26


class CapExceeded(FockError):
    """Photon, mode or branch count above the configured limit."""


def _rows_of(occ: Occupation) -> list[int]:
    return [i for i, c in enumerate(occ) for _ in range(c)]


def _fact_norm(occ: Occupation) -> float:
    return math.prod(math.factorial(c) for c in occ)


@lru_cache(maxsize=64)
def _outputs(support: tuple[int, ...], m: int, n: int) -> tuple[np.ndarray, tuple[Occupation, ...], np.ndarray]:
    rows = np.array(list(combinations_with_replacement(support, n)), dtype=int).reshape(-1, n)
    occs = []
    norms = np.empty(len(rows))
    for k, r in enumerate(rows):
        occ = [0] * m
        for i in r:
            occ[i] += 1
        occs.append(tuple(occ))
        norms[k] = _fact_norm(occs[-1])
    return rows, tuple(occs), np.sqrt(norms)


def _check_caps(n: int, m: int, max_photons: int, max_modes: int) -> None:
    if n > max_photons:
        raise CapExceeded(f"{n} photons exceeds the cap of {max_photons}")
    if m > max_modes:
        raise CapExceeded(f"{m} modes exceeds the cap of {max_modes}")


def evolve(
    state: PureState,
    u,
    *,
    max_photons: int = MAX_PHOTONS,
    max_modes: int = MAX_MODES,
    threshold: float = 0.0,
    support_tol: float = 1e-15,
) -> PureState:
    """Propagate ``state`` through the mode unitary ``u``.

    Output amplitude for ``S -> T`` is ``Per(U[T, S]) / sqrt(prod S! prod T!)``.
    Only occupations over rows reachable from the occupied input columns are
    enumerated. ``threshold`` drops output amplitudes with smaller magnitude
    (off by default).
    """
    u = check_unitary(u, 1e-8)
    m = state.m
    if u.shape != (m, m):
        raise FockError(f"unitary is {u.shape[0]}x{u.shape[1]} but the state has {m} modes")
    _check_caps(max(state.photon_numbers(), default=0), m, max_photons, max_modes)

    out: dict[Occupation, complex] = {}
    for occ_in, a_in in state.sorted_terms():
        n = sum(occ_in)
        cols = _rows_of(occ_in)
        if n == 0:
            out[occ_in] = out.get(occ_in, 0j) + a_in
            continue
        support = tuple(int(i) for i in np.flatnonzero(np.abs(u[:, sorted(set(cols))]).max(axis=1) > support_tol))
        rows, occs, norms = _outputs(support, m, n)
        sub = u[rows[:, :, None], np.asarray(cols)[None, None, :]]
        amps = permanents(sub, max(n, MAX_PERMANENT_SIZE)) / (norms * math.sqrt(_fact_norm(occ_in)))
        amps *= a_in
        for occ, a in zip(occs, amps):
            out[occ] = out.get(occ, 0j) + a
    if threshold > 0:
        out = {o: a for o, a in out.items() if abs(a) > threshold}
    return PureState(m, out)


def transition_amplitudes(u, occ_in: Occupation, occs_out: Sequence[Occupation]) -> np.ndarray:
    """Amplitudes ``<T|U|S>`` for selected outputs only (used by the search loop)."""
    u = np.asarray(u, dtype=complex)
    n = sum(occ_in)
    cols = np.asarray(_rows_of(occ_in))
    rows = np.array([_rows_of(t) for t in occs_out], dtype=int).reshape(len(occs_out), n)
    norms = np.sqrt([_fact_norm(t) for t in occs_out])
    sub = u[rows[:, :, None], cols[None, None, :]]
    return permanents(sub, max(n, MAX_PERMANENT_SIZE)) / (norms * math.sqrt(_fact_norm(occ_in)))


# --- partially distinguishable photons --------------------------------------


@dataclass(frozen=True)
class LabeledInput:
    """Photons with internal states over an orthonormal label basis.

    ``photons`` is a sequence of ``(mode, {label: amplitude})``; each photon
    may use at most ``max_labels`` basis vectors.
    """

    m: int
    photons: tuple[tuple[int, Mapping[int, complex]], ...]
    max_labels: int = 2

    def __post_init__(self):
        phs = []
        for mode, vec in self.photons:
            vec = {int(k): complex(v) for k, v in dict(vec).items() if v != 0}
            if not 0 <= mode < self.m:
                raise FockError(f"photon mode {mode} outside 0..{self.m - 1}")
            if len(vec) > self.max_labels:
                raise CapExceeded(f"photon uses {len(vec)} internal labels (cap {self.max_labels})")
            nrm = sum(abs(v) ** 2 for v in vec.values())
            if abs(nrm - 1) > 1e-12:
                raise FockError(f"internal state of photon in mode {mode} has norm^2 {nrm}")
            phs.append((int(mode), vec))
        object.__setattr__(self, "photons", tuple(phs))

    @classmethod
    def identical(cls, occ: Occupation) -> LabeledInput:
        return cls(len(occ), tuple((i, {0: 1.0}) for i in _rows_of(occ)))

    @classmethod
    def obb(cls, occ: Occupation, visibility: float) -> LabeledInput:
        """Orthogonal bad bits: photon k is ``sqrt(V)|0> + sqrt(1-V)|k+1>``."""
        good, bad = math.sqrt(visibility), math.sqrt(1 - visibility)
        return cls(len(occ), tuple((i, {0: good, k + 1: bad}) for k, i in enumerate(_rows_of(occ))))


def evolve_labeled(inp: LabeledInput, u, *, max_photons: int = MAX_PHOTONS, max_branches: int = 4096) -> StateEnsemble:
    """Evolve partially distinguishable photons; returns a label-blind ensemble.

    Terms are grouped by how many photons carry each internal label. Within a
    group the photons evolve coherently (same label interferes, label species
    evolve independently through ``u``); groups are mutually orthogonal and
    add incoherently. Each group is then split by the output of every species
    other than its most populated one, giving pure mode-space components.
    """
    u = check_unitary(u, 1e-8)
    m = inp.m
    n = len(inp.photons)
    _check_caps(n, m, max_photons, MAX_MODES)
    choices = [sorted(vec.items()) for _, vec in inp.photons]
    n_branches = math.prod(len(c) for c in choices)
    if n_branches > max_branches:
        raise CapExceeded(f"{n_branches} label assignments exceeds the cap of {max_branches}")
    labels = sorted({l for c in choices for l, _ in c})
    lidx = {l: k for k, l in enumerate(labels)}

    # group -> {(occ per label): amplitude}
    groups: dict[tuple[int, ...], dict[tuple[Occupation, ...], complex]] = {}
    for pick in product(*choices):
        amp = complex(math.prod(c for _, c in pick))
        per_label = [[0] * m for _ in labels]
        for (mode, _), (lab, _) in zip(inp.photons, pick):
            per_label[lidx[lab]][mode] += 1
        key = tuple(tuple(o) for o in per_label)
        counts = tuple(sum(o) for o in key)
        amp *= math.sqrt(math.prod(_fact_norm(o) for o in key))
        g = groups.setdefault(counts, {})
        g[key] = g.get(key, 0j) + amp
    norm2 = sum(abs(a) ** 2 for g in groups.values() for a in g.values())
    scale = 1 / math.sqrt(norm2)

    cache: dict[Occupation, PureState] = {}

    def ev(occ: Occupation) -> PureState:
        if occ not in cache:
            cache[occ] = evolve(PureState(m, {occ: 1.0}), u, max_photons=max_photons)
        return cache[occ]

    comps: list[tuple[float, PureState]] = []
    for counts in sorted(groups):
        carrier = max(range(len(counts)), key=lambda k: (counts[k], -k))
        env: dict[tuple[Occupation, ...], dict[Occupation, complex]] = {}
        for key, amp in sorted(groups[counts].items()):
            outs = [ev(o).sorted_terms() for o in key]
            for combo in product(*outs):
                a = amp * scale * math.prod(c for _, c in combo)
                record = tuple(o for k, (o, _) in enumerate(combo) if k != carrier)
                total = tuple(map(sum, zip(*(o for o, _ in combo))))
                bucket = env.setdefault(record, {})
                bucket[total] = bucket.get(total, 0j) + a
        for record in sorted(env):
            comps.append((1.0, PureState(m, env[record])))
    return StateEnsemble(tuple(comps))


def coincidence_probability(ens: StateEnsemble | PureState, pattern: Occupation) -> float:
    if isinstance(ens, PureState):
        return abs(ens.amplitude(pattern)) ** 2
    return float(sum(w * abs(s.amplitude(pattern)) ** 2 for w, s in ens.components))


# --- nonlinear sign gate ------------------------------------------------------

# Knill-Laflamme-Milburn NS gate; heralds ancilla (1, 0) with probability 1/4.
KLM_NS_UNITARY = np.array(
    [
        [1 - math.sqrt(2), 2 ** -0.25, math.sqrt(3 / math.sqrt(2) - 2)],
        [2 ** -0.25, 0.5, 0.5 - 1 / math.sqrt(2)],
        [math.sqrt(3 / math.sqrt(2) - 2), 0.5 - 1 / math.sqrt(2), math.sqrt(2) - 0.5],
    ]
)


@dataclass(frozen=True)
class NSCheck:
    output: PureState
    gains: tuple[complex, complex, complex]
    success_prob: float
    is_ns: bool


def ns_gate_check(u, alpha: complex = 1.0, beta: complex = 0.0, gamma: complex = 0.0, tol: float = 1e-9) -> NSCheck:
    """Apply a 3-mode unitary to ``(a|0>+b|1>+c|2>) |1>|0>`` and herald ``(1, 0)``.

    ``gains[k]`` is the heralded amplitude multiplying ``|k>``; the unitary is a
    sign gate when ``g0 = g1 = -g2`` (up to a common phase), and
    ``success_prob = |g0|^2``.
    """
    u = check_unitary(u, 1e-8)
    if u.shape != (3, 3):
        raise FockError("NS gate check needs a 3x3 unitary")
    gains = []
    for k in range(3):
        t = (k, 1, 0)
        gains.append(complex(transition_amplitudes(u, t, [t])[0]))
    inp = {0: alpha, 1: beta, 2: gamma}
    out = PureState(1, {(k,): gains[k] * inp[k] for k in range(3)})
    g0, g1, g2 = gains
    is_ns = abs(g0 - g1) < tol and abs(g0 + g2) < tol and abs(g0) > tol
    return NSCheck(out, (g0, g1, g2), abs(g0) ** 2, is_ns)
