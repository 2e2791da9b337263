"""Independent brute-force references used only by the tests."""

from __future__ import annotations

import math
from collections import Counter
from itertools import permutations, product

import numpy as np


def naive_permanent(a) -> complex:
    """Sum over all n! permutations."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return 1.0 + 0j
    return complex(sum(math.prod(a[i, s[i]] for i in range(n)) for s in permutations(range(n))))


def creation_expansion(u, occ_in) -> dict[tuple[int, ...], complex]:
    """Output amplitudes by expanding prod_i (a_i^dag)^{n_i} with a_i^dag -> sum_j U[j, i] a_j^dag.

    Every photon independently picks an output mode; collecting monomials and
    normalizing with sqrt(c!)/sqrt(n!) gives the Fock amplitudes. Cost m^n.
    """
    u = np.asarray(u, dtype=complex)
    m = u.shape[0]
    sources = [i for i, c in enumerate(occ_in) for _ in range(c)]
    norm_in = math.prod(math.factorial(c) for c in occ_in)
    acc: dict[tuple[int, ...], complex] = {}
    for picks in product(range(m), repeat=len(sources)):
        coef = math.prod(u[j, i] for j, i in zip(picks, sources))
        cnt = Counter(picks)
        out = tuple(cnt.get(j, 0) for j in range(m))
        acc[out] = acc.get(out, 0j) + coef
    return {
        out: a * math.sqrt(math.prod(math.factorial(c) for c in out) / norm_in)
        for out, a in acc.items()
    }


def detector_by_photons(n: int, eta: float, pdc: float, kind: str) -> dict[int, float]:
    """Enumerate each photon's survival, then the dark-count event, then the readout."""
    out: dict[int, float] = {}
    for alive in product((0, 1), repeat=n):
        k = sum(alive)
        p = math.prod(eta if a else 1 - eta for a in alive)
        for dark, q in ((0, 1 - pdc), (1, pdc)):
            if q == 0:
                continue
            events = k + dark
            o = events if kind == "pnr" else min(events, 1)
            out[o] = out.get(o, 0.0) + p * q
    return {k: v for k, v in out.items() if v > 0}


def fanout_by_assignment(k: int, b: int) -> dict[int, float]:
    """Send each of k photons to one of b threshold detectors; count distinct clicks."""
    out: Counter = Counter()
    for assign in product(range(b), repeat=k):
        out[len(set(assign))] += 1
    return {c: n / b**k for c, n in out.items()}


def schmidt_number_dense(a) -> float:
    """Schmidt number from the eigenvalues of the reduced density matrix A A^dag."""
    a = np.asarray(a, dtype=complex)
    rho = a @ a.conj().T
    rho = rho / np.trace(rho).real
    return 1 / float(np.real(np.trace(rho @ rho)))


def dense_state(psi, basis) -> np.ndarray:
    return np.array([psi.amplitude(o) for o in basis], dtype=complex)
