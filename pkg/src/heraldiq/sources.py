"""Photon-pair and single-emitter source models and their figures of merit."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .detect import DetectorModel
from .fock import PureState, StateEnsemble, as_ensemble
from .propagate import LabeledInput


@dataclass(frozen=True)
class TMSVSource:
    squeeze: float
    phase: float = 0.0
    n_max: int = 10

    def __post_init__(self):
        if self.squeeze < 0:
            raise ValueError("squeezing magnitude must be non-negative")
        if self.n_max < 0:
            raise ValueError("truncation must be non-negative")

    def pair_probs(self) -> np.ndarray:
        """``P(k pairs) = sech^2 |xi| tanh^{2k} |xi|`` for ``k <= n_max``."""
        t2 = math.tanh(self.squeeze) ** 2
        return (1 - t2) * t2 ** np.arange(self.n_max + 1)


def tmsv_state(src: TMSVSource) -> PureState:
    sech = 1 / math.cosh(src.squeeze)
    t = math.tanh(src.squeeze)
    return PureState(
        2,
        {(k, k): sech * t**k * complex(math.cos(k * src.phase), math.sin(k * src.phase)) for k in range(src.n_max + 1)},
    )


def truncation_error(src: TMSVSource) -> float:
    """Probability outside the truncation, ``1 - norm^2`` (computed as the tail)."""
    return math.tanh(src.squeeze) ** (2 * (src.n_max + 1))


def herald_single(src: TMSVSource, det: DetectorModel, outcome: int = 1) -> tuple[float, StateEnsemble]:
    """Measure the idler arm and keep the signal when the detector reports ``outcome``.

    Returns the herald probability and the signal-mode ensemble (weights are
    joint probabilities; each component is a normalized ``|n>``).
    """
    comps = []
    for k, pk in enumerate(src.pair_probs()):
        q = det.response(k).get(outcome, 0.0)
        if pk * q > 0:
            comps.append((pk * q, PureState(1, {(k,): 1.0})))
    ens = StateEnsemble(tuple(comps))
    return ens.trace, ens


def photon_distribution(ens: StateEnsemble | PureState) -> dict[int, float]:
    dist: dict[int, float] = {}
    for w, s in as_ensemble(ens).components:
        for occ, a in s.terms.items():
            n = sum(occ)
            dist[n] = dist.get(n, 0.0) + w * abs(a) ** 2
    return dist


def g2_from_distribution(dist: dict[int, float]) -> float:
    total = sum(dist.values())
    mean = sum(n * p for n, p in dist.items()) / total
    fact = sum(n * (n - 1) * p for n, p in dist.items()) / total
    if mean == 0:
        return float("nan")
    return fact / mean**2


def g2_heralded(ens: StateEnsemble | PureState) -> float:
    """``<n(n-1)> / <n>^2`` of a single-mode state (normalized internally)."""
    return g2_from_distribution(photon_distribution(ens))


def heralded_g2(src: TMSVSource, det: DetectorModel) -> float:
    return g2_heralded(herald_single(src, det)[1])


def thermal_distribution(mean: float, n_max: int) -> dict[int, float]:
    r = mean / (1 + mean)
    return {n: (1 - r) * r**n for n in range(n_max + 1)}


def hom_visibility(internal_1, internal_2) -> float:
    """``|<phi1|phi2>|^2`` for pure normalized internal states."""
    a = np.asarray(internal_1, dtype=complex)
    b = np.asarray(internal_2, dtype=complex)
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(min(1.0, abs(np.vdot(a, b)) ** 2))


# --- joint spectral amplitudes ----------------------------------------------


@dataclass(frozen=True, eq=False)
class JSAGrid:
    amplitudes: np.ndarray
    signal_axis: np.ndarray
    idler_axis: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 2:
            raise ValueError("JSA must be a 2-D grid")
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise ValueError("JSA is identically zero")
        object.__setattr__(self, "amplitudes", a / nrm)
        s = np.arange(a.shape[0], dtype=float) if self.signal_axis is None else np.asarray(self.signal_axis, float)
        i = np.arange(a.shape[1], dtype=float) if self.idler_axis is None else np.asarray(self.idler_axis, float)
        if s.shape != (a.shape[0],) or i.shape != (a.shape[1],):
            raise ValueError("axis lengths do not match the grid")
        object.__setattr__(self, "signal_axis", s)
        object.__setattr__(self, "idler_axis", i)

    @classmethod
    def from_array(cls, amps) -> JSAGrid:
        return cls(amps, None, None)


def double_gaussian_jsa(n_bins: int = 64, correlation: float = 0.0, width: float = 1.0, span: float = 4.0, chirp: float = 0.0) -> JSAGrid:
    """Bivariate Gaussian JSA; ``correlation`` in (-1, 1) sets spectral entanglement.

    ``chirp`` adds a joint spectral phase ``exp(i chirp ws wi)`` which the
    intensity cannot see.
    """
    if not -1 < correlation < 1:
        raise ValueError("correlation must lie in (-1, 1)")
    w = np.linspace(-span, span, n_bins) * width
    ws, wi = np.meshgrid(w, w, indexing="ij")
    q = (ws**2 + wi**2 - 2 * correlation * ws * wi) / (2 * width**2 * (1 - correlation**2))
    amps = np.exp(-q / 2) * np.exp(1j * chirp * ws * wi)
    return JSAGrid(amps, w, w)


@dataclass(frozen=True)
class SourceMetrics:
    schmidt_number: float
    purity: float
    g2_unheralded: float
    g2_heralded: float | None = None
    schmidt_coefficients: tuple[float, ...] = ()


def schmidt_metrics(jsa: JSAGrid) -> SourceMetrics:
    sv = np.linalg.svd(jsa.amplitudes, compute_uv=False)
    lam = sv**2 / np.sum(sv**2)
    k = 1 / float(np.sum(lam**2))
    p = 1 / k
    return SourceMetrics(k, p, 1 + p, None, tuple(float(x) for x in np.sqrt(lam)))


def jsi_purity_bound(jsi) -> float:
    """Purity inferred from intensity alone (entrywise sqrt, then Schmidt).

    Dropping the joint spectral phase can only raise ``sum lambda^2``, so this
    is an upper bound on the purity of the underlying amplitude.
    """
    jsi = np.asarray(jsi, dtype=float)
    if np.any(jsi < 0):
        raise ValueError("intensity must be non-negative")
    return schmidt_metrics(JSAGrid.from_array(np.sqrt(jsi))).purity


def write_jsa_csv(jsa: JSAGrid, path: str | Path | None = None) -> str:
    """CSV: header ``signal, re@<wi>, im@<wi>, ...``; one row per signal bin."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["signal"]
    for v in jsa.idler_axis:
        header += [f"re@{float(v)!r}", f"im@{float(v)!r}"]
    w.writerow(header)
    for s, row in zip(jsa.signal_axis, jsa.amplitudes):
        cells = [repr(float(s))]
        for a in row:
            cells += [repr(float(a.real)), repr(float(a.imag))]
        w.writerow(cells)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_jsa_csv(source: str | Path) -> JSAGrid:
    text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else str(source)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    header, body = rows[0], rows[1:]
    if header[0].strip() != "signal" or (len(header) - 1) % 2:
        raise ValueError("JSA CSV header must be 'signal, re@w, im@w, ...'")
    idler = [float(h.split("@", 1)[1]) for h in header[1::2]]
    signal, amps = [], []
    for r in body:
        signal.append(float(r[0]))
        vals = [float(x) for x in r[1:]]
        amps.append([complex(re, im) for re, im in zip(vals[::2], vals[1::2])])
    return JSAGrid(np.array(amps), np.array(signal), np.array(idler))


# --- single emitters --------------------------------------------------------


@dataclass(frozen=True)
class SingleEmitter:
    """Emitter reduced to its metrics; photons enter circuits through labeled propagation."""

    brightness: float = 1.0
    indistinguishability: float = 1.0
    g2: float = 0.0

    def labeled_input(self, occ) -> LabeledInput:
        return LabeledInput.obb(tuple(occ), self.indistinguishability)
