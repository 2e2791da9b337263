"""Running a scheme: propagate, herald, and score against the target."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from ..correction import best_fidelity
from ..detect import DetectorModel, HeraldResult, PatternResult, apply_losses, event_accounting, herald, postselect
from ..fock import PureState, StateEnsemble
from ..interferometer import compile_circuit
from ..propagate import MAX_PHOTONS, evolve
from .definition import SchemeDefinition, SchemeError


def rationalize(x: float, max_den: int = 100_000, tol: float = 1e-12) -> Fraction | None:
    """Small-denominator rational equal to ``x`` within ``tol``, if one exists."""
    f = Fraction(x).limit_denominator(max_den)
    return f if abs(float(f) - x) <= tol else None


@dataclass(frozen=True)
class PatternReport:
    pattern: tuple[int, ...]
    probability: float
    tag: str | None
    fidelity_raw: float
    fidelity: float
    correction: str


@dataclass(frozen=True)
class SchemeRun:
    name: str
    success_prob: float
    expected_success: Fraction | None
    fidelity: float
    patterns: tuple[PatternReport, ...]
    herald_result: HeraldResult | None
    output: StateEnsemble
    false_positive_prob: float = 0.0
    false_negative_prob: float = 0.0
    false_positive_rate: float = 0.0
    false_negative_rate: float = 0.0
    conditional: StateEnsemble | None = None  # accepted (subnormalized) target-mode state

    @property
    def success_exact(self) -> Fraction | None:
        return rationalize(self.success_prob)


def _score(scheme: SchemeDefinition, pat: PatternResult) -> PatternReport:
    reg = scheme.relative_register()
    tgt = scheme.target_state(pat.correction)
    raw, _ = best_fidelity(pat.conditional, tgt, reg, "none")
    fid, corr = best_fidelity(pat.conditional, tgt, reg, scheme.correction)
    return PatternReport(pat.pattern, pat.probability, pat.correction, raw, fid, corr.describe() if scheme.correction != "none" else "")


def run(
    scheme: SchemeDefinition,
    detectors: DetectorModel | Sequence[DetectorModel] | None = None,
    losses: Mapping[int, float] | None = None,
    *,
    max_photons: int = MAX_PHOTONS,
) -> SchemeRun:
    """Simulate ``scheme`` and score every accepted pattern.

    ``detectors`` replaces the scheme's herald detectors; ``losses`` maps a
    circuit output mode to a transmissivity applied before detection. With
    either override the false-positive/negative accounting is measured
    against the ideal run (ideal number-resolving heralds, no loss).
    """
    if not scheme.runnable:
        raise SchemeError(f"{scheme.name} has no circuit (status 'external')")
    u = compile_circuit(scheme.circuit)
    psi = evolve(PureState.basis(scheme.input), u, max_photons=max_photons)
    losses = {int(k): float(v) for k, v in (losses or {}).items() if float(v) != 1.0}
    noisy = apply_losses(psi, losses) if losses else StateEnsemble.pure(psi)

    if scheme.herald is None:
        if scheme.postselect:
            if losses:
                raise SchemeError("postselected schemes do not support loss overrides")
            prob, kept = postselect(psi, scheme.target.register)
            cond = StateEnsemble.pure(kept) if prob > 0 else StateEnsemble(())
        else:
            prob, cond = noisy.trace, noisy
        pat = PatternResult((), prob, cond, None)
        rep = _score(scheme, pat)
        return SchemeRun(scheme.name, prob, scheme.expected_success, rep.fidelity, (rep,), None, noisy, conditional=cond)

    dets = scheme.herald_detectors() if detectors is None else detectors
    res = herald(noisy, scheme.herald, dets)
    reports = tuple(_score(scheme, p) for p in res.patterns)
    total = res.success_prob
    fid = sum(r.probability * r.fidelity for r in reports) / total if total > 0 else 0.0
    acc = {"false_positive_prob": 0.0, "false_negative_prob": 0.0, "false_positive_rate": 0.0, "false_negative_rate": 0.0}
    ideal = herald(psi, scheme.herald, None)
    if losses or detectors is not None or any(not d.is_ideal_pnr for d in scheme.herald_detectors()):
        acc = event_accounting(ideal, res)
    return SchemeRun(
        scheme.name, total, scheme.expected_success, fid, reports, res, noisy,
        acc["false_positive_prob"], acc["false_negative_prob"], acc["false_positive_rate"], acc["false_negative_rate"], res.combined,
    )
