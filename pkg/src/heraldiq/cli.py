"""Command-line interface: ``heraldiq {simulate,tables,sweep,search,sources}``.

Exit codes: 0 ok, 2 invalid configuration, 3 photon/mode cap exceeded,
4 search budget exhausted without a solution.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .detect import FANOUT, PNR, THRESHOLD, DetectError, DetectorModel, HeraldSpec
from .fock import FockError, Register, StateEnsemble
from .interferometer import BeamSplitter, Circuit, CircuitError, compile_circuit
from .propagate import MAX_PHOTONS, CapExceeded, LabeledInput, coincidence_probability, evolve_labeled
from .schemes import (
    FILE_SLOTS,
    TABLE_VALUES,
    SchemeDefinition,
    SchemeError,
    TargetSpec,
    builtin_registry,
    calculate,
    dump_scheme,
    get_scheme,
    load_scheme,
    rationalize,
    run,
)
from .schemes.formulas import multiplex

REPORT_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_BUDGET = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    def __init__(self, report: dict):
        super().__init__("search budget exhausted without a solution")
        self.report = report


# --- formatting ------------------------------------------------------------------


def _num(x: float) -> float:
    x = float(f"{float(x):.12g}")
    return 0.0 if x == 0 else x


def _prob(x: float, exact: Fraction | None = None) -> dict:
    if exact is None:
        exact = rationalize(float(x))
    return {"decimal": _num(x), "rational": None if exact is None else str(exact)}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow(["" if v is None else v for v in r])
    return buf.getvalue()


# --- shared options ----------------------------------------------------------------


def _parse_eta(text: str | None) -> tuple[float | None, dict[int, float]]:
    """``"0.9"`` (all herald detectors) or ``"4=0.9,0=0.8"`` (per mode)."""
    if not text:
        return None, {}
    default, per = None, {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "=" in part:
                k, v = part.split("=", 1)
                per[int(k)] = float(v)
            else:
                default = float(part)
        except ValueError:
            raise ConfigError(f"cannot parse --eta entry {part!r}") from None
    for v in [default, *per.values()]:
        if v is not None and not 0 <= v <= 1:
            raise ConfigError("--eta values must lie in [0, 1]")
    return default, per


def _load(args) -> SchemeDefinition:
    if bool(args.builtin) == bool(args.scheme):
        raise ConfigError("give exactly one of --builtin or --scheme")
    if args.builtin:
        return get_scheme(args.builtin)
    try:
        return load_scheme(args.scheme)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot read scheme file {args.scheme}: {exc}") from None


def _detector_kind(args) -> tuple[str | None, int]:
    if args.fanout is not None:
        return FANOUT, args.fanout
    if args.threshold:
        return THRESHOLD, 2
    if args.pnr:
        return PNR, 2
    return None, 2


def _overrides(args, scheme: SchemeDefinition, eta_default=None, dark=None):
    """Herald detectors and target-mode losses from the command line."""
    eta_all, per_mode = _parse_eta(getattr(args, "eta", None))
    if eta_default is not None:
        eta_all = eta_default
    dark = args.dark if dark is None else dark
    if dark is not None and not 0 <= dark < 1:
        raise ConfigError("--dark must lie in [0, 1)")
    kind, branches = _detector_kind(args)
    for mode in per_mode:
        if not 0 <= mode < scheme.m:
            raise ConfigError(f"--eta refers to mode {mode} outside 0..{scheme.m - 1}")
    hmodes = scheme.herald.modes if scheme.herald is not None else ()
    losses = {mode: v for mode, v in per_mode.items() if mode not in hmodes}
    changed = kind is not None or dark is not None or eta_all is not None or any(mo in hmodes for mo in per_mode)
    if not changed:
        return None, losses
    dets = []
    for mode, base in zip(hmodes, scheme.herald_detectors()):
        eff = per_mode.get(mode, eta_all if eta_all is not None else base.efficiency)
        dets.append(DetectorModel(kind or base.kind, eff, base.dark_count if dark is None else dark, branches if kind else base.branches))
    return tuple(dets), losses


def _check_trunc(args, scheme: SchemeDefinition) -> int:
    cap = MAX_PHOTONS if args.trunc is None else args.trunc
    if cap < 0:
        raise ConfigError("--trunc must be non-negative")
    if cap > MAX_PHOTONS:
        raise CapExceeded(f"--trunc {cap} exceeds the module limit of {MAX_PHOTONS} photons")
    if scheme.photons > cap:
        raise CapExceeded(f"{scheme.name} uses {scheme.photons} photons, above --trunc {cap}")
    return cap


# --- simulate -----------------------------------------------------------------------


def simulate_report(scheme: SchemeDefinition, detectors=None, losses=None, max_photons: int = MAX_PHOTONS) -> dict:
    res = run(scheme, detectors, losses, max_photons=max_photons)
    dets = detectors if detectors is not None else scheme.herald_detectors()
    exact = res.success_exact
    return {
        "report_version": REPORT_VERSION,
        "command": "simulate",
        "scheme": scheme.name,
        "status": scheme.status,
        "photons": scheme.photons,
        "modes": scheme.m,
        "herald_modes": list(scheme.herald.modes) if scheme.herald else [],
        "detectors": [
            {"kind": d.kind, "efficiency": _num(d.efficiency), "dark_count": _num(d.dark_count), "branches": d.branches}
            for d in dets
        ],
        "losses": {str(k): _num(v) for k, v in sorted((losses or {}).items())},
        "success": _prob(res.success_prob, exact),
        "expected_success": None if scheme.expected_success is None else str(scheme.expected_success),
        "matches_expected": None
        if scheme.expected_success is None
        else abs(res.success_prob - float(scheme.expected_success)) <= 1e-9,
        "fidelity": _num(res.fidelity),
        "correction_class": scheme.correction,
        "patterns": [
            {
                "pattern": list(p.pattern),
                "probability": _prob(p.probability),
                "tag": p.tag,
                "fidelity_raw": _num(p.fidelity_raw),
                "fidelity": _num(p.fidelity),
                "correction": p.correction,
            }
            for p in res.patterns
        ],
        "false_positive": {"probability": _num(res.false_positive_prob), "rate": _num(res.false_positive_rate)},
        "false_negative": {"probability": _num(res.false_negative_prob), "rate": _num(res.false_negative_rate)},
    }


SIMULATE_COLUMNS = ["scheme", "pattern", "probability", "rational", "tag", "fidelity_raw", "fidelity"]


def cmd_simulate(args) -> str:
    scheme = _load(args)
    cap = _check_trunc(args, scheme)
    dets, losses = _overrides(args, scheme)
    rep = simulate_report(scheme, dets, losses, cap)
    if args.format == "json":
        return _json(rep)
    rows = [
        [rep["scheme"], " ".join(map(str, p["pattern"])), p["probability"]["decimal"], p["probability"]["rational"], p["tag"], p["fidelity_raw"], p["fidelity"]]
        for p in rep["patterns"]
    ]
    rows.append([rep["scheme"], "total", rep["success"]["decimal"], rep["success"]["rational"], None, None, rep["fidelity"]])
    return _csv(SIMULATE_COLUMNS, rows)


# --- tables -------------------------------------------------------------------------

TABLE_COLUMNS = ["table", "key", "photons", "modes", "detector", "source", "success", "rational", "multiplexed"]

FORMULA_ROWS = [
    ("bell", "bell-sms d=2", "bell-sms", {"d": 2}, 6, 6),
    ("bell", "bell-sms d=3", "bell-sms", {"d": 3}, 9, 9),
    ("bell", "bell-sms-bled d=2", "bell-sms-bled", {"d": 2}, 6, 6),
    ("ghz", "ghz-subtraction N=3", "ghz-subtraction", {"N": 3}, 6, 12),
    ("ghz", "ghz-subtraction-ff N=3", "ghz-subtraction-ff", {"N": 3}, 6, 12),
    ("ghz", "ghz-sms N=3", "ghz-sms", {"N": 3}, None, None),
    ("ghz", "ghz-sms N=4", "ghz-sms", {"N": 4}, None, None),
    ("ghz", "ghz-sms-qudit d=3", "ghz-sms-qudit", {"d": 3}, None, None),
    ("ghz", "ghz-sms-qudit-bled d=3", "ghz-sms-qudit-bled", {"d": 3}, None, None),
    ("ghz", "ghz-unit-cells n=3", "ghz-unit-cells", {"n": 3}, 6, 12),
    ("ghz", "ghz-unit-cells-bled n=3", "ghz-unit-cells-bled", {"n": 3}, 6, 12),
    ("w", "w-subtraction N=3", "w-subtraction", {"N": 3}, None, None),
    ("w", "w-subtraction-ff N=3", "w-subtraction-ff", {"N": 3}, None, None),
]


def tables_rows(n_multiplex: int = 1) -> list[list]:
    rows = []

    def add(table, key, photons, modes, detector, source, value, simulated=False):
        if value is None:
            rows.append([table, key, photons, modes, detector, source, None, None, None])
            return
        exact = value if isinstance(value, Fraction) else (rationalize(float(value)) if simulated else None)
        mux = multiplex(exact if exact is not None else float(value), n_multiplex)
        rows.append([table, key, photons, modes, detector, source, _num(float(value)), None if exact is None else str(exact), _num(float(mux))])

    for s in builtin_registry():
        table = "noon" if s.target.kind == "noon" else s.target.kind
        det = s.herald_detectors()[0].kind if s.herald_detectors() else "none"
        if s.runnable:
            add(table, s.name, s.photons, s.m, det, "simulated", run(s).success_prob, True)
        else:
            n, m, _, _, _ = FILE_SLOTS[s.name]
            add(table, s.name, n, m, det, "external", None)
    for table, key, name, params, n, m in FORMULA_ROWS:
        add(table, key, n, m, "", "formula", calculate(name, **params))
    for table, key, n, m, value, det in TABLE_VALUES:
        add(table, key, n, m, det, "reported" if value is not None else "external", value)
    return rows


def cmd_tables(args) -> str:
    if args.multiplex < 1:
        raise ConfigError("--multiplex must be at least 1")
    rows = tables_rows(args.multiplex)
    if args.format == "csv":
        return _csv(TABLE_COLUMNS, rows)
    return _json({
        "report_version": REPORT_VERSION,
        "command": "tables",
        "multiplex": args.multiplex,
        "rows": [dict(zip(TABLE_COLUMNS, r)) for r in rows],
    })


# --- sweep --------------------------------------------------------------------------

SWEEP_COLUMNS = {
    "eta": ["eta", "success", "fidelity", "false_positive_rate", "false_negative_rate"],
    "dark": ["dark", "success", "fidelity", "false_positive_rate", "false_negative_rate"],
    "visibility": ["visibility", "coincidence"],
    "squeeze": ["squeeze", "pair_ratio", "herald_prob", "heralded_g2", "truncation_error"],
}


def _grid(args) -> list[float]:
    if args.values:
        try:
            return [float(v) for v in args.values.split(",") if v.strip()]
        except ValueError:
            raise ConfigError("--values must be comma-separated numbers") from None
    if args.grid:
        try:
            a, b, n = args.grid.split(":")
            return [float(x) for x in np.linspace(float(a), float(b), int(n))]
        except ValueError:
            raise ConfigError("--grid must be start:stop:count") from None
    raise ConfigError("give --values or --grid")


def sweep_rows(param: str, values: list[float], scheme: SchemeDefinition | None, args) -> list[list]:
    rows = []
    if param in ("eta", "dark"):
        if scheme is None:
            raise ConfigError(f"sweeping {param} needs --builtin or --scheme")
        if scheme.herald is None:
            raise ConfigError(f"{scheme.name} has no herald detectors to sweep")
        for v in values:
            dets, losses = _overrides(args, scheme, eta_default=v if param == "eta" else None, dark=v if param == "dark" else None)
            res = run(scheme, dets, losses)
            rows.append([_num(v), _num(res.success_prob), _num(res.fidelity), _num(res.false_positive_rate), _num(res.false_negative_rate)])
    elif param == "visibility":
        u = compile_circuit(Circuit(2, (BeamSplitter(0, 1),)))
        for v in values:
            if not 0 <= v <= 1:
                raise ConfigError("visibility must lie in [0, 1]")
            ens = evolve_labeled(LabeledInput.obb((1, 1), math.sqrt(v)), u)
            rows.append([_num(v), _num(coincidence_probability(ens, (1, 1)))])
    elif param == "squeeze":
        from .sources import TMSVSource, herald_single, heralded_g2, truncation_error

        det = DetectorModel(THRESHOLD)
        for v in values:
            if v < 0:
                raise ConfigError("squeezing must be non-negative")
            src = TMSVSource(v, n_max=args.nmax)
            pp = src.pair_probs()
            ratio = pp[1] / pp[0]
            hp, _ = herald_single(src, det)
            g2 = heralded_g2(src, det) if hp > 0 else float("nan")
            rows.append([_num(v), _num(ratio), _num(hp), _num(g2), _num(truncation_error(src))])
    else:
        raise ConfigError(f"unknown sweep parameter {param!r}")
    return rows


def cmd_sweep(args) -> str:
    values = _grid(args)
    scheme = _load(args) if (args.builtin or args.scheme) else None
    if scheme is not None:
        _check_trunc(args, scheme)
    rows = sweep_rows(args.param, values, scheme, args)
    if args.format == "json":
        cols = SWEEP_COLUMNS[args.param]
        return _json({
            "report_version": REPORT_VERSION,
            "command": "sweep",
            "parameter": args.param,
            "scheme": scheme.name if scheme else None,
            "rows": [dict(zip(cols, r)) for r in rows],
        })
    return _csv(SWEEP_COLUMNS[args.param], rows)


# --- search -------------------------------------------------------------------------

BUILTIN_PROBLEMS = {
    "noon2": {
        "name": "noon2-search",
        "modes": 2,
        "input": [1, 1],
        "target": {"kind": "noon", "params": {"n": 2}, "register": [[0, 1]]},
        "correction": "none",
        "mu_s": 0.2,
        "p_ref": 1.0,
        "restarts": 4,
        "iterations": 200,
    },
    "bell-4p6m": {
        "name": "bell-4p6m",
        "modes": 6,
        "input": [1, 1, 1, 1, 0, 0],
        "herald": {"modes": [4, 5], "patterns": [[1, 1]]},
        "target": {"kind": "bell", "params": {"state": "phi+"}, "register": [[0, 1], [2, 3]]},
        "correction": "phase",
        "p_ref": "2/27",
    },
}


def problem_from_dict(d: dict):
    from .discover import Budget, SearchProblem

    try:
        m = int(d["modes"])
        h = d.get("herald")
        spec = None
        if h is not None:
            pred = h.get("predicate", {})
            spec = HeraldSpec(
                tuple(h["modes"]),
                patterns=tuple(tuple(p) for p in h["patterns"]) if "patterns" in h else None,
                total=pred.get("total"),
                one_per_pair=tuple(tuple(p) for p in pred["one_per_pair"]) if "one_per_pair" in pred else None,
            )
        t = d["target"]
        target = TargetSpec(t["kind"], dict(t.get("params", {})), Register(tuple(tuple(g) for g in t["register"])))
        tmodes = spec.target_modes(m) if spec else tuple(range(m))
        pos = {x: k for k, x in enumerate(tmodes)}
        reg = Register(tuple(tuple(pos[x] for x in g) for g in target.register.groups))
        budget = Budget(
            restarts=int(d.get("restarts", 64)),
            iterations=int(d.get("iterations", 200)),
            seed=int(d.get("seed", 0)),
        )
        problem = SearchProblem(
            m=m,
            input=tuple(d["input"]),
            herald=spec,
            target=target.build(reg, len(tmodes)),
            register=reg,
            correction=d.get("correction", "phase"),
            mu_f=float(d.get("mu_f", 1.0)),
            mu_s=float(d.get("mu_s", 0.2)),
            p_ref=float(Fraction(str(d.get("p_ref", 1)))),
            fidelity_threshold=float(d.get("fidelity_threshold", 0.999)),
            budget=budget,
            name=str(d.get("name", "search")),
        )
    except KeyError as exc:
        raise ConfigError(f"search problem is missing {exc}") from None
    return problem, target


def cmd_search(args) -> str:
    from dataclasses import replace

    from .discover import optimize, to_scheme, validate

    if bool(args.problem) == bool(args.builtin_problem):
        raise ConfigError("give exactly one of --problem or --builtin-problem")
    if args.problem:
        try:
            data = json.loads(Path(args.problem).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read problem file: {exc}") from None
    else:
        if args.builtin_problem not in BUILTIN_PROBLEMS:
            raise ConfigError(f"unknown builtin problem; choose from {sorted(BUILTIN_PROBLEMS)}")
        data = dict(BUILTIN_PROBLEMS[args.builtin_problem])
    problem, target = problem_from_dict(data)
    budget = problem.budget
    if args.seed is not None:
        budget = replace(budget, seed=args.seed)
    if args.restarts is not None:
        budget = replace(budget, restarts=args.restarts)
    if args.iterations is not None:
        budget = replace(budget, iterations=args.iterations)
    res = optimize(problem, budget)
    f_val, p_val = validate(problem, res.unitary)
    report = {
        "report_version": REPORT_VERSION,
        "command": "search",
        "problem": problem.name,
        "found": res.found,
        "fidelity": _num(res.fidelity),
        "success": _prob(res.success_prob),
        "revalidated": {"fidelity": _num(f_val), "success": _num(p_val)},
        "seed": budget.seed,
        "restarts": budget.restarts,
        "iterations": budget.iterations,
        "best_restart": res.best_index,
        "trace": [
            {"restart": r.index, "iterations": r.iterations, "cost": _num(r.cost), "fidelity": _num(r.fidelity), "success": _num(r.success_prob)}
            for r in res.restarts
        ],
    }
    if args.scheme_out:
        dump_scheme(to_scheme(res, problem.name, target), args.scheme_out)
        report["scheme_file"] = str(args.scheme_out)
    if not res.found:
        raise BudgetExhausted(report)
    return _json(report)


# --- sources ------------------------------------------------------------------------


def cmd_sources(args) -> str:
    from .sources import (
        JSAGrid,
        TMSVSource,
        double_gaussian_jsa,
        heralded_g2,
        jsi_purity_bound,
        read_jsa_csv,
        schmidt_metrics,
        truncation_error,
        write_jsa_csv,
    )

    rep: dict = {"report_version": REPORT_VERSION, "command": "sources"}
    if args.jsa:
        try:
            jsa: JSAGrid = read_jsa_csv(Path(args.jsa))
        except (OSError, ValueError, IndexError) as exc:
            raise ConfigError(f"cannot read JSA file: {exc}") from None
        rep["jsa"] = {"source": "file", "bins": list(jsa.amplitudes.shape)}
    else:
        if not -1 < args.correlation < 1:
            raise ConfigError("--correlation must lie in (-1, 1)")
        jsa = double_gaussian_jsa(args.bins, args.correlation, chirp=args.chirp)
        rep["jsa"] = {"source": "double-gaussian", "bins": [args.bins, args.bins], "correlation": _num(args.correlation), "chirp": _num(args.chirp)}
    met = schmidt_metrics(jsa)
    rep["schmidt_number"] = _num(met.schmidt_number)
    rep["purity"] = _num(met.purity)
    rep["g2_unheralded"] = _num(met.g2_unheralded)
    rep["jsi_purity_bound"] = _num(jsi_purity_bound(np.abs(jsa.amplitudes) ** 2))
    if args.squeeze is not None:
        if args.squeeze < 0:
            raise ConfigError("--squeeze must be non-negative")
        src = TMSVSource(args.squeeze, n_max=args.nmax)
        pp = src.pair_probs()
        rep["tmsv"] = {
            "squeeze": _num(args.squeeze),
            "n_max": args.nmax,
            "pair_ratio": _num(pp[1] / pp[0]),
            "tanh_squared": _num(math.tanh(args.squeeze) ** 2),
            "truncation_error": _num(truncation_error(src)),
            "heralded_g2_threshold": _num(heralded_g2(src, DetectorModel(THRESHOLD))) if args.squeeze > 0 else None,
        }
    if args.jsa_out:
        write_jsa_csv(jsa, args.jsa_out)
    if args.format == "csv":
        keys = ["schmidt_number", "purity", "g2_unheralded", "jsi_purity_bound"]
        return _csv(keys, [[rep[k] for k in keys]])
    return _json(rep)


# --- entry point --------------------------------------------------------------------


def _scheme_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--builtin", help="builtin scheme name")
    p.add_argument("--scheme", help="scheme JSON file")
    p.add_argument("--eta", help="detector efficiency for herald modes, or mode=val,... (non-herald modes: loss)")
    p.add_argument("--dark", type=float, help="dark-count probability per herald detector")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--pnr", action="store_true", help="number-resolving herald detectors")
    kind.add_argument("--threshold", action="store_true", help="threshold herald detectors")
    kind.add_argument("--fanout", type=int, metavar="K", help="threshold fan-out with K branches")
    p.add_argument("--trunc", type=int, help=f"photon-number cap (<= {MAX_PHOTONS})")


def _common(p: argparse.ArgumentParser, fmt: str = "json") -> None:
    p.add_argument("--seed", type=int, help="random seed (u64)")
    p.add_argument("--format", choices=("json", "csv"), default=fmt)
    p.add_argument("--out", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heraldiq", description="Heralded multi-photon state generation toolkit")
    ap.add_argument("--version", action="version", version=f"heraldiq {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scheme and report success, fidelity and false events")
    _scheme_options(p)
    _common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tables", help="regenerate the computable rows of the comparison tables")
    p.add_argument("--multiplex", type=int, default=1, help="trials N for the multiplexed column")
    _common(p, "csv")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("sweep", help="sweep one imperfection parameter and emit CSV")
    p.add_argument("--param", choices=sorted(SWEEP_COLUMNS), required=True)
    p.add_argument("--values", help="comma-separated values")
    p.add_argument("--grid", help="start:stop:count")
    p.add_argument("--nmax", type=int, default=10, help="TMSV truncation for --param squeeze")
    _scheme_options(p)
    _common(p, "csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("search", help="search for a heralded circuit")
    p.add_argument("--problem", help="search problem JSON file")
    p.add_argument("--builtin-problem", help=f"one of {sorted(BUILTIN_PROBLEMS)}")
    p.add_argument("--restarts", type=int)
    p.add_argument("--iterations", type=int)
    p.add_argument("--scheme-out", help="write the found circuit as a scheme file")
    _common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sources", help="source metrics from a JSA file or generator")
    p.add_argument("--jsa", help="JSA CSV file")
    p.add_argument("--correlation", type=float, default=0.0)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--chirp", type=float, default=0.0)
    p.add_argument("--squeeze", type=float, help="TMSV squeezing magnitude |xi|")
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--jsa-out", help="also write the JSA grid as CSV")
    _common(p)
    p.set_defaults(func=cmd_sources)
    return ap


def threads_hint() -> int | None:
    """``HERALDIQ_THREADS`` as an integer hint; computations are currently serial."""
    raw = os.environ.get("HERALDIQ_THREADS")
    try:
        return max(1, int(raw)) if raw else None
    except ValueError:
        return None


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    threads_hint()
    try:
        text = args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except BudgetExhausted as exc:
        _emit(_json(exc.report), args.out)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, SchemeError, DetectError, FockError, CircuitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    _emit(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
