"""Command-line entry point.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 on input errors.  Data goes to ``--out`` (or stdout); diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import itertools
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import gleason, phasespace, work
from .io import RunReport, ScenarioError, emit_distribution, load_scenario_file
from .operators import Effect, ValidationError

log = logging.getLogger("workqp")

DEFAULT_TOLS = {
    "conditions": 1e-9,
    "merge": None,
    "nogo-deviation": 1e-6,
    "nogo-free": 1e-10,
    "gleason": 1e-10,
    "hist": 1e-6,
    "neg": 1e-4,
}


class InputError(Exception):
    pass


def _floats(text: str, flag: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as err:
        raise InputError(f"{flag}: expected a comma-separated list of numbers, got {text!r}") from err


def _tols(pairs: list[str]) -> dict:
    tols = dict(DEFAULT_TOLS)
    for item in pairs or []:
        key, sep, val = item.partition("=")
        if not sep or key not in tols:
            raise InputError(f"--tol: expected NAME=VALUE with NAME in {sorted(tols)}, got {item!r}")
        try:
            tols[key] = float(val)
        except ValueError as err:
            raise InputError(f"--tol {key}: not a number: {val!r}") from err
    return tols


def _write(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(args):
    if not args.scenario:
        raise InputError("--scenario: required for this command")
    try:
        text = Path(args.scenario).read_text(encoding="utf-8")
    except OSError as err:
        raise InputError(f"--scenario: cannot read {args.scenario}: {err.strerror}") from err
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sf = load_scenario_file(text)
    for w in caught:
        log.warning("%s", w.message)
    return sf


def _q_values(args, sf) -> list[float]:
    if args.q is not None:
        qs = _floats(args.q, "--q")
    else:
        qs = list(sf.q_values) or [0.0, 0.5, 1.0]
    if not qs:
        raise InputError("--q: no values given")
    return qs


def _merge_tol(sf, tols):
    return tols["merge"] if tols["merge"] is not None else sf.merge_tol


def _config(args, tols, **extra) -> dict:
    cfg = {"command": args.command, "tolerances": {k: v for k, v in sorted(tols.items())}}
    cfg.update(extra)
    return cfg


def cmd_tpm(args, tols) -> int:
    sf = _load(args)
    d = work.tpm_distribution(sf.scenario, _merge_tol(sf, tols))
    _emit_dist(args, tols, sf, d, "tpm")
    return 0


def _emit_dist(args, tols, sf, d, key) -> None:
    if args.format == "csv":
        _write(emit_distribution(d, "csv"), args.out)
        return
    report = RunReport(args.command, _config(args, tols, evolution=sf.evolution_info), sf.digest)
    report.add_distribution(key, d)
    _write(report.to_json(), args.out)


def cmd_qdist(args, tols) -> int:
    sf = _load(args)
    qs = _q_values(args, sf)
    dists = {q: work.quasiprob_q(sf.scenario, q, _merge_tol(sf, tols)) for q in qs}
    if args.format == "csv":
        if len(qs) != 1:
            raise InputError("--format csv: qdist writes one distribution; give a single --q value or use json")
        _write(emit_distribution(dists[qs[0]], "csv"), args.out)
        return 0
    report = RunReport(args.command, _config(args, tols, q=qs, evolution=sf.evolution_info), sf.digest)
    for q, d in dists.items():
        report.add_distribution(f"q={q!r}", d)
    _write(report.to_json(), args.out)
    return 0


def cmd_verify(args, tols) -> int:
    sf = _load(args)
    qs = _q_values(args, sf)
    res = work.verify_conditions(sf.scenario, qs, tols["conditions"])
    report = RunReport(args.command, _config(args, tols, q=qs, evolution=sf.evolution_info), sf.digest)
    for r in res.records:
        report.add_check(f"W1 q={r.q!r}", r.w1, r.tolerance)
        report.add_check(f"W2 q={r.q!r}", r.w2, r.tolerance)
        report.add_check(f"W3 q={r.q!r}", r.w3, r.tolerance)
    report.data["energy_scale"] = res.energy_scale
    report.data["incoherent"] = sf.scenario.is_incoherent()
    _write(report.to_json(), args.out)
    return 0 if report.passed else 1


def cmd_negativity(args, tols) -> int:
    sf = _load(args)
    qs = _q_values(args, sf)
    report = RunReport(args.command, _config(args, tols, q=qs), sf.digest)
    report.data["negativity"] = {
        f"q={q!r}": work.negativity(work.quasiprob_q(sf.scenario, q, _merge_tol(sf, tols))) for q in qs
    }
    report.data["tpm_negativity"] = work.negativity(work.tpm_distribution(sf.scenario, _merge_tol(sf, tols)))
    _write(report.to_json(), args.out)
    return 0


def cmd_nogo(args, tols) -> int:
    sf = _load(args)
    res = work.no_go_repetition(sf.scenario, tols["nogo-deviation"], tols["nogo-free"])
    report = RunReport(args.command, _config(args, tols), sf.digest)
    report.add_check("repetition-free chains match the energy change", res.free_deviation, res.free_tol)
    if res.status != "inconclusive":
        report.add_check("repeated chain iki deviates from the energy change", res.repeated_deviation,
                         res.deviation_tol, passed=res.repeated_deviation > res.deviation_tol)
    else:
        log.warning("nogo: probes are vacuous (final basis aligned with initial); no-repetition test inconclusive")
    report.data.update({
        "status": res.status,
        "repeated_deviation": res.repeated_deviation,
        "repeated_final_deviation": res.repeated_final_deviation,
        "free_deviation": res.free_deviation,
        "probes": [
            {"probe": r.probe, "chain": r.chain, "energy_change": r.energy_change,
             "chain_mean": r.chain_mean, "deviation": r.deviation}
            for r in res.records
        ],
    })
    _write(report.to_json(), args.out)
    return 0 if report.passed else 1


def cmd_mix(args, tols) -> int:
    sf = _load(args)
    qs = _q_values(args, sf)
    weights = _floats(args.weights, "--weights") if args.weights else [1.0 / len(qs)] * len(qs)
    if len(weights) != len(qs):
        raise InputError("--weights: need one weight per --q value")
    try:
        d = work.mix([work.quasiprob_q(sf.scenario, q, _merge_tol(sf, tols)) for q in qs], weights)
    except ValidationError as err:
        raise InputError(f"--weights: {err}") from err
    _emit_dist(args, tols, sf, d, "mixture")
    return 0


def cmd_gleason(args, tols) -> int:
    sf = _load(args)
    s = sf.scenario
    rho = s.rho0
    tol = tols["gleason"]
    report = RunReport(args.command, _config(args, tols), sf.digest)
    init = [Effect(p) for p in s.initial.projectors]
    fin = [Effect(p) for p in s.evolved_final.projectors]
    for i, e in enumerate(init):
        report.add_check(f"P1 initial[{i}]", gleason.check_probability_bounds(e, rho).residual, tol)
    report.add_check("P2", gleason.check_normalization(rho).residual, tol)
    report.add_check("P3 initial family", gleason.check_additivity(init, None, rho).residual, tol)
    worst_q2 = max(
        gleason.check_unit_reduction([e, f], rho, slot).residual
        for e in init for f in fin for slot in range(3)
    )
    report.add_check("Q2 unit reduction (all pairs, all slots)", worst_q2, tol)
    worst_q3 = max(
        gleason.check_additivity(init, [f], rho, slot).residual for f in fin for slot in range(2)
    )
    report.add_check("Q3 additivity over the initial family", worst_q3, tol)
    worst_rev = max(
        gleason.check_reversal_symmetry([a, f, b], rho).residual
        for a, b in itertools.product(init, repeat=2) for f in fin
    )
    report.add_check("reversal symmetry of triples", worst_rev, tol)
    reps = [(e, f) for e in init for f in fin]
    rank_one = all(r == 1 for r in s.initial.ranks + s.final.ranks)
    certified = violations = 0
    if rank_one:
        for e, f in reps:
            cert = gleason.nonnegativity_certificate([e, f], rho)
            certified += cert.certified
            violations += cert.certified and cert.value < -tol
        report.add_check("certified pairs are non-negative", float(violations), 0.0)
    report.data["certified_pairs"] = certified
    report.data["total_pairs"] = len(reps)
    report.data["family_sum"] = gleason.family_sum([s.initial, s.evolved_final, s.initial], rho)
    _write(report.to_json(), args.out)
    return 0 if report.passed else 1


def _parse_complex(text: str, flag: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as err:
        raise InputError(f"{flag}: not a number: {text!r}") from err


def cmd_wigner_demo(args, tols) -> int:
    try:
        params = phasespace.GaussianParams(_parse_complex(args.a, "--a"), _parse_complex(args.b, "--b"))
        grid = phasespace.PhaseGrid.for_gaussian(params, args.n, args.n_std)
        res = phasespace.contextuality_demo(args.alpha, args.beta, params, grid, args.bins,
                                            hist_tol=tols["hist"], neg_tol=tols["neg"])
    except ValidationError as err:
        raise InputError(str(err)) from err
    report = RunReport(args.command, _config(args, tols, alpha=args.alpha, beta=args.beta, a=params.a,
                                             b=params.b, n=args.n, n_std=args.n_std, bins=args.bins))
    report.add_check("p_1/2 histogram non-negative", max(0.0, -res.min_bin), res.hist_tol)
    report.add_check("Re Tr{P'_p P_x rho} attains negative values", res.min_kirkwood_dirac, -res.neg_tol,
                     passed=res.min_kirkwood_dirac < -res.neg_tol)
    report.add_check("v(x, p, y) attains negative values", res.min_v, -res.neg_tol, passed=res.min_v < -res.neg_tol)
    report.data.update({
        "min_bin": res.min_bin,
        "min_kirkwood_dirac": res.min_kirkwood_dirac,
        "min_v": res.min_v,
        "statement": res.statement,
        "histogram": [{"w_lo": lo, "w_hi": hi, "weight": c}
                      for lo, hi, c in zip(res.bin_edges[:-1], res.bin_edges[1:], res.histogram)],
    })
    _write(report.to_json(), args.out)
    if args.hist_out:
        rows = [("w_lo", "w_hi", "weight")] + [
            (format(lo, ".17g"), format(hi, ".17g"), format(c, ".17g"))
            for lo, hi, c in zip(res.bin_edges[:-1], res.bin_edges[1:], res.histogram)
        ]
        Path(args.hist_out).write_text(_csv_text(rows), encoding="utf-8")
    if args.field_out:
        field = phasespace.wigner(phasespace.gaussian_wavefunction(params, grid), grid)
        rows = [("x", "p", "W")] + [
            (format(x, ".17g"), format(p, ".17g"), format(field.values[i, j], ".17g"))
            for i, x in enumerate(grid.x) for j, p in enumerate(grid.p_wigner)
        ]
        Path(args.field_out).write_text(_csv_text(rows), encoding="utf-8")
    return 0 if report.passed else 1


def _csv_text(rows) -> str:
    buf = _io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


COMMANDS = {
    "tpm": (cmd_tpm, "two-projective-measurement distribution"),
    "qdist": (cmd_qdist, "p_q work quasiprobability for the given q values"),
    "verify": (cmd_verify, "check TPM reduction, mean and second moment"),
    "negativity": (cmd_negativity, "negativity of p_q"),
    "nogo": (cmd_nogo, "no-repetition probe of the mean condition"),
    "mix": (cmd_mix, "convex mixture of p_q distributions"),
    "gleason-check": (cmd_gleason, "axiom suite for the scenario's projector families"),
    "wigner-demo": (cmd_wigner_demo, "phase-space contextuality counterexample"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="workqp", description="Work quasiprobability toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                       help=f"tolerance override; NAME in {', '.join(DEFAULT_TOLS)}")
        if name != "wigner-demo":
            p.add_argument("--scenario", default=None, help="scenario JSON file")
            p.add_argument("--q", default=None, help="comma-separated q values")
            p.add_argument("--format", choices=["csv", "json"], default="csv" if name in {"tpm", "qdist", "mix"} else "json")
        if name == "mix":
            p.add_argument("--weights", default=None, help="comma-separated convex weights")
        if name == "wigner-demo":
            p.add_argument("--alpha", type=float, default=1.0)
            p.add_argument("--beta", type=float, default=1.0)
            p.add_argument("--a", default="0.5", help="Gaussian coefficient a (complex allowed)")
            p.add_argument("--b", default="0", help="Gaussian coefficient b (complex allowed)")
            p.add_argument("--n", type=int, default=128)
            p.add_argument("--n-std", type=float, default=8.0)
            p.add_argument("--bins", type=int, default=64)
            p.add_argument("--format", choices=["json"], default="json")
            p.add_argument("--hist-out", default=None, help="CSV path for the p_1/2 histogram")
            p.add_argument("--field-out", default=None, help="CSV path for the Wigner field")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = COMMANDS[args.command][0]
    stderr = logging.StreamHandler(sys.stderr)
    stderr.setFormatter(logging.Formatter("%(name)s: %(levelname)s: %(message)s"))
    log.addHandler(stderr)
    log.setLevel(logging.WARNING)
    log.propagate = False
    try:
        tols = _tols(args.tol)
        return handler(args, tols)
    except (InputError, ScenarioError) as err:
        log.error("%s", err)
        return 2
    except ValidationError as err:
        log.error("invalid input: %s", err)
        return 2
    finally:
        log.removeHandler(stderr)


def cli(args=None) -> int:
    """Alias of :func:`main` returning the exit code."""
    try:
        return main(args)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
