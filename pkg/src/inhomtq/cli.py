"""Command-line front end.

Exit codes: 0 success, 2 usage error, 3 completeness/verification failure,
4 fusion-check failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import fusion
from .lattice import BoundaryParams, ChainSpec
from .records import (
    FUSION_KIND,
    SCHEMA_VERSION,
    RunConfig,
    SchemaError,
    load_record,
    render_table,
    report_to_record,
    table1_config,
    table2_config,
    verify_record,
    write_json_atomic,
)
from .tq import PoleProximityError, completeness_scan

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INCOMPLETE = 3
EXIT_FUSION = 4

OUTPUT_DIR_ENV = "INHOMTQ_OUTPUT_DIR"
HIROTA_TOL = 1e-10
T2_TOL = 1e-12
HIROTA_SAMPLES = 20


def _default_output(name: str) -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / name


def _usage_error(msg: str) -> int:
    print(f"inhomtq: error: {msg}", file=sys.stderr)
    return EXIT_USAGE


def _config_from_args(args) -> RunConfig:
    if args.table1 or args.table2:
        cfg = table1_config() if args.table1 else table2_config()
    else:
        missing = [flag for flag, val in (("--n", args.n), ("--p", args.p), ("--q", args.q), ("--xi", args.xi))
                   if val is None]
        if missing:
            raise ValueError(f"missing {', '.join(missing)} (or use --table1/--table2)")
        cfg = RunConfig(args.n, args.p, args.q, args.xi)
    cfg.sign = args.sign
    cfg.tol_tq = args.tol_tq
    cfg.tol_energy = args.tol_energy
    cfg.seed = args.seed
    return cfg


def cmd_solve(args) -> int:
    try:
        cfg = _config_from_args(args)
        cfg.validate()
    except ValueError as exc:
        return _usage_error(str(exc))
    out = Path(args.out) if args.out else _default_output(f"solution_N{cfg.n_sites}.json")

    start = time.perf_counter()
    report = completeness_scan(cfg.chain_spec(), cfg.tol_tq, cfg.tol_energy)
    record = report_to_record(report, cfg)
    write_json_atomic(out, record)
    s = record["summary"]
    print(
        f"N={cfg.n_sites}: {s['n_solved']}/{s['n_levels']} levels solved, "
        f"max |E_direct - E_bethe| = {s['max_energy_mismatch']}, max residual = {s['max_residual']} "
        f"({time.perf_counter() - start:.2f}s) -> {out}"
    )
    return EXIT_OK if report.all_solved else EXIT_INCOMPLETE


def cmd_table(args) -> int:
    try:
        record = load_record(args.record)
        text = render_table(record, args.format)
    except (OSError, SchemaError, KeyError) as exc:
        return _usage_error(f"{args.record}: {exc}")
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        record = load_record(args.record)
        problems = verify_record(record)
    except (OSError, SchemaError, KeyError, TypeError, ValueError) as exc:
        return _usage_error(f"{args.record}: {exc}")
    for msg in problems:
        print(msg)
    if problems:
        print(f"FAIL: {len(problems)} problem(s) in {args.record}")
        return EXIT_INCOMPLETE
    print(f"OK: {len(record['levels'])} levels verified")
    return EXIT_OK


def _random_spec(rng: np.random.Generator, include_c: bool) -> ChainSpec:
    n = int(rng.integers(2, 5))
    p, q = rng.uniform(0.2, 2, 2) * rng.choice([-1, 1], 2)
    xi = rng.uniform(0.5, 2) * rng.choice([-1, 1]) if include_c else 0.0
    return ChainSpec(n, BoundaryParams(float(p), float(q), float(xi)))


def hirota_sweep(max_s: int, seed: int, samples: int = HIROTA_SAMPLES, t2_shift_offset: int = 0):
    """Seeded Hirota checks for s = 1..max_s, with C present and with C = 0.

    Returns ``(rows, failures)``; each failure carries what is needed to
    reproduce it.
    """
    rng = np.random.default_rng(seed)
    rows, failures = [], []
    for s in range(1, max_s + 1):
        for include_c in (True, False):
            worst_h = worst_t2 = 0.0
            for _ in range(samples):
                while True:
                    spec = _random_spec(rng, include_c)
                    q = fusion.random_q(rng, 4)
                    u = complex(rng.uniform(0.1, 2.0))
                    try:
                        res = fusion.hirota_residual(s, q, spec, u, include_c, pole_tol=1e-3,
                                                     t2_shift_offset=t2_shift_offset)
                        break
                    except PoleProximityError:
                        continue
                worst_h = max(worst_h, res.hirota_relative)
                worst_t2 = max(worst_t2, res.t2_relative)
                if not (res.hirota_relative < HIROTA_TOL and res.t2_relative < T2_TOL):
                    failures.append({
                        "s": s, "u": u.real, "include_c": include_c,
                        "n_sites": spec.n_sites, "p": spec.params.p, "q": spec.params.q, "xi": spec.params.xi,
                        "q_coefficients": [float(c.real) for c in q.coeffs],
                        "hirota_relative": res.hirota_relative, "t2_relative": res.t2_relative,
                    })
            rows.append({"s": s, "include_c": include_c, "max_hirota_relative": worst_h,
                         "max_t2_relative": worst_t2})
    return rows, failures


def fusion_report(max_s: int, seed: int, t2_shift_offset: int = 0) -> dict:
    counts = []
    for s in range(max_s + 1):
        counts.append({
            "s": s,
            "inhomogeneous": fusion.term_count(s, True),
            "inhomogeneous_expected": fusion.character_count(s, True),
            "diagonal": fusion.term_count(s, False),
            "diagonal_expected": fusion.character_count(s, False),
        })
    counts_ok = all(c["inhomogeneous"] == c["inhomogeneous_expected"]
                    and c["diagonal"] == c["diagonal_expected"] for c in counts)
    reduction_ok = fusion.reduction_check_diag(max_s)
    rows, failures = hirota_sweep(max_s, seed, t2_shift_offset=t2_shift_offset)
    symbolic = [
        {"s": s, "include_c": include_c,
         "holds": fusion.hirota_symbolic(s, include_c, t2_shift_offset=t2_shift_offset)}
        for s in range(1, max_s + 1) for include_c in (True, False)
    ]
    symbolic_ok = all(row["holds"] for row in symbolic)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": FUSION_KIND,
        "max_s": max_s,
        "seed": seed,
        "term_counts": counts,
        "term_counts_ok": counts_ok,
        "reduction_ok": reduction_ok,
        "hirota": rows,
        "hirota_tolerances": {"hirota": HIROTA_TOL, "t2": T2_TOL},
        "hirota_symbolic": symbolic,
        "failures": failures,
        "passed": counts_ok and reduction_ok and symbolic_ok and not failures,
    }


def cmd_fusion(args) -> int:
    if not 1 <= args.max_s <= fusion.MAX_SPIN:
        return _usage_error(f"--max-s must be in [1, {fusion.MAX_SPIN}]")
    report = fusion_report(args.max_s, args.seed, t2_shift_offset=1 if args.corrupt_t2 else 0)
    out = Path(args.out) if args.out else _default_output(f"fusion_s{args.max_s}_seed{args.seed}.json")
    write_json_atomic(out, report)
    counts = ", ".join(str(c["inhomogeneous"]) for c in report["term_counts"])
    print(f"term counts: {counts}")
    print(f"reduction to diagonal functional: {'ok' if report['reduction_ok'] else 'FAILED'}")
    for row in report["hirota"]:
        label = "C" if row["include_c"] else "C=0"
        print(f"s={row['s']} {label:>3}: hirota {row['max_hirota_relative']:.2e}  t2 {row['max_t2_relative']:.2e}")
    broken = [f"s={r['s']}{'' if r['include_c'] else ' (C=0)'}" for r in report["hirota_symbolic"] if not r["holds"]]
    print(f"symbolic Hirota identity: {'holds' if not broken else 'FAILS at ' + ', '.join(broken)}")
    for f in report["failures"][:5]:
        print(f"FAIL s={f['s']} u={f['u']!r} include_c={f['include_c']} Q={f['q_coefficients']}")
    print(f"{'PASS' if report['passed'] else 'FAIL'} -> {out}")
    return EXIT_OK if report["passed"] else EXIT_FUSION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inhomtq", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve the T-Q relation for every eigenstate")
    presets = solve.add_mutually_exclusive_group()
    presets.add_argument("--table1", action="store_true", help="N=3, p=1/4, q=1/2, xi=-sqrt(3)")
    presets.add_argument("--table2", action="store_true", help="N=4, p=1/4, q=1/2, xi=-sqrt(3)")
    solve.add_argument("--n", type=int)
    solve.add_argument("--p", type=float)
    solve.add_argument("--q", type=float)
    solve.add_argument("--xi", type=float)
    solve.add_argument("--sign", choices=["+", "-"], default="+")
    solve.add_argument("--tol-tq", type=float, default=1e-8)
    solve.add_argument("--tol-energy", type=float, default=1e-6)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--out", help=f"output JSON (default: ${OUTPUT_DIR_ENV}/solution_N<n>.json)")
    solve.set_defaults(func=cmd_solve)

    table = sub.add_parser("table", help="render a solution record as a table")
    table.add_argument("record")
    table.add_argument("--format", choices=["csv", "md"], default="md")
    table.add_argument("--out")
    table.set_defaults(func=cmd_table)

    fus = sub.add_parser("fusion", help="symbolic fusion-hierarchy checks")
    fus.add_argument("--max-s", type=int, default=4)
    fus.add_argument("--seed", type=int, default=0)
    fus.add_argument("--out")
    fus.add_argument("--corrupt-t2", action="store_true", help=argparse.SUPPRESS)
    fus.set_defaults(func=cmd_fusion)

    ver = sub.add_parser("verify", help="re-check a stored solution record")
    ver.add_argument("record")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
