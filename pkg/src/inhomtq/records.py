"""JSON solution/fusion records, table rendering and independent re-verification."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .algebra import Polynomial, x_to_u
from .lattice import BoundaryParams, ChainSpec
from .tq import (
    CompletenessReport,
    ImaginaryEnergyWarning,
    check_nodes,
    energy_from_roots,
    q_from_roots,
    tq_residual,
)

SCHEMA_VERSION = 1
SOLUTION_KIND = "inhomtq.solution"
FUSION_KIND = "inhomtq.fusion"


class SchemaError(ValueError):
    pass


@dataclass
class RunConfig:
    n_sites: int
    p: float
    q: float
    xi: float
    xi_squared: float | None = None
    sign: str = "+"
    tol_tq: float = 1e-8
    tol_energy: float = 1e-6
    seed: int = 0

    def validate(self) -> None:
        if self.tol_tq <= 0 or self.tol_energy <= 0:
            raise ValueError("tolerances must be positive")
        if self.xi == 0:
            raise ValueError(
                "xi = 0 selects diagonal boundary terms; the inhomogeneous term vanishes "
                "and the fixed-degree T-Q solution is not defined there"
            )
        self.chain_spec()  # raises on bad n_sites / p / q / sign

    def params(self) -> BoundaryParams:
        return BoundaryParams(self.p, self.q, self.xi, self.xi_squared)

    def chain_spec(self) -> ChainSpec:
        return ChainSpec(self.n_sites, self.params(), self.sign)


def table1_config() -> RunConfig:
    return RunConfig(3, 0.25, 0.5, -math.sqrt(3.0), xi_squared=3.0)


def table2_config() -> RunConfig:
    return RunConfig(4, 0.25, 0.5, -math.sqrt(3.0), xi_squared=3.0)


def complex_to_json(z: complex) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_from_json(d: dict) -> complex:
    return complex(d["re"], d["im"])


def _finite(x: float | None) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


def report_to_record(report: CompletenessReport, config: RunConfig) -> dict:
    levels = []
    for lv in report.levels:
        levels.append({
            "index": lv.index,
            "energy_direct": lv.energy_direct,
            "energy_bethe": lv.energy_bethe,
            "lambda_coefficients": [complex_to_json(c) for c in lv.lam.lam.coeffs] if lv.lam else [],
            "q_x_coefficients": (
                [complex_to_json(c) for c in lv.solution.q_poly.xcoeffs] if lv.solution else []
            ),
            "bethe_roots": [complex_to_json(r) for r in lv.roots],
            "tq_residual": lv.tq_residual,
            "solved": lv.solved(report.tol_tq, report.tol_energy),
            "error": lv.error,
        })
    record = {
        "schema_version": SCHEMA_VERSION,
        "kind": SOLUTION_KIND,
        "config": asdict(config),
        "levels": levels,
        "summary": {
            "n_levels": len(levels),
            "n_solved": report.n_solved,
            "max_energy_mismatch": _finite(report.max_energy_mismatch),
            "max_residual": _finite(report.max_residual),
            "all_solved": report.all_solved,
            "distinct": report.distinct,
        },
    }
    failed = [lv for lv in levels if not lv["solved"]]
    if failed:
        record["failures"] = [
            {"index": lv["index"], "energy_direct": lv["energy_direct"],
             "tq_residual": lv["tq_residual"], "error": lv["error"]}
            for lv in failed
        ]
    return record


def write_json_atomic(path: str | os.PathLike, obj: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def load_record(path: str | os.PathLike, kind: str = SOLUTION_KIND) -> dict:
    with open(path) as fh:
        try:
            record = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    check_schema(record, kind)
    return record


def check_schema(record: dict, kind: str = SOLUTION_KIND) -> None:
    if not isinstance(record, dict):
        raise SchemaError("record must be a JSON object")
    version = record.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")
    if record.get("kind") != kind:
        raise SchemaError(f"record kind {record.get('kind')!r} is not {kind!r}")
    if kind == SOLUTION_KIND:
        for key in ("config", "levels", "summary"):
            if key not in record:
                raise SchemaError(f"record is missing {key!r}")
        for lv in record["levels"]:
            for key in ("index", "energy_direct", "bethe_roots"):
                if key not in lv:
                    raise SchemaError(f"level entry is missing {key!r}")


def config_from_record(record: dict) -> RunConfig:
    cfg = record["config"]
    return RunConfig(**{k: cfg[k] for k in RunConfig.__dataclass_fields__ if k in cfg})


# -- verification -------------------------------------------------------------

def verify_record(record: dict) -> list[str]:
    """Recompute residuals and energies from stored roots; return failure messages."""
    check_schema(record)
    config = config_from_record(record)
    spec = config.chain_spec()
    problems = []
    if len(record["levels"]) != spec.dim:
        problems.append(f"expected {spec.dim} levels, found {len(record['levels'])}")
    nodes = check_nodes(spec.n_sites)
    for lv in record["levels"]:
        idx = lv["index"]
        roots = [complex_from_json(r) for r in lv["bethe_roots"]]
        if lv.get("error") or len(roots) != spec.n_sites or not lv.get("lambda_coefficients"):
            problems.append(f"level {idx}: no complete solution stored ({lv.get('error')})")
            continue
        lam = Polynomial([complex_from_json(c) for c in lv["lambda_coefficients"]])
        q = x_to_u(q_from_roots(roots))
        res = tq_residual(lam, q, spec, nodes)
        if not res <= config.tol_tq:
            problems.append(f"level {idx}: T-Q residual {res:.3e} exceeds {config.tol_tq:.1e}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ImaginaryEnergyWarning)
            energy = energy_from_roots(roots, spec)
        if not abs(energy - lv["energy_direct"]) <= config.tol_energy:
            problems.append(
                f"level {idx}: energy from roots {energy:.10g} differs from direct "
                f"{lv['energy_direct']:.10g}"
            )
        stored = lv.get("energy_bethe")
        if stored is not None and not abs(stored - energy) <= config.tol_energy:
            problems.append(f"level {idx}: stored Bethe energy {stored:.10g} is stale ({energy:.10g})")
    return problems


# -- tables -------------------------------------------------------------------

def format_number(x: float) -> str:
    if abs(x) < 5e-13:
        x = 0.0
    return np.format_float_positional(x, precision=6, unique=False, fractional=False, trim="-")


def format_roots(roots: list[complex], tol: float = 1e-6) -> str:
    """Real roots plainly, conjugate pairs as ``a ± bi``, lone complex roots as ``a + bi``."""
    items = []
    pending = [complex(r) for r in roots]
    while pending:
        r = pending.pop(0)
        if abs(r.imag) <= tol * max(1.0, abs(r)):
            items.append((r.real, 0.0, format_number(r.real)))
            continue
        partner = next((j for j, z in enumerate(pending) if abs(z - r.conjugate()) <= tol * max(1.0, abs(r))), None)
        im = abs(r.imag)
        if partner is not None:
            pending.pop(partner)
            items.append((r.real, im, f"{format_number(r.real)} ± {format_number(im)}i"))
        else:
            op = "+" if r.imag > 0 else "-"
            items.append((r.real, im, f"{format_number(r.real)} {op} {format_number(im)}i"))
    items.sort(key=lambda t: (round(t[0], 9), t[1]))
    return ", ".join(t[2] for t in items)


def table_rows(record: dict) -> list[tuple[str, str]]:
    levels = sorted(record["levels"], key=lambda lv: (lv["energy_direct"], lv["index"]))
    return [
        (format_number(lv["energy_direct"]),
         format_roots([complex_from_json(r) for r in lv["bethe_roots"]]))
        for lv in levels
    ]


def render_table(record: dict, fmt: str = "md") -> str:
    check_schema(record)
    rows = table_rows(record)
    if fmt == "md":
        lines = ["| E | Bethe roots λ_j |", "|---|---|"]
        lines += [f"| {e} | {r} |" for e, r in rows]
        return "\n".join(lines) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["E", "bethe_roots"])
        writer.writerows(rows)
        return buf.getvalue()
    raise ValueError(f"unknown table format {fmt!r}")
