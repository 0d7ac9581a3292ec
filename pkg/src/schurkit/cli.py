"""Command-line front end.

Exit codes: 0 when every verdict passes, 1 for unreadable or invalid input,
2 when the input is well formed but mathematically rejected (a kernel that is
not positive, samples outside the Schur class, a non-strict operator
argument).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import jsonio
from .freeseries import FormalSeries
from .funccalc import (
    CommutativityError,
    StrictnessError,
    UncertifiedError,
    eval_at_row_tuple,
    eval_colligation_resolvent,
    row_contraction_check,
    von_neumann_check,
)
from .kernels import DomainError, cp_positivity_check, debranges_kernel, positivity_check
from .matops import DEFAULT_TOL, ValidationError, op_norm
from .realization import (
    Colligation,
    NotSchurError,
    ResolventError,
    lurking_isometry_ball,
    lurking_isometry_disk,
    lurking_isometry_free,
)
from .tvsystems import NotContractiveError, tv_realize

EXIT_OK, EXIT_INPUT, EXIT_REJECT = 0, 1, 2


class InputError(Exception):
    pass


class Rejection(Exception):
    def __init__(self, message: str, residuals: dict | None = None):
        super().__init__(message)
        self.residuals = residuals or {}


@dataclass
class RunReport:
    command: str
    inputs_digest: str
    seed: int
    tolerance: float
    verdicts: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    error: str | None = None

    def as_dict(self) -> dict:
        out = {
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "verdicts": [{"name": k, "value": v} for k, v in self.verdicts.items()],
            "residuals": [{"name": k, "value": _real(v)} for k, v in self.residuals.items()],
            "notes": list(self.notes),
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return jsonio.dumps(self.as_dict())
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "name", "value"])
        for key in ("command", "inputs_digest", "seed", "tolerance"):
            w.writerow(["meta", key, getattr(self, key)])
        for k, v in self.verdicts.items():
            w.writerow(["verdict", k, str(v).lower()])
        for k, v in self.residuals.items():
            w.writerow(["residual", k, repr(_real(v))])
        for n in self.notes:
            w.writerow(["note", "", n])
        if self.error is not None:
            w.writerow(["error", "", self.error])
        return buf.getvalue()


def _real(v):
    return None if v is None else float(v)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="numerical tolerance (default 1e-9)")
    p.add_argument("--seed", type=int, default=0, help="seed for any randomized choice (default 0)")
    p.add_argument("--format", choices=("json", "csv"), default="json", help="report format on stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="schurkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    k = sub.add_parser("kernel-check", help="test a sampled kernel for positivity")
    k.add_argument("input", help="kernel sample, S-sample or CP kernel JSON file")
    k.add_argument("--setting", choices=("disk", "ball", "cp"), required=True)
    _common(k)

    r = sub.add_parser("realize", help="synthesize a colligation or time-varying system")
    r.add_argument("input", help="samples, series or window JSON file")
    r.add_argument("--setting", choices=("disk", "ball", "free", "tv"), required=True)
    r.add_argument("--degree", type=int, default=None, help="truncation degree N for the free setting")
    r.add_argument("--out", default=None, help="where to write the colligation or system JSON")
    _common(r)

    e = sub.add_parser("eval", help="evaluate a realized function")
    e.add_argument("function", help="colligation or series JSON file")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--points", help="points JSON file (point mode)")
    src.add_argument("--operators", help="operator tuple JSON file (operator mode)")
    e.add_argument("--mode", choices=("point", "operator"), default=None)
    e.add_argument("--degree", type=int, default=None, help="truncation for the series certificate")
    e.add_argument("--out", default=None, help="where to write the values JSON")
    _common(e)
    return parser


def _load(path: str) -> tuple[bytes, object]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return raw, json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: malformed JSON ({exc})") from exc


def _digest(*chunks: bytes) -> str:
    h = hashlib.sha256()
    for c in chunks:
        h.update(hashlib.sha256(c).digest())
    return h.hexdigest()


def _write(path: str | None, obj) -> None:
    if path is not None:
        Path(path).write_text(jsonio.dumps(obj))


# kernel-check

def _kernel_check(args, report: RunReport, doc) -> None:
    if args.setting == "cp":
        K = jsonio.decode_cp_kernel_sample(doc)
        rep = cp_positivity_check(K, args.tol)
        report.residuals["linearity_deviation"] = K.linearity_deviation()
    else:
        if not isinstance(doc, dict):
            raise jsonio.SchemaError("$", "expected an object")
        doc = dict(doc)
        setting = doc.setdefault("setting", args.setting)
        if setting != args.setting:
            raise jsonio.SchemaError("$.setting", f"file declares {setting!r} but --setting is {args.setting!r}")
        if "values" in doc:
            points, values = _decode_samples(doc, args.setting)
            K = debranges_kernel(values, points, args.setting)
            report.notes.append("kernel built from S samples")
        else:
            K = jsonio.decode_kernel_sample(doc)
        rep = positivity_check(K, args.tol)
    report.residuals["min_eigenvalue"] = rep.min_eigenvalue
    report.residuals["threshold"] = rep.tolerance_used
    report.verdicts["psd"] = bool(rep.is_psd)
    if not rep.is_psd:
        raise Rejection(f"kernel is not positive: min eigenvalue {rep.min_eigenvalue:.6e}")


# realize

def _decode_samples(doc, setting: str, path: str = "$"):
    points = jsonio.decode_points(jsonio._field(doc, "points", path), f"{path}.points", setting)
    raw = jsonio._field(doc, "values", path)
    if not isinstance(raw, list) or len(raw) != len(points):
        raise jsonio.SchemaError(f"{path}.values", f"expected {len(points)} values")
    values = [jsonio.decode_matrix(v, f"{path}.values[{i}]") if isinstance(v, list) and v and isinstance(v[0], list)
              else np.array([[jsonio.decode_complex(v, f"{path}.values[{i}]")]]) for i, v in enumerate(raw)]
    return points, values


def _realize(args, report: RunReport, doc) -> None:
    if args.setting in ("disk", "ball"):
        if not isinstance(doc, dict):
            raise jsonio.SchemaError("$", "expected an object")
        points, values = _decode_samples(doc, args.setting)
        if "heldout" in doc:
            held = _decode_samples(doc["heldout"], args.setting, "$.heldout")
        else:
            count = len(points) // 4
            rng = np.random.default_rng(args.seed)
            idx = set(int(i) for i in rng.choice(len(points), size=count, replace=False)) if count else set()
            held = ([points[i] for i in sorted(idx)], [values[i] for i in sorted(idx)])
            points = [z for i, z in enumerate(points) if i not in idx]
            values = [v for i, v in enumerate(values) if i not in idx]
            report.notes.append(f"held out {count} of {count + len(points)} samples (seeded)")
        synth = lurking_isometry_disk if args.setting == "disk" else lurking_isometry_ball
        res = synth(points, values, args.tol, heldout=held if held[0] else None)
        _record_realization(report, res)
        _write(args.out, jsonio.encode_colligation(res.colligation))
    elif args.setting == "free":
        S = jsonio.decode_series(doc)
        N = args.degree if args.degree is not None else S.degree
        if N < 0:
            raise InputError("--degree must be nonnegative")
        res = lurking_isometry_free(S, N, args.tol)
        _record_realization(report, res)
        _write(args.out, jsonio.encode_colligation(res.colligation))
    else:
        T = jsonio.decode_window(doc["T"] if isinstance(doc, dict) and "T" in doc else doc,
                                 "$.T" if isinstance(doc, dict) else "$")
        res = tv_realize(T, args.tol)
        report.residuals["reconstruction"] = res.residual
        report.residuals["unitarity_defect"] = res.system.unitarity_defect()
        report.verdicts["reconstructed"] = res.residual <= max(args.tol, 1e-8)
        report.verdicts["conservative"] = res.system.unitarity_defect() <= 1e-10
        report.notes.append("hankel ranks " + " ".join(str(r) for r in res.hankel_ranks))
        report.notes.extend(res.notes)
        _write(args.out, jsonio.encode_tv_system(res.system))


def _record_realization(report: RunReport, res) -> None:
    report.residuals["fit"] = res.fit_residual
    if res.heldout_residual is not None:
        report.residuals["heldout"] = res.heldout_residual
    report.residuals["gram_deviation"] = res.gram_deviation
    report.residuals["isometry_residual"] = res.isometry_residual
    if res.rank is not None:
        report.residuals["rank_smallest_kept"] = res.rank.smallest_kept
        report.residuals["rank_largest_dropped"] = res.rank.largest_dropped
        report.notes.append(f"kernel rank {res.rank.rank}, state dimension {res.colligation.n}")
    report.notes.append(f"flavor {res.colligation.flavor}")
    report.notes.extend(res.notes)
    report.verdicts["fit_within_tol"] = res.fit_residual <= max(report.tolerance, 1e-8)


# eval

def _load_function(doc):
    if isinstance(doc, dict) and "terms" in doc:
        return jsonio.decode_series(doc)
    return jsonio.decode_colligation(doc)


def _eval(args, report: RunReport, fdoc, adoc) -> None:
    f = _load_function(fdoc)
    mode = args.mode or ("operator" if args.operators else "point")
    if (mode == "operator") != bool(args.operators):
        raise InputError(f"--mode {mode} does not match the argument file given")
    if mode == "point":
        if isinstance(f, FormalSeries):
            raise InputError("point evaluation needs a colligation")
        pts_doc = adoc.get("points") if isinstance(adoc, dict) else adoc
        setting = "disk" if f.d == 1 else "ball"
        points = jsonio.decode_points(pts_doc, "$.points", setting)
        values = []
        for z in points:
            try:
                values.append(f(z))
            except DomainError as exc:
                raise Rejection(str(exc)) from exc
        report.residuals["max_norm"] = max((op_norm(v) for v in values), default=0.0)
        report.verdicts["evaluated"] = True
        _write(args.out, {"points": [jsonio.encode_point(z) for z in points],
                          "values": [jsonio.encode_matrix(v) for v in values]})
        return
    T = jsonio.decode_operator_tuple(adoc)
    tmode = "commuting" if T.commuting else "free"
    check = row_contraction_check(T)
    report.residuals["row_norm"] = check.row_norm
    report.residuals["commuting_residual"] = check.commuting_residual
    value = eval_at_row_tuple(f, T, tmode)
    if isinstance(f, Colligation):
        report.residuals["resolvent_agreement"] = float(np.max(np.abs(value - eval_colligation_resolvent(f, T))))
    vn = von_neumann_check(f, T, tmode, args.degree)
    report.residuals["norm"] = vn.norm
    report.verdicts["von_neumann"] = bool(vn.passed)
    _write(args.out, {"mode": tmode, "value": jsonio.encode_matrix(value)})
    if not vn.passed:
        raise Rejection(f"von Neumann inequality fails: |S(T)| = {vn.norm:.12g}")


def run(argv=None, stdout=None) -> int:
    stdout = stdout if stdout is not None else sys.stdout
    args = build_parser().parse_args(argv)
    report = RunReport(args.command, "", args.seed, args.tol)
    code = EXIT_OK
    try:
        if args.command == "eval":
            fraw, fdoc = _load(args.function)
            araw, adoc = _load(args.points or args.operators)
            report.inputs_digest = _digest(fraw, araw)
            _eval(args, report, fdoc, adoc)
        else:
            raw, doc = _load(args.input)
            report.inputs_digest = _digest(raw)
            (_kernel_check if args.command == "kernel-check" else _realize)(args, report, doc)
    except (InputError, jsonio.SchemaError, ValidationError) as exc:
        report.error = f"input error: {exc}"
        code = EXIT_INPUT
    except Rejection as exc:
        report.error = f"rejected: {exc}"
        code = EXIT_REJECT
    except (NotSchurError, NotContractiveError, StrictnessError, CommutativityError,
            UncertifiedError, ResolventError, DomainError) as exc:
        report.error = f"rejected: {exc}"
        for attr in ("deviation", "norm", "row_norm", "residual", "condition"):
            if hasattr(exc, attr):
                report.residuals[attr] = getattr(exc, attr)
        code = EXIT_REJECT
    stdout.write(report.render(args.format))
    return code


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
