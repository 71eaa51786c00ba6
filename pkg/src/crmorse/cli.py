"""Signature sets of Hermitian pencils and Morse-bound coefficients on CR manifolds.

    crmorse analyze-point --input point.json --q 0 [--oracle]
    crmorse analyze-manifold --spec heisenberg --lambda -1,1 --mu 1,1 --q-all [--k 100]
    crmorse analyze-manifold --spec grauert-tube --lambda -1,1 --mu 1,1 --samples 4096
    crmorse verify --suite all --seed 42

Reports are JSON on stdout (or ``--output``).  Errors go to stderr as a JSON
object ``{"error", "message", "exit_code"}``; exit codes are 0 ok,
1 verification failure, 2 usage or parse error, 3 math-domain error,
4 inconsistent data.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

from . import __version__
from .bounds import EXCLUDED, morse_report, global_integral
from .documents import (
    digest,
    dumps,
    read_point_document,
    read_spec,
    write_sample_table,
    write_spec,
)
from .errors import CRMorseError, InputError
from .geometry import GRAUERT_METRIC, grauert_tube_spec, heisenberg_spec, y_condition
from .oracle import grid_intervals, grid_signature_scan, mc_integral
from .pencil import (
    INERTIA_RTOL,
    LEVI_DEGENERACY_RTOL,
    ROOT_MERGE_RTOL,
    integrate_abs_det,
    signature_set,
)
from . import verify as verify_mod

ORACLE_RTOL = 1e-3
HEISENBERG_DEFAULT_SAMPLES = 16
GRAUERT_DEFAULT_SAMPLES = 4096


def _tool() -> dict:
    return {"name": "crmorse", "version": __version__}


def _emit(report: dict, output: str | None) -> None:
    text = dumps(report)
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _int_list(raw: str, flag: str) -> list[int]:
    try:
        return [int(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{flag}: expected comma-separated integers, got {raw!r}") from None


# analyze-point


def cmd_analyze_point(args) -> int:
    t0 = time.perf_counter()
    doc, raw = read_point_document(args.input)
    p = doc.pencil()
    n = p.dim + 1 if args.n is None else args.n
    if n != p.dim + 1:
        raise InputError(f"--n must equal dim + 1 = {p.dim + 1}, got {n}")
    n_minus, n_plus = p.levi_signature
    sset = signature_set(p, args.q)
    integral = integrate_abs_det(p, sset)
    report = {
        "tool": _tool(),
        "command": "analyze-point",
        "input_digest": digest(raw),
        "label": doc.label,
        "dim": p.dim,
        "n": n,
        "q": args.q,
        "levi_signature": {"n_minus": n_minus, "n_plus": n_plus},
        "y_condition": y_condition([-1] * n_minus + [1] * n_plus, args.q),
        "status": "empty set" if sset.is_empty else "nonempty",
        "signature_set": {
            "intervals": [[lo, hi] for lo, hi in sset.intervals],
            "roots": list(sset.roots),
            "bound": sset.bound,
        },
        "integral": integral,
        "local_density": integral / (2 * math.pi) ** n,
        "tolerances": {
            "inertia_rtol": INERTIA_RTOL,
            "root_merge_rtol": ROOT_MERGE_RTOL,
            "levi_degeneracy_rtol": LEVI_DEGENERACY_RTOL,
            "integral": "exact polynomial integration per interval; rounding error only",
        },
        "oracle_comparisons": [],
        "provenance": {"density": "(2 pi)^-n * int over the signature set of |det(M + sL)| ds"},
    }
    if args.oracle:
        scan = grid_signature_scan(p.M, p.L, args.q, args.grid_points)
        diff = abs(scan.riemann_integral - integral)
        rel = 0.0 if diff == 0 else diff / max(abs(integral), abs(scan.riemann_integral))
        report["oracle_comparisons"].append(
            {
                "method": "grid_signature_scan",
                "n_points": args.grid_points,
                "step": scan.step,
                "riemann_integral": scan.riemann_integral,
                "intervals": [list(iv) for iv in grid_intervals(scan, args.q)],
                "relative_difference": rel,
                "tolerance": ORACLE_RTOL,
                "pass": rel <= ORACLE_RTOL,
            }
        )
    report["wall_time"] = time.perf_counter() - t0
    _emit(report, args.output)
    return 0


# analyze-manifold


def _build_spec(args):
    """Return ``(spec, input digest, refinement builder or None)``."""
    if args.spec == "file":
        if not args.spec_file:
            raise InputError("--spec file requires --spec-file PATH")
        spec, raw = read_spec(args.spec_file)
        return spec, digest(raw), None
    if args.lam is None or args.mu is None:
        raise InputError(f"--spec {args.spec} requires --lambda and --mu")
    lam = _int_list(args.lam, "--lambda")
    mu = _int_list(args.mu, "--mu")
    canonical = json.dumps({"spec": args.spec, "lambda": lam, "mu": mu, "samples": args.samples}, sort_keys=True)
    key = digest(canonical.encode())
    if args.spec == "heisenberg":
        n = args.samples or HEISENBERG_DEFAULT_SAMPLES
        return heisenberg_spec(lam, mu, n), key, None
    spec = grauert_tube_spec(lam, mu, n_samples=args.samples or GRAUERT_DEFAULT_SAMPLES)
    m = int(spec.metadata["points_per_axis"])

    def coarse():
        return grauert_tube_spec(lam, mu, points_per_axis=max(1, m // 2))

    return spec, key, coarse


def _value(v):
    return v if v == EXCLUDED else float(v)


def cmd_analyze_manifold(args) -> int:
    t0 = time.perf_counter()
    spec, key, coarse = _build_spec(args)
    if args.write_spec:
        write_spec(spec, args.write_spec)
    if args.q_all or args.q is None:
        q_range = list(range(spec.n))
    else:
        if not 0 <= args.q < spec.n:
            raise InputError(f"--q must lie in [0, {spec.n - 1}], got {args.q}")
        q_range = [args.q]
    per_sample: dict = {}
    rep = morse_report(spec, q_range, per_sample=per_sample)

    results = {}
    for q in q_range:
        entry = {
            "y_condition": rep.y_status[q],
            "integral": _value(rep.per_q_integral[q]),
            "weak_coefficient": _value(rep.per_q_weak_coeff[q]),
            "weyl_coefficient": _value(rep.per_q_weak_coeff[q]),
            "strong_lower": _value(rep.strong_lower[q]),
            "strong_upper": _value(rep.strong_upper[q]),
        }
        if args.k is not None:
            entry["bound_at_k"] = _value(rep.bound_at(args.k)[q])
        results[str(q)] = entry

    report = {
        "tool": _tool(),
        "command": "analyze-manifold",
        "input_digest": key,
        "spec": {
            "name": spec.name,
            "n": spec.n,
            "samples": len(spec.samples),
            "total_volume": spec.total_volume,
        },
        "k": args.k,
        "results": results,
        "tolerances": {
            "per_sample": "exact polynomial integration; rounding error only",
            "quadrature": "lattice midpoint rule over the fundamental domain; see refinement",
            "reduction": "fixed-order pairwise summation, independent of CRMORSE_THREADS",
        },
        "oracle_comparisons": [],
        "provenance": dict(rep.metadata),
    }
    if spec.name == "grauert-tube":
        report["provenance"].setdefault("metric", GRAUERT_METRIC)
        report["provenance"]["values"] = "metric-relative"

    if coarse is not None:
        cspec = coarse()
        refinement = {
            "points_per_axis": [int(cspec.metadata["points_per_axis"]), int(spec.metadata["points_per_axis"])],
            "samples": [len(cspec.samples), len(spec.samples)],
            "integrals": {},
            "relative_change": {},
        }
        for q in q_range:
            fine = rep.per_q_integral[q]
            if fine == EXCLUDED:
                continue
            c = global_integral(cspec, q)
            refinement["integrals"][str(q)] = [c, fine]
            refinement["relative_change"][str(q)] = 0.0 if c == fine else abs(fine - c) / max(abs(fine), abs(c))
        report["refinement"] = refinement

    if args.mc:
        for q in q_range:
            lattice = rep.per_q_integral[q]
            if lattice == EXCLUDED:
                continue
            est, err = mc_integral(spec, q, args.mc, args.seed)
            z = 0.0 if est == lattice else (abs(est - lattice) / err if err > 0 else math.inf)
            report["oracle_comparisons"].append(
                {
                    "method": "mc_integral",
                    "q": q,
                    "draws": args.mc,
                    "seed": args.seed,
                    "lattice_samples": len(spec.samples),
                    "estimate": est,
                    "stderr": err,
                    "lattice": lattice,
                    "z_score": z,
                    "tolerance": "3 stderr",
                    "pass": z <= 3.0,
                }
            )

    if args.csv:
        write_sample_table(args.csv, spec, per_sample)
    report["wall_time"] = time.perf_counter() - t0
    _emit(report, args.output)
    return 0


# verify


def cmd_verify(args) -> int:
    names = {n.split("/")[1] for n in verify_mod.property_names(args.suite)}
    if args.property is not None and args.property not in names:
        raise InputError(f"--property: {args.property!r} is not in suite {args.suite!r}")
    first_failure = None
    for result in verify_mod.run_suite(args.suite, args.seed, args.property):
        print(result.line(), flush=True)
        if not result.passed and first_failure is None:
            first_failure = result
    if first_failure is not None:
        print(
            "reproduce: crmorse verify "
            f"--suite {first_failure.suite} --seed {args.seed} --property {first_failure.name}"
        )
        return 1
    return 0


# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crmorse", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"crmorse {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    pt = sub.add_parser("analyze-point", help="signature set and density at one point")
    pt.add_argument("--input", required=True, help="point document (JSON)")
    pt.add_argument("--q", type=int, required=True)
    pt.add_argument("--n", type=int, help="manifold parameter, dim X = 2n - 1 (default dim + 1)")
    pt.add_argument("--oracle", action="store_true", help="append a grid-scan comparison")
    pt.add_argument("--grid-points", type=int, default=100_000)
    pt.add_argument("--output", help="write the report here instead of stdout")
    pt.set_defaults(func=cmd_analyze_point)

    mf = sub.add_parser("analyze-manifold", help="global Morse-bound coefficients")
    mf.add_argument("--spec", required=True, choices=["heisenberg", "grauert-tube", "file"])
    mf.add_argument("--spec-file", help="manifold spec JSON for --spec file")
    mf.add_argument("--lambda", dest="lam", help="Levi eigenvalues, e.g. -1,1")
    mf.add_argument("--mu", help="curvature eigenvalues, e.g. 1,1")
    mf.add_argument("--q-all", action="store_true", help="report every degree (default)")
    mf.add_argument("--q", type=int, help="report one degree")
    mf.add_argument("--samples", type=int, help="sample count (lattice for grauert-tube)")
    mf.add_argument("--k", type=float, help="also report coefficient * k^n")
    mf.add_argument("--mc", type=int, metavar="DRAWS", help="Monte Carlo cross-check with DRAWS draws")
    mf.add_argument("--seed", type=int, default=0, help="seed for --mc")
    mf.add_argument("--csv", help="write the per-sample table here")
    mf.add_argument("--write-spec", help="save the sampled manifold spec as JSON")
    mf.add_argument("--output", help="write the report here instead of stdout")
    mf.set_defaults(func=cmd_analyze_manifold)

    vf = sub.add_parser("verify", help="run seeded property suites")
    vf.add_argument("--suite", required=True, choices=["pencil", "model", "geometry", "all"])
    vf.add_argument("--seed", type=int, default=0)
    vf.add_argument("--property", help="run a single property of the suite")
    vf.set_defaults(func=cmd_verify)
    return parser


def _join_list_flags(argv: list[str]) -> list[str]:
    # argparse reads "-1,1" as an option; glue it to its flag instead
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--lambda", "--mu"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_list_flags(argv))
    try:
        return args.func(args)
    except CRMorseError as exc:
        _error(type(exc).__name__, str(exc), exc.exit_code)
        return exc.exit_code
    except ValueError as exc:
        _error("InvalidArgument", str(exc), 2)
        return 2


def _error(name: str, message: str, code: int) -> None:
    sys.stderr.write(json.dumps({"error": name, "message": message, "exit_code": code}) + "\n")


if __name__ == "__main__":
    sys.exit(main())
