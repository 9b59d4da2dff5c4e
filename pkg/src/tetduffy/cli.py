"""Command-line front end: values, convergence tables and self-tests.

    tetduffy value pair.json --formulation efie --k 10 --n 51
    tetduffy converge pair.json --n-list 5,10,15,25,51 --out sweep.csv
    tetduffy selftest --level fast
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import tables
from .cubature import converge_sweep, tensor_integrate
from .errors import NotEnoughCommonVertices, SingularityTooStrong, TetDuffyError
from .formulations import FormulationSpec, Kind, build
from .geometry import Tetrahedron, canonicalize_pair
from .kernels import Kernel, first_integral
from .oracle import brute_6d, brute_first_integral
from .polyalg import Polynomial
from .reduction import build_reduced

EXIT_FAIL = 1
EXIT_PARSE = 2
EXIT_NO_CONTACT = 3
EXIT_SINGULAR = 4

FORMULATIONS = ("aim", "efie", "mfie", "one", "power")
DEFAULT_N = 25
MAX_BRUTE_ORDER = 24


class InputError(ValueError):
    pass


def fmt(x: float) -> float:
    """Round to 15 significant digits; repr of the result prints at most 15."""
    return float(f"{x:.15g}")


def _vec3(value, name) -> tuple[float, float, float]:
    if isinstance(value, str):
        value = value.split(",")
    try:
        out = tuple(float(c) for c in value)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: expected three numbers") from exc
    if len(out) != 3:
        raise InputError(f"{name}: expected three numbers")
    return out


def _tet(value, name) -> Tetrahedron:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: expected 4 vertices of 3 coordinates") from exc
    if arr.shape != (4, 3):
        raise InputError(f"{name}: expected 4 vertices of 3 coordinates, got shape {arr.shape}")
    try:
        return Tetrahedron(arr)
    except ValueError as exc:
        raise InputError(f"{name}: {exc}") from exc


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise InputError(f"cannot parse wavenumber {text!r}") from exc


class Job:
    """One tetrahedron pair with its formulation, after flags override the file."""

    def __init__(self, record: dict, args, pair_id: str):
        if not isinstance(record, dict):
            raise InputError("each pair must be a JSON object")
        self.pair_id = str(record.get("pair_id", pair_id))
        self.tet_a = _tet(record.get("tet_a"), "tet_a")
        self.tet_b = _tet(record.get("tet_b"), "tet_b")
        form = args.formulation or record.get("formulation")
        if form not in FORMULATIONS:
            raise InputError(f"formulation must be one of {', '.join(FORMULATIONS)}")
        self.formulation = form
        if args.k is not None:
            self.k = _complex(args.k)
        else:
            try:
                self.k = complex(float(record.get("k_re", 0.0)), float(record.get("k_im", 0.0)))
            except (TypeError, ValueError) as exc:
                raise InputError("k_re, k_im must be numbers") from exc
        self.q_a = _vec3(args.q_a if args.q_a is not None else record.get("q_a", (0, 0, 0)), "q_a")
        self.q_b = _vec3(args.q_b if args.q_b is not None else record.get("q_b", (0, 0, 0)), "q_b")
        try:
            self.power = int(record.get("power_exponent", 0))
        except (TypeError, ValueError) as exc:
            raise InputError("power_exponent must be an integer") from exc

    def integrand(self) -> tuple[Polynomial, Kernel]:
        spec = FormulationSpec(Kind(self.formulation), self.k, self.q_a, self.q_b, self.power)
        return build(spec)

    def header(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "formulation": self.formulation,
            "k": [fmt(self.k.real), fmt(self.k.imag)],
            "q_a": [fmt(c) for c in self.q_a],
            "q_b": [fmt(c) for c in self.q_b],
        }


def load_jobs(path: str, args) -> list[Job]:
    try:
        text = Path(path).read_text(encoding="utf-8") if path != "-" else sys.stdin.read()
        data = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    stem = Path(path).stem if path != "-" else "stdin"
    if isinstance(data, list):
        if not data:
            raise InputError("input list is empty")
        return [Job(rec, args, f"{stem}[{i}]") for i, rec in enumerate(data)]
    return [Job(data, args, stem)]


def _shared_count(ta: Tetrahedron, tb: Tetrahedron) -> int:
    scale = max(ta.max_edge(), tb.max_edge())
    tol = 1e-12 * scale
    return sum(
        any(np.max(np.abs(a - b)) <= tol for b in tb.vertices) for a in ta.vertices
    )


def run_value(job: Job, n: int, args) -> dict:
    P, kern = job.integrand()
    t0 = time.perf_counter()
    try:
        pair = canonicalize_pair(job.tet_a, job.tet_b)
    except NotEnoughCommonVertices:
        if not args.allow_nonsingular:
            raise
        order = min(n, MAX_BRUTE_ORDER)
        t1 = time.perf_counter()
        value = brute_6d((job.tet_a, job.tet_b), P, kern, order)
        t2 = time.perf_counter()
        return _record(job, _shared_count(job.tet_a, job.tet_b), order, value, t1 - t0, t2 - t1, args)
    ri = build_reduced(pair, P, kern, merge_identical=args.merge_identical_subdomains)
    t1 = time.perf_counter()
    value = tensor_integrate(ri, n)
    t2 = time.perf_counter()
    return _record(job, pair.n_cv, n, value, t1 - t0, t2 - t1, args)


def _record(job, n_cv, n, value, build_s, eval_s, args) -> dict:
    out = job.header()
    out.update(n_cv=int(n_cv), n_points=int(n), value_re=fmt(value.real), value_im=fmt(value.imag))
    keep = not args.no_timings
    out["build_ms"] = fmt(1e3 * build_s) if keep else None
    out["eval_ms"] = fmt(1e3 * eval_s) if keep else None
    order = ["pair_id", "n_cv", "formulation", "k", "q_a", "q_b", "n_points",
             "value_re", "value_im", "build_ms", "eval_ms"]
    return {key: out[key] for key in order}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def cmd_value(args) -> int:
    jobs = load_jobs(args.input, args)
    results = [run_value(job, args.n, args) for job in jobs]
    payload = results[0] if len(results) == 1 else results
    _emit(json.dumps(payload, indent=2) + "\n", args.out)
    return 0


def parse_n_list(text: str) -> list[int]:
    try:
        ns = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse --n-list {text!r}") from exc
    if not ns or sorted(set(ns)) != ns or ns[0] < 2:
        raise InputError("--n-list must be ascending distinct integers >= 2")
    return ns


def cmd_converge(args) -> int:
    ns = parse_n_list(args.n_list)
    jobs = load_jobs(args.input, args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    multi = len(jobs) > 1
    writer.writerow((["pair_id"] if multi else []) +
                    ["n", "total_samples", "value_re", "value_im", "rel_err_vs_max_n"])
    for job in jobs:
        P, kern = job.integrand()
        pair = canonicalize_pair(job.tet_a, job.tet_b)
        ri = build_reduced(pair, P, kern, merge_identical=args.merge_identical_subdomains)
        for row in converge_sweep(ri, ns):
            cells = [row.n, row.total_samples, repr(fmt(row.value.real)),
                     repr(fmt(row.value.imag)), repr(fmt(row.rel_delta))]
            writer.writerow(([job.pair_id] if multi else []) + cells)
    _emit(buf.getvalue(), args.out)
    return 0


# -- self-test ---------------------------------------------------------------

TABLE_PAIRS = {
    "AA": ([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],) * 2,
    "AB": ([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
           [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0.3, 0.4, -1.03]]),
    "AC": ([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]],
           [[0, 0, 0], [0, 0, 1], [-0.04, -1.09, -0.05], [0.3, -0.4, -1.09]]),
}


def _check(name: str, ok: bool, detail: str, lines: list[str]) -> bool:
    lines.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return ok


def selftest(level: str = "fast") -> tuple[bool, list[str]]:
    full = level == "full"
    lines: list[str] = []
    ok = True

    rep = tables.verify_partition(samples=10**6 if full else 10**5, seed=0)
    ok &= _check("partition", rep.ok, str(rep), lines)
    measure = tables.exact_total_measure()
    ok &= _check("measure", abs(measure * 36 - 1) < 1e-13, f"sum of subdomain measures {measure!r}", lines)

    worst, bad = 0.0, []
    for n_cv in (4, 3, 2):
        for d in range(1, tables.NSUB + 1):
            r = tables.verify_duffy(n_cv, d, probes=100)
            worst = max(worst, r.max_jac_rel_err)
            if not r.ok or abs(tables.region_volume(n_cv, d) - tables.duffy_volume(n_cv, d)) > 1e-13:
                bad.append(f"(n_cv={n_cv}, d={d})")
    ok &= _check("duffy maps", not bad,
                 f"54 maps, worst jacobian rel err {worst:.2e}" + (f", failing {' '.join(bad)}" if bad else ""),
                 lines)

    rng = np.random.default_rng(1)
    cases = 50 if full else 12
    worst = 0.0
    for _ in range(cases):
        k = float(rng.uniform(0.1, 30.0))
        X = float(rng.uniform(0.01, 2.0))
        kern = Kernel.helmholtz(k) if rng.random() < 0.5 else Kernel.mfie(k)
        p = int(rng.integers(kern.singularity_order, kern.singularity_order + 8))
        exact = first_integral(kern, p, X)
        ref = brute_first_integral(kern, p, X)
        worst = max(worst, abs(exact - ref) / abs(ref))
    ok &= _check("first integrals", worst <= 1e-12, f"{cases} cases, worst rel err {worst:.2e}", lines)

    for name, (a, b) in TABLE_PAIRS.items():
        ta, tb = Tetrahedron(a), Tetrahedron(b)
        pair = canonicalize_pair(ta, tb)
        ri = build_reduced(pair, Polynomial.const(1.0), Kernel.one())
        ref = ta.volume * tb.volume
        errs = [abs(tensor_integrate(ri, n, threads=1) / ref - 1) for n in ((3, 5, 9) if full else (3,))]
        ok &= _check(f"volume product {name}", max(errs) <= 1e-13,
                     f"n_cv={pair.n_cv}, rel err {max(errs):.2e}", lines)
    return bool(ok), lines


def cmd_selftest(args) -> int:
    if args.tamper:
        try:
            table, d, col, expr = args.tamper.split(":", 3)
            ctx = tables.tampered(table, int(d), int(col), expr)
        except (ValueError, KeyError) as exc:
            raise InputError(f"bad --tamper value {args.tamper!r}") from exc
        with ctx:
            passed, lines = selftest(args.level)
    else:
        passed, lines = selftest(args.level)
    sys.stdout.write("\n".join(lines) + "\n")
    sys.stdout.write(("selftest passed" if passed else "selftest FAILED") + "\n")
    return 0 if passed else EXIT_FAIL


# -- argument parsing ----------------------------------------------------------

def _pair_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="JSON file with one pair object or a list of them ('-' for stdin)")
    p.add_argument("--formulation", choices=FORMULATIONS)
    p.add_argument("--k", help="wavenumber, e.g. 10 or 10+0.5j (overrides k_re/k_im)")
    p.add_argument("--q-a", dest="q_a", help="SWG vertex Q as x,y,z")
    p.add_argument("--q-b", dest="q_b", help="SWG vertex Q' as x,y,z")
    p.add_argument("--merge-identical-subdomains", action="store_true",
                   help="sum subdomains with identical reduced polynomials once")
    p.add_argument("--out", help="write output here instead of stdout")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tetduffy",
                                     description="Singular tetrahedron-product integrals by Taylor-Duffy reduction.")
    sub = parser.add_subparsers(dest="command", required=True)

    pv = sub.add_parser("value", help="integral for each pair at one cubature order")
    _pair_options(pv)
    pv.add_argument("--n", type=int, default=DEFAULT_N, help=f"CC points per dimension (default {DEFAULT_N})")
    pv.add_argument("--allow-nonsingular", action="store_true",
                    help="pairs sharing fewer than 2 vertices go to 6-D brute-force cubature")
    pv.add_argument("--no-timings", action="store_true",
                    help="emit null build_ms/eval_ms so the output is reproducible byte for byte")
    pv.set_defaults(func=cmd_value)

    pc = sub.add_parser("converge", help="convergence table over several cubature orders (CSV)")
    _pair_options(pc)
    pc.add_argument("--n-list", default="5,10,15,20,25,51")
    pc.set_defaults(func=cmd_converge)

    ps = sub.add_parser("selftest", help="table, Duffy map, first-integral and volume checks")
    ps.add_argument("--level", choices=("fast", "full"), default="fast")
    ps.add_argument("--tamper", help=argparse.SUPPRESS)
    ps.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", DEFAULT_N) < 2:
        parser.error("--n must be >= 2")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"tetduffy: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NotEnoughCommonVertices as exc:
        print(f"tetduffy: {exc} (use --allow-nonsingular for brute-force cubature)", file=sys.stderr)
        return EXIT_NO_CONTACT
    except SingularityTooStrong as exc:
        print(f"tetduffy: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (TetDuffyError, ValueError) as exc:
        print(f"tetduffy: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
