"""Command-line front end: sweeps, table reproductions, censuses and plot data.

Exit codes: 0 success, 1 computational failure, 2 usage error.
Machine-readable numbers use 17 significant digits; human tables use 4.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import codes as codes_mod
from .channels import loss_channel
from .errors import QecLabError
from .fock import annihilation

log = logging.getLogger("qec_lab")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FAMILIES = ("bin", "sab", "cat", "sac", "sqrt17")
RECOVERIES = ("none", "one_level", "two_level", "optimal")


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return format(float(x), ".17g")


def hfmt(x) -> str:
    return format(float(x), ".4g")


def parse_list(text, cast=float) -> list:
    """``"0.1,0.25"`` or ``"1:4"`` (inclusive integer range) into a list."""
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [cast(v) for v in text]
    text = str(text).strip()
    if not text:
        return []
    if ":" in text and cast is int:
        lo, hi = (int(v) for v in text.split(":"))
        if hi < lo:
            raise UsageError(f"empty range {text!r}")
        return list(range(lo, hi + 1))
    return [cast(v) for v in text.split(",") if v.strip()]


def resolve_seed(seed):
    if seed is not None:
        return int(seed)
    env = os.environ.get("QEC_LAB_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"QEC_LAB_SEED must be an integer, got {env!r}") from None
    return 0


def make_code(family, N=None, S=None, alpha=None, D=None):
    if family == "bin":
        return codes_mod.binomial_code(N, S, D)
    if family == "sab":
        return codes_mod.sab_code(N, S, D)
    if family == "cat":
        return codes_mod.cat_code(alpha, S, D)
    if family == "sac":
        return codes_mod.sac_code(alpha, S, D)
    if family == "sqrt17":
        return codes_mod.sqrt17_code(D or 6)
    raise UsageError(f"unknown family {family!r}")


def build_recovery(kind, code, S, gamma, channel):
    """Recovery with decoding folded in (D -> 2), or None for ``kind == "none"``."""
    from .channels import compose
    from .recovery import decoder, one_level_recovery, solve_optimal_recovery, two_level_recovery

    if kind == "optimal":
        return solve_optimal_recovery(code, channel).recovery
    if kind == "one_level":
        return compose(decoder(code), one_level_recovery(code, S, gamma))
    if kind == "two_level":
        return compose(decoder(code), two_level_recovery(code, S, gamma))
    if kind == "none":
        return decoder(code)
    raise UsageError(f"unknown recovery {kind!r}")


# ---- sweep ----------------------------------------------------------------

SWEEP_COLUMNS = ["family", "N", "S", "alpha", "gamma", "recovery", "D",
                 "fidelity", "infidelity", "log10_infidelity", "status"]


def _sweep_point(point):
    family, N, S, alpha, gamma, kind, D = point
    from .metrics import pipeline_fidelity

    row = {"family": family, "N": "" if N is None else N, "S": S,
           "alpha": "" if alpha is None else fmt(alpha), "gamma": fmt(gamma),
           "recovery": kind, "D": "", "fidelity": "", "infidelity": "",
           "log10_infidelity": "", "status": "ok"}
    try:
        code = make_code(family, N, S, alpha, D)
        row["D"] = code.dim
        channel = loss_channel(gamma, code.dim)
        rec = build_recovery(kind, code, S, gamma, channel)
        f = pipeline_fidelity(code, channel, rec)
        inf = max(1.0 - f, 0.0)
        row.update(fidelity=fmt(f), infidelity=fmt(inf),
                   log10_infidelity=fmt(math.log10(inf)) if inf > 0 else "-inf")
    except (QecLabError, np.linalg.LinAlgError) as exc:
        row["status"] = "failed"
        log.warning("sweep point %s failed: %s", point, exc)
    return row


def sweep_points(family, N_list, S_list, alpha_list, gamma_list, recovery, D=None):
    if not gamma_list:
        raise UsageError("gamma list is empty")
    for g in gamma_list:
        if not 0 < g < 1:
            raise UsageError(f"gamma must lie in (0, 1), got {g}")
    if not S_list:
        raise UsageError("S range is empty")
    pts = []
    for g in gamma_list:
        if family in ("cat", "sac"):
            if not alpha_list:
                raise UsageError("alpha list is empty")
            for a in alpha_list:
                for S in S_list:
                    pts.append((family, None, S, a, g, recovery, D))
        else:
            if not N_list:
                raise UsageError("N range is empty")
            for N in N_list:
                for S in S_list:
                    pts.append((family, N, S, None, g, recovery, D))
    return pts


def run_sweep(points, jobs=1):
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_sweep_point, points))
    return [_sweep_point(p) for p in points]


def write_rows(path, columns, rows):
    with open(path, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        wr.writeheader()
        for r in rows:
            wr.writerow(r)


def _with_max(values, top):
    if top is None:
        return values
    lo = values[0] if values else 1
    return list(range(lo, top + 1))


def cmd_sweep(a):
    pts = sweep_points(a.family, _with_max(parse_list(a.N, int), a.nmax), _with_max(parse_list(a.S, int), a.smax),
                       parse_list(a.alpha), parse_list(a.gamma), a.recovery, a.D)
    rows = run_sweep(pts, a.jobs)
    write_rows(a.out, SWEEP_COLUMNS, rows)
    failed = sum(r["status"] != "ok" for r in rows)
    print(f"{len(rows)} points written to {a.out}; {failed} failed")
    return EXIT_OK


# ---- table1 ---------------------------------------------------------------

def cmd_table1(a):
    from .metrics import wigner_grid, write_wigner_csv
    from .optimizer import OptimizationConfig, biconvex
    from .recovery import solve_optimal_recovery
    from .optimizer import noise_channel

    Kts = parse_list(a.Kt)
    if not Kts:
        raise UsageError("Kt list is empty")
    os.makedirs(a.out, exist_ok=True)
    seed = resolve_seed(a.seed)
    rows, doc = [], []
    for Kt in Kts:
        entry = {"Kt": Kt}
        for label, real in (("RCQC", True), ("CCQC", False)):
            cfg = OptimizationConfig(D=a.D, gamma=a.gamma, Kt=Kt, nbar=a.nbar, real_restricted=real,
                                     restarts=a.restarts, seed=seed, max_rounds=a.max_rounds)
            res = biconvex(cfg, checkpoint_dir=os.path.join(a.out, "checkpoints"), jobs=a.jobs)
            entry[label] = json.loads(res.to_json())
            rows.append({"code": label, "Kt": fmt(Kt), "infidelity": fmt(res.infidelity)})
            q, p, W = wigner_grid(0.5 * res.code.projector())
            write_wigner_csv(os.path.join(a.out, f"wigner_{label}_Kt{Kt:g}.csv"), q, p, W)
        b = codes_mod.binomial_code(2, 2, a.D)
        fb = solve_optimal_recovery(b, noise_channel(a.gamma, Kt, a.D)).fidelity
        entry["bin(2,2)"] = {"fidelity": fb, "infidelity": 1 - fb}
        rows.append({"code": "bin(2,2)", "Kt": fmt(Kt), "infidelity": fmt(1 - fb)})
        doc.append(entry)
    write_rows(os.path.join(a.out, "table1.csv"), ["code", "Kt", "infidelity"], rows)
    with open(os.path.join(a.out, "table1.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
    print(f"{'code':>9} " + " ".join(f"{'Kt=' + format(k, 'g'):>10}" for k in Kts))
    for label in ("RCQC", "CCQC", "bin(2,2)"):
        vals = [r["infidelity"] for r in rows if r["code"] == label]
        print(f"{label:>9} " + " ".join(f"{hfmt(v):>10}" for v in vals))
    return EXIT_OK


# ---- kraus ----------------------------------------------------------------

def cmd_kraus(a):
    from .metrics import effective_qubit_channel
    from .recovery import solve_optimal_recovery

    families = [a.family] if a.family else ["bin", "sab"]
    for fam in families:
        code = make_code(fam, a.N, a.S, D=a.D)
        ch = loss_channel(a.gamma, code.dim)
        eff = effective_qubit_channel(code, ch, solve_optimal_recovery(code, ch).recovery)
        print(f"{fam}({a.N},{a.S}) gamma={hfmt(a.gamma)} sum p = {hfmt(eff.total_probability)}")
        for i, (K, p) in enumerate(zip(eff.kraus[:4], eff.probs[:4]), start=1):
            print(f"  K{i}  p = {hfmt(p)}")
            for row in K:
                print("    " + "  ".join(f"{hfmt(z.real):>10}{'+' if z.imag >= 0 else '-'}{hfmt(abs(z.imag))}j"
                                      for z in row))
    return EXIT_OK


# ---- qec-check ------------------------------------------------------------

def cmd_qec_check(a):
    from .metrics import kl_check, qec_matrix

    code = make_code(a.family, a.N, a.S, a.alpha, a.D)
    k_max = a.k_max if a.k_max is not None else (1 if a.family == "sqrt17" else max((a.S or 1) - 1, 0))
    if a.model == "kraus":
        ops = loss_channel(a.gamma, code.dim, k_max).kraus
    else:
        A = annihilation(code.dim)
        ops = np.array([np.linalg.matrix_power(A, k) for k in range(k_max + 1)])
    ok, viol = kl_check(qec_matrix(code, ops, k_max), tol=a.tol)
    print(json.dumps({"code": code.label, "model": a.model, "gamma": a.gamma, "k_max": k_max,
                      "pass": bool(ok), "violation": float(fmt(viol))}))
    return EXIT_OK


# ---- qubit / gkp ----------------------------------------------------------

def cmd_qubit(a):
    from .qubit_codes import CODE_NAMES, build_code, census, write_census_csv

    names = CODE_NAMES if a.code == "all" else [a.code]
    alphabets = [a.alphabet] if a.alphabet != "all" else ["X-only", "XY-hybrid", "Z-only", "damping"]
    rows = []
    for name in names:
        code = build_code(name)
        for alph in alphabets:
            for w in range(1, a.max_weight + 1):
                r = census(code, w, alph)
                r["code"] = name
                rows.append(r)
                print(f"{name:>7} {alph:>9} w={w} total={r['total']} undetectable={r['undetectable']}")
    if a.out:
        write_census_csv(a.out, rows, a.json)
    return EXIT_OK


def cmd_gkp(a):
    from .gkp import gkp_report

    rep = gkp_report()
    print(json.dumps({k: (float(fmt(v)) if isinstance(v, float) else v) for k, v in rep.items()}, indent=2))
    return EXIT_OK


# ---- wigner / okb ---------------------------------------------------------

def cmd_wigner(a):
    from .metrics import wigner_grid, write_wigner_csv

    code = make_code(a.family, a.N, a.S, a.alpha, a.D)
    q, p, W = wigner_grid(0.5 * code.projector(), (-a.extent, a.extent), (-a.extent, a.extent), a.points)
    write_wigner_csv(a.out, q, p, W)
    print(f"Wigner grid of {code.label} ({a.points}x{a.points}) written to {a.out}")
    return EXIT_OK


def cmd_okb(a):
    from .optimizer import okb_scan

    K_grid = parse_list(a.K)
    if not K_grid:
        K_grid = list(np.linspace(0.0, 2 * np.pi, 73))
    best, fids = okb_scan(a.N, a.S, a.gamma, K_grid, a.D)
    print("K,fidelity")
    for K, f in zip(K_grid, fids):
        print(f"{fmt(K)},{fmt(f)}")
    print(f"best K = {hfmt(best)}  1-F = {hfmt(1 - max(fids))}")
    return EXIT_OK


# ---- parser ---------------------------------------------------------------

COMMANDS = {
    "sweep": cmd_sweep, "table1": cmd_table1, "kraus": cmd_kraus, "qec-check": cmd_qec_check,
    "qubit": cmd_qubit, "gkp": cmd_gkp, "wigner": cmd_wigner, "okb": cmd_okb,
}

DEFAULTS = {
    "sweep": dict(family="bin", N="1:6", S="1:6", nmax=None, smax=None, alpha="", gamma="0.1",
                  recovery="optimal", D=None, out="sweep.csv"),
    "table1": dict(gamma=0.1, nbar=2.0, Kt="0,0.5,1,1.5", restarts=10, seed=None, D=20,
                   max_rounds=400, out="table1"),
    "kraus": dict(family=None, N=4, S=3, gamma=0.1, D=None),
    "qec-check": dict(family="sqrt17", N=None, S=None, alpha=None, gamma=0.1, k_max=None,
                      model="kraus", tol=1e-9, D=None),
    "qubit": dict(code="all", alphabet="X-only", max_weight=3, out=None, json=None),
    "gkp": dict(),
    "wigner": dict(family="bin", N=2, S=2, alpha=None, D=None, extent=5.0, points=101, out="wigner.csv"),
    "okb": dict(N=5, S=2, gamma=0.25, K="", D=None),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qec-lab", description="Bosonic and qubit code error-correction toolkit.")
    p.add_argument("--config", help="JSON file of option values; explicit flags override it")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: available cores)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, argument_default=argparse.SUPPRESS)
        sp.add_argument("--jobs", type=int, help="worker processes (default: available cores)")
        return sp

    s = add("sweep", "grid of codes -> CSV of channel fidelities")
    s.add_argument("--family", choices=FAMILIES)
    s.add_argument("--N", help="range a:b or list")
    s.add_argument("--S", help="range a:b or list")
    s.add_argument("--alpha", help="comma list (cat/sac)")
    s.add_argument("--gamma", help="comma list")
    s.add_argument("--recovery", choices=RECOVERIES)
    s.add_argument("--D", type=int)
    s.add_argument("--nmax", type=int, help="upper end of the N range (overrides --N)")
    s.add_argument("--smax", type=int, help="upper end of the S range (overrides --S)")
    s.add_argument("--out")

    s = add("table1", "biconvex optimization rows under an energy cap")
    s.add_argument("--gamma", type=float)
    s.add_argument("--nbar", type=float)
    s.add_argument("--Kt", help="comma list")
    s.add_argument("--restarts", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--D", type=int)
    s.add_argument("--max-rounds", dest="max_rounds", type=int)
    s.add_argument("--out", help="output directory")

    s = add("kraus", "effective qubit Kraus operators under the optimal recovery")
    s.add_argument("--family", choices=FAMILIES)
    s.add_argument("--N", type=int)
    s.add_argument("--S", type=int)
    s.add_argument("--gamma", type=float)
    s.add_argument("--D", type=int)

    s = add("qec-check", "Knill-Laflamme check of a bosonic code")
    s.add_argument("--family", choices=FAMILIES)
    s.add_argument("--N", type=int)
    s.add_argument("--S", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--k-max", dest="k_max", type=int)
    s.add_argument("--model", choices=("kraus", "jump"),
                   help="kraus: loss Kraus operators; jump: bare powers of a")
    s.add_argument("--tol", type=float)
    s.add_argument("--D", type=int)

    s = add("qubit", "detectability census of multi-qubit codes")
    s.add_argument("--code", choices=("all", "shor", "shor'", "shor''", "steane", "stn'"))
    s.add_argument("--alphabet", choices=("all", "X-only", "Y-only", "Z-only", "XY-hybrid", "damping"))
    s.add_argument("--max-weight", dest="max_weight", type=int)
    s.add_argument("--out", help="census CSV path")
    s.add_argument("--json", help="undetectable-operator JSON path")

    add("gkp", "square versus sheared GKP lattice report")

    s = add("wigner", "Wigner grid of half the code projector")
    s.add_argument("--family", choices=FAMILIES)
    s.add_argument("--N", type=int)
    s.add_argument("--S", type=int)
    s.add_argument("--alpha", type=float)
    s.add_argument("--D", type=int)
    s.add_argument("--extent", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--out")

    s = add("okb", "optimal recovery fidelity of Kerr-rotated binomial codes")
    s.add_argument("--N", type=int)
    s.add_argument("--S", type=int)
    s.add_argument("--gamma", type=float)
    s.add_argument("--K", help="comma list (default: 73 points on [0, 2 pi])")
    s.add_argument("--D", type=int)
    return p


def resolve_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    merged = dict(DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(cfg) - set(merged) - {"jobs"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg)
    merged.update({k: v for k, v in vars(args).items() if k not in ("config", "verbose", "command", "jobs")})
    jobs = args.jobs if args.jobs is not None else merged.pop("jobs", None)
    merged.pop("jobs", None)
    merged["jobs"] = jobs or os.cpu_count() or 1
    return argparse.Namespace(command=args.command, verbose=args.verbose, **merged)


def main(argv=None) -> int:
    try:
        a = resolve_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[a.command](a)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QecLabError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
