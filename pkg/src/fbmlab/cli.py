"""Command-line front door: reproducible experiments and report generation.

Numeric arrays go to CSV (dot decimal separator, LF endings), verdicts and
manifests to JSON.  Every output directory receives a manifest sufficient to
reproduce its contents bit-exactly; wall-clock timings are kept out of the
manifest (in timings.json) so that reruns with the same seed are
byte-identical.  Exit codes: 0 success, 1 failed check/infeasible result,
2 argument errors.
"""

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .acceptance import run_suite
from .coeffs import coeff_table, default_a0
from .errors import DomainError, FeasibilityError, NumericsError, PreconditionError
from .fracops import (
    SampledPath,
    itilde,
    periodic_apply_path,
    pi_mult,
    pi_tilde,
    riemann_liouville,
    t_hl,
    time_invert,
)
from .genpath import GENERATOR_IDS, GeneratorConfig, fbm_cov, generate
from .kernels import KernelSpec, k0plus, phi_jh
from .lawlab import (
    VarSeqPair,
    cherid_decide,
    entropy_bound,
    equivalence_table,
    ergodic_cov,
    kakutani,
    rl_entropy_scaling,
    small_time_tv_scaling,
)
from .special import model_constants

_FMT = "%.17g"


def _print_json(obj):
    print(json.dumps(obj, sort_keys=True, indent=2))


def _write_csv(path, header, columns):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        rows = np.column_stack(columns)
        for row in rows:
            fh.write(",".join(_FMT % v for v in row) + "\n")


def _read_path_csv(path) -> SampledPath:
    data = np.genfromtxt(path, delimiter=",", names=True)
    t = np.asarray(data["t"], dtype=float)
    v = np.asarray(data["value"], dtype=float)
    origin = 0.0 if (t == 0.0).any() else float(t[0])
    return SampledPath(t, v, left_origin=origin)


def _manifest(outdir, command, config, outputs):
    payload = {
        "command": command,
        "config": config,
        "artifact_version": __version__,
        "outputs": sorted(outputs),
    }
    with open(os.path.join(outdir, "manifest.json"), "w", newline="\n") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _timings(outdir, stages):
    with open(os.path.join(outdir, "timings.json"), "w", newline="\n") as fh:
        json.dump(stages, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _gnuplot_script(outdir, csv_name, ycols, title):
    lines = [f'set datafile separator ","', f'set title "{title}"', "set key off"]
    plots = ", ".join(f'"{csv_name}" using 1:{c} with lines' for c in ycols)
    lines.append("plot " + plots)
    path = os.path.join(outdir, csv_name.replace(".csv", ".gp"))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _default_seed():
    env = os.environ.get("FBMLAB_SEED")
    return int(env) if env else 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_constants(args):
    mc = model_constants(args.hurst)
    _print_json({"H": mc.H, "kappa": mc.kappa, "rho": mc.rho})
    return 0


def _cmd_op(args):
    f = _read_path_csv(args.infile)
    op = args.op
    if op == "I0p":
        out = riemann_liouville(f, args.alpha)
    elif op in ("Itilde+", "Itilde-"):
        out = itilde(f, args.alpha, op[-1])
    elif op == "Pi":
        out = pi_mult(f, args.alpha)
    elif op == "PiTilde":
        out = pi_tilde(f, args.alpha)
    elif op in ("T", "Tprime"):
        out = time_invert(f, args.alpha, op)
    elif op == "THL":
        if args.H is None or args.L is None:
            raise DomainError("THL needs --H and --L")
        out = t_hl(f, args.H, args.L)
    elif op in ("Ihat", "Ibar"):
        out = periodic_apply_path(f, args.alpha, "hat" if op == "Ihat" else "bar")
    else:  # pragma: no cover - argparse restricts choices
        raise DomainError(f"unknown op {op!r}")
    _write_csv(args.out, ["t", "value"], [out.times, out.values])
    _print_json({"op": op, "points": len(out), "out": args.out})
    return 0


def _cmd_kernel(args):
    spec = KernelSpec(args.J, args.H)
    if args.kernel_cmd == "eval":
        val = k0plus(args.t, args.s, spec)
        _print_json({"J": spec.J, "H": spec.H, "t": args.t, "s": args.s,
                     "phi": phi_jh(args.t / args.s, spec), "K": val})
        return 0
    grid = np.genfromtxt(args.grid, delimiter=",", names=True)
    t, s = np.asarray(grid["t"], float), np.asarray(grid["s"], float)
    k = np.array([k0plus(ti, si, spec) for ti, si in zip(t, s)])
    _write_csv(args.out, ["t", "s", "K"], [t, s, k])
    _print_json({"rows": t.size, "out": args.out})
    return 0


def _cmd_simulate(args):
    t0 = time.monotonic()
    cfg = GeneratorConfig(H=args.H, n=args.n, T=args.T, seed=args.seed,
                          n_terms=args.n_terms, trunc_factor=args.trunc_factor,
                          sim_subdiv=args.sim_subdiv)
    ens = generate(cfg, args.M, args.gen)
    t_gen = time.monotonic() - t0
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "paths.csv")
    header = ["t"] + [f"p{k:05d}" for k in range(ens.M)]
    _write_csv(csv_path, header, [ens.times] + [ens.paths[k] for k in range(ens.M)])
    outputs = ["paths.csv", "manifest.json"]
    if args.emit_gnuplot:
        _gnuplot_script(args.out, "paths.csv", range(2, min(ens.M, 8) + 2),
                        f"{args.gen} paths, H={cfg.H}")
        outputs.append("paths.gp")
    _manifest(args.out, "simulate", {
        "gen": args.gen, "H": cfg.H, "n": cfg.n, "T": cfg.T, "M": ens.M,
        "seed": cfg.seed, "n_terms": cfg.n_terms, "trunc_factor": cfg.trunc_factor,
        "sim_subdiv": cfg.sim_subdiv,
        "diagnostics": {k: (v if np.isscalar(v) else float(v)) for k, v in ens.diagnostics.items()},
    }, outputs)
    _timings(args.out, {"generate_s": t_gen})
    _print_json({"out": args.out, "M": ens.M, "n": cfg.n, "generator": args.gen})
    return 0


def _cmd_coeffs(args):
    a0 = None if args.a0 == "auto" else float(args.a0)
    try:
        ct = coeff_table(args.H, a0=a0, N=args.N)
    except FeasibilityError as exc:
        _print_json({"feasible": False, "first_violation_n": exc.n, "H": args.H,
                     "a0": a0 if a0 is not None else default_a0(args.H)})
        return 1
    n = np.arange(1, ct.N + 1)
    _write_csv(args.out, ["n", "b_n", "a_n"], [n.astype(float), ct.b, ct.a])
    _print_json({"feasible": True, "H": ct.H, "a0": ct.a0, "N": ct.N, "out": args.out})
    return 0


def _cmd_lawcheck(args):
    sub = args.law_cmd
    if sub == "kakutani":
        data = np.genfromtxt(args.infile, delimiter=",", names=True)
        rep = kakutani(VarSeqPair(np.asarray(data["sigma2"], float),
                                  np.asarray(data["sigma2_bar"], float)))
        if args.out:
            partial = rep.diagnostics["partial_sums"]
            _write_csv(args.out, ["m", "partial_sum"],
                       [np.arange(1.0, partial.size + 1), partial])
        _print_json({"verdict": rep.verdict, "statistic": rep.statistic,
                     "term_decay_exponent": rep.diagnostics.get("term_decay_exponent")})
        return 0
    if sub == "cherid":
        rep = cherid_decide(args.J, args.H, args.lam, N=args.N)
        _print_json({"verdict": rep.verdict, "statistic": rep.statistic,
                     "analytic_verdict": rep.diagnostics.get("analytic_verdict"),
                     "term_decay_exponent": rep.diagnostics.get("term_decay_exponent")})
        return 0
    if sub == "entropy":
        f = _read_path_csv(args.infile)
        nb = entropy_bound(f, args.H, args.T)
        _print_json({"norm_bound": nb, "entropy_surrogate": nb**2 / 2.0,
                     "tv_bound": math.sqrt(nb**2)})
        return 0
    if sub == "ergodic":
        if args.infile:
            f = _read_path_csv(args.infile)
        else:
            # a log-refined exact-sampling path generated on demand
            m = args.log_points
            lg = np.geomspace(args.tmin * min(args.u, args.v) * 0.99, 1.0, m)
            L = np.linalg.cholesky(fbm_cov(lg, args.H) + 1e-14 * np.eye(m))
            rng = np.random.Generator(np.random.Philox(args.seed))
            f = SampledPath(lg, L @ rng.standard_normal(m), left_origin=lg[0])
        est = ergodic_cov(f, args.H, args.u, args.v, args.tmin)
        target = float(fbm_cov(np.array([args.u, args.v]), args.H)[0, 1])
        _print_json({"estimate": est, "analytic": target, "t_min": args.tmin})
        return 0
    if sub == "table":
        rep = equivalence_table(args.scenario, args.H, S=args.S, T=args.T, eps=args.eps)
        payload = {"verdict": rep.verdict, "statistic": rep.statistic,
                   "diagnostics": {k: v for k, v in rep.diagnostics.items()}}
        if args.diagnose:
            if args.scenario == "rl_vs_fbm":
                payload["scaling_fit"] = {
                    k: (v.tolist() if isinstance(v, np.ndarray) else v)
                    for k, v in rl_entropy_scaling(args.H, M=args.M, seed=args.seed).items()
                }
            elif args.scenario == "small_time":
                payload["scaling_fit"] = {
                    k: (v.tolist() if isinstance(v, np.ndarray) else v)
                    for k, v in small_time_tv_scaling(args.H, M=min(args.M, 60), seed=args.seed).items()
                }
        _print_json(payload)
        return 0
    raise DomainError(f"unknown lawcheck subcommand {sub!r}")  # pragma: no cover


def _cmd_verify(args):
    t0 = time.monotonic()
    report = run_suite(args.suite, seed=args.seed, echo=None if args.quiet else print)
    elapsed = time.monotonic() - t0
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        payload = {
            "suite": report["suite"],
            "seed": report["seed"],
            "passed": report["passed"],
            "checks": [
                {"criterion": c.criterion, "description": c.description,
                 "passed": c.passed, "value": c.value, "threshold": c.threshold}
                for c in report["checks"]
            ],
        }
        with open(os.path.join(args.out, "report.json"), "w", newline="\n") as fh:
            json.dump(payload, fh, sort_keys=True, indent=2)
            fh.write("\n")
        with open(os.path.join(args.out, "report.txt"), "w", newline="\n") as fh:
            for c in report["checks"]:
                fh.write(c.row() + "\n")
            fh.write(f"overall: {'PASSED' if report['passed'] else 'FAILED'}\n")
        _manifest(args.out, "verify", {"suite": args.suite, "seed": args.seed},
                  ["report.json", "report.txt", "manifest.json"])
        _timings(args.out, {"verify_s": elapsed})
    print(f"overall: {'PASSED' if report['passed'] else 'FAILED'}")
    return 0 if report["passed"] else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fbmlab", description=__doc__)
    p.add_argument("--version", action="version", version=f"fbmlab {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("constants", help="normalisation constants for a given H")
    c.add_argument("--hurst", type=float, required=True)
    c.set_defaults(fn=_cmd_constants)

    o = sub.add_parser("op", help="apply an operator to a sampled path")
    osub = o.add_subparsers(dest="op_cmd", required=True)
    oa = osub.add_parser("apply")
    oa.add_argument("--op", required=True,
                    choices=["I0p", "Itilde+", "Itilde-", "Pi", "PiTilde", "T", "Tprime",
                             "THL", "Ihat", "Ibar"])
    oa.add_argument("--alpha", type=float, default=0.5)
    oa.add_argument("--H", type=float)
    oa.add_argument("--L", type=float)
    oa.add_argument("--in", dest="infile", required=True)
    oa.add_argument("--out", required=True)
    oa.set_defaults(fn=_cmd_op)

    k = sub.add_parser("kernel", help="transfer-kernel evaluation")
    ksub = k.add_subparsers(dest="kernel_cmd", required=True)
    ke = ksub.add_parser("eval")
    for name in ("J", "H", "t", "s"):
        ke.add_argument(f"--{name}", type=float, required=True)
    ke.set_defaults(fn=_cmd_kernel)
    kt = ksub.add_parser("table")
    kt.add_argument("--J", type=float, required=True)
    kt.add_argument("--H", type=float, required=True)
    kt.add_argument("--grid", required=True, help="CSV with columns t,s")
    kt.add_argument("--out", required=True)
    kt.set_defaults(fn=_cmd_kernel)

    s = sub.add_parser("simulate", help="generate a path ensemble")
    s.add_argument("--gen", required=True, choices=list(GENERATOR_IDS))
    s.add_argument("--H", type=float, required=True)
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--M", type=int, default=100)
    s.add_argument("--seed", type=int, default=_default_seed())
    s.add_argument("--n-terms", dest="n_terms", type=int, default=512)
    s.add_argument("--trunc-factor", dest="trunc_factor", type=float, default=100.0)
    s.add_argument("--sim-subdiv", dest="sim_subdiv", type=int, default=32)
    s.add_argument("--out", required=True)
    s.add_argument("--emit-gnuplot", action="store_true")
    s.set_defaults(fn=_cmd_simulate)

    cf = sub.add_parser("coeffs", help="exact series coefficient table")
    cf.add_argument("--H", type=float, required=True)
    cf.add_argument("--a0", default="auto")
    cf.add_argument("--N", type=int, default=1024)
    cf.add_argument("--out", required=True)
    cf.set_defaults(fn=_cmd_coeffs)

    lw = sub.add_parser("lawcheck", help="Gaussian law comparison tools")
    lsub = lw.add_subparsers(dest="law_cmd", required=True)
    lk = lsub.add_parser("kakutani")
    lk.add_argument("--in", dest="infile", required=True, help="CSV with sigma2,sigma2_bar")
    lk.add_argument("--out")
    lk.set_defaults(fn=_cmd_lawcheck)
    lc = lsub.add_parser("cherid")
    lc.add_argument("--J", type=float, required=True)
    lc.add_argument("--H", type=float, required=True)
    lc.add_argument("--lam", type=float, default=1.0)
    lc.add_argument("--N", type=int, default=4096)
    lc.set_defaults(fn=_cmd_lawcheck)
    le = lsub.add_parser("entropy")
    le.add_argument("--in", dest="infile", required=True)
    le.add_argument("--H", type=float, required=True)
    le.add_argument("--T", type=float, required=True)
    le.set_defaults(fn=_cmd_lawcheck)
    lg = lsub.add_parser("ergodic")
    lg.add_argument("--H", type=float, required=True)
    lg.add_argument("--u", type=float, default=1.0)
    lg.add_argument("--v", type=float, default=1.0)
    lg.add_argument("--tmin", type=float, default=1e-4)
    lg.add_argument("--in", dest="infile")
    lg.add_argument("--seed", type=int, default=_default_seed())
    lg.add_argument("--log-points", dest="log_points", type=int, default=2000)
    lg.set_defaults(fn=_cmd_lawcheck)
    lt = lsub.add_parser("table")
    lt.add_argument("--scenario", required=True,
                    choices=["rl_vs_fbm", "bhat_vs_fbm", "bbar_vs_fbm", "small_time"])
    lt.add_argument("--H", type=float, required=True)
    lt.add_argument("--S", type=float)
    lt.add_argument("--T", type=float)
    lt.add_argument("--eps", type=float)
    lt.add_argument("--diagnose", action="store_true")
    lt.add_argument("--M", type=int, default=200)
    lt.add_argument("--seed", type=int, default=_default_seed())
    lt.set_defaults(fn=_cmd_lawcheck)

    v = sub.add_parser("verify", help="run the acceptance suite")
    v.add_argument("--suite", choices=["quick", "full"], default="quick")
    v.add_argument("--seed", type=int, default=_default_seed())
    v.add_argument("--out")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(fn=_cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (DomainError, PreconditionError, NumericsError, FeasibilityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
