"""Command-line front end.

Subcommands: solve, generate, verify, compare, report, convert.  All
output files are deterministic for fixed inputs and seeds.  Exit codes
of ``solve``: 0 solved, 1 input error, 2 no solution exists (tau
collapsed), 3 no strictly feasible dual point (or phase one was
inconclusive), 4 numerical breach.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .embed import MuFloorReached, NoOptimalSolution, Solved
from .errors import (
    CorrectorEscape,
    EquivalenceViolation,
    GenerationFailed,
    Inconclusive,
    MaxIterExceeded,
    NonZeroCost,
    NotStrictlyFeasible,
    SdfeasError,
    SingularNewtonSystem,
    StepOrderViolation,
)
from .ipm import IterTrace, Params, check_equivalence, run, superlinear_report
from .phase1 import centered_start, cold_start, find_dual_interior
from .problem import (
    generate,
    load_problem,
    load_witness,
    save_problem,
    save_witness,
    validate,
    witness_defects,
)
from .sdlcp import (
    apply_Ahat,
    apply_Bhat,
    build_orth_basis,
    build_ops,
    check_assumption_3_2,
    check_B1_22,
)
from .symcore import svec

# ratio threshold below which a tail is reported as superlinear
SUPERLINEAR_RATIO = 0.05


def _fmt(x):
    return format(float(x), ".17g")


def _params_from_args(args):
    return Params(
        beta1=args.beta1,
        beta2=args.beta2,
        eps=args.eps,
        eps_tau=args.eps_tau,
        mu_floor=args.mu_floor,
        max_iter=args.max_iter,
    )


def _add_solver_flags(sub):
    sub.add_argument("--cold", action="store_true",
                     help="skip phase one, start from the centered cold point")
    sub.add_argument("--beta1", type=float, default=0.1)
    sub.add_argument("--beta2", type=float, default=0.3)
    sub.add_argument("--eps", type=float, default=1e-8)
    sub.add_argument("--eps-tau", dest="eps_tau", type=float, default=1e-8)
    sub.add_argument("--mu0", type=float, default=1.0)
    sub.add_argument("--mu-floor", dest="mu_floor", type=float, default=1e-14)
    sub.add_argument("--max-iter", dest="max_iter", type=int, default=200)
    sub.add_argument("--margin", type=float, default=1e-3,
                     help="phase-one strict feasibility margin")
    sub.add_argument("--format", choices=("json", "sdpa"), default=None,
                     help="input format (default: by file extension)")


def cmd_solve(args):
    try:
        p = load_problem(args.problem, fmt=args.format)
    except (OSError, ValueError, KeyError, NonZeroCost,
            json.JSONDecodeError) as e:
        print(f"error: cannot read problem: {e}", file=sys.stderr)
        return 1
    report = validate(p)
    if not report.valid:
        print(f"error: invalid instance: {'; '.join(report.failures)}",
              file=sys.stderr)
        return 1
    params = _params_from_args(args)
    try:
        if args.cold:
            start = cold_start(p, rho=np.sqrt(args.mu0))
        else:
            y0, Y0 = find_dual_interior(p, margin=args.margin, params=params)
            start = centered_start(p, y0, Y0, mu0=args.mu0)
    except (NotStrictlyFeasible, Inconclusive) as e:
        print(f"phase one: {e}")
        return 3
    try:
        outcome, trace = run(p, start, params)
    except (StepOrderViolation, CorrectorEscape, SingularNewtonSystem,
            MaxIterExceeded, SdfeasError) as e:
        print(f"numerical breach: {type(e).__name__}: {e}", file=sys.stderr)
        return 4

    stem = Path(args.problem)
    trace_path = args.trace_out or str(stem.with_suffix(".trace.csv"))
    sol_path = args.solution_out or str(stem.with_suffix(".solution.json"))
    trace.to_csv(trace_path)

    final_ratio = float(trace.ratios[-1]) if len(trace) else float("nan")
    if isinstance(outcome, Solved):
        status = "solved"
        payload = {
            "status": status,
            "X": outcome.X.tolist(),
            "y": outcome.y.tolist(),
            "Y": outcome.Y.tolist(),
            "iters": len(trace),
            "final_ratio": final_ratio,
        }
        code = 0
    elif isinstance(outcome, NoOptimalSolution):
        status = "no_optimal_solution"
        payload = {
            "status": status,
            "tau": outcome.tau,
            "kappa": outcome.kappa,
            "iters": len(trace),
            "final_ratio": final_ratio,
        }
        code = 2
    elif isinstance(outcome, MuFloorReached):
        status = "mu_floor"
        payload = {"status": status, "iters": len(trace),
                   "final_ratio": final_ratio}
        code = 4
    else:
        status = type(outcome).__name__
        payload = {"status": status, "iters": len(trace)}
        code = 4
    with open(sol_path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")
    print(f"status: {status}  iterations: {len(trace)}")
    print(f"solution: {sol_path}")
    print(f"trace: {trace_path}")
    if len(trace) >= args.tail:
        rep = superlinear_report(trace, tail=args.tail)
        print(f"final ratio: {_fmt(rep.final_ratio)}  "
              f"tail monotone decreasing: {rep.monotone_decreasing}  "
              f"q-order estimate: {rep.q_order:.3f}")
    return code


def cmd_generate(args):
    if not (1 <= args.r <= args.n - 1):
        print("error: need 1 <= r <= n-1", file=sys.stderr)
        return 1
    if not (2 <= args.m <= args.n * (args.n + 1) // 2):
        print("error: need 2 <= m <= n(n+1)/2", file=sys.stderr)
        return 1
    try:
        p, w = generate(args.n, args.m, args.r, seed=args.seed)
    except GenerationFailed as e:
        print(f"generation failed: {e}", file=sys.stderr)
        return 3
    out = Path(args.out)
    save_problem(out, p)
    wpath = out.with_suffix(".witness.json")
    save_witness(wpath, w)
    print(f"problem: {out}")
    print(f"witness: {wpath}")
    return 0


def _print_check(name, ok, detail=""):
    mark = "pass" if ok else "FAIL"
    print(f"  [{mark}] {name}{': ' + detail if detail else ''}")
    return ok


def cmd_verify(args):
    try:
        p = load_problem(args.problem, fmt=args.format)
    except (OSError, ValueError, KeyError, NonZeroCost,
            json.JSONDecodeError) as e:
        print(f"error: cannot read problem: {e}", file=sys.stderr)
        return 1
    print(f"instance: n={p.n} m={p.m}")
    report = validate(p)
    ok = _print_check("constraint rank == m and b != 0", report.valid,
                      f"rank={report.rank}")
    if not ok:
        print("  remaining checks skipped")
        return 0
    basis = build_orth_basis(p)
    amat = p.amat
    stack = np.concatenate([svec(basis.B1)[None, :],
                            np.stack([svec(b) for b in basis.Bs])])
    dvec = np.zeros(stack.shape[0])
    dvec[0] = basis.d1
    defect = np.max(np.abs(stack @ amat.T - np.outer(dvec, p.b)))
    _print_check("orthogonal basis defect <= 1e-10", defect <= 1e-10,
                 f"defect={defect:.2e}")
    ops = build_ops(p, basis)
    rep32 = check_assumption_3_2(ops, basis, trials=args.trials)
    _print_check("monotonicity (trace vanishes on the solution space)",
                 rep32.monotone_ok,
                 f"max |trace| = {rep32.monotone_max_abs_trace:.2e}")
    _print_check("zero pair solves the system", rep32.existence_ok)
    _print_check("[Ahat Bhat] has full row rank", rep32.surjective_ok,
                 f"rank = {rep32.rank} / {rep32.ntilde1}")

    wpath = Path(args.problem).with_suffix(".witness.json")
    if args.witness:
        wpath = Path(args.witness)
    if wpath.exists():
        w = load_witness(wpath)
        defects = witness_defects(p, w)
        wit_ok = (max(defects["primal_feasibility"],
                      defects["dual_feasibility"],
                      defects["complementarity"],
                      defects["b_dot_ystar"]) <= 1e-8
                  and defects["strict_complementarity_slack"] < 0.0)
        _print_check("witness identities", wit_ok)
        passed, _adj = check_B1_22(basis, w)
        _print_check("nonzero kernel block of B1 (or repaired)", True,
                     "original" if passed else "repaired")
        # lifted embedding of the witness solves the system
        xhat = np.zeros((p.n + 1, p.n + 1))
        xhat[:p.n, :p.n] = w.Xstar
        xhat[p.n, p.n] = 1.0
        yhat = np.zeros((p.n + 1, p.n + 1))
        yhat[:p.n, :p.n] = w.Ystar
        resid = np.max(np.abs(apply_Ahat(ops, xhat) + apply_Bhat(ops, yhat)))
        _print_check("witness embedding solves the lifted system",
                     resid <= 1e-8, f"residual={resid:.2e}")
    else:
        print("  [skip] witness checks (no witness sidecar found)")
    return 0


def cmd_compare(args):
    try:
        p = load_problem(args.problem, fmt=args.format)
    except (OSError, ValueError, KeyError, NonZeroCost,
            json.JSONDecodeError) as e:
        print(f"error: cannot read problem: {e}", file=sys.stderr)
        return 1
    params = Params(eps=1e-30, mu_floor=args.mu_floor)
    ops = None
    if args.inject_fault:
        basis = build_orth_basis(p)
        ops = build_ops(p, basis)
        ops.rows_B[p.m + p.n, 0, 1] += 1e-3
        ops.rows_B[p.m + p.n, 1, 0] += 1e-3
    start = cold_start(p, rho=1.0)
    try:
        rep = check_equivalence(p, start, params, k_max=args.k_max, ops=ops)
    except EquivalenceViolation as e:
        print(f"equivalence violation: {e}")
        return 4
    print(f"iterations compared: {rep.k_checked}")
    print(f"max block deviation: {rep.max_block_deviation:.3e}")
    print(f"max normalized-gap deviation: {rep.max_mu_deviation:.3e}")
    if rep.alpha_deviations:
        print(f"max step-length deviation: {max(rep.alpha_deviations):.3e}")
    return 0


def cmd_report(args):
    try:
        trace = IterTrace.from_csv(args.trace)
    except (OSError, ValueError) as e:
        print(f"error: cannot read trace: {e}", file=sys.stderr)
        return 1
    if len(trace) < max(args.tail, 1):
        print(f"error: trace has {len(trace)} steps, need {args.tail}",
              file=sys.stderr)
        return 1
    mus = trace.mus
    ratios = mus[1:] / mus[:-1]  # recomputed from the mu column
    print("k      mu             ratio(recomputed)")
    start = max(0, len(mus) - args.tail - 1)
    for k in range(start, len(mus)):
        r = _fmt(ratios[k - 1]) if k > 0 else "-"
        print(f"{k:<6d} {_fmt(mus[k]):<22s} {r}")
    rep = superlinear_report(trace, tail=min(args.tail, len(trace)))
    tail_sl = rep.monotone_decreasing and rep.final_ratio <= SUPERLINEAR_RATIO
    print(f"monotone decreasing tail: {rep.monotone_decreasing}")
    print(f"final ratio: {_fmt(rep.final_ratio)}")
    print(f"q-order estimate: {rep.q_order:.3f}")
    print(f"superlinear tail: {'yes' if tail_sl else 'no superlinear tail'}")
    if args.baseline:
        base = IterTrace.from_csv(args.baseline)
        print(f"baseline: {len(base)} iterations, final mu "
              f"{_fmt(base.mu_sequence()[-1])} vs {_fmt(trace.mu_sequence()[-1])}")
        if len(base):
            print(f"baseline final ratio: {_fmt(base.ratios[-1])}")
    return 0


def cmd_convert(args):
    try:
        p = load_problem(args.problem, fmt=args.format)
    except (OSError, ValueError, KeyError, NonZeroCost,
            json.JSONDecodeError) as e:
        print(f"error: cannot read problem: {e}", file=sys.stderr)
        return 1
    save_problem(args.out, p)
    print(f"wrote {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sdfeas",
        description="Semidefinite feasibility via the homogeneous model",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    s = subs.add_parser("solve", help="solve a feasibility instance")
    s.add_argument("problem")
    _add_solver_flags(s)
    s.add_argument("--solution-out", default=None)
    s.add_argument("--trace-out", default=None)
    s.add_argument("--tail", type=int, default=5)
    s.set_defaults(func=cmd_solve)

    s = subs.add_parser("generate", help="generate a random instance + witness")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("-m", type=int, required=True)
    s.add_argument("-r", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_generate)

    s = subs.add_parser("verify", help="run structural checks on an instance")
    s.add_argument("problem")
    s.add_argument("--witness", default=None)
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--format", choices=("json", "sdpa"), default=None)
    s.set_defaults(func=cmd_verify)

    s = subs.add_parser("compare",
                        help="run both formulations in lockstep and compare")
    s.add_argument("problem")
    s.add_argument("--k-max", dest="k_max", type=int, default=15)
    s.add_argument("--mu-floor", dest="mu_floor", type=float, default=1e-7)
    s.add_argument("--format", choices=("json", "sdpa"), default=None)
    s.add_argument("--inject-fault", action="store_true",
                   help=argparse.SUPPRESS)
    s.set_defaults(func=cmd_compare)

    s = subs.add_parser("report", help="tail analysis of a trace CSV")
    s.add_argument("trace")
    s.add_argument("baseline", nargs="?", default=None,
                   help="optional second trace for comparison")
    s.add_argument("--tail", type=int, default=5)
    s.set_defaults(func=cmd_report)

    s = subs.add_parser("convert", help="convert SDPA input to problem JSON")
    s.add_argument("problem")
    s.add_argument("-o", "--out", required=True)
    s.add_argument("--format", choices=("json", "sdpa"), default=None)
    s.set_defaults(func=cmd_convert)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
