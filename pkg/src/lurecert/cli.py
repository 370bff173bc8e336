"""Command-line front end.

Subcommands:
  certify   run the primal/dual analysis on a system JSON file
  simulate  integrate the closed loop with a witness (or explicit breakpoints)
  demo      full pipeline on a built-in demo system, emitting plot CSVs

Exit codes are stable API: 0 = absolutely stable, 2 = not absolutely stable,
3 = undetermined, 64 = usage / invalid input, 70 = solver inconsistency.
"""

import argparse
import json
import logging
import os
import sys as _sys
from dataclasses import dataclass, field

import numpy as np

from lurecert import demos, lmi, sdp, simulate, witness as witness_mod
from lurecert.errors import (
    InvalidInput,
    LurecertError,
    NotRankOne,
    SolverInconsistency,
)

log = logging.getLogger("lurecert.cli")

ABSOLUTELY_STABLE = "AbsolutelyStable"
NOT_ABSOLUTELY_STABLE = "NotAbsolutelyStable"
UNDETERMINED = "Undetermined"

EXIT_STABLE = 0
EXIT_UNSTABLE = 2
EXIT_UNDETERMINED = 3
EXIT_USAGE = 64
EXIT_SOLVER = 70

EQUILIBRIUM_TOL = 1e-6


@dataclass
class AnalysisVerdict:
    verdict: str
    primal_report: sdp.SolveReport = None
    dual_report: sdp.SolveReport = None
    witness: witness_mod.DualWitness = None
    pwl: witness_mod.PiecewiseLinear = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        def report_dict(r):
            if r is None:
                return None
            return {
                "status": r.status,
                "residuals": [float(v) for v in r.residuals],
                "iterations": int(r.iterations),
                "note": r.certificate_note,
            }

        out = {
            "verdict": self.verdict,
            "primal": report_dict(self.primal_report),
            "dual": report_dict(self.dual_report),
            "notes": self.notes,
        }
        if self.witness is not None:
            out["witness"] = witness_mod.to_json_dict(self.witness, self.pwl)
        return out


def analyze(sys, mclass, band=lmi.SlopeBand(), eps=None, cfg=None):
    """Run the full primal/dual pipeline and return an AnalysisVerdict.

    Every claim in the verdict is re-verified from raw constraint evaluation:
    a stable verdict needs a re-checked primal point, an unstable verdict
    needs a rank-1 dual witness whose equilibrium is confirmed by simulation.
    """
    if cfg is None:
        cfg = sdp.SolverConfig()
    primal = lmi.build_primal(sys, band=band, mclass=mclass, eps=eps)
    notes = []

    if not band.is_unit:
        # No dual on non-unit bands: a lone primal solve can only certify stability.
        report = sdp.solve(primal, cfg)
        if report.status == sdp.FEASIBLE:
            return AnalysisVerdict(ABSOLUTELY_STABLE, primal_report=report, notes=notes)
        notes.append("primal undetermined and no dual is available for this band")
        return AnalysisVerdict(UNDETERMINED, primal_report=report, notes=notes)

    dual = lmi.build_dual(sys, mclass)
    dual_cfg = sdp.SolverConfig(
        eq_tol=cfg.eq_tol, cone_tol=cfg.cone_tol, max_iter=cfg.max_iter,
        relaxation=cfg.relaxation, check_every=cfg.check_every,
        stall_checks=cfg.stall_checks, stall_factor=cfg.stall_factor,
        seed=cfg.seed, rank_one_block="H", polish_iter=cfg.polish_iter,
    )
    primal_report, dual_report = sdp.solve_alternative_pair(primal, dual, cfg, dual_cfg)

    if primal_report.status == sdp.FEASIBLE:
        ok, eq_res, cone_dist = sdp.verify_point(primal, primal_report.point, cfg.eq_tol, cfg.cone_tol)
        if not ok:
            raise SolverInconsistency(
                f"primal verdict failed re-verification: equality {eq_res:.3e}, cone {cone_dist:.3e}"
            )
        notes.append("stability certificate re-verified from raw constraints")
        return AnalysisVerdict(
            ABSOLUTELY_STABLE, primal_report=primal_report, dual_report=dual_report, notes=notes
        )

    if dual_report.status == sdp.FEASIBLE:
        try:
            wit = witness_mod.extract(dual_report, sys, mclass)
        except NotRankOne as exc:
            notes.append(f"dual feasible but not rank one ({exc}); no conclusion is drawn")
            return AnalysisVerdict(
                UNDETERMINED, primal_report=primal_report, dual_report=dual_report, notes=notes
            )
        pwl = witness_mod.build_pwl(wit, odd=(mclass == lmi.DD))
        if not witness_mod.verify_slope(pwl):
            raise SolverInconsistency("constructed nonlinearity violates the slope band")
        residual, is_eq = simulate.verify_equilibrium(
            sys, pwl, wit.h1, tol=EQUILIBRIUM_TOL * (1.0 + np.linalg.norm(wit.h1))
        )
        if not is_eq:
            raise SolverInconsistency(
                f"witness equilibrium residual {residual:.3e} exceeds tolerance"
            )
        notes.append(f"non-zero equilibrium confirmed, residual {residual:.3e}")
        return AnalysisVerdict(
            NOT_ABSOLUTELY_STABLE,
            primal_report=primal_report,
            dual_report=dual_report,
            witness=wit,
            pwl=pwl,
            notes=notes,
        )

    notes.append("neither side of the alternative pair reached feasibility")
    return AnalysisVerdict(
        UNDETERMINED, primal_report=primal_report, dual_report=dual_report, notes=notes
    )


def direction_cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 0.0
    return float(abs(np.dot(a, b)) / (na * nb))


def _load_system(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
        return lmi.StateSpace.from_dict(data)
    except (OSError, json.JSONDecodeError, InvalidInput) as exc:
        raise SystemExit(_usage_error(f"cannot load system file {path!r}: {exc}"))


def _usage_error(msg):
    print(f"error: {msg}", file=_sys.stderr)
    return EXIT_USAGE


def _verdict_exit(verdict):
    return {
        ABSOLUTELY_STABLE: EXIT_STABLE,
        NOT_ABSOLUTELY_STABLE: EXIT_UNSTABLE,
        UNDETERMINED: EXIT_UNDETERMINED,
    }[verdict.verdict]


def cmd_certify(args):
    sys = _load_system(args.system)
    if args.mclass not in (lmi.DHD, lmi.DD):
        return _usage_error(f"unknown multiplier class {args.mclass!r}")
    band = lmi.SlopeBand(mu=args.mu, nu=args.nu)
    cfg = sdp.SolverConfig(seed=args.seed)
    try:
        verdict = analyze(sys, args.mclass, band=band, eps=args.eps, cfg=cfg)
    except SolverInconsistency as exc:
        print(f"solver inconsistency: {exc}", file=_sys.stderr)
        return EXIT_SOLVER
    payload = verdict.to_dict()
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return _verdict_exit(verdict)


def _parse_vector(text, name):
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise SystemExit(_usage_error(f"cannot parse {name} {text!r}"))


def cmd_simulate(args):
    sys = _load_system(args.system)
    if args.witness:
        try:
            pwl = witness_mod.load_pwl(args.witness)
        except (OSError, json.JSONDecodeError, InvalidInput) as exc:
            return _usage_error(f"cannot load witness file {args.witness!r}: {exc}")
    elif args.breakpoints:
        pairs = [p.split(",") for p in args.breakpoints.split(";")]
        try:
            bp = np.array([[float(a), float(b)] for a, b in pairs])
            pwl = witness_mod.PiecewiseLinear(z_bp=bp[:, 0], w_bp=bp[:, 1])
        except (ValueError, InvalidInput) as exc:
            return _usage_error(f"bad breakpoints: {exc}")
    else:
        return _usage_error("simulate needs --witness or --breakpoints")
    x0 = _parse_vector(args.x0, "--x0")
    if x0.size != sys.n:
        return _usage_error(f"--x0 has {x0.size} entries, system has {sys.n} states")
    traj = simulate.integrate(sys, pwl, x0, t_end=args.t_end, dt=args.dt)
    traj.to_csv(args.out)
    print(f"trajectory written to {args.out}")
    if sys.n == 2:
        span = 1.25 * max(1.0, np.abs(traj.states).max())
        rows = simulate.vector_field_grid(sys, pwl, ((-span, span), (-span, span)))
        field_path = os.path.splitext(args.out)[0] + "_field.csv"
        simulate.save_vector_field_csv(field_path, rows)
        print(f"vector field written to {field_path}")
    return 0


def cmd_demo(args):
    if args.name not in demos.DEMO_SYSTEMS:
        return _usage_error(f"unknown demo {args.name!r} (expected dhd or dd)")
    mclass = args.name
    sys = demos.DEMO_SYSTEMS[mclass]
    os.makedirs(args.out_dir, exist_ok=True)
    cfg = sdp.SolverConfig(seed=args.seed)
    try:
        verdict = analyze(sys, mclass, cfg=cfg)
    except SolverInconsistency as exc:
        print(f"solver inconsistency: {exc}", file=_sys.stderr)
        return EXIT_SOLVER

    print(f"verdict: {verdict.verdict}")
    for note in verdict.notes:
        print(f"  note: {note}")
    if verdict.witness is None:
        return _verdict_exit(verdict)

    wit, pwl = verdict.witness, verdict.pwl
    np.set_printoptions(precision=4, suppress=True)
    print(f"h1      = {wit.h1}")
    print(f"z_star  = {wit.z_star}")
    print(f"w_star  = {wit.w_star}")
    print(f"slope check: {'ok' if witness_mod.verify_slope(pwl) else 'FAILED'}")
    residual, _ = simulate.verify_equilibrium(sys, pwl, wit.h1)
    print(f"equilibrium residual at x = h1: {residual:.3e}")

    ref = demos.REFERENCE_DIRECTIONS[mclass]
    cos = direction_cosine(
        np.concatenate([wit.z_star, wit.w_star]),
        np.concatenate([ref["z_star"], ref["w_star"]]),
    )
    print(f"direction cosine vs reference run: {cos:.4f}")
    if cos < 0.99:
        log.warning(
            "witness direction deviates from the reference run (cosine %.4f); "
            "dual solutions need not be unique, continuing", cos
        )

    with open(os.path.join(args.out_dir, "verdict.json"), "w") as fh:
        json.dump(verdict.to_dict(), fh, indent=2)
    witness_mod.save_json(os.path.join(args.out_dir, "witness.json"), wit, pwl)

    # plot data: nonlinearity map, two trajectories, vector field
    span = 1.5 * (np.abs(pwl.z_bp).max() + 0.1)
    zgrid = np.linspace(-span, span, 400)
    np.savetxt(
        os.path.join(args.out_dir, "phi_map.csv"),
        np.column_stack([zgrid, pwl(zgrid)]),
        delimiter=",", header="z,phi", comments="", fmt="%.17g",
    )
    traj_eq = simulate.integrate(sys, pwl, wit.h1, t_end=10.0)
    traj_eq.to_csv(os.path.join(args.out_dir, "trajectory_from_h1.csv"))
    traj_dec = simulate.integrate(sys, pwl, np.array([-0.5, -0.5]), t_end=50.0)
    traj_dec.to_csv(os.path.join(args.out_dir, "trajectory_decaying.csv"))
    span_x = 1.25 * max(1.0, np.abs(wit.h1).max())
    rows = simulate.vector_field_grid(sys, pwl, ((-span_x, span_x), (-span_x, span_x)))
    simulate.save_vector_field_csv(os.path.join(args.out_dir, "vector_field.csv"), rows)
    print(f"plot data written to {args.out_dir}/")
    return _verdict_exit(verdict)


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with the documented code."""

    def error(self, message):
        self.print_usage(_sys.stderr)
        print(f"error: {message}", file=_sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(
        prog="lurecert",
        description="Absolute-stability certification and instability witnesses "
        "for Lur'e feedback systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="run the primal/dual stability analysis")
    p.add_argument("--system", required=True, help="system JSON file with A, B, C, D")
    p.add_argument("--class", dest="mclass", default=lmi.DHD, help="multiplier class: dhd or dd")
    p.add_argument("--mu", type=float, default=0.0, help="lower slope bound (<= 0)")
    p.add_argument("--nu", type=float, default=1.0, help="upper slope bound (>= 0)")
    p.add_argument("--eps", type=float, default=None, help="strictness margin override")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="verdict JSON output path")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("simulate", help="integrate the closed loop")
    p.add_argument("--system", required=True)
    p.add_argument("--witness", default=None, help="witness JSON with breakpoints")
    p.add_argument("--breakpoints", default=None, help='explicit map, e.g. "-1,-0.5;0,0;1,0.5"')
    p.add_argument("--x0", required=True, help='initial state, e.g. "0.5,-0.5"')
    p.add_argument("--t-end", type=float, default=simulate.T_END_DEFAULT)
    p.add_argument("--dt", type=float, default=simulate.DT_DEFAULT)
    p.add_argument("--out", required=True, help="trajectory CSV output path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("demo", help="full pipeline on a built-in demo system")
    p.add_argument("name", help="dhd or dd")
    p.add_argument("--out-dir", default="demo_out")
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None):
    level = os.environ.get("LURE_LOG", "error").upper()
    logging.basicConfig(level=getattr(logging, level, logging.ERROR))
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except LurecertError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
