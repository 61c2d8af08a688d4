"""Command-line front end.

Grammar: ``softid <validate|eval|verify|simulate|statics|benchmark> [flags] MODEL.json``.

Exit codes: 0 success, 2 validation failure, 3 numerical verification
failure, 4 non-convergence.  All randomness is seeded through ``--seed``;
configuration comes from explicit flags only.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import model_io, oracle
from .dynamics import chain_dynamics
from .errors import SoftIDError
from .harness import benchmark_scaling, simulate, solve_statics
from .verify import run_suite

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_NONCONVERGENCE = 4

VERIFY_MAX_DOF = 24


def _load_model(args):
    chain = model_io.load_chain(args.model)
    if args.quadrature_order is not None:
        order = args.quadrature_order
        order = int(order[0]) if len(order) == 1 else tuple(int(o) for o in order)
        for lk in chain.links:
            lk.body.model.quadrature_order = order
            lk.body.model._node_cache = None
    if args.fd_step is not None:
        oracle.FD_CONF_STEP = float(args.fd_step)
    return chain


def _load_state(path, n):
    with open(path) as fh:
        doc = json.load(fh)
    out = []
    for key in ("q", "qd", "qdd"):
        v = np.asarray(doc.get(key, np.zeros(n)), dtype=float)
        if v.shape != (n,):
            raise model_io.ModelError(f"state field {key!r} must have length {n}, got {v.shape}")
        out.append(v)
    return out


def _write_json(path, payload):
    text = json.dumps(payload, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def cmd_validate(args) -> int:
    try:
        with open(args.model) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    findings = model_io.validate_document(doc)
    if findings:
        for line in findings:
            print(f"error: {line}", file=sys.stderr)
        return EXIT_VALIDATION
    chain = model_io.parse_chain(doc)
    print(model_io.summarize(chain))
    return EXIT_OK


def cmd_eval(args) -> int:
    chain = _load_model(args)
    q, qd, qdd = _load_state(args.state, chain.n)
    want_mass = args.algorithm in ("miid", "mid")
    inertial_only = args.algorithm in ("iid", "miid")
    t0 = time.perf_counter()
    res = chain_dynamics(chain, q, qd, qdd,
                         gravity=not inertial_only, stress=not inertial_only,
                         mass=want_mass)
    elapsed = time.perf_counter() - t0
    payload = {
        "model": str(args.model),
        "algorithm": args.algorithm,
        "q": q.tolist(), "qd": qd.tolist(), "qdd": qdd.tolist(),
        "force": res.force.tolist(),
        "elapsed_seconds": elapsed,
    }
    if want_mass:
        payload["mass_matrix"] = res.mass.tolist()
    _write_json(args.output, payload)
    return EXIT_OK


def cmd_verify(args) -> int:
    chain = _load_model(args)
    if chain.n > VERIFY_MAX_DOF:
        print(f"error: verify is limited to n <= {VERIFY_MAX_DOF} dof "
              f"(oracle cost); model has n = {chain.n}", file=sys.stderr)
        return EXIT_VALIDATION
    results = run_suite(chain, trials=args.trials, seed=args.seed)
    failed = False
    for r in results:
        print(r)
        failed |= not r.passed
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_simulate(args) -> int:
    chain = _load_model(args)
    q0 = np.zeros(chain.n) if args.state is None else _load_state(args.state, chain.n)[0]
    qd0 = np.zeros(chain.n) if args.state is None else _load_state(args.state, chain.n)[1]
    traj = simulate(chain, q0, qd0, t_end=args.t_end, dt=args.dt, method=args.method)
    n = chain.n
    header = (["t"] + [f"q{i}" for i in range(n)] + [f"qd{i}" for i in range(n)]
              + ["kinetic", "potential", "dissipated"])
    rows = np.column_stack([traj.t, traj.q, traj.qd, traj.kinetic, traj.potential, traj.dissipated])
    _write_csv(args.output, header, rows)
    if traj.aborted_at is not None:
        print(f"error: simulation aborted at step {traj.aborted_at} (non-finite state)",
              file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


def cmd_statics(args) -> int:
    chain = _load_model(args)
    q_guess = np.zeros(chain.n) if args.state is None else _load_state(args.state, chain.n)[0]
    res = solve_statics(chain, q_guess=q_guess, tol=args.tol)
    payload = {
        "model": str(args.model),
        "q_eq": res.q.tolist(),
        "converged": res.converged,
        "residual_norm": res.residual_norm,
        "iterations": res.iterations,
    }
    _write_json(args.output, payload)
    return EXIT_OK if res.converged else EXIT_NONCONVERGENCE


def cmd_benchmark(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",")]
    if args.jobs != 1:
        print("note: --jobs > 1 degrades timing fidelity; running sequentially",
              file=sys.stderr)
    rows = benchmark_scaling(sizes, trials=args.trials, seed=args.seed)
    header = ["n_bodies", "build_seconds", "recursive_median_ns", "recursive_std_ns",
              "oracle_median_ns", "oracle_std_ns", "rel_diff_mean", "rel_diff_std"]
    table = [[r.n_bodies, r.build_seconds, r.recursive_median_ns, r.recursive_std_ns,
              r.oracle_median_ns, r.oracle_std_ns, r.rel_diff_mean, r.rel_diff_std]
             for r in rows]
    _write_csv(args.output, header, np.asarray(table, dtype=float))
    return EXIT_OK


def _write_csv(path, header, rows):
    fh = sys.stdout if path is None else open(path, "w", newline="")
    try:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in np.atleast_2d(rows):
            writer.writerow([repr(float(v)) for v in row])
    finally:
        if path is not None:
            fh.close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softid",
        description="Recursive inverse dynamics for serial soft-rigid chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        if model:
            p.add_argument("model", help="chain description JSON file")
        p.add_argument("--quadrature-order", type=float, nargs="+", default=None,
                       metavar="N", help="override per-body quadrature order (1 or 3 values)")
        p.add_argument("--fd-step", type=float, default=None,
                       help="override the oracle configuration FD step")
        p.add_argument("--seed", type=int, default=0, help="RNG seed for sampled states")
        p.add_argument("-o", "--output", default=None, help="output file (default stdout)")

    p = sub.add_parser("validate", help="parse a model file and check its invariants")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("eval", help="evaluate one algorithm at a state")
    common(p)
    p.add_argument("--algorithm", choices=("iid", "id", "miid", "mid"), required=True)
    p.add_argument("--state", required=True, help="JSON file with q, qd, qdd arrays")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("verify", help="run the numerical verification suite")
    common(p)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", help="integrate free evolution and export CSV")
    common(p)
    p.add_argument("--state", default=None, help="JSON file with initial q, qd")
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--method", choices=("rk4", "semi_implicit"), default="rk4")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("statics", help="solve the unactuated equilibrium")
    common(p)
    p.add_argument("--state", default=None, help="JSON file with the initial guess q")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_statics)

    p = sub.add_parser("benchmark", help="scaling benchmark over planar chains")
    common(p, model=False)
    p.add_argument("--sizes", default="2,4,8", help="comma-separated body counts")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1,
                   help="worker count (kept at 1 for timing fidelity)")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except model_io.ModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SoftIDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
