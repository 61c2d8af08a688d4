"""Numerical verification suite run by the CLI and the acceptance tests.

Each check returns a CheckResult; the suite passes when all do.  Tolerances
are the acceptance values: oracle equivalence at 1e-6 relative, mass-matrix
symmetry at 1e-9, column assembly at 1e-10, superposition at 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import backward_recursion, chain_dynamics, iid, inverse_dynamics, miid
from .harness import forward_dynamics, simulate
from .kinematics import ChainModel, forward_pass
from .oracle import oracle_kane, oracle_mass, oracle_potential, oracle_stress

Array = np.ndarray

TOL_ORACLE = 1e-6
TOL_SYMMETRY = 1e-9
TOL_COLUMNS = 1e-10
TOL_LINEARITY = 1e-12
TOL_TRIVIAL = 1e-12
TOL_ROUNDTRIP = 1e-7
TOL_GRAVITY_TRICK = 1e-10


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __str__(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.detail}"


def _sample(rng, n):
    return (rng.uniform(-np.pi, np.pi, n),
            rng.uniform(-10.0, 10.0, n),
            rng.uniform(-100.0, 100.0, n))


def _rel(a, b, floor=1e-12):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), floor))


def check_trivial_identities(chain: ChainModel, rng, trials=5) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        q, _, _ = _sample(rng, chain.n)
        scale = max(1.0, float(np.linalg.norm(oracle_mass(chain, q))))
        worst = max(worst, float(np.linalg.norm(iid(chain, q, None, None))) / scale)
        res = chain_dynamics(chain, q, None, None)
        gs = res.components["gravity"] + res.components["elastic"] + res.components["damping"]
        worst = max(worst, float(np.linalg.norm(res.force - gs)) / max(1.0, np.linalg.norm(gs)))
    return CheckResult("trivial identities (IID(q,0,0)=0, ID(q,0,0)=g+s)",
                       worst <= TOL_TRIVIAL, f"worst residual {worst:.2e} (tol {TOL_TRIVIAL:.0e})")


def check_oracle_equivalence(chain: ChainModel, rng, trials=20) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        q, qd, qdd = _sample(rng, chain.n)
        worst = max(worst, _rel(iid(chain, q, qd, qdd), oracle_kane(chain, q, qd, qdd)))
    return CheckResult("oracle equivalence (IID vs direct Kane summation)",
                       worst <= TOL_ORACLE, f"worst relative error {worst:.2e} (tol {TOL_ORACLE:.0e})")


def check_mass_matrix(chain: ChainModel, rng, trials=5) -> CheckResult:
    worst_sym = worst_col = worst_orc = 0.0
    spd = True
    eye = np.eye(chain.n)
    for _ in range(trials):
        q, _, _ = _sample(rng, chain.n)
        M = miid(chain, q, None, None).mass
        worst_sym = max(worst_sym, float(np.linalg.norm(M - M.T) / np.linalg.norm(M)))
        cols = np.column_stack([iid(chain, q, None, e) for e in eye])
        worst_col = max(worst_col, _rel(M, cols))
        worst_orc = max(worst_orc, _rel(M, oracle_mass(chain, q)))
        try:
            np.linalg.cholesky(0.5 * (M + M.T))
        except np.linalg.LinAlgError:
            spd = False
    ok = worst_sym <= TOL_SYMMETRY and worst_col <= TOL_COLUMNS and worst_orc <= 1e-8 and spd
    return CheckResult(
        "mass matrix (symmetry, column assembly, oracle, Cholesky)",
        ok,
        f"sym {worst_sym:.2e}, columns {worst_col:.2e}, oracle {worst_orc:.2e}, spd={spd}",
    )


def check_linearity(chain: ChainModel, rng, trials=5) -> CheckResult:
    """Superposition of the backward recursion in all wrench arguments."""
    q, _, _ = _sample(rng, chain.n)
    cache = forward_pass(chain, q, None, None, base_accel=np.zeros(3))
    worst = 0.0
    for _ in range(trials):
        w1 = [tuple(rng.normal(size=3) for _ in range(4)) for _ in chain.links]
        w2 = [tuple(rng.normal(size=3) for _ in range(4)) for _ in chain.links]
        a, b = rng.normal(), rng.normal()
        mixed = [tuple(a * x + b * y for x, y in zip(t1, t2)) for t1, t2 in zip(w1, w2)]
        m1 = backward_recursion(chain, w1, cache)
        m2 = backward_recursion(chain, w2, cache)
        mm = backward_recursion(chain, mixed, cache)
        for i in range(len(chain)):
            ref = a * m1[i] + b * m2[i]
            worst = max(worst, float(np.linalg.norm(mm[i] - ref) / max(1.0, np.linalg.norm(ref))))
    return CheckResult("wrench-recursion superposition",
                       worst <= TOL_LINEARITY, f"worst residual {worst:.2e} (tol {TOL_LINEARITY:.0e})")


def check_gravity(chain: ChainModel, rng, trials=5) -> CheckResult:
    worst_pot = worst_trick = 0.0
    for _ in range(trials):
        q, qd, qdd = _sample(rng, chain.n)
        res = chain_dynamics(chain, q, None, None, stress=False)
        g_oracle, _ = oracle_potential(chain, q)
        worst_pot = max(worst_pot, _rel(res.force, g_oracle, floor=1.0))
        explicit = chain_dynamics(chain, q, qd, qdd, stress=False).force
        trick = iid(chain, q, qd, qdd, base_accel=-chain.gravity)
        worst_trick = max(worst_trick, _rel(explicit, trick, floor=1.0))
    ok = worst_pot <= TOL_ORACLE and worst_trick <= TOL_GRAVITY_TRICK
    return CheckResult("gravity (potential gradient, base-acceleration trick)",
                       ok, f"potential {worst_pot:.2e}, trick {worst_trick:.2e}")


def check_stress(chain: ChainModel, rng, trials=5) -> CheckResult:
    if all(lk.body.model.elastic_modulus is None for lk in chain.links):
        return CheckResult("stress projection", True, "no visco-elastic bodies, skipped")
    worst = 0.0
    for _ in range(trials):
        q, qd, _ = _sample(rng, chain.n)
        res = chain_dynamics(chain, q, qd, None)
        s_rec = res.components["elastic"] + res.components["damping"]
        s_orc = oracle_stress(chain, q, qd)
        worst = max(worst, _rel(s_rec, s_orc, floor=1.0))
    return CheckResult("stress projection vs full-chain oracle",
                       worst <= TOL_ORACLE, f"worst relative error {worst:.2e}")


def check_roundtrip(chain: ChainModel, rng, trials=5) -> CheckResult:
    worst = 0.0
    for _ in range(trials):
        q, qd, qdd = _sample(rng, chain.n)
        nu = inverse_dynamics(chain, q, qd, qdd)
        back = forward_dynamics(chain, q, qd, nu)
        worst = max(worst, _rel(back, qdd, floor=1.0))
    return CheckResult("ID/FD round trip", worst <= TOL_ROUNDTRIP,
                       f"worst relative error {worst:.2e} (tol {TOL_ROUNDTRIP:.0e})")


def check_energy(chain: ChainModel, rng, steps=200, dt=1e-4) -> CheckResult:
    """Energy balance of a short free evolution: dE = -d(dissipated)."""
    q0 = 0.05 * rng.standard_normal(chain.n)
    traj = simulate(chain, q0, np.zeros(chain.n), t_end=steps * dt, dt=dt)
    if traj.aborted_at is not None:
        return CheckResult("energy balance", False, f"simulation aborted at step {traj.aborted_at}")
    e = traj.total_energy
    balance = (e - e[0]) + traj.dissipated
    scale = max(float(np.max(np.abs(e - e[0]))), float(traj.kinetic.max()), 1e-12)
    worst = float(np.max(np.abs(balance))) / scale
    return CheckResult("energy balance (dE = -dissipated, free evolution)",
                       worst <= 1e-3, f"relative balance defect {worst:.2e}")


def run_suite(chain: ChainModel, trials: int = 20, seed: int = 0) -> list[CheckResult]:
    """Full verification: oracle equivalence, symmetry, linearity, energy."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    small = max(3, trials // 4)
    return [
        check_trivial_identities(chain, rng, small),
        check_oracle_equivalence(chain, rng, trials),
        check_mass_matrix(chain, rng, small),
        check_linearity(chain, rng, small),
        check_gravity(chain, rng, small),
        check_stress(chain, rng, small),
        check_roundtrip(chain, rng, small),
        check_energy(chain, rng),
    ]
