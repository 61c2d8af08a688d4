"""Forward dynamics, time integration, statics, regulation, and benchmarks.

Forward dynamics follows the two-step scheme: one mass-augmented inverse
dynamics call at zero acceleration gives the bias force c + g + s together
with M(q), and a positive-definite solve returns the acceleration.

The energy ledger tracks kinetic energy, potential energy (gravity plus the
accumulated work done against the stress field), and dissipated energy (the
accumulated work of the viscous forces).  The stress force of the
incompressible Neo-Hookean density is not an exact gradient, so stored
stress energy is bookkept as a work integral; with zero input this makes
kinetic + potential non-increasing by exactly the dissipated work, up to
integrator error.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .dynamics import chain_dynamics, inverse_dynamics
from .errors import SingularMassError, SoftIDError
from .kinematics import ChainModel
from .oracle import oracle_kane

Array = np.ndarray

logger = logging.getLogger(__name__)


def _solve_spd(M: Array, rhs: Array) -> Array:
    try:
        return cho_solve(cho_factor(M), rhs)
    except LinAlgError as exc:
        smallest = float(np.linalg.eigvalsh(M)[0])
        raise SingularMassError(
            f"mass matrix is not positive definite (smallest eigenvalue {smallest:.3e})",
            smallest_eigenvalue=smallest,
        ) from exc


def forward_dynamics(chain: ChainModel, q, qd, nu=None) -> Array:
    """Acceleration from the two-step scheme: solve M qdd = nu - (c + g + s)."""
    q, qd, nu = chain.check_state(q, qd, nu)
    res = chain_dynamics(chain, q, qd, None, mass=True)
    return _solve_spd(res.mass, nu - res.force)


def gravitational_energy(chain: ChainModel, cache) -> float:
    """Potential energy of gravity from a forward-pass cache."""
    u = 0.0
    for kin in cache.bodies:
        p = kin.t_base + kin.R_base @ kin.data.p_com
        u -= kin.data.mass * float(chain.gravity @ p)
    return u


@dataclass
class Trajectory:
    """Simulation record on a strictly increasing time grid."""

    t: Array
    q: Array
    qd: Array
    nu: Array
    kinetic: Array
    potential: Array
    dissipated: Array
    aborted_at: int | None = None

    @property
    def total_energy(self) -> Array:
        return self.kinetic + self.potential

    def __len__(self) -> int:
        return self.t.shape[0]


def _force_jacobians(chain, q, qd, nu_fixed, h=1e-5):
    """Stiffness K = dF/dq and damping D = dF/dqd of the bias force F = c+g+s."""
    n = chain.n
    K = np.empty((n, n))
    D = np.empty((n, n))
    for k in range(n):
        dq = np.zeros(n)
        dq[k] = h * max(1.0, abs(float(q[k])))
        fp = chain_dynamics(chain, q + dq, qd, None).force
        fm = chain_dynamics(chain, q - dq, qd, None).force
        K[:, k] = (fp - fm) / (2.0 * dq[k])
        dv = np.zeros(n)
        dv[k] = h * max(1.0, abs(float(qd[k])))
        fp = chain_dynamics(chain, q, qd + dv, None).force
        fm = chain_dynamics(chain, q, qd - dv, None).force
        D[:, k] = (fp - fm) / (2.0 * dv[k])
    return K, D


def simulate(
    chain: ChainModel,
    q0,
    qd0,
    controller=None,
    t_end: float = 1.0,
    dt: float = 1e-3,
    method: str = "rk4",
    jacobian_every: int = 5,
) -> Trajectory:
    """Fixed-step integration of the chain under a state-feedback controller.

    ``controller(t, q, qd) -> nu`` or None for free evolution.  ``method``:

    - ``rk4``: explicit fourth order; the step must resolve the fastest
      mode, which GPa-stiff Kelvin-Voigt materials push to ~1e-7 s.
    - ``semi_implicit``: linearly-implicit Euler treating the
      finite-differenced stiffness and damping of the bias force implicitly,
      (M + dt D + dt^2 K) qd+ = (M + dt D) qd + dt (nu - F); stable at
      settling-scale steps for stiff materials.  The linearization is
      refreshed every ``jacobian_every`` steps.

    Aborts on a non-finite state, returning the trajectory up to the last
    valid step with ``aborted_at`` set.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if method not in ("rk4", "semi_implicit"):
        raise ValueError(f"unknown integration method {method!r}")
    q, qd = (v.copy() for v in chain.check_state(q0, qd0))
    steps = int(round(t_end / dt))
    n = chain.n
    ts = np.empty(steps + 1)
    qs = np.empty((steps + 1, n))
    qds = np.empty((steps + 1, n))
    nus = np.zeros((steps + 1, n))
    kin_e = np.empty(steps + 1)
    pot_e = np.empty(steps + 1)
    diss = np.zeros(steps + 1)

    zero = np.zeros(n)

    def control(t, q, qd):
        return zero if controller is None else np.asarray(controller(t, q, qd), dtype=float)

    def eval_dyn(t, q, qd):
        nu = control(t, q, qd)
        res = chain_dynamics(chain, q, qd, None, mass=True)
        qdd = _solve_spd(res.mass, nu - res.force)
        return qdd, res, nu

    def powers(res, qd):
        return (float(qd @ res.components["elastic"]),
                float(qd @ res.components["damping"]))

    aborted = None
    stress_work = 0.0
    diss_acc = 0.0
    K = D = None
    q_lin = qd_lin = None
    for k in range(steps + 1):
        t = k * dt
        qdd1, res1, nu1 = eval_dyn(t, q, qd)
        ts[k] = t
        qs[k] = q
        qds[k] = qd
        nus[k] = nu1
        kin_e[k] = 0.5 * float(qd @ res1.mass @ qd)
        pot_e[k] = gravitational_energy(chain, res1.cache) + stress_work
        diss[k] = diss_acc
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qd))):
            aborted = k
            logger.warning("simulation aborted at step %d: non-finite state", k)
            break
        if k == steps:
            break

        p1 = powers(res1, qd)
        if method == "semi_implicit":
            # refresh the linearization after drifting away from its state
            stale = (
                K is None
                or k % max(jacobian_every, 1) == 0
                or np.linalg.norm(q - q_lin) > 0.02 * max(1.0, np.linalg.norm(q_lin))
                or np.linalg.norm(qd - qd_lin) > 0.1 * max(1.0, np.linalg.norm(qd_lin))
            )
            if stale:
                K, D = _force_jacobians(chain, q, qd, nu1)
                q_lin, qd_lin = q.copy(), qd.copy()
            M = res1.mass
            lhs = M + dt * D + dt * dt * K
            rhs = (M + dt * D) @ qd + dt * (nu1 - res1.force)
            qd = np.linalg.solve(lhs, rhs)
            q = q + dt * qd
            res2 = chain_dynamics(chain, q, qd, None)
            p2 = powers(res2, qd)
            stress_work += 0.5 * dt * (p1[0] + p2[0])
            diss_acc += 0.5 * dt * (p1[1] + p2[1])
        else:
            # work integrals ride the same RK4 stages as the state
            k1q, k1v = qd, qdd1
            qd2 = qd + dt / 2 * k1v
            k2v, res2, _ = eval_dyn(t + dt / 2, q + dt / 2 * k1q, qd2)
            p2 = powers(res2, qd2)
            k2q = qd2
            qd3 = qd + dt / 2 * k2v
            k3v, res3, _ = eval_dyn(t + dt / 2, q + dt / 2 * k2q, qd3)
            p3 = powers(res3, qd3)
            k3q = qd3
            qd4 = qd + dt * k3v
            k4v, res4, _ = eval_dyn(t + dt, q + dt * k3q, qd4)
            p4 = powers(res4, qd4)
            k4q = qd4
            q = q + dt / 6 * (k1q + 2 * k2q + 2 * k3q + k4q)
            qd = qd + dt / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
            stress_work += dt / 6 * (p1[0] + 2 * p2[0] + 2 * p3[0] + p4[0])
            diss_acc += dt / 6 * (p1[1] + 2 * p2[1] + 2 * p3[1] + p4[1])

    last = aborted if aborted is not None else steps
    sl = slice(0, last + 1)
    return Trajectory(
        t=ts[sl], q=qs[sl], qd=qds[sl], nu=nus[sl],
        kinetic=kin_e[sl], potential=pot_e[sl], dissipated=diss[sl],
        aborted_at=aborted,
    )


# -- statics ---------------------------------------------------------------------

@dataclass
class StaticsResult:
    q: Array
    converged: bool
    residual_norm: float
    iterations: int


def solve_statics(
    chain: ChainModel,
    actuation=None,
    u=None,
    q_guess=None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> StaticsResult:
    """Newton-Raphson on the equilibrium residual ID(q, 0, 0) - A(q) u.

    ``u`` may be a constant input vector or a callable u(q) (regulator).
    The Jacobian is finite-differenced from the residual; steps use a
    backtracking line search on its norm.  On non-convergence the best
    iterate is returned with ``converged = False``.
    """
    (q,) = chain.check_state(q_guess)
    q = q.copy()
    n = chain.n

    def residual(qv):
        """Equilibrium residual; None marks an unevaluable trial point."""
        try:
            r = inverse_dynamics(chain, qv, None, None)
            if actuation is not None:
                uv = u(qv) if callable(u) else (np.zeros(actuation.n_inputs) if u is None else np.asarray(u, dtype=float))
                r = r - actuation.matrix(chain, qv) @ uv
        except (SoftIDError, AssertionError, np.linalg.LinAlgError):
            return None
        return r if np.all(np.isfinite(r)) else None

    r = residual(q)
    if r is None:
        raise ValueError("statics residual is not evaluable at the initial guess")
    best = (np.linalg.norm(r), q.copy())
    step_cap = max(2.0, 0.5 * float(np.linalg.norm(q)))
    for it in range(1, max_iter + 1):
        rn = np.linalg.norm(r)
        if rn < tol:
            return StaticsResult(q=q, converged=True, residual_norm=float(rn), iterations=it - 1)
        J = np.empty((n, n))
        for k in range(n):
            h = 1e-6 * max(1.0, abs(float(q[k])))
            dq = np.zeros(n)
            dq[k] = h
            rp, rm = residual(q + dq), residual(q - dq)
            if rp is None or rm is None:
                h *= 1e-2
                dq[k] = h
                rp, rm = residual(q + dq), residual(q - dq)
            J[:, k] = (rp - rm) / (2.0 * h)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        norm = float(np.linalg.norm(step))
        if norm > step_cap:
            step *= step_cap / norm
        alpha = 1.0
        q_new, r_new = q, r
        while alpha > 1e-6:
            cand = q + alpha * step
            r_cand = residual(cand)
            if r_cand is not None and np.linalg.norm(r_cand) < (1.0 - 1e-4 * alpha) * rn:
                q_new, r_new = cand, r_cand
                break
            alpha *= 0.5
        else:
            cand = q + 1e-6 * step
            r_cand = residual(cand)
            if r_cand is not None:
                q_new, r_new = cand, r_cand
        q, r = q_new, r_new
        if np.linalg.norm(r) < best[0]:
            best = (np.linalg.norm(r), q.copy())
    logger.warning("statics did not converge: best residual %.3e", best[0])
    return StaticsResult(q=best[1], converged=False, residual_norm=float(best[0]), iterations=max_iter)


# -- PD+ regulation ---------------------------------------------------------------

def pd_plus(q_d, q, qd, kp, kd, feedforward) -> Array:
    """PD action about the setpoint plus the potential-force feedforward.

    ``feedforward`` is ID(q_d, 0, 0), computed once per setpoint.
    """
    q_d, q, qd = (np.asarray(v, dtype=float) for v in (q_d, q, qd))
    kp = np.asarray(kp, dtype=float)
    kd = np.asarray(kd, dtype=float)
    return kp * (q_d - q) - kd * qd + np.asarray(feedforward, dtype=float)


class PDPlusController:
    """Stateful PD+ regulator caching the feedforward per setpoint.

    Gains are diagonal, given as scalars or per-coordinate vectors; the
    setpoint may be changed on the fly (step references).
    """

    def __init__(self, chain: ChainModel, kp, kd, q_d=None):
        self.chain = chain
        self.kp = np.broadcast_to(np.asarray(kp, dtype=float), (chain.n,)).copy()
        self.kd = np.broadcast_to(np.asarray(kd, dtype=float), (chain.n,)).copy()
        if np.any(self.kp <= 0) or np.any(self.kd <= 0):
            raise ValueError("PD+ gains must be positive")
        self.q_d = None
        self.feedforward = None
        if q_d is not None:
            self.set_setpoint(q_d)

    def set_setpoint(self, q_d):
        (q_d,) = self.chain.check_state(q_d)
        self.q_d = q_d
        self.feedforward = inverse_dynamics(self.chain, q_d, None, None)

    def __call__(self, t, q, qd) -> Array:
        if self.q_d is None:
            raise ValueError("setpoint not set")
        return pd_plus(self.q_d, q, qd, self.kp, self.kd, self.feedforward)


# -- scaling benchmark --------------------------------------------------------------

@dataclass
class BenchmarkRow:
    n_bodies: int
    build_seconds: float
    recursive_median_ns: float
    recursive_std_ns: float
    oracle_median_ns: float
    oracle_std_ns: float
    rel_diff_mean: float
    rel_diff_std: float


def benchmark_scaling(
    body_counts,
    trials: int = 10,
    seed: int = 0,
    quadrature_order=(2, 8, 6),
    chain_factory=None,
) -> list[BenchmarkRow]:
    """Median wall times of the recursive IID against the direct Kane oracle.

    States are drawn uniformly from q in [-pi, pi], qd in [-10, 10],
    qdd in [-100, 100] per coordinate.  ``chain_factory(N)`` defaults to
    planar constant-curvature chains.  Model construction time is reported
    but not comparable across toolchains (no symbolic stage here).
    """
    if trials < 10:
        raise ValueError("benchmark needs at least 10 trials")
    if chain_factory is None:
        from .presets import planar_pcc_chain

        def chain_factory(N):
            return planar_pcc_chain(N, quadrature_order=quadrature_order)

    rng = np.random.default_rng(seed)
    rows = []
    for N in body_counts:
        t0 = time.perf_counter()
        chain = chain_factory(int(N))
        build = time.perf_counter() - t0
        n = chain.n
        states = [
            (rng.uniform(-np.pi, np.pi, n), rng.uniform(-10, 10, n), rng.uniform(-100, 100, n))
            for _ in range(trials)
        ]
        from .dynamics import iid

        iid(chain, *states[0])  # warm node caches
        t_rec, t_orc, rel = [], [], []
        for q, qd, qdd in states:
            t0 = time.perf_counter_ns()
            a = iid(chain, q, qd, qdd)
            t_rec.append(time.perf_counter_ns() - t0)
            t0 = time.perf_counter_ns()
            b = oracle_kane(chain, q, qd, qdd)
            t_orc.append(time.perf_counter_ns() - t0)
            rel.append(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))
        rows.append(BenchmarkRow(
            n_bodies=int(N),
            build_seconds=build,
            recursive_median_ns=float(np.median(t_rec)),
            recursive_std_ns=float(np.std(t_rec)),
            oracle_median_ns=float(np.median(t_orc)),
            oracle_std_ns=float(np.std(t_orc)),
            rel_diff_mean=float(np.mean(rel)),
            rel_diff_std=float(np.std(rel)),
        ))
    return rows
