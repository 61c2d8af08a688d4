"""Slow, obviously-correct baselines for the recursive algorithms.

Everything here works at the level of base-frame positions of the quadrature
nodes, with all derivatives by finite differences: the generalized inertial
force as the direct Kane summation over bodies, the mass matrix from the
kinetic-energy metric, and gravity from the potential.  The same per-body
quadrature rules as the recursion are used, so the two sides discretize the
same mechanical system and agreement is limited only by differencing error.
"""

from __future__ import annotations

import numpy as np

from .dynamics import _div_green
from .kinematics import ChainModel, forward_kinematics

Array = np.ndarray

# Node accelerations use a 4th-order 5-point second difference.  The step
# balances truncation against the eps*|p|/dt^2 cancellation floor; a plain
# 3-point difference at dt = 1e-5 bottoms out near 4e-6 absolute, too coarse
# for the 1e-6 equivalence gates.
FD_TIME_STEP = 2.5e-4
FD_CONF_STEP = 1e-7


def _node_sets(chain: ChainModel):
    pts, wm = [], []
    for lk in chain.links:
        p, w = lk.body.model.nodes()
        pts.append(p)
        wm.append(w * lk.body.model.rho)
    return pts, wm


def _positions(chain: ChainModel, q: Array, pts) -> list[Array]:
    """Base-frame node positions per body, composing transforms from scratch."""
    frames = forward_kinematics(chain, q)
    out = []
    for i, lk in enumerate(chain.links):
        _, qb = chain.split(i, q)
        f = lk.body.model.position(pts[i], qb)
        out.append(frames[i]["joint"].apply(f))
    return out


def full_chain_jacobian(chain: ChainModel, q: Array, pts=None) -> list[Array]:
    """d p / d q per body by central differences, shapes (m_i, 3, n).

    Columns belonging to successor bodies are exactly zero because their
    coordinates never enter the positions of earlier bodies.
    """
    (q,) = chain.check_state(q)
    if pts is None:
        pts, _ = _node_sets(chain)
    jacs = [np.zeros((p.shape[0], 3, chain.n)) for p in pts]
    for k in range(chain.n):
        h = FD_CONF_STEP * max(1.0, abs(float(q[k])))
        dq = np.zeros(chain.n)
        dq[k] = h
        plus = _positions(chain, q + dq, pts)
        minus = _positions(chain, q - dq, pts)
        for i in range(len(chain)):
            jacs[i][:, :, k] = (plus[i] - minus[i]) / (2.0 * h)
    return jacs


def oracle_kane(chain: ChainModel, q, qd, qdd, richardson: bool = False) -> Array:
    """Direct Kane summation of the inertial forces: returns M qdd + c.

    Node accelerations come from second differences along the quadratic path
    q(t) = q + qd t + qdd t^2 / 2.
    """
    q, qd, qdd = chain.check_state(q, qd, qdd)
    pts, wm = _node_sets(chain)
    jacs = full_chain_jacobian(chain, q, pts)
    p0 = _positions(chain, q, pts)

    def at(t):
        return _positions(chain, q + t * qd + 0.5 * t * t * qdd, pts)

    def pddot(dt):
        p1, m1 = at(dt), at(-dt)
        p2, m2 = at(2.0 * dt), at(-2.0 * dt)
        return [
            (-a2 + 16.0 * a1 - 30.0 * a0 + 16.0 * b1 - b2) / (12.0 * dt * dt)
            for a2, a1, a0, b1, b2 in zip(p2, p1, p0, m1, m2)
        ]

    pdd = pddot(FD_TIME_STEP)
    if richardson:
        fine = pddot(FD_TIME_STEP / 2.0)
        pdd = [(16.0 * f - c) / 15.0 for f, c in zip(fine, pdd)]

    out = np.zeros(chain.n)
    for i in range(len(chain)):
        out += np.einsum("m,maj,ma->j", wm[i], jacs[i], pdd[i])
    return out


def oracle_mass(chain: ChainModel, q) -> Array:
    """Kinetic-energy metric M = sum_j int (dp/dq)^T (dp/dq) dm, symmetric."""
    (q,) = chain.check_state(q)
    pts, wm = _node_sets(chain)
    jacs = full_chain_jacobian(chain, q, pts)
    M = np.zeros((chain.n, chain.n))
    for i in range(len(chain)):
        M += np.einsum("m,maj,mak->jk", wm[i], jacs[i], jacs[i])
    return 0.5 * (M + M.T)


def oracle_potential(chain: ChainModel, q) -> tuple[Array, float]:
    """Generalized gravity force and potential energy U = -sum int g.p dm."""
    (q,) = chain.check_state(q)
    pts, wm = _node_sets(chain)

    def U(qv):
        pos = _positions(chain, qv, pts)
        return -sum(w @ (p @ chain.gravity) for w, p in zip(wm, pos))

    g = np.zeros(chain.n)
    for k in range(chain.n):
        h = FD_CONF_STEP * max(1.0, abs(float(q[k])))
        dq = np.zeros(chain.n)
        dq[k] = h
        g[k] = (U(q + dq) - U(q - dq)) / (2.0 * h)
    return g, float(U(q))


def oracle_stress(chain: ChainModel, q, qd) -> Array:
    """Generalized stress force by full-chain projection of the densities.

    Shares the constitutive evaluation with the recursion (the force law is
    part of the model) but projects it through finite-difference full-chain
    Jacobians instead of the backward recursion.
    """
    q, qd = chain.check_state(q, qd)
    pts, _ = _node_sets(chain)
    jacs = full_chain_jacobian(chain, q, pts)
    frames = forward_kinematics(chain, q)
    out = np.zeros(chain.n)
    for i, lk in enumerate(chain.links):
        model = lk.body.model
        if model.elastic_modulus is None:
            continue
        _, qb = chain.split(i, q)
        _, qdb = chain.split(i, qd)
        _, w = model.nodes()
        dens = 2.0 * model.elastic_modulus * _div_green(model, pts[i], qb)
        speed = float(np.linalg.norm(qdb))
        if model.viscosity is not None and speed > 0.0:
            h = 1e-6 * max(1.0, float(np.linalg.norm(qb)))
            unit = qdb / speed
            ddiv = (speed / (2.0 * h)) * (
                _div_green(model, pts[i], qb + h * unit)
                - _div_green(model, pts[i], qb - h * unit)
            )
            dens = dens + model.viscosity * model.elastic_modulus * ddiv
        dens_base = dens @ frames[i]["joint"].rotation.T
        out -= np.einsum("m,maj,ma->j", w, jacs[i], dens_base)
    return out
