"""Quadrature evaluation of the per-body inertial integrals.

All quantities live in the body's contact frame {S_i} and split every point
as p = r + p_com with the discrete centroid property sum(w r rho) = 0 holding
to machine precision, because the center of mass is computed with the same
rule.  Velocities of material points are configuration-Jacobian contractions
r_dot = (dr/dq) qd; accelerations add the Jacobian rate obtained by central
differencing the analytic Jacobian along the velocity direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CentroidConsistencyError
from ..spatial import cross

Array = np.ndarray

JAC_RATE_STEP = 1e-6
CENTROID_TOL = 1e-6


@dataclass
class BodyInertialData:
    """Inertial integrals of one body at a given (q, qd, qdd).

    Shapes use n for the body dof count; Jacobian-like quantities are zero
    for rigid bodies (n = 0).
    """

    mass: float
    p_com: Array          # (3,) center of mass in {S_i}
    pdot_com: Array       # (3,)
    pddot_com: Array      # (3,)
    jac_com: Array        # (3, n) d p_com / d q
    jacdot_com: Array     # (3, n)
    inertia: Array        # (3, 3) about the CoM
    inertia_rate: Array   # (3, 3)
    mom_rd: Array         # (3,)  integral of r x r_dot dm
    mom_rdd: Array        # (3,)  integral of r x r_ddot dm
    jac_mom_rd: Array     # (3, n) integral of skew(r) dr/dq dm
    proj_rdd: Array       # (n,)  integral of (dr/dq)^T r_ddot dm
    proj_cor: Array       # (n, 3) integral of (dr/dq)^T skew(r_dot) dm
    inertia_grad: Array   # (n, 3, 3) d inertia / d q_k
    gram: Array           # (n, n) integral of (dr/dq)^T (dr/dq) dm
    # node-level arrays kept for the stress pass and diagnostics
    nodes: Array = field(repr=False, default=None)
    weights_mass: Array = field(repr=False, default=None)
    framed_points: Array = field(repr=False, default=None)
    framed_jac: Array = field(repr=False, default=None)
    r: Array = field(repr=False, default=None)
    rdot: Array = field(repr=False, default=None)


def body_integrals(body, qb, qdb=None, qddb=None, order=None) -> BodyInertialData:
    """Evaluate all inertial integrals of ``body`` at one configuration state.

    ``body`` is a framed body (kinematics.BodyHandle); a bare body model is
    accepted and treated as free-tip (identity contact frame).
    """
    from ..kinematics import BodyHandle

    handle = body if isinstance(body, BodyHandle) else BodyHandle(body, free_tip=True)
    model = handle.model
    n = model.n_dof
    qb = model.check_q(qb if qb is not None else np.zeros(n))
    qdb = np.zeros(n) if qdb is None else np.asarray(qdb, dtype=float)
    qddb = np.zeros(n) if qddb is None else np.asarray(qddb, dtype=float)

    # rigid bodies have configuration-independent integrals
    rigid_key = None
    if n == 0:
        rigid_key = (float(model.rho), repr(order if order is not None else model.quadrature_order))
        cached = getattr(handle, "_rigid_cache", None)
        if cached is not None and cached[0] == rigid_key:
            return cached[1]

    if order is None:
        pts, w = model.nodes()
    else:
        pts, w = model.domain.nodes(order)
    wm = w * model.rho
    mass = float(wm.sum())

    ip, Jp = handle.framed_jacobian(pts, qb)
    speed = float(np.linalg.norm(qdb)) if n else 0.0
    if speed > 0.0:
        # difference along the unit direction and scale by the speed: the
        # Jacobian rate is linear in qd, and a fixed-size perturbation keeps
        # the cancellation noise independent of |qd|
        h = JAC_RATE_STEP * max(1.0, float(np.linalg.norm(qb)))
        unit = qdb / speed
        _, Jp_p = handle.framed_jacobian(pts, qb + h * unit)
        _, Jp_m = handle.framed_jacobian(pts, qb - h * unit)
        Jp_dot = (speed / (2.0 * h)) * (Jp_p - Jp_m)
    else:
        Jp_dot = np.zeros_like(Jp)

    p_com = (wm @ ip) / mass
    jac_com = np.einsum("m,maj->aj", wm, Jp) / mass
    jacdot_com = np.einsum("m,maj->aj", wm, Jp_dot) / mass
    r = ip - p_com
    Jr = Jp - jac_com
    Jr_dot = Jp_dot - jacdot_com

    pdot_com = jac_com @ qdb
    pddot_com = jac_com @ qddb + jacdot_com @ qdb
    rdot = np.einsum("maj,j->ma", Jr, qdb)
    rddot = np.einsum("maj,j->ma", Jr, qddb) + np.einsum("maj,j->ma", Jr_dot, qdb)

    scale = mass * max(model.domain.length_scale, 1e-12)
    rate_scale = scale * max(1.0, float(np.linalg.norm(qdb)))
    res_r = np.linalg.norm(wm @ r)
    res_rd = np.linalg.norm(wm @ rdot)
    if not np.isfinite(res_r + res_rd) or res_r > CENTROID_TOL * scale or res_rd > CENTROID_TOL * rate_scale:
        raise CentroidConsistencyError(
            f"centroid integrals violated: |int r dm| = {res_r:.3e}, "
            f"|int r_dot dm| = {res_rd:.3e} (limit {CENTROID_TOL * scale:.3e}); "
            "quadrature rule too coarse or body map returned non-finite values"
        )

    rr = np.einsum("m,ma,mb->ab", wm, r, r)
    inertia = np.trace(rr) * np.eye(3) - rr
    r_rd = np.einsum("m,ma,mb->ab", wm, rdot, r)
    inertia_rate = 2.0 * np.trace(r_rd) * np.eye(3) - r_rd - r_rd.T

    mom_rd = np.einsum("m,ma->a", wm, cross(r, rdot))
    mom_rdd = np.einsum("m,ma->a", wm, cross(r, rddot))
    Jr_rows = Jr.transpose(0, 2, 1)  # (m, n, 3)
    jac_mom_rd = np.einsum("m,mja->aj", wm, cross(r[:, None, :], Jr_rows))
    proj_rdd = np.einsum("m,maj,ma->j", wm, Jr, rddot)
    proj_cor = -np.einsum("m,mja->ja", wm, cross(rdot[:, None, :], Jr_rows))

    # d inertia / d q_k = int 2 (u_k . r) I - r u_k^T - u_k r^T dm, u_k = dr/dq_k
    ur = np.einsum("m,maj,ma->j", wm, Jr, r)
    r_uk = np.einsum("m,ma,mbj->jab", wm, r, Jr)
    inertia_grad = 2.0 * ur[:, None, None] * np.eye(3)[None] - r_uk - r_uk.transpose(0, 2, 1)

    gram = np.einsum("m,maj,mak->jk", wm, Jr, Jr)

    data = BodyInertialData(
        mass=mass,
        p_com=p_com, pdot_com=pdot_com, pddot_com=pddot_com,
        jac_com=jac_com, jacdot_com=jacdot_com,
        inertia=inertia, inertia_rate=inertia_rate,
        mom_rd=mom_rd, mom_rdd=mom_rdd, jac_mom_rd=jac_mom_rd,
        proj_rdd=proj_rdd, proj_cor=proj_cor,
        inertia_grad=inertia_grad, gram=gram,
        nodes=pts, weights_mass=wm, framed_points=ip, framed_jac=Jp,
        r=r, rdot=rdot,
    )
    if rigid_key is not None:
        handle._rigid_cache = (rigid_key, data)
    return data
