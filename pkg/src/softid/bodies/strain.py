"""Slender-body models built from strain parameterizations of a rod.

A strain basis maps arclength s in [0, L0] and configuration q to the local
strain 6-vector (kappa_x, kappa_y, kappa_z, sigma_x, sigma_y, lambda): two
bending curvatures, torsion, two shears, and the axial stretch.  The body
frame evolves along the backbone as

    R'(s) = R(s) skew(kappa(s)),   c'(s) = R(s) (sigma_x, sigma_y, lambda),

with R(0) = I, c(0) = 0, and cross-sections map rigidly:
f(x, q) = c(x3) + R(x3) (x1, x2, 0).

Constant-strain bases (PCC, PCS) use the closed-form solution of the frame
ODE; s-varying bases (PAC, PGC) integrate it with fixed-step RK4 together
with the variational equations for the configuration Jacobians.
"""

from __future__ import annotations

import numpy as np

from ..quadrature import DEFAULT_ORDER, ReferenceDomain
from ..spatial import skew
from .base import BodyModel

Array = np.ndarray

_SMALL_ANGLE = 1e-4
RK4_STEPS = 64


# -- smooth scalar kernels of the rotation exponential ----------------------

def _alpha(t):
    """sin(t)/t with series continuation at small t."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL_ANGLE
    safe = np.where(small, 1.0, t)
    t2 = t * t
    return np.where(small, 1.0 - t2 / 6.0 + t2 * t2 / 120.0, np.sin(safe) / safe)


def _beta(t):
    """(1 - cos(t))/t^2."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL_ANGLE
    safe = np.where(small, 1.0, t)
    t2 = t * t
    return np.where(small, 0.5 - t2 / 24.0 + t2 * t2 / 720.0, (1.0 - np.cos(safe)) / safe**2)


def _gamma(t):
    """(t - sin(t))/t^3."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL_ANGLE
    safe = np.where(small, 1.0, t)
    t2 = t * t
    return np.where(small, 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0, (safe - np.sin(safe)) / safe**3)


def _dbeta_over_t(t):
    """beta'(t)/t, an even smooth function."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL_ANGLE
    safe = np.where(small, 1.0, t)
    t2 = t * t
    series = -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0
    full = (safe * np.sin(safe) - 2.0 * (1.0 - np.cos(safe))) / safe**4
    return np.where(small, series, full)


def _dgamma_over_t(t):
    """gamma'(t)/t, an even smooth function."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < _SMALL_ANGLE
    safe = np.where(small, 1.0, t)
    t2 = t * t
    series = -1.0 / 60.0 + t2 / 1260.0 - t2 * t2 / 60480.0
    full = (safe * (1.0 - np.cos(safe)) - 3.0 * (safe - np.sin(safe))) / safe**5
    return np.where(small, series, full)


def _skew_batch(v: Array) -> Array:
    """Skew matrices for rows of v: (k, 3) -> (k, 3, 3)."""
    k = v.shape[0]
    out = np.zeros((k, 3, 3))
    out[:, 0, 1] = -v[:, 2]
    out[:, 0, 2] = v[:, 1]
    out[:, 1, 0] = v[:, 2]
    out[:, 1, 2] = -v[:, 0]
    out[:, 2, 0] = -v[:, 1]
    out[:, 2, 1] = v[:, 0]
    return out


def _rot_exp(w: Array) -> Array:
    """Batch exponential map: rows w (k, 3) -> rotations (k, 3, 3)."""
    theta = np.linalg.norm(w, axis=1)
    W = _skew_batch(w)
    W2 = W @ W
    a = _alpha(theta)[:, None, None]
    b = _beta(theta)[:, None, None]
    return np.eye(3)[None] + a * W + b * W2


def _left_jacobian(w: Array) -> Array:
    """Batch left Jacobian of SO(3): J_l(w) = I + beta W + gamma W^2."""
    theta = np.linalg.norm(w, axis=1)
    W = _skew_batch(w)
    W2 = W @ W
    return (
        np.eye(3)[None]
        + _beta(theta)[:, None, None] * W
        + _gamma(theta)[:, None, None] * W2
    )


def _left_jacobian_dir(w: Array, d: Array) -> Array:
    """Directional derivative of J_l at w along d (both (k, 3))."""
    theta = np.linalg.norm(w, axis=1)
    W = _skew_batch(w)
    W2 = W @ W
    D = _skew_batch(d)
    wd = np.einsum("ki,ki->k", w, d)[:, None, None]
    return (
        _dbeta_over_t(theta)[:, None, None] * wd * W
        + _beta(theta)[:, None, None] * D
        + _dgamma_over_t(theta)[:, None, None] * wd * W2
        + _gamma(theta)[:, None, None] * (D @ W + W @ D)
    )


# -- strain bases ------------------------------------------------------------

_STRAIN_OFFSET = np.array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0])


class StrainBasis:
    """Affine strain parameterization: strains(s, q) = Phi(s) q + offset.

    Phi stacks rows in strain order (kappa_x, kappa_y, kappa_z, sigma_x,
    sigma_y, lambda); the offset puts the stress-free configuration at q = 0.
    """

    def __init__(self, n_dof: int, matrix_fn, matrix_ds_fn, constant: bool, name: str):
        self.n_dof = n_dof
        self._matrix_fn = matrix_fn
        self._matrix_ds_fn = matrix_ds_fn
        self.is_constant = constant
        self.name = name

    def matrix(self, s: Array) -> Array:
        """Phi(s) for s (k,) -> (k, 6, n_dof)."""
        return self._matrix_fn(np.asarray(s, dtype=float))

    def matrix_ds(self, s: Array) -> Array:
        """dPhi/ds, same shape as :meth:`matrix`."""
        return self._matrix_ds_fn(np.asarray(s, dtype=float))

    def strains(self, s: Array, q: Array) -> Array:
        return self.matrix(s) @ q + _STRAIN_OFFSET

    def strains_ds(self, s: Array, q: Array) -> Array:
        return self.matrix_ds(s) @ q


def _const_basis(rows: Array, name: str) -> StrainBasis:
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[1]

    def mat(s):
        return np.broadcast_to(rows, (s.shape[0], 6, n)).copy()

    def mat_ds(s):
        return np.zeros((s.shape[0], 6, n))

    return StrainBasis(n, mat, mat_ds, constant=True, name=name)


def pcc_basis(length: float, planar: bool = False, elongation: bool = True) -> StrainBasis:
    """Constant curvature, optionally with elongation; q = (kx*L0, ky*L0[, dL]).

    ``planar`` keeps only the first curvature coordinate (the model used by
    the scaling benchmark); ``elongation=False`` drops the axial coordinate,
    which this stress law leaves unrestrained at zero curvature.
    """
    if planar:
        rows = np.zeros((6, 1))
        rows[0, 0] = 1.0 / length
        return _const_basis(rows, "pcc_planar")
    rows = np.zeros((6, 3 if elongation else 2))
    rows[0, 0] = 1.0 / length
    rows[1, 1] = 1.0 / length
    if elongation:
        rows[5, 2] = 1.0 / length
    return _const_basis(rows, "pcc" if elongation else "pcc_bend")


def pcs_basis(length: float) -> StrainBasis:
    """Constant strain on all six components; q scaled by 1/L0."""
    return _const_basis(np.eye(6) / length, "pcs")


def pac_basis(length: float) -> StrainBasis:
    """Affine curvature: kx = (-q3 - (s/L0) q4)/L0, ky = (q1 + (s/L0) q2)/L0."""

    def mat(s):
        k = s.shape[0]
        out = np.zeros((k, 6, 4))
        out[:, 0, 2] = -1.0 / length
        out[:, 0, 3] = -s / length**2
        out[:, 1, 0] = 1.0 / length
        out[:, 1, 1] = s / length**2
        return out

    def mat_ds(s):
        k = s.shape[0]
        out = np.zeros((k, 6, 4))
        out[:, 0, 3] = -1.0 / length**2
        out[:, 1, 1] = 1.0 / length**2
        return out

    return StrainBasis(4, mat, mat_ds, constant=False, name="pac")


def pgc_basis(length: float) -> StrainBasis:
    """Gaussian-modulated curvature with elongation (5 dof).

    kx = (-q3 - G(s) q4)/L0, ky = (q1 + G(s) q2)/L0, dL = q5/L0, with
    G(s) = exp(-(s - L0/2)^2), so G = 1 at mid-length.
    """

    def gauss(s):
        return np.exp(-((s - length / 2.0) ** 2))

    def mat(s):
        k = s.shape[0]
        g = gauss(s)
        out = np.zeros((k, 6, 5))
        out[:, 0, 2] = -1.0 / length
        out[:, 0, 3] = -g / length
        out[:, 1, 0] = 1.0 / length
        out[:, 1, 1] = g / length
        out[:, 5, 4] = 1.0 / length
        return out

    def mat_ds(s):
        k = s.shape[0]
        dg = gauss(s) * (-2.0 * (s - length / 2.0))
        out = np.zeros((k, 6, 5))
        out[:, 0, 3] = -dg / length
        out[:, 1, 1] = dg / length
        return out

    return StrainBasis(5, mat, mat_ds, constant=False, name="pgc")


# -- rod body ----------------------------------------------------------------

class CosseratRodBody(BodyModel):
    """Rod whose cross-sections ride rigidly on a strain-parameterized backbone."""

    has_analytic_hess_x = True

    def __init__(
        self,
        basis: StrainBasis,
        length: float,
        domain: ReferenceDomain,
        rho: float,
        elastic_modulus: float | None = None,
        viscosity: float | None = None,
        quadrature_order=DEFAULT_ORDER,
        rk4_steps: int = RK4_STEPS,
    ):
        self.basis = basis
        self.length = float(length)
        self.domain = domain
        self.rho = float(rho)
        self.elastic_modulus = elastic_modulus
        self.viscosity = viscosity
        self.quadrature_order = quadrature_order
        self.rk4_steps = int(rk4_steps)
        self._frame_memo: dict = {}
        self._split_memo: dict = {}

    @property
    def n_dof(self) -> int:
        return self.basis.n_dof

    # -- frame solution ------------------------------------------------------

    def _frames(self, s_unique: Array, q: Array):
        """Frames and their q-Jacobians at sorted arclengths.

        Returns (R (k,3,3), c (k,3), dR (k,3,3,n), dc (k,3,n)).
        """
        key = (q.tobytes(), s_unique.tobytes())
        hit = self._frame_memo.get(key)
        if hit is not None:
            return hit
        if self.basis.is_constant:
            out = self._frames_closed_form(s_unique, q)
        else:
            out = self._frames_rk4(s_unique, q)
        if len(self._frame_memo) > 16:
            self._frame_memo.clear()
        self._frame_memo[key] = out
        return out

    def _frames_closed_form(self, s: Array, q: Array):
        n = self.n_dof
        phi = self.basis.matrix(np.zeros(1))[0]  # (6, n), constant
        xi = phi @ q + _STRAIN_OFFSET
        kappa, sig = xi[:3], xi[3:]
        w = s[:, None] * kappa[None, :]  # (k, 3)
        R = _rot_exp(w)
        Jl = _left_jacobian(w)
        c = s[:, None] * (Jl @ sig)
        dR = np.empty((s.shape[0], 3, 3, n))
        dc = np.empty((s.shape[0], 3, n))
        for j in range(n):
            dk = phi[:3, j]
            ds_ = phi[3:, j]
            delta = s[:, None] * dk[None, :]
            dR[..., j] = _skew_batch(np.einsum("kab,kb->ka", Jl, delta)) @ R
            dJl = _left_jacobian_dir(w, delta)
            dc[..., j] = s[:, None] * (np.einsum("kab,b->ka", dJl, sig) + Jl @ ds_)
        return R, c, dR, dc

    def _frames_rk4(self, s_sorted: Array, q: Array):
        n = self.n_dof
        k = s_sorted.shape[0]
        R = np.eye(3)
        c = np.zeros(3)
        dR = np.zeros((n, 3, 3))
        dc = np.zeros((n, 3))
        out_R = np.empty((k, 3, 3))
        out_c = np.empty((k, 3))
        out_dR = np.empty((k, 3, 3, n))
        out_dc = np.empty((k, 3, n))

        def rhs(s, R, c, dR, dc):
            row = np.array([s])
            xi = self.basis.strains(row, q)[0]
            phi = self.basis.matrix(row)[0]  # (6, n)
            K = skew(xi[:3])
            sig = xi[3:]
            dK = _skew_batch(phi[:3].T)  # (n, 3, 3)
            return (
                R @ K,
                R @ sig,
                dR @ K + R[None] @ dK,
                np.einsum("jab,b->ja", dR, sig) + phi[3:].T @ R.T,
            )

        s_prev = 0.0
        for i, s_target in enumerate(s_sorted):
            span = s_target - s_prev
            if span > 0:
                nsub = max(1, int(np.ceil(self.rk4_steps * span / self.length)))
                h = span / nsub
                for m in range(nsub):
                    s0 = s_prev + m * h
                    k1 = rhs(s0, R, c, dR, dc)
                    k2 = rhs(s0 + h / 2, R + h / 2 * k1[0], c + h / 2 * k1[1], dR + h / 2 * k1[2], dc + h / 2 * k1[3])
                    k3 = rhs(s0 + h / 2, R + h / 2 * k2[0], c + h / 2 * k2[1], dR + h / 2 * k2[2], dc + h / 2 * k2[3])
                    k4 = rhs(s0 + h, R + h * k3[0], c + h * k3[1], dR + h * k3[2], dc + h * k3[3])
                    R = R + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
                    c = c + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
                    dR = dR + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
                    dc = dc + h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
                s_prev = float(s_target)
            out_R[i] = R
            out_c[i] = c
            out_dR[i] = np.moveaxis(dR, 0, -1)
            out_dc[i] = dc.T
        return out_R, out_c, out_dR, out_dc

    def _frames_at(self, x: Array, q: Array):
        x = np.asarray(x, dtype=float)
        cached = self._split_memo.get(id(x))
        if cached is not None and cached[0] is x:
            _, s_unique, inv = cached
        else:
            s = x[:, 2]
            s_unique, inv = np.unique(s, return_inverse=True)
            if s_unique.size and (s_unique[0] < -1e-12 or s_unique[-1] > self.length + 1e-9):
                raise ValueError("material x3 outside [0, L0]")
            s_unique = np.clip(s_unique, 0.0, self.length)
            if len(self._split_memo) > 8:
                self._split_memo.clear()
            self._split_memo[id(x)] = (x, s_unique, inv)
        R, c, dR, dc = self._frames(s_unique, q)
        return R[inv], c[inv], dR[inv], dc[inv]

    # -- kinematic map ---------------------------------------------------------

    def cross_section(self, x: Array, q: Array) -> Array:
        """In-plane part of the material point carried by the backbone frame."""
        u = np.array(x, dtype=float)
        u[:, 2] = 0.0
        return u

    def cross_section_jac_q(self, x: Array, q: Array) -> Array | None:
        """dq-Jacobian of :meth:`cross_section`; None when independent of q."""
        return None

    def position(self, x, q):
        x = np.asarray(x, dtype=float)
        q = self.check_q(q)
        R, c, _, _ = self._frames_at(x, q)
        return c + np.einsum("kab,kb->ka", R, self.cross_section(x, q))

    def jac_q(self, x, q):
        x = np.asarray(x, dtype=float)
        q = self.check_q(q)
        R, _, dR, dc = self._frames_at(x, q)
        u = self.cross_section(x, q)
        out = dc + np.einsum("kabj,kb->kaj", dR, u)
        du = self.cross_section_jac_q(x, q)
        if du is not None:
            out = out + np.einsum("kab,kbj->kaj", R, du)
        return out

    def jac_x(self, x, q):
        x = np.asarray(x, dtype=float)
        q = self.check_q(q)
        R, _, _, _ = self._frames_at(x, q)
        s = x[:, 2]
        xi = self.basis.strains(s, q)
        u = self.cross_section(x, q)
        # f' along s: R (sigma + kappa x u); transverse: R e1, R e2
        tangent = xi[:, 3:] + np.cross(xi[:, :3], u)
        out = np.empty((x.shape[0], 3, 3))
        out[:, :, 0] = R[:, :, 0]
        out[:, :, 1] = R[:, :, 1]
        out[:, :, 2] = np.einsum("kab,kb->ka", R, tangent)
        return out

    def hess_x(self, x, q):
        x = np.asarray(x, dtype=float)
        q = self.check_q(q)
        R, _, _, _ = self._frames_at(x, q)
        s = x[:, 2]
        xi = self.basis.strains(s, q)
        dxi = self.basis.strains_ds(s, q)
        kap, sig = xi[:, :3], xi[:, 3:]
        u = self.cross_section(x, q)
        out = np.zeros((x.shape[0], 3, 3, 3))
        d13 = np.einsum("kab,kb->ka", R, np.cross(kap, np.broadcast_to([1.0, 0, 0], kap.shape)))
        d23 = np.einsum("kab,kb->ka", R, np.cross(kap, np.broadcast_to([0, 1.0, 0], kap.shape)))
        d33 = np.einsum(
            "kab,kb->ka",
            R,
            np.cross(kap, sig + np.cross(kap, u)) + dxi[:, 3:] + np.cross(dxi[:, :3], u),
        )
        out[:, :, 0, 2] = out[:, :, 2, 0] = d13
        out[:, :, 1, 2] = out[:, :, 2, 1] = d23
        out[:, :, 2, 2] = d33
        return out


class VariableRadiusPccBody(CosseratRodBody):
    """Planar PCC rod with two pneumatic radial dofs.

    q = (kappa*L0, dL, a1, a2): the first two follow the planar PCC strain
    map with elongation; a1/a2 scale a bump-shaped radial change of the
    cross-section on the phi in [0, pi) and [pi, 2 pi) halves.  The bump
    vanishes at the end faces, so the contact areas stay rigid.
    """

    has_analytic_hess_x = False

    def __init__(self, length, radius, domain, rho, elastic_modulus=None, viscosity=None,
                 quadrature_order=DEFAULT_ORDER):
        rows = np.zeros((6, 4))
        rows[0, 0] = 1.0 / length
        rows[5, 1] = 1.0 / length
        basis = _const_basis(rows, "pcc_radial")
        super().__init__(basis, length, domain, rho, elastic_modulus, viscosity, quadrature_order)
        self.radius = float(radius)

    def bump(self, s: Array, phi: Array) -> Array:
        """Separable bump with open support s in (0, L0), phi in (0, pi)."""
        L = self.length
        us = L * L / 4.0 - (s - L / 2.0) ** 2
        up = np.pi**2 / 4.0 - (phi - np.pi / 2.0) ** 2
        inside = (us > 0) & (up > 0)
        out = np.zeros_like(s)
        with np.errstate(divide="ignore", over="ignore"):
            vals = np.exp(-L / np.where(inside, us, 1.0)) * np.exp(-1.0 / np.where(inside, up, 1.0))
        out[inside] = vals[inside]
        return out

    def _radial_gain(self, x: Array) -> Array:
        """Per-point weights (m, 2) multiplying (a1, a2) in delta_R."""
        s = x[:, 2]
        phi = np.mod(np.arctan2(x[:, 1], x[:, 0]), 2.0 * np.pi)
        lower = phi < np.pi
        g = np.zeros((x.shape[0], 2))
        g[lower, 0] = self.bump(s[lower], phi[lower])
        g[~lower, 1] = self.bump(s[~lower], phi[~lower] - np.pi)
        return g

    def cross_section(self, x, q):
        g = self._radial_gain(x)
        fac = 1.0 + (g @ q[2:]) / self.radius
        u = np.array(x, dtype=float)
        u[:, :2] *= fac[:, None]
        u[:, 2] = 0.0
        return u

    def cross_section_jac_q(self, x, q):
        g = self._radial_gain(x)
        du = np.zeros((x.shape[0], 3, self.n_dof))
        du[:, 0, 2:] = x[:, 0, None] * g / self.radius
        du[:, 1, 2:] = x[:, 1, None] * g / self.radius
        return du

    def jac_x(self, x, q):
        # radial gain varies with x; fall back to differences of the position map
        return self._fd_jac_x(np.asarray(x, dtype=float), self.check_q(q))

    def hess_x(self, x, q):
        return BodyModel.hess_x(self, x, q)
