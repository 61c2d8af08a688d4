"""Minimal 3-D spatial algebra: rotations, rigid transforms, cross operators.

Rotations are plain 3x3 orthonormal matrices.  All public functions accept
array-likes and return float64 arrays.  Orthonormality checks run as plain
``assert`` statements so they vanish under ``python -O`` in benchmark runs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Array = np.ndarray

ORTHONORMAL_TOL = 1e-12


def skew(v) -> Array:
    """Skew-symmetric matrix S(v) such that S(v) @ w = v x w."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def cross(a, b) -> Array:
    """Cross product over the last axis with broadcasting.

    Same semantics as ``np.cross`` for 3-vectors but without its axis-moving
    overhead, which dominates small-array hot loops.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    a0, a1, a2 = a[..., 0], a[..., 1], a[..., 2]
    b0, b1, b2 = b[..., 0], b[..., 1], b[..., 2]
    out[..., 0] = a1 * b2 - a2 * b1
    out[..., 1] = a2 * b0 - a0 * b2
    out[..., 2] = a0 * b1 - a1 * b0
    return out


def vee(m) -> Array:
    """Inverse of :func:`skew`, with antisymmetric projection of the input.

    The input is first projected to (m - m.T)/2, which suppresses symmetric
    noise from finite differencing before the axial vector is read off.
    """
    m = np.asarray(m, dtype=float)
    a = 0.5 * (m - m.T)
    return np.array([a[2, 1], a[0, 2], a[1, 0]])


def rodrigues(axis, angle: float) -> Array:
    """Rotation by ``angle`` [rad] about the (non-zero) ``axis``."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be non-zero")
    k = skew(axis / n)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def rotation_from_quaternion(q) -> Array:
    """Rotation matrix from a scalar-first quaternion [w, x, y, z]."""
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("zero quaternion")
    w, x, y, z = q / n
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def is_rotation(r, tol: float = ORTHONORMAL_TOL) -> bool:
    """True if ``r`` is orthonormal with determinant +1 within ``tol``."""
    r = np.asarray(r, dtype=float)
    return (
        r.shape == (3, 3)
        and np.abs(r.T @ r - np.eye(3)).max() <= tol * 10
        and abs(np.linalg.det(r) - 1.0) <= tol * 10
    )


@dataclass(frozen=True)
class Transform:
    """Homogeneous transform: x_parent = rotation @ x_child + translation."""

    rotation: Array
    translation: Array

    def __post_init__(self):
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=float))
        assert is_rotation(self.rotation), "rotation block is not orthonormal"

    @staticmethod
    def identity() -> "Transform":
        return Transform(np.eye(3), np.zeros(3))

    def compose(self, other: "Transform") -> "Transform":
        """self o other, i.e. apply ``other`` first in self's child frame."""
        return Transform(
            self.rotation @ other.rotation,
            self.translation + self.rotation @ other.translation,
        )

    def __matmul__(self, other: "Transform") -> "Transform":
        return self.compose(other)

    def inverse(self) -> "Transform":
        rt = self.rotation.T
        return Transform(rt, -rt @ self.translation)

    def apply(self, points) -> Array:
        """Map points (3,) or (m, 3) from the child frame to the parent frame."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            return self.rotation @ points + self.translation
        return points @ self.rotation.T + self.translation

    def as_matrix(self) -> Array:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out


def compose(a: Transform, b: Transform) -> Transform:
    """Functional form of :meth:`Transform.compose`."""
    return a.compose(b)


def vec_kron_contract(omega, didq_stack) -> Array:
    """Quadratic-form contraction of a stack of 3x3 matrices against omega.

    ``didq_stack`` is a 9 x n matrix whose k-th column is the column-wise
    vectorization of a 3x3 matrix D_k.  Returns the n-vector with components
    0.5 * omega^T D_k omega, which is the evaluation of
    0.5 [I_n (x) (w^T (w^T (x) I_3))] vec(stack^T) without materializing the
    9n-sized Kronecker intermediate.
    """
    omega = np.asarray(omega, dtype=float)
    didq_stack = np.asarray(didq_stack, dtype=float)
    if omega.shape != (3,):
        raise ValueError(f"omega must have shape (3,), got {omega.shape}")
    if didq_stack.ndim != 2 or didq_stack.shape[0] != 9:
        raise ValueError(
            f"didq_stack must have shape (9, n), got {didq_stack.shape}"
        )
    n = didq_stack.shape[1]
    # column-wise vec: D_k = didq_stack[:, k].reshape(3, 3, order="F")
    mats = didq_stack.T.reshape(n, 3, 3).transpose(0, 2, 1)
    return 0.5 * np.einsum("a,kab,b->k", omega, mats, omega)
