"""Recursive model-agnostic inverse dynamics for serial soft-rigid chains."""

from .dynamics import (
    DynamicsResult,
    chain_dynamics,
    iid,
    inverse_dynamics,
    mid,
    miid,
)
from .kinematics import (
    BodyHandle,
    ChainModel,
    Joint,
    Link,
    contact_frame,
    fixed_joint,
    forward_kinematics,
    forward_pass,
    link_transform,
    prismatic_joint,
    projection_matrices,
    revolute_joint,
    rotated_base_joint,
)
from .quadrature import QuadratureRule1D, ReferenceDomain, gauss_legendre, integrate_volume
from .spatial import Transform, compose, skew, vec_kron_contract, vee

__version__ = "0.1.0"

__all__ = [
    "BodyHandle",
    "ChainModel",
    "DynamicsResult",
    "Joint",
    "Link",
    "QuadratureRule1D",
    "ReferenceDomain",
    "Transform",
    "chain_dynamics",
    "compose",
    "contact_frame",
    "fixed_joint",
    "forward_kinematics",
    "forward_pass",
    "gauss_legendre",
    "iid",
    "integrate_volume",
    "inverse_dynamics",
    "link_transform",
    "mid",
    "miid",
    "prismatic_joint",
    "projection_matrices",
    "revolute_joint",
    "rotated_base_joint",
    "skew",
    "vec_kron_contract",
    "vee",
]
