"""Body-model library: rigid, strain-parameterized rods, and LVP compositions."""

from .base import BodyModel, RigidBody
from .integrals import BodyInertialData, body_integrals
from .lvp import (
    PRIMITIVE_KINDS,
    BendPrimitive,
    LvpBody,
    LvpPrimitive,
    ShearPrimitive,
    SourcePrimitive,
    StretchPrimitive,
    TwistPrimitive,
)
from .strain import (
    CosseratRodBody,
    StrainBasis,
    VariableRadiusPccBody,
    pac_basis,
    pcc_basis,
    pcs_basis,
    pgc_basis,
)

__all__ = [
    "BodyModel",
    "RigidBody",
    "BodyInertialData",
    "body_integrals",
    "CosseratRodBody",
    "StrainBasis",
    "VariableRadiusPccBody",
    "pac_basis",
    "pcc_basis",
    "pcs_basis",
    "pgc_basis",
    "LvpBody",
    "LvpPrimitive",
    "StretchPrimitive",
    "BendPrimitive",
    "TwistPrimitive",
    "ShearPrimitive",
    "SourcePrimitive",
    "PRIMITIVE_KINDS",
]
