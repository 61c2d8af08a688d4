"""Bundled chain fixtures: description documents plus parsed models.

These are the models the verification suite and the scaling benchmark run
on.  Physical parameters of the soft fixtures follow the free-evolution and
regulation scenarios they reproduce: silicone-like rods (rho = 1070 kg/m^3)
with GPa-scale elastic moduli, tentacle cones, and an LVP cylinder.
"""

from __future__ import annotations

import numpy as np

from .model_io import parse_chain

HALF_PI = float(np.pi / 2)


def rigid_2r_description(l1=1.0, l2=1.0, radius=0.02, mass=1.0, g=9.81) -> dict:
    """Planar 2R arm: revolute joints about x, links along z, gravity -z.

    Density is chosen so each full cylinder link has the requested mass.
    """
    def link(length):
        rho = mass / (np.pi * radius**2 * length)
        return {
            "joint": {"kind": "revolute", "axis": [1.0, 0.0, 0.0]},
            "body": {
                "kind": "rigid",
                "geometry": {"shape": "cylinder", "radius": radius, "length": length},
                "rho": rho,
                "quadrature_order": [4, 8, 6],
            },
        }

    return {
        "schema_version": 1,
        "gravity": [0.0, 0.0, -g],
        "links": [link(l1), link(l2)],
    }


def rigid_pendulum_description(length=1.0, radius=0.02, mass=1.0, g=9.81) -> dict:
    doc = rigid_2r_description(length, length, radius, mass, g)
    doc["links"] = doc["links"][:1]
    return doc


def _soft_link(kind, *, length, radius=None, rho, C, eta, order, geometry=None,
               joint=None, free_tip=False, extra=None):
    body = {
        "kind": kind,
        "geometry": geometry or {"shape": "cylinder", "radius": radius, "length": length},
        "rho": rho,
        "C": C,
        "eta": eta,
        "quadrature_order": list(order),
    }
    if free_tip:
        body["free_tip"] = True
    if extra:
        body.update(extra)
    return {"joint": joint or {"kind": "fixed"}, "body": body}


def pcc_description(n_bodies=2, length=0.3, radius=0.01, rho=1070.0,
                    C=0.555e9, eta=0.333, order=(3, 8, 6), along_y=True,
                    elongation=True) -> dict:
    """Cylindrical constant-curvature rods; base rotated so the straight
    configuration extends along +Y with gravity acting along -Z."""
    links = []
    for i in range(n_bodies):
        joint = None
        if i == 0 and along_y:
            joint = {"kind": "rotated_base",
                     "rotation": {"axis_angle": {"axis": [1.0, 0.0, 0.0], "angle": -HALF_PI}}}
        extra = None if elongation else {"elongation": False}
        links.append(_soft_link("pcc", length=length, radius=radius, rho=rho,
                                C=C, eta=eta, order=order, joint=joint, extra=extra))
    return {"schema_version": 1, "gravity": [0.0, 0.0, -9.81], "links": links}


def pcs_description(n_bodies=2, **kw) -> dict:
    doc = pcc_description(n_bodies, **kw)
    for ld in doc["links"]:
        ld["body"]["kind"] = "pcs"
    return doc


def pac_description(n_bodies=1, **kw) -> dict:
    doc = pcc_description(n_bodies, **kw)
    for ld in doc["links"]:
        ld["body"]["kind"] = "pac"
    return doc


def pgc_description(n_bodies=2, length=0.2, rho=1070.0, C=0.111e9, eta=0.01,
                    order=(3, 8, 6)) -> dict:
    """Conical tentacle with Gaussian curvature basis, tip pointing upward."""
    radii = [(0.01, 0.005), (0.005, 0.002)]
    links = []
    for i in range(n_bodies):
        rb, rt = radii[min(i, len(radii) - 1)]
        links.append(_soft_link(
            "pgc", length=length, rho=rho, C=C, eta=eta, order=order,
            geometry={"shape": "truncated_cone", "base_radius": rb, "tip_radius": rt,
                      "length": length},
        ))
    return {"schema_version": 1, "gravity": [0.0, 0.0, -9.81], "links": links}


def lvp_description(length=0.1, radius=0.02, rho=960.0, C=0.178e6, eta=0.05,
                    order=(3, 8, 6)) -> dict:
    """Single free-tip LVP cylinder with stretch and planar-bending primitives."""
    link = _soft_link(
        "lvp", length=length, radius=radius, rho=rho, C=C, eta=eta, order=order,
        free_tip=True,
        extra={
            "n_dof": 3,
            "primitives": [
                {"kind": "stretch_compression", "coeffs": [0]},
                {"kind": "planar_bending_x1", "coeffs": [1, 2]},
            ],
        },
    )
    return {"schema_version": 1, "gravity": [0.0, 0.0, -9.81], "links": [link]}


def variable_radius_description(n_bodies=3, length=0.2, radius=0.02, rho=1062.0,
                                C=0.501e6, eta=0.1, order=(3, 8, 6)) -> dict:
    """Planar PCC bodies with pneumatic radial dofs, hanging downward."""
    links = []
    for i in range(n_bodies):
        joint = None
        if i == 0:
            joint = {"kind": "rotated_base",
                     "rotation": {"axis_angle": {"axis": [1.0, 0.0, 0.0], "angle": float(np.pi)}}}
        links.append(_soft_link("pcc_variable_radius", length=length, radius=radius,
                                rho=rho, C=C, eta=eta, order=order, joint=joint))
    return {"schema_version": 1, "gravity": [0.0, 0.0, -9.81], "links": links}


def regulation_description(n_bodies=3, length=0.2, radius=0.02, rho=1070.0,
                           C=5.55e9, eta=0.066, order=(3, 8, 6)) -> dict:
    """Three-body PCC arm for the PD+ shape-regulation demo, hanging downward."""
    doc = pcc_description(n_bodies, length=length, radius=radius, rho=rho,
                          C=C, eta=eta, order=order, along_y=False)
    doc["links"][0]["joint"] = {
        "kind": "rotated_base",
        "rotation": {"axis_angle": {"axis": [1.0, 0.0, 0.0], "angle": float(np.pi)}},
    }
    return doc


def planar_pcc_description(n_bodies, length=1.0, radius=0.1, rho=1.0,
                           quadrature_order=(2, 8, 6)) -> dict:
    """Benchmark chain: single-curvature PCC bodies with unit parameters."""
    links = [
        _soft_link("pcc_planar", length=length, radius=radius, rho=rho,
                   C=None, eta=None, order=quadrature_order)
        for _ in range(n_bodies)
    ]
    return {"schema_version": 1, "gravity": [0.0, 0.0, -9.81], "links": links}


DESCRIPTIONS = {
    "rigid_2r": rigid_2r_description,
    "rigid_pendulum": rigid_pendulum_description,
    "pcc_2": pcc_description,
    "pcs_2": pcs_description,
    "pac_1": pac_description,
    "pgc_2": pgc_description,
    "lvp_1": lvp_description,
    "variable_radius_3": variable_radius_description,
    "regulation_3": regulation_description,
}


def describe(name: str, **kw) -> dict:
    try:
        return DESCRIPTIONS[name](**kw)
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(DESCRIPTIONS)}") from None


def load(name: str, **kw):
    return parse_chain(describe(name, **kw))


def rigid_2r_chain(**kw):
    return parse_chain(rigid_2r_description(**kw))


def rigid_pendulum_chain(**kw):
    return parse_chain(rigid_pendulum_description(**kw))


def pcc_chain(n_bodies=2, **kw):
    return parse_chain(pcc_description(n_bodies, **kw))


def pcs_chain(n_bodies=2, **kw):
    return parse_chain(pcs_description(n_bodies, **kw))


def pac_chain(n_bodies=1, **kw):
    return parse_chain(pac_description(n_bodies, **kw))


def pgc_chain(n_bodies=2, **kw):
    return parse_chain(pgc_description(n_bodies, **kw))


def lvp_chain(**kw):
    return parse_chain(lvp_description(**kw))


def variable_radius_chain(n_bodies=3, **kw):
    return parse_chain(variable_radius_description(n_bodies, **kw))


def planar_pcc_chain(n_bodies, **kw):
    return parse_chain(planar_pcc_description(n_bodies, **kw))
