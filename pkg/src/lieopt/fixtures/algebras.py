"""Structure constants of the two built-in symmetry algebras."""

from __future__ import annotations

from ..adjoint import FixedElement, is_automorphism
from ..algebra import LieAlgebra, load_algebra

# point symmetries of the linear heat equation u_t = u_xx (finite part)
HEAT6 = {
    "name": "heat6",
    "dim": 6,
    "basis": ["v1", "v2", "v3", "v4", "v5", "v6"],
    "brackets": [
        {"i": 1, "j": 4, "coeffs": {"1": "1"}},
        {"i": 1, "j": 5, "coeffs": {"3": "-1"}},
        {"i": 1, "j": 6, "coeffs": {"5": "2"}},
        {"i": 2, "j": 4, "coeffs": {"2": "2"}},
        {"i": 2, "j": 5, "coeffs": {"1": "2"}},
        {"i": 2, "j": 6, "coeffs": {"3": "-2", "4": "4"}},
        {"i": 4, "j": 5, "coeffs": {"5": "1"}},
        {"i": 4, "j": 6, "coeffs": {"6": "2"}},
    ],
}

# finite part of the symmetry algebra of the 2D vorticity equation in stream-function form
NS4 = {
    "name": "ns4",
    "dim": 4,
    "basis": ["v1", "v2", "v3", "v4"],
    "brackets": [
        {"i": 1, "j": 2, "coeffs": {"2": "-1"}},
        {"i": 1, "j": 3, "coeffs": {"3": "1"}},
        {"i": 2, "j": 3, "coeffs": {"4": "1"}},
    ],
}

DOCUMENTS = {"heat6": HEAT6, "ns4": NS4}


def builtin_algebra(name: str) -> LieAlgebra:
    try:
        doc = DOCUMENTS[name]
    except KeyError:
        raise KeyError(f"unknown built-in algebra {name!r}; choose from {sorted(DOCUMENTS)}") from None
    return load_algebra(doc)


# Ad(exp(pi*(v2/4 + v6))). The sl(2) part (v2, v4, v6) acts on (v1, v5) as
# SL(2) on the plane; this rotation by pi is -I there and fixes v2, v3, v4,
# v6. The v4 factor of A1...A6 only produces positive diagonals, so A(eps)
# never equals this element.
HEAT_ROTATION = FixedElement("exp(pi*(1/4*v2 + v6))", (
    (-1, 0, 0, 0, 0, 0),
    (0, 1, 0, 0, 0, 0),
    (0, 0, 1, 0, 0, 0),
    (0, 0, 0, 1, 0, 0),
    (0, 0, 0, 0, -1, 0),
    (0, 0, 0, 0, 0, 1),
))

FIXED_ELEMENTS = {"heat6": (HEAT_ROTATION,), "ns4": ()}


def fixed_elements(name: str) -> tuple:
    """Registered adjoint-group elements outside the A(eps) chart, checked to be automorphisms."""
    elements = FIXED_ELEMENTS.get(name, ())
    L = builtin_algebra(name)
    for z in elements:
        if not is_automorphism(L, z.matrix):
            raise ValueError(f"{z.label} is not an automorphism of {name}")
    return elements
