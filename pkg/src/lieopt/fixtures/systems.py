"""Published two-dimensional optimal systems of the built-in algebras."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

from ..algebra import LieAlgebra
from ..subalgebra import AlgebraPair, pair_from_elements


@dataclass(frozen=True)
class Representative:
    """A member of an optimal system; ``param`` names the family slot, if any."""

    label: str
    w1: str
    w2: str
    mode: str
    param: Optional[str] = None

    def pair(self, L: LieAlgebra, value: Fraction | None = None) -> AlgebraPair:
        w1, w2 = self.w1, self.w2
        if self.param is not None:
            if value is None:
                raise ValueError(f"{self.label} needs a value for {self.param}")
            w1 = w1.replace(self.param, f"({value})")
            w2 = w2.replace(self.param, f"({value})")
        return pair_from_elements(L, w1, w2)

    def describe(self, value: Fraction | None = None) -> str:
        text = f"{{{self.w1}, {self.w2}}}"
        if self.param is not None and value is not None:
            text += f" with {self.param}={value}"
        return text


HEAT_SYSTEM: List[Representative] = [
    Representative("g1", "v6", "v3", "zero"),
    Representative("g2", "v3 + v6", "v5", "zero"),
    Representative("g3", "-v3 + v6", "v5", "zero"),
    Representative("g4", "v6", "v5", "zero"),
    Representative("g5", "v2 + v6", "v3", "zero"),
    Representative("g6", "-v2 + v6", "v3", "zero"),
    Representative("g7", "v1 + v6", "v3", "zero"),
    Representative("g8", "-v1 + v6", "v3", "zero"),
    Representative("g9", "v5", "v3", "zero"),
    Representative("g10", "v6", "v4 + beta*v3", "nonzero", param="beta"),
    Representative("g11", "v5", "v4 + beta*v3", "nonzero", param="beta"),
]

NS_SYSTEM: List[Representative] = [
    Representative("g'1", "v1", "v4", "zero"),
    Representative("g'2", "v2", "v4", "zero"),
    Representative("g'3", "v2 + v3", "v4", "zero"),
    Representative("g'4", "v2 - v3", "v4", "zero"),
    Representative("g'5", "v3", "v4", "zero"),
    Representative("g'6", "v2", "v1 + c*v4", "nonzero", param="c"),
    Representative("g'7", "v3", "v1 + c*v4", "nonzero", param="c"),
]

SYSTEMS: Dict[str, List[Representative]] = {"heat6": HEAT_SYSTEM, "ns4": NS_SYSTEM}

# family parameter values used when verifying a system
DEFAULT_PARAMETERS: Dict[str, List[Fraction]] = {
    "heat6": [Fraction(-1), Fraction(0), Fraction(1), Fraction(2)],
    "ns4": [Fraction(-1), Fraction(0), Fraction(1, 2), Fraction(1)],
}


def optimal_system(name: str) -> List[Representative]:
    try:
        return list(SYSTEMS[name])
    except KeyError:
        raise KeyError(f"no built-in optimal system for {name!r}") from None
