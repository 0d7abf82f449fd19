"""Finite-dimensional Lie algebras given by rational structure constants."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from . import linalg
from .exppoly import ExpPoly


class AlgebraError(ValueError):
    """Malformed algebra-definition document."""


class JacobiViolation(AlgebraError):
    def __init__(self, violations):
        self.violations = violations
        (i, j, k), residual = violations[0]
        super().__init__(
            f"Jacobi identity fails for (v{i}, v{j}, v{k}): residual {residual}"
            + (f" (and {len(violations) - 1} more)" if len(violations) > 1 else "")
        )


def parse_rational(text) -> Fraction:
    if isinstance(text, int) and not isinstance(text, bool):
        return Fraction(text)
    if not isinstance(text, str):
        raise AlgebraError(f"rational literals must be strings 'p' or 'p/q', got {text!r}")
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise AlgebraError(f"bad rational literal {text!r}") from None
    if "." in text or "e" in text.lower():
        raise AlgebraError(f"bad rational literal {text!r}")
    return value


@dataclass(frozen=True)
class LieAlgebra:
    """Structure constants stored for i < j only (0-based indices internally).

    ``structure[(i, j)]`` maps output index k to C_ij^k.
    """

    dim: int
    basis: Tuple[str, ...]
    structure: Mapping[Tuple[int, int], Mapping[int, Fraction]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.dim < 1:
            raise AlgebraError("dimension must be positive")
        if len(self.basis) != self.dim:
            raise AlgebraError(f"expected {self.dim} basis names, got {len(self.basis)}")
        if len(set(self.basis)) != self.dim:
            raise AlgebraError("basis names must be distinct")
        for (i, j), coeffs in self.structure.items():
            if not (0 <= i < j < self.dim):
                raise AlgebraError(f"bracket index pair ({i + 1}, {j + 1}) must satisfy 1 <= i < j <= dim")
            for k in coeffs:
                if not 0 <= k < self.dim:
                    raise AlgebraError(f"output index {k + 1} out of range")

    def const(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            return Fraction(0)
        if i < j:
            return self.structure.get((i, j), {}).get(k, Fraction(0))
        return -self.structure.get((j, i), {}).get(k, Fraction(0))

    def bracket_basis(self, i: int, j: int) -> List[Fraction]:
        return [self.const(i, j, k) for k in range(self.dim)]

    def basis_vector(self, i: int) -> List[Fraction]:
        v = [Fraction(0)] * self.dim
        v[i] = Fraction(1)
        return v

    def element(self, text: str) -> List[Fraction]:
        """Coordinates of a rational combination written with basis names, e.g. ``v1 + 2*v4``."""
        poly = _parse_linear(text)
        unknown = poly.variables() - set(self.basis)
        if unknown:
            raise AlgebraError(f"unknown basis name(s) {sorted(unknown)}")
        out = []
        for name in self.basis:
            c = poly.coefficient(name)
            if not c.is_constant():
                raise AlgebraError(f"{text!r} is not linear in the basis")
            out.append(c.constant_value())
        if not (poly - sum((ExpPoly.var(n).scale(c) for n, c in zip(self.basis, out)), ExpPoly())).is_zero():
            raise AlgebraError(f"{text!r} is not a linear combination of basis elements")
        return out

    def __eq__(self, other):
        if not isinstance(other, LieAlgebra):
            return NotImplemented
        return (self.dim == other.dim and self.basis == other.basis
                and _clean(self.structure) == _clean(other.structure))

    def __hash__(self):
        return hash((self.dim, self.basis))


def _clean(structure):
    return {key: {k: c for k, c in v.items() if c != 0}
            for key, v in structure.items() if any(c != 0 for c in v.values())}


def _parse_linear(text: str) -> ExpPoly:
    from .exppoly import parse_exppoly
    return parse_exppoly(text)


def _check_len(L: LieAlgebra, *vectors):
    for v in vectors:
        if len(v) != L.dim:
            raise ValueError(f"expected a vector of length {L.dim}, got {len(v)}")


def bracket(L: LieAlgebra, x: Sequence, y: Sequence) -> list:
    """Coordinates of [x, y]. Works for any coefficient ring closed under * and +."""
    _check_len(L, x, y)
    zero = x[0] * 0 if len(x) else 0
    out = [zero] * L.dim
    for (i, j), coeffs in L.structure.items():
        xi, xj, yi, yj = x[i], x[j], y[i], y[j]
        w = xi * yj - xj * yi
        if w == 0:
            continue
        for k, c in coeffs.items():
            out[k] = out[k] + w * c
    return out


def ad_matrix(L: LieAlgebra, x: Sequence) -> linalg.Matrix:
    """Matrix of w -> [x, w]; column j holds the coordinates of [x, v_j]."""
    _check_len(L, x)
    x = [Fraction(c) for c in x]
    cols = [bracket(L, x, L.basis_vector(j)) for j in range(L.dim)]
    return linalg.transpose(cols)


def jacobi_check(L: LieAlgebra) -> List[Tuple[Tuple[int, int, int], List[Fraction]]]:
    """Triples (1-based) whose cyclic Jacobi sum is nonzero, with the residual."""
    out = []
    n = L.dim
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                vi, vj, vk = L.basis_vector(i), L.basis_vector(j), L.basis_vector(k)
                s1 = bracket(L, bracket(L, vi, vj), vk)
                s2 = bracket(L, bracket(L, vj, vk), vi)
                s3 = bracket(L, bracket(L, vk, vi), vj)
                res = [a + b + c for a, b, c in zip(s1, s2, s3)]
                if any(res):
                    out.append(((i + 1, j + 1, k + 1), res))
    return out


def killing_form(L: LieAlgebra, x: Sequence, y: Sequence) -> Fraction:
    return linalg.trace(linalg.matmul(ad_matrix(L, x), ad_matrix(L, y)))


def format_element(L: LieAlgebra, coeffs: Sequence) -> str:
    """Render sum c_k v_k with ExpPoly or rational coefficients.

    Terms are ordered by the degree of their coefficient and then by basis
    index, so ``v4 - eps*v1`` keeps the unperturbed generator first.
    """
    parts = []
    items = [(name, ExpPoly.coerce(c)) for name, c in zip(L.basis, coeffs)]
    order = sorted(range(len(items)), key=lambda k: (items[k][1].degree(), k))
    for name, c in (items[k] for k in order):
        if c.is_zero():
            continue
        if len(c) == 1:
            text = str(c)
            neg = text.startswith("-")
            mag = text[1:] if neg else text
            body = name if mag == "1" else f"{mag}*{name}"
        else:
            neg = False
            body = f"({c})*{name}"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts) or "0"


def commutator_table(L: LieAlgebra) -> List[List[str]]:
    return [[format_element(L, L.bracket_basis(i, j)) for j in range(L.dim)] for i in range(L.dim)]


def render_grid(row_labels: Sequence[str], col_labels: Sequence[str], cells: Sequence[Sequence[str]],
                corner: str = "") -> str:
    widths = [max(len(col_labels[j]), *(len(r[j]) for r in cells)) for j in range(len(col_labels))]
    lw = max(len(corner), *(len(r) for r in row_labels))
    lines = [corner.ljust(lw) + " | " + "  ".join(c.ljust(w) for c, w in zip(col_labels, widths))]
    lines.append("-" * len(lines[0]))
    for lab, row in zip(row_labels, cells):
        lines.append(lab.ljust(lw) + " | " + "  ".join(c.ljust(w) for c, w in zip(row, widths)))
    return "\n".join(line.rstrip() for line in lines)


# -- documents --------------------------------------------------------------

def load_algebra(document, name: str = "") -> LieAlgebra:
    """Build a LieAlgebra from the JSON document (text, bytes, dict or path).

    Raises AlgebraError on malformed input and JacobiViolation when the
    antisymmetric completion is not a Lie algebra.
    """
    if isinstance(document, Path):
        document = document.read_text(encoding="utf-8")
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise AlgebraError(f"invalid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise AlgebraError("algebra document must be a JSON object")
    try:
        dim = document["dim"]
    except KeyError:
        raise AlgebraError("missing 'dim'") from None
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise AlgebraError("'dim' must be a positive integer")
    basis = document.get("basis") or [f"v{i + 1}" for i in range(dim)]
    if not isinstance(basis, list) or len(basis) != dim:
        raise AlgebraError(f"'basis' must list {dim} names")
    structure: Dict[Tuple[int, int], Dict[int, Fraction]] = {}
    for entry in document.get("brackets", []):
        try:
            i, j, coeffs = entry["i"], entry["j"], entry["coeffs"]
        except (KeyError, TypeError):
            raise AlgebraError(f"bracket entries need 'i', 'j', 'coeffs': {entry!r}") from None
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in (i, j)):
            raise AlgebraError(f"bracket indices must be integers: {entry!r}")
        if not (1 <= i <= dim and 1 <= j <= dim):
            raise AlgebraError(f"bracket index out of range 1..{dim}: ({i}, {j})")
        if i == j:
            raise AlgebraError(f"[v{i}, v{i}] is zero by antisymmetry and must not be listed")
        sign = 1
        if i > j:
            i, j, sign = j, i, -1
        if (i - 1, j - 1) in structure:
            raise AlgebraError(f"bracket ({i}, {j}) listed twice")
        out: Dict[int, Fraction] = {}
        for k, c in coeffs.items():
            try:
                kk = int(k)
            except ValueError:
                raise AlgebraError(f"output index {k!r} is not an integer") from None
            if not 1 <= kk <= dim:
                raise AlgebraError(f"output index {kk} out of range 1..{dim}")
            val = parse_rational(c) * sign
            if val != 0:
                out[kk - 1] = val
        structure[(i - 1, j - 1)] = out
    L = LieAlgebra(dim=dim, basis=tuple(basis), structure=structure,
                   name=name or document.get("name", ""))
    violations = jacobi_check(L)
    if violations:
        raise JacobiViolation(violations)
    return L


def dump_algebra(L: LieAlgebra) -> dict:
    brackets = []
    for (i, j) in sorted(L.structure):
        coeffs = {str(k + 1): str(c) for k, c in sorted(L.structure[(i, j)].items()) if c != 0}
        if coeffs:
            brackets.append({"i": i + 1, "j": j + 1, "coeffs": coeffs})
    doc = {"dim": L.dim, "basis": list(L.basis), "brackets": brackets}
    if L.name:
        doc["name"] = L.name
    return doc
