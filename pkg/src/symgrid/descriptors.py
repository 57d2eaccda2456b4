"""Shipped field descriptors and the descriptor document loader.

Descriptors are hand-audited: minimal polynomial, automorphism matrices on
the power basis, the chosen root of unity, discriminant, and a prime set S
for which the author asserts Cl O_{E,S} = 0 (all four shipped fields have
class number one, so any S works).
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .fields import NumberField, SConfig


def _mat(rows):
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def _identity(d):
    return _mat([[1 if i == j else 0 for j in range(d)] for i in range(d)])


def make_rationals() -> NumberField:
    return NumberField(
        name="q",
        degree=1,
        min_poly=(0, 1),
        automorphisms=(_identity(1),),
        discriminant=1,
        n_roots=2,
        zeta_coords=(Fraction(-1),),
        s_primes=(2,),
        signature=(1, 0),
    )


def make_gaussian() -> NumberField:
    # basis 1, i ; conjugation sends i -> -i ; zeta = i of order 4
    conj = _mat([[1, 0], [0, -1]])
    return NumberField(
        name="q_i",
        degree=2,
        min_poly=(1, 0, 1),
        automorphisms=(_identity(2), conj),
        discriminant=-4,
        n_roots=4,
        zeta_coords=(0, 1),
        s_primes=(2,),
        signature=(0, 1),
    )


def make_sqrt2() -> NumberField:
    # basis 1, sqrt2 ; the involution sends sqrt2 -> -sqrt2
    tau = _mat([[1, 0], [0, -1]])
    return NumberField(
        name="q_sqrt2",
        degree=2,
        min_poly=(-2, 0, 1),
        automorphisms=(_identity(2), tau),
        discriminant=8,
        n_roots=2,
        zeta_coords=(-1, 0),
        s_primes=(2,),
        signature=(2, 0),
    )


def make_cyclo7_plus() -> NumberField:
    """Real subfield of the 7th cyclotomic field, generated by
    a = 2 cos(2 pi / 7), minimal polynomial x^3 + x^2 - 2x - 1.

    The generating automorphism sends a to a^2 - 2.
    """
    # s(1) = 1 ; s(a) = a^2 - 2 ; s(a^2) = -a^2 - a + 3
    s = _mat([[1, -2, 3], [0, 0, -1], [0, 1, -1]])
    s2 = _mat([[1, 1, 2], [0, -1, 1], [0, -1, 0]])
    return NumberField(
        name="q_zeta7_plus",
        degree=3,
        min_poly=(-1, -2, 1, 1),
        automorphisms=(_identity(3), s, s2),
        discriminant=49,
        n_roots=2,
        zeta_coords=(-1, 0, 0),
        s_primes=(2, 7),
        signature=(3, 0),
    )


_BUILDERS = {
    "q": make_rationals,
    "q_i": make_gaussian,
    "q_sqrt2": make_sqrt2,
    "q_zeta7_plus": make_cyclo7_plus,
}

_CACHE: dict[str, NumberField] = {}


def get_field(name: str) -> NumberField:
    if name not in _CACHE:
        if name not in _BUILDERS:
            raise KeyError(f"unknown field descriptor '{name}'")
        _CACHE[name] = _BUILDERS[name]()
    return _CACHE[name]


def field_names() -> list[str]:
    return sorted(_BUILDERS)


def default_s_config(F: NumberField, extra: tuple[int, ...] = ()) -> SConfig:
    primes = sorted(set(F.s_primes) | set(extra))
    return SConfig(primes=tuple(primes))


def field_to_document(F: NumberField) -> dict:
    """Serializable descriptor document (the external configuration format)."""
    return {
        "name": F.name,
        "min_poly": list(F.min_poly),
        "automorphisms": [
            [[str(x) for x in row] for row in m] for m in F.automorphisms
        ],
        "zeta": [str(c) for c in F.zeta_coords],
        "n_E": F.n_roots,
        "discriminant": F.discriminant,
        "S": list(F.s_primes),
        "embeddings": _embedding_matrix(F),
        "signature": list(F.signature),
    }


def _embedding_matrix(F: NumberField) -> list[list[float]]:
    rows = []
    for k in range(F.degree):
        basis_el = F.element([0] * k + [1] + [0] * (F.degree - 1 - k))
        coords, _err = F.embed_floats(basis_el)
        rows.append([float(c) for c in coords])
    return rows


def field_from_document(doc: dict) -> NumberField:
    autos = tuple(
        _mat([[Fraction(x) for x in row] for row in m]) for m in doc["automorphisms"]
    )
    return NumberField(
        name=doc["name"],
        degree=len(doc["min_poly"]) - 1,
        min_poly=tuple(int(c) for c in doc["min_poly"]),
        automorphisms=autos,
        discriminant=int(doc["discriminant"]),
        n_roots=int(doc["n_E"]),
        zeta_coords=tuple(Fraction(c) for c in doc["zeta"]),
        s_primes=tuple(int(p) for p in doc["S"]),
        signature=tuple(doc.get("signature", (len(doc["min_poly"]) - 1, 0))),
    )


def load_field(path_or_name: str) -> NumberField:
    """Resolve a field flag: a shipped name or a descriptor document path."""
    if path_or_name in _BUILDERS:
        return get_field(path_or_name)
    p = Path(path_or_name)
    if p.exists():
        return field_from_document(json.loads(p.read_text()))
    raise KeyError(f"no shipped field or descriptor file named '{path_or_name}'")
