"""Local symbols: tame Hilbert symbols of any order away from n, quadratic
Hilbert symbols at 2-adic places by conic solubility, and archimedean
symbols.

The 2-adic solver decides z^2 = a x^2 + b y^2 by exhaustively enumerating
primitive solution classes modulo pi^N (depth-first over residue digits)
with N = 4e + 3. A primitive solution found at that depth Hensel-lifts: the
gradient (2z, -2ax, -2by) of the form has valuation at most e + 1 + max
v(a), v(b) <= e + 2 at a primitive point with v(a), v(b) in {0, 1}, and
4e + 3 >= 2(e + 2) + 1 for e >= 1. Absence at that depth refutes
solubility outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2

from .errors import (
    NonUnitQuotient,
    PrecisionExhausted,
    RootOfUnityMissing,
    WildPlace,
    ZeroElement,
)
from .fields import FieldElement, NumberField, PrimeData, valuation_at


@dataclass(frozen=True)
class Place:
    """A place of a number field: finite (with PrimeData) or archimedean."""

    kind: str  # "finite" | "real" | "complex"
    prime: PrimeData | None = None
    embedding_index: int | None = None

    @property
    def residue_norm(self) -> int:
        return self.prime.norm


# -- tame symbols ------------------------------------------------------------

def power_residue_exponent(R, value, zeta_img, n: int) -> int:
    """Exponent k with value^((q-1)/n) = zeta_img^k in the residue field."""
    q = R.order
    r = R.pow(value, (q - 1) // n)
    acc = R.one()
    for k in range(n):
        if acc == r:
            return k
        acc = R.mul(acc, zeta_img)
    raise ArithmeticError("power residue did not land in <zeta>")


def hilbert_tame(
    a: FieldElement, b: FieldElement, v: Place, n: int, zeta: FieldElement
) -> int:
    """Tame Hilbert symbol exponent at a finite place not dividing n.

    Computed as the n-th power residue of the unit
    (-1)^{v(a)v(b)} a^{v(b)} b^{-v(a)}.
    """
    if v.kind != "finite":
        raise ValueError("hilbert_tame needs a finite place")
    P = v.prime
    F = a.field
    if n % P.p == 0:
        raise WildPlace(f"place over {P.p} is wild for order {n}")
    if (P.norm - 1) % n != 0:
        raise RootOfUnityMissing(f"n={n} does not divide Nv-1={P.norm - 1}")
    if a.is_zero() or b.is_zero():
        raise ZeroElement("hilbert symbol of zero")
    va = valuation_at(F, a, P)
    vb = valuation_at(F, b, P)
    if va == 0 and vb == 0:
        return 0
    # unit part u = (-1)^(va*vb) * a^vb * b^(-va); reduce it at P
    u = F.mul(F.pow(a, vb), F.pow(b, -va))
    if (va * vb) % 2 == 1:
        u = F.mul(u, F.from_int(-1))
    from .fields import residue_reduce

    u_img = residue_reduce(u, P)
    zeta_img = residue_reduce(zeta, P)
    return power_residue_exponent(P.residue, u_img, zeta_img, n)


# -- archimedean symbols -----------------------------------------------------

def hilbert_arch(a: FieldElement, b: FieldElement, v: Place, n: int) -> int:
    """Archimedean Hilbert symbol exponent: nontrivial only for a real
    place, n = 2, and both arguments negative there."""
    if v.kind == "complex":
        return 0
    if v.kind != "real":
        raise ValueError("hilbert_arch needs an archimedean place")
    if n > 2:
        raise RootOfUnityMissing("real place carries only the order-2 symbol")
    if n == 1:
        return 0
    F = a.field
    sa = F.sign_at(a, v.embedding_index)
    sb = F.sign_at(b, v.embedding_index)
    return 1 if (sa < 0 and sb < 0) else 0


# -- 2-adic quadratic symbols ------------------------------------------------

class LocalQuadraticField:
    """Z_2[omega] with omega^2 = d, for the three dyadic completions in use:

      kind "q2"    : Q_2 itself            (e = 1, pi = 2)
      kind "ram2"  : Q_2(sqrt 2)           (e = 2, pi = sqrt 2)
      kind "ram-1" : Q_2(i)                (e = 2, pi = 1 + i)

    Elements are exact integer pairs (a, b) meaning a + b*omega. The
    working precision N defaults to 4e + 3 (see module docstring).
    """

    def __init__(self, kind: str, precision: int | None = None):
        if kind not in ("q2", "ram2", "ram-1"):
            raise ValueError(f"unsupported local field kind {kind}")
        self.kind = kind
        self.e = 1 if kind == "q2" else 2
        self.N = precision if precision is not None else 4 * self.e + 3
        if self.N < 4 * self.e + 3:
            raise PrecisionExhausted("precision below the documented margin 4e+3")
        self.d = {"q2": 0, "ram2": 2, "ram-1": -1}[self.kind]
        if kind == "q2":
            self.pi = (2, 0)
        elif kind == "ram2":
            self.pi = (0, 1)
        else:
            self.pi = (1, 1)
        self._pi_pows = [(1, 0)]
        for _ in range(self.N + 2):
            self._pi_pows.append(self.mul(self._pi_pows[-1], self.pi))
        self._symbol_cache: dict = {}

    # exact ring ops on pairs
    def mul(self, x, y):
        a, b = x
        c, dd = y
        return (a * c + b * dd * self.d, a * dd + b * c)

    def add(self, x, y):
        return (x[0] + y[0], x[1] + y[1])

    def neg(self, x):
        return (-x[0], -x[1])

    def norm(self, x) -> int:
        a, b = x
        return a * a - self.d * b * b

    def val(self, x) -> int:
        """pi-adic valuation (x must be nonzero as an exact pair)."""
        a, b = x
        if a == 0 and b == 0:
            raise ZeroElement("valuation of local zero")
        if self.kind == "q2":
            return _v2(a)
        n = self.norm(x)
        if n == 0:
            raise ZeroElement("norm degenerated; element not in the order")
        return _v2(n)

    def unit_normalize(self, x):
        """Divide by exact squares of pi^2-units to put val in {0, 1}.

        q2 divides by 4 = 2^2; ram2 by 2 = (sqrt 2)^2; ram-1 by 2i = (1+i)^2.
        The quotient is a square, so Hilbert symbols are unchanged.
        """
        v = self.val(x)
        while v >= 2:
            if self.kind == "q2":
                x = (x[0] // 4, 0)
                v -= 2
            elif self.kind == "ram2":
                x = (x[0] // 2, x[1] // 2)
                v -= 2
            else:
                a, b = x
                # divide by 2i: (a + bi)/(2i) = (b - ai)/2
                x = (b // 2, -a // 2)
                v -= 2
        return x

    def reduce_mod_pik(self, x, k):
        """Canonical representative of x modulo pi^k (for hashing)."""
        a, b = x
        if self.kind == "q2":
            return (a % (1 << k), 0)
        m_hi = 1 << ((k + 1) // 2)
        m_lo = 1 << (k // 2)
        if self.kind == "ram2":
            return (a % m_hi, b % m_lo)
        # ram-1: pi^k lattice is generated by 2^(k//2) and 2^(k//2) * pi when
        # k odd; reducing both coordinates mod 2^ceil(k/2) is a coarser but
        # consistent key when combined below
        return (a % m_hi, b % m_hi, (a + b) % m_lo if k % 2 else 0)

    def residue_bit(self, x) -> int:
        """Image in the residue field F_2."""
        a, b = x
        if self.kind == "q2":
            return a & 1
        if self.kind == "ram2":
            return a & 1
        return (a + b) & 1

    def is_square_unit(self, x) -> bool:
        """Exact squareness test for a unit, by enumeration mod pi^(2e+1)
        and Hensel."""
        if self.val(x) != 0:
            raise ValueError("is_square_unit wants a unit")
        k = 2 * self.e + 1
        key = ("sq", self.reduce_mod_pik(x, k))
        if key in self._symbol_cache:
            return self._symbol_cache[key]
        found = False
        for s in self._units_mod_pik(k):
            diff = self.add(self.mul(s, s), self.neg(x))
            if diff == (0, 0) or self.val(diff) >= k:
                found = True
                break
        self._symbol_cache[key] = found
        return found

    def is_fourth_power_unit(self, x) -> bool:
        """Exact 4th-power test for a unit (needed for wild order-4 checks
        over Q_2(i)): enumeration mod pi^(2 v(4) + 1) and Hensel on t^4 - x."""
        if self.val(x) != 0:
            raise ValueError("is_fourth_power_unit wants a unit")
        v4 = 2 * self.e
        k = 2 * v4 + 1
        key = ("q4", self.reduce_mod_pik(x, k))
        if key in self._symbol_cache:
            return self._symbol_cache[key]
        found = False
        for s in self._units_mod_pik(k):
            s2 = self.mul(s, s)
            s4 = self.mul(s2, s2)
            diff = self.add(s4, self.neg(x))
            if diff == (0, 0) or self.val(diff) >= k:
                found = True
                break
        self._symbol_cache[key] = found
        return found

    def _units_mod_pik(self, k):
        if self.kind == "q2":
            m = 1 << k
            for a in range(1, m, 2):
                yield (a, 0)
            return
        m_hi = 1 << ((k + 1) // 2)
        m_lo = 1 << (k // 2 + 1)
        for a in range(m_hi):
            for b in range(m_lo):
                if self.residue_bit((a, b)) == 1:
                    yield (a, b)

    # -- the conic solver ----------------------------------------------------

    def hilbert_quadratic(self, a, b, node_budget: int = 500_000) -> int:
        """Order-2 Hilbert symbol exponent of (a, b): 0 iff
        z^2 = a x^2 + b y^2 has a primitive solution."""
        a = self.unit_normalize(a)
        b = self.unit_normalize(b)
        key = (
            "h2",
            self.reduce_mod_pik(a, self.N),
            self.val(a),
            self.reduce_mod_pik(b, self.N),
            self.val(b),
        )
        if key in self._symbol_cache:
            return self._symbol_cache[key]
        ans = 0 if self._conic_soluble(a, b, node_budget) else 1
        self._symbol_cache[key] = ans
        return ans

    def _conic_soluble(self, a, b, node_budget) -> bool:
        """DFS over primitive solution classes of z^2 - a x^2 - b y^2 == 0
        modulo pi^N, digits in the residue field F_2."""
        N = self.N
        budget = [node_budget]

        def f_val(x, y, z):
            t = self.mul(z, z)
            t = self.add(t, self.neg(self.mul(a, self.mul(x, x))))
            t = self.add(t, self.neg(self.mul(b, self.mul(y, y))))
            return t

        def ok_mod(x, y, z, k) -> bool:
            t = f_val(x, y, z)
            return t == (0, 0) or self.val(t) >= k

        def dfs(x, y, z, k) -> bool:
            if k == N:
                return True
            budget[0] -= 1
            if budget[0] < 0:
                raise PrecisionExhausted(
                    "conic DFS node budget exhausted; raise node_budget"
                )
            pk = self._pi_pows[k]
            for dx in (0, 1):
                nx = self.add(x, self.mul((dx, 0), pk)) if dx else x
                for dy in (0, 1):
                    ny = self.add(y, self.mul((dy, 0), pk)) if dy else y
                    for dz in (0, 1):
                        nz = self.add(z, self.mul((dz, 0), pk)) if dz else z
                        if k == 0 and dx == 0 and dy == 0 and dz == 0:
                            continue
                        if ok_mod(nx, ny, nz, k + 1) and dfs(nx, ny, nz, k + 1):
                            return True
            return False

        return dfs((0, 0), (0, 0), (0, 0), 0)


def _v2(n: int) -> int:
    n = abs(int(n))
    if n == 0:
        raise ZeroElement("2-adic valuation of zero")
    return int(gmpy2.bit_scan1(gmpy2.mpz(n)))


def embed_dyadic(F: NumberField, x: FieldElement, L: LocalQuadraticField):
    """Exact image of a 2-integral field element in the dyadic model.

    Denominator 2-parts are cleared by the caller via unit_normalize-safe
    scaling; here coordinates must be 2-integral rationals.
    """
    if F.name == "q":
        c = x.coords[0]
        return _frac_pair(c, Fraction(0))
    if F.name in ("q_sqrt2", "q_i"):
        return _frac_pair(x.coords[0], x.coords[1])
    raise ValueError(f"no dyadic quadratic model for field {F.name}")


def _frac_pair(c0: Fraction, c1: Fraction):
    for c in (c0, c1):
        if c.denominator % 2 == 0:
            raise ValueError("clear 2-power denominators before embedding")
    # represent exactly modulo a huge 2-power; enough for all precisions used
    m = 1 << 96
    a = c0.numerator * int(gmpy2.invert(c0.denominator % m, m)) % m
    b = c1.numerator * int(gmpy2.invert(c1.denominator % m, m)) % m
    # recentre to balanced representatives so valuations are readable
    if a > m // 2:
        a -= m
    if b > m // 2:
        b -= m
    return (a, b)


# -- the double-variation vanishing check ------------------------------------

def double_variation_vanishes(
    field: NumberField,
    zeta: FieldElement,
    P: PrimeData,
    t_rows: tuple,
    s_rows: tuple,
    m: int,
) -> bool:
    """Whether the alternating 2x2 sum of tame pairings vanishes.

    t_rows = (t1, t2), s_rows = (s1, s2) are tuples of d field elements;
    the pairing of a point (p_1, ..., p_d) is the alternating sum over
    coordinate pairs (i < j) of tame symbols at P, matching a product of
    twisted cup-product classes on a split torus. Quotients along both rows
    must be P-units.
    """
    if m % P.p == 0:
        raise WildPlace("pairing order shares the residue characteristic")
    d = len(t_rows[0])
    for rows in (t_rows, s_rows):
        for i in range(d):
            q = field.div(rows[1][i], rows[0][i])
            if valuation_at(field, q, P) != 0:
                raise NonUnitQuotient(f"row quotient at coordinate {i} is not a unit")
    v = Place("finite", prime=P)
    total = 0
    for i in (0, 1):
        for j in (0, 1):
            sign = 1 if (i + j) % 2 == 0 else -1
            point = tuple(
                field.mul(t_rows[i][k], s_rows[j][k]) for k in range(d)
            )
            for x_idx in range(d):
                for y_idx in range(x_idx + 1, d):
                    h = hilbert_tame(point[x_idx], point[y_idx], v, m, zeta)
                    total += sign * h
    return total % m == 0
