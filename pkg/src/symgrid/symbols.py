"""Global arithmetic symbols: power-residue symbols on elements and ideals,
spin and half-spin symbols, the idele-character pairing, order-2 triple
symbols via explicit degree-8 extensions, and the equivariant bracket that
sums triple symbols over automorphism orbits.

All values are exponents of the field's fixed root of unity, written
additively. Tate-twist weights are carried as audit tags only; the
automorphism group acts on values through the cyclotomic character when
equivariance is asserted.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import gmpy2

from .arith import factor_int, is_prime, sqrt_mod_prime
from .errors import (
    BadD,
    ConditionsFail,
    CoprimalityViolated,
    GammaSearchExhausted,
    NotCoprime,
    NotCoprimeWithConjugate,
    OrderMismatch,
    SelfConjugatePrime,
    UnsupportedCharacter,
    UnsupportedOrder,
    WildSymbolUnavailable,
    ZeroElement,
)
from .fields import (
    FieldElement,
    NumberField,
    PrimeData,
    SConfig,
    factor_principal,
    primes_above,
    residue_reduce,
    valuation_at,
)
from .localsym import (
    LocalQuadraticField,
    Place,
    embed_dyadic,
    hilbert_arch,
    hilbert_tame,
    power_residue_exponent,
)


@dataclass(frozen=True)
class SymbolValue:
    """An exponent of the fixed primitive m-th root of unity, with a
    Tate-twist audit tag."""

    modulus: int
    exponent: int
    twist: int = 0

    def __post_init__(self):
        object.__setattr__(self, "exponent", self.exponent % self.modulus)

    def reduce_to(self, m: int) -> "SymbolValue":
        if self.modulus % m != 0:
            raise OrderMismatch(f"cannot reduce mod {self.modulus} to mod {m}")
        return SymbolValue(m, self.exponent % m, self.twist)

    def __add__(self, other):
        if self.modulus != other.modulus:
            raise OrderMismatch("adding symbols of different moduli")
        return SymbolValue(self.modulus, self.exponent + other.exponent, self.twist)


# -- context -----------------------------------------------------------------

_DYADIC_KIND = {"q": "q2", "q_sqrt2": "ram2", "q_i": "ram-1"}


class SymbolContext:
    """Field + S bundle with the local models needed for S-local factors."""

    def __init__(self, F: NumberField, S: SConfig):
        self.field = F
        self.s_config = S
        self.zeta = F.zeta()
        self.dyadic = (
            LocalQuadraticField(_DYADIC_KIND[F.name])
            if F.name in _DYADIC_KIND
            else None
        )
        self._prime_cache: dict = {}
        self._odd_s_primes = tuple(p for p in S.primes if p != 2)

    def primes_over(self, p: int):
        if p not in self._prime_cache:
            self._prime_cache[p] = tuple(
                primes_above(self.field, p, self.s_config)
            )
        return self._prime_cache[p]

    def real_place_indices(self):
        r1, _ = self.field.signature
        return tuple(range(r1))

    def has_complex_place(self):
        return self.field.signature[1] > 0

    # S-local Hilbert factor, additive, order n
    def hilbert_at_s_place(self, kind, idx, a, b, n) -> int:
        if kind == "real":
            return hilbert_arch(a, b, Place("real", embedding_index=idx), n)
        if kind == "complex":
            return 0
        if kind == "dyadic":
            return self.hilbert_dyadic(a, b, n)
        if kind == "odd_s":
            P = self.primes_over(idx)[0]
            return (
                hilbert_tame(a, b, Place("finite", prime=P), n, self.zeta)
                * 1
            )
        raise ValueError(f"unknown S-place kind {kind}")

    def s_places(self):
        out = [("dyadic", None)]
        for p in self._odd_s_primes:
            out.append(("odd_s", p))
        for i in self.real_place_indices():
            out.append(("real", i))
        if self.has_complex_place():
            out.append(("complex", None))
        return out

    def hilbert_dyadic(self, a: FieldElement, b: FieldElement, n: int) -> int:
        """Order-n Hilbert symbol at the dyadic place.

        n = 2 with a quadratic dyadic model: exact conic decision. Otherwise
        the symbol is returned as 0 only when an argument is certified a
        local n-th power, or (n = 4, both arguments in 1 + pi^6) under the
        documented conductor rule; anything else is refused loudly.
        """
        F = self.field
        if self.dyadic is not None and n == 2:
            ea = embed_dyadic(F, _clear_two_denominators(a), self.dyadic)
            eb = embed_dyadic(F, _clear_two_denominators(b), self.dyadic)
            return self.dyadic.hilbert_quadratic(ea, eb)
        if n == 2 and F.name == "q_zeta7_plus":
            if self._zeta7_dyadic_square(a) or self._zeta7_dyadic_square(b):
                return 0
            raise WildSymbolUnavailable(
                "order-2 dyadic symbol over the cubic field needs a certified square"
            )
        if n == 4 and F.name == "q_i":
            L = self.dyadic
            ea = L.unit_normalize(embed_dyadic(F, _clear_two_denominators(a), L))
            eb = L.unit_normalize(embed_dyadic(F, _clear_two_denominators(b), L))
            for e in (ea, eb):
                if L.val(e) == 0 and L.is_fourth_power_unit(e):
                    return 0
            if (
                L.val(ea) == 0
                and L.val(eb) == 0
                and _close_to_one(L, ea, 6)
                and _close_to_one(L, eb, 6)
            ):
                return 0
            raise WildSymbolUnavailable(
                "wild quartic factor not trivialized by the congruence rule"
            )
        raise WildSymbolUnavailable(f"no dyadic model for {F.name} at order {n}")

    def _zeta7_dyadic_square(self, x: FieldElement) -> bool:
        # inert dyadic place of the cubic field, e = 1: a unit is a square
        # iff it is one modulo 8; test over the 256-unit group of O/8
        F = self.field
        coords = []
        for c in x.coords:
            if c.denominator % 2 == 0:
                return False
            coords.append(c.numerator * int(gmpy2.invert(c.denominator % 8, 8)) % 8)
        key = ("z7sq", tuple(coords))
        cache = self._prime_cache
        if key in cache:
            return cache[key]
        target = tuple(coords)
        if _zeta7_mod8_val(target) != 0:
            cache[key] = False
            return False
        found = False
        for s0 in range(8):
            for s1 in range(8):
                for s2 in range(8):
                    s = (s0, s1, s2)
                    if _zeta7_mod8_val(s) != 0:
                        continue
                    if _zeta7_mod8_mul(s, s) == target:
                        found = True
                        break
                if found:
                    break
            if found:
                break
        cache[key] = found
        return found


def _zeta7_mod8_mul(x, y):
    # multiplication in (Z/8)[t]/(t^3 + t^2 - 2t - 1)
    prod = [0] * 5
    for i, xi in enumerate(x):
        for j, yj in enumerate(y):
            prod[i + j] += xi * yj
    for k in (4, 3):
        c = prod[k]
        if c:
            prod[k] = 0
            # t^3 = -t^2 + 2t + 1
            prod[k - 1] -= c
            prod[k - 2] += 2 * c
            prod[k - 3] += c
    return tuple(v % 8 for v in prod[:3])


def _zeta7_mod8_val(x):
    # residue field F_8: unit iff x mod 2 != 0
    return 0 if any(v % 2 for v in x) else 1


def _clear_two_denominators(x: FieldElement) -> FieldElement:
    """Multiply by the square of the 2-part of the common denominator (a
    dyadic square, so symbols are unchanged)."""
    F = x.field
    k = 0
    for c in x.coords:
        d = c.denominator
        v = 0
        while d % 2 == 0:
            d //= 2
            v += 1
        k = max(k, v)
    if k == 0:
        return x
    return F.element(tuple(c * 4**k for c in x.coords))


def _close_to_one(L: LocalQuadraticField, x, k: int) -> bool:
    diff = L.add(x, L.neg((1, 0)))
    if diff == (0, 0):
        return True
    return L.val(diff) >= k


# -- power residue symbols -----------------------------------------------------

def power_residue(
    alpha: FieldElement, P: PrimeData, n: int, F: NumberField
) -> SymbolValue:
    """The n-th power residue symbol exponent of alpha at P."""
    if n == 1:
        return SymbolValue(1, 0)
    if (P.norm - 1) % n != 0:
        raise OrderMismatch(f"n={n} does not divide NP-1={P.norm - 1}")
    if alpha.is_zero() or valuation_at(F, alpha, P) != 0:
        raise NotCoprime("power residue needs a P-unit argument")
    img = residue_reduce(alpha, P)
    zeta_img = residue_reduce(F.zeta(), P)
    zn = P.residue.pow(zeta_img, F.n_roots // n)
    k = power_residue_exponent(P.residue, img, zn, n)
    return SymbolValue(n, k, twist=1)


def power_residue_ideal(
    alpha: FieldElement,
    factors: list[tuple[PrimeData, int]],
    n: int,
    F: NumberField,
) -> SymbolValue:
    """Multiplicative extension over a factored ideal."""
    total = 0
    for P, e in factors:
        total += e * power_residue(alpha, P, n, F).exponent
    return SymbolValue(max(n, 1), total, twist=1)


# -- spin symbols --------------------------------------------------------------

@dataclass(frozen=True)
class SpinContext:
    """Involution data for spin symbols: zeta_n is inverted by tau."""

    ctx: SymbolContext
    tau: int
    n: int

    def __post_init__(self):
        F = self.ctx.field
        zn = F.pow(F.zeta(), F.n_roots // self.n)
        if F.apply_auto(self.tau, zn) != F.invert(zn):
            raise ValueError("spin context needs zeta_n^tau = zeta_n^{-1}")


def spin_symbol(x: FieldElement, sctx: SpinContext) -> SymbolValue:
    """(x^tau / x O_{E,S})_n."""
    ctx = sctx.ctx
    F = ctx.field
    fac = factor_principal(x, F, ctx.s_config)
    x_tau = F.apply_auto(sctx.tau, x)
    total = 0
    for P, e in fac:
        if valuation_at(F, x_tau, P) != 0:
            raise SelfConjugatePrime(
                f"prime over {P.p} divides both x and its conjugate"
            )
        total += e * power_residue(x_tau, P, sctx.n, F).exponent
    return SymbolValue(sctx.n, total, twist=1)


def spin_reciprocity_defect(p: FieldElement, sctx: SpinContext) -> SymbolValue:
    """leg(p / p^tau O) minus the S-local product; the contract is 0.

    Implemented for n = 2 (the S-local factors are then exactly computable).
    """
    if sctx.n != 2:
        raise UnsupportedOrder("defect evaluation is an order-2 operation")
    ctx = sctx.ctx
    F = ctx.field
    p_tau = F.apply_auto(sctx.tau, p)
    fac_tau = factor_principal(p_tau, F, ctx.s_config)
    for P, _e in fac_tau:
        if valuation_at(F, p, P) != 0:
            raise SelfConjugatePrime("p and p^tau generate the same ideal")
    lhs = power_residue_ideal(p, fac_tau, 2, F).exponent
    diff = F.sub(p_tau, p)
    rhs = 0
    for kind, idx in ctx.s_places():
        rhs += ctx.hilbert_at_s_place(kind, idx, p, diff, 2)
    return SymbolValue(2, lhs - rhs, twist=0)


# -- half-spin symbols ---------------------------------------------------------

@dataclass(frozen=True)
class HalfSpinContext:
    """Involution data for half-spin symbols: zeta_n is fixed by tau and the
    fixed field of tau is the rationals (the shipped quadratic fields)."""

    ctx: SymbolContext
    tau: int
    n: int

    def __post_init__(self):
        F = self.ctx.field
        zn = F.pow(F.zeta(), F.n_roots // self.n)
        if F.apply_auto(self.tau, zn) != zn:
            raise ValueError("half-spin context needs zeta_n^tau = zeta_n")
        if F.degree != 2:
            raise ValueError("half-spin implemented over quadratic fields")


@dataclass
class HalfSpinResult:
    value: SymbolValue
    ideal_below: tuple  # ((rational prime, exponent), ...)
    ideal_is_prime: bool


def _conjugate_prime_root(F: NumberField, tau: int, P: PrimeData) -> int:
    """Root parameter of P^tau for a split degree-one prime P."""
    t = P.alpha_image[0]
    alpha_tau = F.apply_auto(tau, F.element([0, 1] + [0] * (F.degree - 2)))
    acc = 0
    for c in reversed(alpha_tau.coords):
        acc = (acc * t + c.numerator * int(gmpy2.invert(c.denominator % P.p, P.p))) % P.p
    return acc


def half_spin(x: FieldElement, hctx: HalfSpinContext) -> HalfSpinResult:
    """leg(x / I_x)_n where I_x descends (x - x^tau) to the fixed field.

    The involution difference of a product of primes has no smoothness to
    offer, so its factorization runs with a widened prime bound (trial
    division plus certified prime-power cofactors stays exact and loud).
    """
    ctx = hctx.ctx
    F = ctx.field
    x_tau = F.apply_auto(hctx.tau, x)
    diff = F.sub(x, x_tau)
    if diff.is_zero():
        raise NotCoprimeWithConjugate("x is tau-invariant")
    from dataclasses import replace

    wide = replace(ctx.s_config, factor_bound=max(ctx.s_config.factor_bound, 2**63))
    fac_x = factor_principal(x, F, wide)
    for P, _ in fac_x:
        if valuation_at(F, x_tau, P) != 0:
            raise NotCoprimeWithConjugate("x shares a prime with its conjugate")
    fac = factor_principal(diff, F, wide)
    # group the primes of E over their rational primes
    by_p: dict[int, list] = {}
    for P, e in fac:
        by_p.setdefault(P.p, []).append((P, e))
    below = []
    total = 0
    for p in sorted(by_p):
        entries = by_p[p]
        if len(entries) == 1 and entries[0][0].f == 2:
            P, e = entries[0]
            e_w = e
            img = P.reduce(x)
            if not P.residue.in_prime_field(img):
                raise ArithmeticError("residue not tau-invariant at an inert prime")
            res = img[0]
        elif len(entries) == 2:
            (P1, e1), (P2, e2) = entries
            if e1 != e2:
                raise ArithmeticError("conjugate primes with unequal exponents")
            e_w = e1
            res = P1.reduce(x)[0]
        else:
            # split prime with only one of the pair present cannot happen for
            # a tau-invariant ideal
            raise ArithmeticError("ideal (x - x^tau) is not tau-invariant")
        below.append((p, e_w))
        if (p - 1) % hctx.n != 0:
            raise OrderMismatch(f"n={hctx.n} does not divide p-1={p - 1}")
        r = int(gmpy2.powmod(res, (p - 1) // hctx.n, p))
        # exponent against the rational image of zeta_n (n = 2 in practice)
        zn = F.pow(F.zeta(), F.n_roots // hctx.n)
        if zn != F.from_int(-1) and hctx.n != 1:
            raise UnsupportedOrder("half-spin over the fixed field needs zeta_n = -1")
        k = 0 if r == 1 else 1
        if r != 1 and r != p - 1:
            raise ArithmeticError("Euler criterion returned a non-sign")
        total += e_w * k
    is_prime_ideal = len(below) == 1 and below[0][1] == 1
    return HalfSpinResult(
        SymbolValue(hctx.n, total, twist=1), tuple(below), is_prime_ideal
    )


def half_spin_sq_identity(x: FieldElement, hctx: HalfSpinContext) -> int:
    """2 hs(x) - leg(x^tau / x O) - sum_S (x^tau - x, x)_v, contractually 0."""
    ctx = hctx.ctx
    F = ctx.field
    n = hctx.n
    hs2 = 2 * half_spin(x, hctx).value.exponent
    x_tau = F.apply_auto(hctx.tau, x)
    fac_x = factor_principal(x, F, ctx.s_config)
    spin = power_residue_ideal(x_tau, fac_x, n, F).exponent
    diff = F.sub(x_tau, x)
    s_sum = 0
    for kind, idx in ctx.s_places():
        s_sum += ctx.hilbert_at_s_place(kind, idx, diff, x, n)
    return (hs2 - spin - s_sum) % n


def half_spin_product_identity(
    x: FieldElement, y: FieldElement, hctx: HalfSpinContext
) -> int:
    """The product identity for hs(xy); contractually 0 on admissible pairs.

    Admissible: y coprime with x and with y^tau, and the fixed quadratic
    generator D coprime to both norms.
    """
    ctx = hctx.ctx
    F = ctx.field
    n = hctx.n
    tau = hctx.tau
    x_tau = F.apply_auto(tau, x)
    y_tau = F.apply_auto(tau, y)
    z = F.mul(x, y)
    # D with E = Q(sqrt D): read off the minimal polynomial x^2 - D or x^2 + 1
    D = -Fraction(F.min_poly[0])
    sqrt_d = F.element([0, 1])
    for elem in (x, y):
        nrm = F.norm(elem)
        if (nrm.numerator * nrm.denominator) % 2 == 0 and D % 2 == 0:
            raise BadD("D shares support with a norm; adjust by a square first")
    fac_x = factor_principal(x, F, ctx.s_config)
    for P, _ in fac_x:
        if valuation_at(F, y, P) != 0:
            raise NotCoprime("y is not coprime with x")
    fac_y = factor_principal(y, F, ctx.s_config)
    for P, _ in fac_y:
        if valuation_at(F, y_tau, P) != 0:
            raise NotCoprimeWithConjugate("y is not coprime with y^tau")

    hs = lambda el: half_spin(el, hctx).value.exponent
    lhs = (
        hs(z)
        - hs(x)
        - hs(y)
        + power_residue_ideal(y_tau, fac_x, n, F).exponent
    )
    # rational S-local data over the fixed field
    x2 = F.mul(sqrt_d, F.sub(x, x_tau)).coords[0]
    y2 = F.mul(sqrt_d, F.sub(y, y_tau)).coords[0]
    z2 = F.mul(sqrt_d, F.sub(z, F.apply_auto(tau, z))).coords[0]
    if x2 == 0 or y2 == 0 or z2 == 0:
        raise NotCoprimeWithConjugate("a tau-difference vanished")
    nx = F.norm(x)
    Q = _RATIONALS()
    rhs = 0
    for kind, idx in _rational_s_places():
        a1 = Q.element([nx / y2])
        b1 = Q.element([z2 / x2])
        a2 = Q.element([-x2])
        b2 = Q.element([z2])
        rhs += _q_hilbert(kind, idx, a1, b1, n)
        rhs += _q_hilbert(kind, idx, a2, b2, n)
    return (lhs - rhs) % n


_Q_CTX_CACHE = {}


def _RATIONALS():
    from .descriptors import get_field

    return get_field("q")


def _rational_s_places():
    return (("dyadic", None), ("real", 0))


def _q_hilbert(kind, idx, a, b, n):
    if "q" not in _Q_CTX_CACHE:
        from .descriptors import default_s_config, get_field

        Fq = get_field("q")
        _Q_CTX_CACHE["q"] = SymbolContext(Fq, default_s_config(Fq))
    return _Q_CTX_CACHE["q"].hilbert_at_s_place(kind, idx, a, b, n)


# -- global product formula -----------------------------------------------------

def hilbert_product_sum(
    a: FieldElement, b: FieldElement, ctx: SymbolContext, n: int
) -> int:
    """Sum over all places of the order-n Hilbert exponents of (a, b).

    Finite places away from the supports contribute 0 (unit-unit tame
    symbols); the reciprocity contract makes the total 0 mod n.
    """
    F = ctx.field
    places = set()
    for el in (a, b):
        for P, _e in factor_principal(el, F, ctx.s_config):
            places.add((P.p, P.alpha_image))
    total = 0
    for key in sorted(places):
        P = _prime_from_key(ctx, key)
        total += hilbert_tame(a, b, Place("finite", prime=P), n, ctx.zeta)
    for kind, idx in ctx.s_places():
        total += ctx.hilbert_at_s_place(kind, idx, a, b, n)
    return total % n


# -- the triple product of residue symbols -------------------------------------

def triple_legendre_product(
    a: FieldElement, b: FieldElement, c: FieldElement, ctx: SymbolContext, n: int
) -> int:
    """Triple product identity: the three cross residue symbols plus the
    (-1 / gcd) term, minus the S-local factors. Contractually 0."""
    F = ctx.field
    facs = {}
    for name, el in (("a", a), ("b", b), ("c", c)):
        if el.is_zero():
            raise ZeroElement(f"{name} is zero")
        facs[name] = dict_of(factor_principal(el, F, ctx.s_config))
    keys = set()
    for f in facs.values():
        keys |= set(f)
    d_exp = {k: min(facs["a"].get(k, 0), facs["b"].get(k, 0), facs["c"].get(k, 0))
             for k in keys}
    adj = {
        name: {k: v - d_exp[k] for k, v in facs[name].items() if v - d_exp[k] != 0}
        for name in facs
    }
    for n1, n2 in (("a", "b"), ("b", "c"), ("a", "c")):
        if set(adj[n1]) & set(adj[n2]):
            raise CoprimalityViolated(f"adjusted supports of {n1},{n2} meet")

    def plist(expmap):
        out = []
        for key, e in sorted(expmap.items()):
            out.append((_prime_from_key(ctx, key), e))
        return out

    lhs = 0
    lhs += power_residue_ideal(F.div(a, b), plist(adj["c"]), n, F).exponent
    lhs += power_residue_ideal(F.div(b, c), plist(adj["a"]), n, F).exponent
    lhs += power_residue_ideal(F.div(c, a), plist(adj["b"]), n, F).exponent
    lhs += power_residue_ideal(
        F.from_int(-1), plist({k: v for k, v in d_exp.items() if v}), n, F
    ).exponent
    rhs = 0
    for kind, idx in ctx.s_places():
        rhs += ctx.hilbert_at_s_place(kind, idx, b, a, n)
        rhs += ctx.hilbert_at_s_place(kind, idx, c, b, n)
        rhs += ctx.hilbert_at_s_place(kind, idx, a, c, n)
    return (lhs - rhs) % n


def dict_of(factors):
    return {(P.p, P.alpha_image): e for P, e in factors}


def _prime_from_key(ctx: SymbolContext, key) -> PrimeData:
    p, alpha_image = key
    for P in ctx.primes_over(p):
        if P.alpha_image == alpha_image:
            return P
    raise KeyError(key)


# -- idele pairing --------------------------------------------------------------

def idele_character_pairing(
    x_map: dict, delta: FieldElement, ctx: SymbolContext
) -> SymbolValue:
    """Sum over places of (delta, x_w)_w for a square-free Kummer datum
    delta describing a quadratic character. The idele is 1 off the map."""
    F = ctx.field
    fac = factor_principal(delta, F, ctx.s_config)
    if any(abs(e) > 1 for _P, e in fac):
        raise UnsupportedCharacter("Kummer datum must be square-free outside S")
    total = 0
    for key, xw in sorted(x_map.items(), key=lambda kv: str(kv[0])):
        kind, idx = key
        if kind == "finite":
            P = _prime_from_key(ctx, idx) if isinstance(idx, tuple) else (
                ctx.primes_over(idx)[0]
            )
            total += hilbert_tame(
                delta, xw, Place("finite", prime=P), 2, ctx.zeta
            )
        else:
            total += ctx.hilbert_at_s_place(kind, idx, delta, xw, 2)
    return SymbolValue(2, total, twist=0)


# -- triple symbols of order 2 ---------------------------------------------------

@dataclass
class ConditionReport:
    """Per-clause verdicts for the interlinking conditions of a triple."""

    tame: bool
    disjoint: bool
    hilbert_trivial: bool
    powers_at_s0: bool
    valuations_coprime: bool
    independent_classes: bool
    details: dict = dc_field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return (
            self.tame
            and self.disjoint
            and self.hilbert_trivial
            and self.powers_at_s0
            and self.valuations_coprime
            and self.independent_classes
        )


def redei_conditions(
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    ctx: SymbolContext,
    n: int = 2,
    strong: bool = True,
) -> ConditionReport:
    """Check the interlinking conditions making the order-n triple symbol
    well-defined, and (strong=True) the local n-th power strengthening."""
    F = ctx.field
    facs = [factor_principal(el, F, ctx.s_config) for el in (a, b, c)]
    supports = [set(dict_of(f)) for f in facs]
    details: dict = {}

    sq_free = [
        {k: e for k, e in dict_of(f).items() if e % n != 0} for f in facs
    ]
    disjoint = (
        not (set(sq_free[0]) & set(sq_free[1]))
        and not (set(sq_free[1]) & set(sq_free[2]))
        and not (set(sq_free[0]) & set(sq_free[2]))
    )
    details["supports"] = [sorted(s) for s in sq_free]

    valuations_coprime = all(
        all(gmpy2.gcd(e, n) == 1 for e in sf.values()) for sf in sq_free
    )

    powers_at_s0 = True
    tame = True
    for name, el in (("a", a), ("b", b), ("c", c)):
        local = _is_local_nth_power_at_s0(el, ctx, n)
        details[f"{name}_power_at_S0"] = local
        powers_at_s0 = powers_at_s0 and local
        tame = tame and local  # unramified at wild places follows

    hilbert_trivial = True
    hdetails = []
    pairs = ((a, b, "ab"), (b, c, "bc"), (a, c, "ac"))
    for x, y, label in pairs:
        places = set()
        for el in (x, y):
            for P, e in factor_principal(el, F, ctx.s_config):
                places.add((P.p, P.alpha_image))
        verdicts = {}
        for key in sorted(places):
            P = _prime_from_key(ctx, key)
            h = hilbert_tame(x, y, Place("finite", prime=P), n, ctx.zeta)
            verdicts[str(key)] = h
            hilbert_trivial = hilbert_trivial and h == 0
        for kind, idx in ctx.s_places():
            try:
                h = ctx.hilbert_at_s_place(kind, idx, x, y, n)
            except WildSymbolUnavailable:
                h = None
            verdicts[f"{kind}:{idx}"] = h
            hilbert_trivial = hilbert_trivial and h == 0
        hdetails.append((label, verdicts))
    details["hilbert"] = hdetails

    independent = (
        not _is_square_class_trivial(a, ctx, n)
        and not _is_square_class_trivial(b, ctx, n)
        and not _is_square_class_trivial(F.mul(a, b), ctx, n)
    )

    return ConditionReport(
        tame=tame,
        disjoint=disjoint,
        hilbert_trivial=hilbert_trivial,
        powers_at_s0=powers_at_s0 if strong else True,
        valuations_coprime=valuations_coprime,
        independent_classes=independent,
        details=details,
    )


def _is_local_nth_power_at_s0(el: FieldElement, ctx: SymbolContext, n: int) -> bool:
    """n-th power at every place of S0 = {v : v | n or archimedean}."""
    F = ctx.field
    # archimedean: totally positive when n is even and places are real
    if n % 2 == 0:
        for i in ctx.real_place_indices():
            if F.sign_at(el, i) < 0:
                return False
    # dyadic
    if n % 2 == 0:
        if ctx.dyadic is not None:
            L = ctx.dyadic
            e = embed_dyadic(F, _clear_two_denominators(el), L)
            if L.val(e) % 2 != 0:
                return False
            e = L.unit_normalize(e)
            if n == 2 and not L.is_square_unit(e):
                return False
            if n == 4 and not L.is_fourth_power_unit(e):
                return False
        elif F.name == "q_zeta7_plus":
            if not ctx._zeta7_dyadic_square(el):
                return False
        else:
            raise WildSymbolUnavailable(f"no dyadic power test for {F.name}")
    # odd primes in S (7 for the cubic field): n = 2 residue test
    for p in ctx._odd_s_primes:
        if n % 2 == 0 and F.name == "q_zeta7_plus" and p == 7:
            if not _is_square_at_ramified7(el, F):
                return False
    return True


def _is_square_at_ramified7(el: FieldElement, F: NumberField) -> bool:
    # evaluate at the triple root t=2 of the minimal polynomial mod 7
    acc = 0
    for c in reversed(el.coords):
        if c.denominator % 7 == 0:
            return False
        acc = (acc * 2 + c.numerator * int(gmpy2.invert(c.denominator % 7, 7))) % 7
    if acc % 7 == 0:
        return False
    return int(gmpy2.powmod(acc, 3, 7)) == 1


def _is_square_class_trivial(el: FieldElement, ctx: SymbolContext, n: int) -> bool:
    """Whether el is an n-th power class in O_{E,S} up to S-units: detected
    through the square-free part of its factorization plus a global n-th
    root test on the S-unit part."""
    F = ctx.field
    fac = factor_principal(el, F, ctx.s_config)
    if any(e % n != 0 for _P, e in fac):
        return False
    rest = el
    for P, e in fac:
        rest = F.div(rest, F.pow(P.generator, e))
    root = _global_nth_root(rest, F, n)
    if root is not None:
        return True
    # try unit multiples for quadratic/cubic fields (finite unit sweep)
    for u in _unit_sweep(F):
        if _global_nth_root(F.mul(rest, F.pow(u, n)), F, n) is not None:
            return True
    return False


def _unit_sweep(F: NumberField):
    units = [F.from_int(-1)]
    if F.name == "q_sqrt2":
        units.append(F.element([1, 1]))
    if F.name == "q_zeta7_plus":
        units.append(F.element([0, 1, 0]))
        units.append(F.element([1, 1, 0]))
    out = []
    for e0 in (-2, -1, 0, 1, 2):
        for u in units:
            out.append(F.pow(u, e0 if e0 != 0 else 1))
    out.append(F.one())
    return out


def _global_nth_root(el: FieldElement, F: NumberField, n: int):
    """Exact n-th root in F if one exists (embedding + integer rounding +
    exact verification)."""
    if el.is_zero():
        return F.zero()
    if n != 2:
        return None
    coords, _err = F.embed_floats(el)
    r1, r2 = F.signature
    if r2 == 0:
        if any(c <= 0 for c in coords):
            return None
        import itertools

        roots = [c**0.5 for c in coords]
        basis_rows = []
        for k in range(F.degree):
            bas = F.element([0] * k + [1] + [0] * (F.degree - 1 - k))
            bc, _ = F.embed_floats(bas)
            basis_rows.append(bc)
        import numpy as np

        B = np.array(basis_rows).T
        for signs in itertools.product((1, -1), repeat=len(roots) - 1):
            target = np.array([roots[0]] + [s * r for s, r in zip(signs, roots[1:])])
            try:
                sol = np.linalg.solve(B, target)
            except np.linalg.LinAlgError:
                return None
            cand = F.element([Fraction(round(v)) for v in sol])
            if F.mul(cand, cand) == el:
                return cand
            # retry with half-integer denominators (non-monogenic safety)
            cand2 = F.element([Fraction(round(v * 2), 2) for v in sol])
            if F.mul(cand2, cand2) == el:
                return cand2
        return None
    # complex quadratic: a + bi square root exact test
    a, b = el.coords
    # (u + vi)^2 = u^2 - v^2 + 2uv i
    # solve u^2 = (a + sqrt(a^2+b^2))/2 over Q
    norm = a * a + b * b
    s = _fraction_sqrt(norm)
    if s is None:
        return None
    for sg in (1, -1):
        u2 = (a + sg * s) / 2
        u = _fraction_sqrt(u2) if u2 >= 0 else None
        if u in (None, 0):
            continue
        v = b / (2 * u)
        cand = F.element([u, v])
        if F.mul(cand, cand) == el:
            return cand
    if b == 0:
        u = _fraction_sqrt(a) if a >= 0 else None
        if u is not None:
            return F.element([u, 0])
        v2 = -a
        v = _fraction_sqrt(v2) if v2 >= 0 else None
        if v is not None:
            return F.element([0, v])
    return None


def _fraction_sqrt(q: Fraction):
    if q < 0:
        return None
    num = gmpy2.isqrt(q.numerator)
    den = gmpy2.isqrt(q.denominator)
    if num * num == q.numerator and den * den == q.denominator:
        return Fraction(int(num), int(den))
    return None


@dataclass
class RedeiCertificate:
    triple: tuple
    n: int
    gamma: tuple  # (u, v) coordinates over E: gamma = u + v sqrt(a)
    checks: list
    value: SymbolValue
    second_gamma: tuple | None = None

    def to_line(self) -> str:
        t = ";".join(",".join(str(c) for c in el.coords) for el in self.triple)
        g = "|".join(",".join(str(c) for c in part.coords) for part in self.gamma)
        ch = ";".join(f"{k}={v}" for k, v in self.checks)
        return f"redei2\t{t}\t{g}\t{ch}\t{self.value.exponent}"

    @staticmethod
    def from_line(line: str, F: NumberField) -> "RedeiCertificate":
        kind, t, g, ch, val = line.rstrip("\n").split("\t")
        if kind != "redei2":
            raise ValueError("not a triple-symbol certificate line")
        triple = tuple(
            F.element([Fraction(x) for x in part.split(",")]) for part in t.split(";")
        )
        gamma = tuple(
            F.element([Fraction(x) for x in part.split(",")]) for part in g.split("|")
        )
        checks = [tuple(item.split("=")) for item in ch.split(";") if item]
        return RedeiCertificate(
            triple, 2, gamma, checks, SymbolValue(2, int(val), twist=2)
        )


def redei_symbol_n2(
    a: FieldElement,
    b: FieldElement,
    c: FieldElement,
    ctx: SymbolContext,
    gamma_bound: int = 10_000,
    want_second: bool = False,
    conditions: ConditionReport | None = None,
) -> RedeiCertificate:
    """Order-2 triple symbol via an explicit degree-8 dihedral extension.

    gamma = u + v sqrt(a) in E(sqrt a) with N(gamma) = b * (square) is found
    by height-bounded enumeration; the value is the sum over primes P | c of
    v_P(c) times the Frobenius bit (gamma a square mod a prime above P).
    """
    F = ctx.field
    if conditions is None:
        conditions = redei_conditions(a, b, c, ctx, n=2, strong=True)
    if not conditions.all_pass:
        raise ConditionsFail(f"interlinking conditions fail: {conditions}")
    gammas = _gamma_search(a, b, F, gamma_bound, count=2 if want_second else 1)
    if not gammas:
        raise GammaSearchExhausted(
            f"no Heisenberg generator within height {gamma_bound}"
        )
    gamma = gammas[0]
    fac_c = factor_principal(c, F, ctx.s_config)
    checks = []
    total = 0
    for P, e in fac_c:
        if e % 2 == 0:
            continue
        bit = _gamma_square_bit(gamma, a, P, F)
        checks.append((f"P{P.p}_{P.alpha_image}", bit))
        total += e * bit
    value = SymbolValue(2, total, twist=2)
    second = None
    if want_second and len(gammas) > 1:
        second = gammas[1]
        total2 = 0
        for P, e in fac_c:
            if e % 2 == 0:
                continue
            total2 += e * _gamma_square_bit(second, a, P, F)
        if total2 % 2 != total % 2:
            raise ArithmeticError(
                "triple symbol disagrees between independent generators"
            )
    return RedeiCertificate(
        (a, b, c),
        2,
        (gamma[0], gamma[1]),
        checks,
        value,
        second_gamma=(second[0], second[1]) if second else None,
    )


def _gamma_admissible(u, v, w, F) -> bool:
    """Primitivity filter: the degree-8 extension may ramify only inside the
    supports of a, b and the wild/archimedean places. An odd common divisor
    of (u, v) could create new odd ramification, so such candidates are
    rejected; common 2-power content is harmless (2 stays in S0)."""
    ints = []
    for el in (u, v):
        for c in el.coords:
            if c.denominator != 1:
                return False
            ints.append(int(c.numerator))
    g = 0
    for t in ints:
        g = int(gmpy2.gcd(g, t))
    while g % 2 == 0 and g:
        g //= 2
    return g == 1


def _gamma_search(a, b, F: NumberField, bound: int, count: int = 1):
    """Solutions gamma = u + v sqrt(a), u^2 - a v^2 = b w^2, by ascending
    height over (w, v); deterministic order."""
    out = []
    if F.degree == 1:
        ai, bi = a.coords[0], b.coords[0]
        for hw in range(1, max(2, _isqrt_ceil(bound))):
            for w_ in (hw,):
                for v_ in range(-hw * 4, hw * 4 + 1):
                    z = ai * v_ * v_ + bi * w_ * w_
                    u = _fraction_sqrt(Fraction(z)) if z >= 0 else None
                    if u is None or (v_ == 0):
                        continue
                    cand = (F.element([u]), F.element([v_]), F.element([w_]))
                    if not _gamma_admissible(*cand[:2], cand[2], F):
                        continue
                    out.append(cand)
                    if len(out) >= count + 2:
                        return _dedupe_gammas(out, a, F, count)
        return _dedupe_gammas(out, a, F, count)
    # quadratic / cubic fields: numpy box enumeration over v, small w
    import numpy as np

    d = F.degree
    H = max(4, int(round(bound ** (1.0 / (2 * d)))) + 2)
    rng = range(-H, H + 1)
    vs = np.array(np.meshgrid(*[list(rng)] * d, indexing="ij")).reshape(d, -1).T
    w_candidates = [F.one(), F.element([0, 1] if d == 2 else [0, 1, 0]),
                    F.element([1, 1] if d == 2 else [1, 1, 0])]
    basis_rows = []
    for k in range(d):
        bas = F.element([0] * k + [1] + [0] * (d - 1 - k))
        bc, _ = F.embed_floats(bas)
        basis_rows.append(bc)
    B = np.array(basis_rows).T
    a_emb, _ = F.embed_floats(a)
    a_emb = np.array(a_emb)
    for w in w_candidates:
        bw2 = F.mul(b, F.mul(w, w))
        bw2_emb = np.array(F.embed_floats(bw2)[0])
        v_emb = vs @ B.T
        z_emb = a_emb * v_emb**2 + bw2_emb
        if F.signature[1] == 0:
            mask = np.all(z_emb > 0, axis=1)
        else:
            mask = np.ones(len(vs), dtype=bool)
        idx = np.nonzero(mask)[0]
        order = np.argsort(np.abs(vs[idx]).sum(axis=1), kind="stable")
        for i in idx[order]:
            v_el = F.element([int(t) for t in vs[i]])
            z = F.add(F.mul(a, F.mul(v_el, v_el)), bw2)
            u = _global_nth_root(z, F, 2)
            if u is None or v_el.is_zero():
                continue
            if not _gamma_admissible(u, v_el, w, F):
                continue
            out.append((u, v_el, w))
            if len(out) >= count + 3:
                return _dedupe_gammas(out, a, F, count)
    return _dedupe_gammas(out, a, F, count)


def _isqrt_ceil(n):
    return int(gmpy2.isqrt(n)) + 1


def _dedupe_gammas(cands, a, F, count):
    """Keep generators pairwise independent modulo squares in E(sqrt a)."""
    kept = []
    for u, v, w in cands:
        dup = False
        for u2, v2, w2 in kept:
            if _gamma_ratio_is_square(u, v, u2, v2, a, F):
                dup = True
                break
        if not dup:
            kept.append((u, v, w))
        if len(kept) >= count:
            break
    return kept


def _gamma_ratio_is_square(u1, v1, u2, v2, a, F) -> bool:
    """Whether (u1 + v1 sqrt a)(u2 + v2 sqrt a) is a square in E(sqrt a):
    z = A + B sqrt a is a square iff A^2 - a B^2 = s^2 and (A + s)/2 (or
    (A - s)/2) is a square in E."""
    A = F.add(F.mul(u1, u2), F.mul(a, F.mul(v1, v2)))
    Bc = F.add(F.mul(u1, v2), F.mul(u2, v1))
    disc = F.sub(F.mul(A, A), F.mul(a, F.mul(Bc, Bc)))
    s = _global_nth_root(disc, F, 2)
    if s is None:
        return False
    half = F.invert(F.from_int(2))
    for sg in (1, -1):
        t = F.mul(F.add(A, F.mul(F.from_int(sg), s)), half)
        if _global_nth_root(t, F, 2) is not None:
            return True
    return False


def _gamma_square_bit(gamma, a, P: PrimeData, F: NumberField) -> int:
    """Frobenius bit: 0 iff gamma is a square modulo a prime above P in
    E(sqrt a). Requires a to be a square mod P (a consequence of the
    interlinking conditions); both square roots must agree."""
    u, v, _w = gamma
    R = P.residue
    a_img = residue_reduce(a, P)
    s = _residue_sqrt(R, a_img)
    if s is None:
        raise ConditionsFail(f"a is not a square modulo the prime over {P.p}")
    bits = []
    for root in (s, R.neg(s)):
        g_img = R.add(residue_reduce(u, P), R.mul(residue_reduce(v, P), root))
        if R.is_zero(g_img):
            raise ConditionsFail("gamma reduces to zero; pick another generator")
        r = R.pow(g_img, (P.norm - 1) // 2)
        bits.append(0 if r == R.one() else 1)
    if bits[0] != bits[1]:
        raise ArithmeticError("Frobenius is not central: the two roots disagree")
    return bits[0]


def _residue_sqrt(R, x):
    if R.is_zero(x):
        return x
    if R.f == 1:
        r = sqrt_mod_prime(x[0], R.p)
        return None if r is None else R.elem([r])
    # small field: Tonelli by brute scan over a generator's powers
    q = R.order
    if R.pow(x, (q - 1) // 2) != R.one():
        return None
    # q = p^f odd: use x^((q+1)/4) when q = 3 mod 4
    if q % 4 == 3:
        return R.pow(x, (q + 1) // 4)
    # fall back to scanning (residue fields here are tiny)
    for a0 in range(R.p):
        for a1 in range(R.p):
            cand = R.elem([a0, a1] + [0] * (R.f - 2))
            if R.mul(cand, cand) == x:
                return cand
    return None


# -- orbit bracket ---------------------------------------------------------------

def redei_bracket(
    tensor,
    x1: FieldElement,
    x2: FieldElement,
    x3: FieldElement,
    ctx: SymbolContext,
    n: int = 2,
    rep_shift: int = 0,
    gamma_bound: int = 10_000,
) -> SymbolValue:
    """Sum of a_{s1,s2,s3} [x1^{s1}, x2^{s2}, x3^{s3}] over diagonal orbits.

    rep_shift rotates the choice of orbit representatives; the result must
    not depend on it (tested, not assumed).
    """
    if n != 2:
        raise UnsupportedOrder("orbit bracket implemented for order 2")
    F = ctx.field
    gamma = F.gamma
    seen = set()
    total = 0
    for s1 in gamma:
        for s2 in gamma:
            for s3 in gamma:
                orbit = frozenset(
                    (F.compose(s1, g), F.compose(s2, g), F.compose(s3, g))
                    for g in gamma
                )
                if orbit in seen:
                    continue
                seen.add(orbit)
                reps = sorted(orbit)
                rep = reps[rep_shift % len(reps)]
                coeff = tensor.coeff(rep) % n
                if coeff == 0:
                    continue
                e1 = F.apply_auto(rep[0], x1)
                e2 = F.apply_auto(rep[1], x2)
                e3 = F.apply_auto(rep[2], x3)
                cert = redei_symbol_n2(e1, e2, e3, ctx, gamma_bound=gamma_bound)
                total += coeff * cert.value.exponent
    return SymbolValue(n, total, twist=2)
