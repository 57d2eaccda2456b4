"""Exact arithmetic in small monogenic Galois number fields.

A field is supplied as an explicit descriptor (minimal polynomial,
automorphism matrices, chosen root of unity, discriminant); nothing is
derived by general Galois or class-group machinery. All element arithmetic
is exact over the rationals; archimedean data is kept as shrinking exact
intervals so signs and directions never depend on floating-point luck.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from math import sqrt as _fsqrt

import gmpy2

from .arith import (
    DEFAULT_FACTOR_BOUND,
    ResidueFieldArith,
    distinct_degree_shape,
    factor_int,
    is_prime,
    poly_roots_mod,
)
from .errors import (
    FactorizationFailure,
    NotIntegralAtP,
    NotSIntegral,
    RamifiedPrime,
    ZeroElement,
)


def _mat_mul(a, b):
    n = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n))
        for i in range(n)
    )


def _mat_vec(m, v):
    return tuple(sum(m[i][k] * v[k] for k in range(len(v))) for i in range(len(v)))


# -- exact real intervals ----------------------------------------------------

def _iv_add(a, b):
    return (a[0] + b[0], a[1] + b[1])


def _iv_mul(a, b):
    cands = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return (min(cands), max(cands))


def _iv_scale(a, c):
    return (a[0] * c, a[1] * c) if c >= 0 else (a[1] * c, a[0] * c)


def _poly_eval_iv(coeffs, iv):
    acc = (Fraction(0), Fraction(0))
    for c in reversed(coeffs):
        acc = _iv_mul(acc, iv)
        acc = _iv_add(acc, (Fraction(c), Fraction(c)))
    return acc


def _isolate_real_roots(poly):
    """Isolating rational intervals for all real roots of an integer
    polynomial with distinct roots, ascending."""
    deg = len(poly) - 1
    bound = Fraction(1 + max(abs(c) for c in poly[:-1]), abs(poly[-1]))

    def ev(x):
        acc = Fraction(0)
        for c in reversed(poly):
            acc = acc * x + c
        return acc

    # sign scan on a fine grid, then bisect each sign change
    n_steps = 64 * deg
    step = 2 * bound / n_steps
    xs = [-bound + k * step for k in range(n_steps + 1)]
    roots = []
    prev_x, prev_s = xs[0], ev(xs[0])
    for x in xs[1:]:
        s = ev(x)
        if s == 0:
            roots.append((x, x))
            prev_x, prev_s = x, s
            continue
        if prev_s == 0:
            prev_x, prev_s = x, s
            continue
        if (prev_s < 0) != (s < 0):
            roots.append((prev_x, x))
        prev_x, prev_s = x, s
    return roots


def _refine_root(poly, iv, width):
    """Shrink an isolating interval below the requested width by bisection."""
    lo, hi = iv

    def ev(x):
        acc = Fraction(0)
        for c in reversed(poly):
            acc = acc * x + c
        return acc

    s_lo = ev(lo)
    if s_lo == 0:
        return (lo, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = ev(mid)
        if s == 0:
            return (mid, mid)
        if (s < 0) == (s_lo < 0):
            lo, s_lo = mid, s
        else:
            hi = mid
    return (lo, hi)


# -- descriptors -------------------------------------------------------------

@dataclass(frozen=True)
class NumberField:
    """Descriptor of a monogenic Galois number field with fixed data.

    automorphisms[0] is the identity. `zeta` generates the roots of unity
    (order n_roots). Real embeddings are tracked as exact isolating
    intervals for the roots of min_poly; complex fields carry the embedding
    as a (re, im) pair of intervals for the generator image.
    """

    name: str
    degree: int
    min_poly: tuple[int, ...]
    automorphisms: tuple
    discriminant: int
    n_roots: int
    zeta_coords: tuple
    s_primes: tuple[int, ...]
    signature: tuple[int, int]  # (real embeddings, complex pairs)
    _cache: dict = dc_field(default_factory=dict, compare=False, repr=False)

    # ---- construction-time tables

    def __post_init__(self):
        d = self.degree
        mats = self.automorphisms
        if len(mats) != d:
            raise ValueError("automorphism table must have |Gamma| = degree entries")
        ident = tuple(
            tuple(Fraction(1) if i == j else Fraction(0) for j in range(d))
            for i in range(d)
        )
        if mats[0] != ident:
            raise ValueError("automorphisms[0] must be the identity")
        comp = []
        for a in mats:
            row = []
            for b in mats:
                prod = _mat_mul(a, b)
                row.append(mats.index(prod))
            comp.append(tuple(row))
        object.__setattr__(self, "_comp", tuple(comp))
        inv = []
        for i in range(d):
            inv.append(comp[i].index(0))
        object.__setattr__(self, "_inv", tuple(inv))
        # cyclotomic character table
        zeta = self.element(self.zeta_coords)
        if not self._has_order(zeta, self.n_roots):
            raise ValueError("zeta does not have the declared order")
        chi = []
        for g in range(d):
            img = self.apply_auto(g, zeta)
            for k in range(1, self.n_roots + 1):
                if self.pow(zeta, k) == img:
                    chi.append(k % self.n_roots)
                    break
            else:
                raise ValueError("automorphism does not permute roots of unity")
        object.__setattr__(self, "chi", tuple(chi))
        object.__setattr__(self, "_embeddings", None)

    def _has_order(self, z, n):
        acc = z
        for k in range(1, n):
            if acc == self.one():
                return False
            acc = self.mul(acc, z)
        return acc == self.one()

    # ---- group bookkeeping

    @property
    def gamma(self):
        return tuple(range(self.degree))

    @property
    def gamma_star(self):
        return tuple(g for g in self.gamma if g != 0)

    @property
    def gamma2_star(self):
        return tuple(
            g for g in self.gamma_star if self._comp[g][g] == 0
        )

    @property
    def gamma2_star_star(self):
        n = self.n_roots
        if n % 8 != 0:
            return self.gamma2_star
        return tuple(
            t for t in self.gamma2_star if self.chi[t] % 8 in (1, 7)
        )

    def compose(self, g, h):
        """Index of the automorphism x -> (x^h)^g."""
        return self._comp[g][h]

    def inverse_auto(self, g):
        return self._inv[g]

    # ---- elements

    def element(self, coords) -> "FieldElement":
        c = tuple(Fraction(x) for x in coords)
        if len(c) != self.degree:
            c = tuple(list(c) + [Fraction(0)] * (self.degree - len(c)))
        return FieldElement(self, c)

    def zero(self):
        return self.element([0] * self.degree)

    def one(self):
        return self.element([1] + [0] * (self.degree - 1))

    def zeta(self):
        return self.element(self.zeta_coords)

    def from_int(self, n):
        return self.element([n] + [0] * (self.degree - 1))

    def add(self, a, b):
        return FieldElement(self, tuple(x + y for x, y in zip(a.coords, b.coords)))

    def sub(self, a, b):
        return FieldElement(self, tuple(x - y for x, y in zip(a.coords, b.coords)))

    def mul(self, a, b):
        d = self.degree
        prod = [Fraction(0)] * (2 * d - 1)
        for i, x in enumerate(a.coords):
            if x:
                for j, y in enumerate(b.coords):
                    if y:
                        prod[i + j] += x * y
        # reduce by the monic minimal polynomial
        mp = self.min_poly
        for k in range(2 * d - 2, d - 1, -1):
            c = prod[k]
            if c:
                prod[k] = Fraction(0)
                for j in range(d):
                    prod[k - d + j] -= c * mp[j]
        return FieldElement(self, tuple(prod[:d]))

    def pow(self, a, e):
        e = int(e)
        if e < 0:
            return self.pow(self.invert(a), -e)
        result = self.one()
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def invert(self, a):
        n = self.norm(a)
        if n == 0:
            raise ZeroDivisionError("inverting zero field element")
        conj_prod = self.one()
        for g in self.gamma_star:
            conj_prod = self.mul(conj_prod, self.apply_auto(g, a))
        return FieldElement(self, tuple(c / n for c in conj_prod.coords))

    def div(self, a, b):
        return self.mul(a, self.invert(b))

    def apply_auto(self, g, a):
        return FieldElement(self, _mat_vec(self.automorphisms[g], a.coords))

    def norm(self, a) -> Fraction:
        prod = a
        for g in self.gamma_star:
            prod = self.mul(prod, self.apply_auto(g, a))
        if any(c != 0 for c in prod.coords[1:]):
            raise ArithmeticError("norm did not land in the rationals")
        return prod.coords[0]

    def trace(self, a) -> Fraction:
        tot = self.zero()
        for g in self.gamma:
            tot = self.add(tot, self.apply_auto(g, a))
        if any(c != 0 for c in tot.coords[1:]):
            raise ArithmeticError("trace did not land in the rationals")
        return tot.coords[0]

    # ---- archimedean data

    def _embedding_intervals(self, width=Fraction(1, 10**25)):
        key = ("emb", width)
        if key not in self._cache:
            r1, r2 = self.signature
            if self.degree == 1:
                self._cache[key] = [((Fraction(0), Fraction(0)), None)]
            elif r2 == 0:
                ivs = _isolate_real_roots(list(self.min_poly))
                if len(ivs) != self.degree:
                    raise ValueError("expected a totally real minimal polynomial")
                self._cache[key] = [
                    (_refine_root(list(self.min_poly), iv, width), None) for iv in ivs
                ]
            else:
                if self.degree != 2:
                    raise ValueError("complex embeddings implemented for degree 2 only")
                # alpha^2 + b alpha + c = 0 with negative discriminant
                c0, c1, _ = self.min_poly
                disc = Fraction(c1) ** 2 - 4 * Fraction(c0)
                re = -Fraction(c1) / 2
                im2 = -disc / 4
                im_iv = _refine_root([-im2.numerator, 0, im2.denominator],
                                     (Fraction(0), im2 + 1), width)
                self._cache[key] = [((re, re), im_iv)]
        return self._cache[key]

    def real_intervals(self, a, width=Fraction(1, 10**20)):
        """Exact enclosing intervals of a under every real embedding
        (totally real fields)."""
        out = []
        for root_iv, im in self._embedding_intervals(width):
            if im is not None:
                raise ValueError("field has a complex embedding")
            out.append(_poly_eval_iv(a.coords, root_iv))
        return out

    def sign_at(self, a, place_index) -> int:
        """Exact sign of a nonzero element at a real embedding."""
        if a.is_zero():
            raise ZeroElement("sign of zero requested")
        w = Fraction(1, 10**20)
        for _ in range(12):
            root_iv, im = self._embedding_intervals(w)[place_index]
            if im is not None:
                raise ValueError("sign at a complex place is undefined")
            iv = _poly_eval_iv(a.coords, root_iv)
            if iv[0] > 0:
                return 1
            if iv[1] < 0:
                return -1
            w = w / 10**10
        raise ArithmeticError("could not separate sign from zero")

    def embed_floats(self, a):
        """Float images of a under all archimedean coordinates (complex
        embeddings contribute a (re, im) pair), with an error bound."""
        coords = []
        err = 0.0
        for root_iv, im in self._embedding_intervals():
            if im is None:
                iv = _poly_eval_iv(a.coords, root_iv)
                coords.append(float((iv[0] + iv[1]) / 2))
                err = max(err, float(iv[1] - iv[0]))
            else:
                re_iv, im_iv = root_iv, im
                # evaluate polynomial at re + i*im exactly in Fractions
                re_acc, im_acc = Fraction(0), Fraction(0)
                re_mid = (re_iv[0] + re_iv[1]) / 2
                im_mid = (im_iv[0] + im_iv[1]) / 2
                for c in reversed(a.coords):
                    re_acc, im_acc = (
                        re_acc * re_mid - im_acc * im_mid + c,
                        re_acc * im_mid + im_acc * re_mid,
                    )
                coords.extend([float(re_acc), float(im_acc)])
                err = max(err, float(im_iv[1] - im_iv[0]) * 4)
        return coords, err


class FieldElement:
    """Immutable element of a NumberField in power-basis coordinates."""

    __slots__ = ("field", "coords", "_hash")

    def __init__(self, fld: NumberField, coords):
        self.field = fld
        self.coords = tuple(Fraction(c) for c in coords)
        self._hash = None

    def is_zero(self):
        return all(c == 0 for c in self.coords)

    def __eq__(self, other):
        return (
            isinstance(other, FieldElement)
            and self.field is other.field
            and self.coords == other.coords
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((id(self.field), self.coords))
        return self._hash

    def __repr__(self):
        return f"<{self.field.name}: {list(self.coords)}>"

    # convenience operators (thin wrappers over the field methods)
    def __add__(self, other):
        return self.field.add(self, other)

    def __sub__(self, other):
        return self.field.sub(self, other)

    def __mul__(self, other):
        return self.field.mul(self, other)

    def __neg__(self):
        return self.field.element(tuple(-c for c in self.coords))

    def conj(self, g):
        return self.field.apply_auto(g, self)

    def norm(self):
        return self.field.norm(self)


@dataclass(frozen=True)
class SConfig:
    """The inverted prime set S of the working ring O_{E,S}.

    Triviality of the S-class group is asserted by the descriptor author,
    recorded here, never computed.
    """

    primes: tuple[int, ...]
    class_group_trivial: bool = True
    factor_bound: int = DEFAULT_FACTOR_BOUND

    def strip(self, n: int) -> int:
        n = abs(int(n))
        for p in self.primes:
            while n % p == 0:
                n //= p
        return n


@dataclass(frozen=True)
class PrimeData:
    """A prime of O_{E,S} over the rational prime p with residue degree f.

    `generator` generates the prime ideal; `alpha_image` is the image of the
    power-basis generator in the residue field.
    """

    p: int
    f: int
    generator: FieldElement
    residue: ResidueFieldArith
    alpha_image: tuple[int, ...]

    @property
    def norm(self) -> int:
        return self.p ** self.f

    def reduce(self, x: FieldElement) -> tuple[int, ...]:
        """Residue-field image of a P-integral element."""
        R = self.residue
        acc = R.zero()
        power = R.one()
        for c in x.coords:
            if c.denominator % self.p == 0:
                num, den = c.numerator, c.denominator
                v = 0
                while den % self.p == 0:
                    den //= self.p
                    v += 1
                # coordinate has a p-denominator: x may still be integral at
                # this prime only if the valuation analysis says so; callers
                # go through valuation_at first. For split primes this
                # coordinate-wise reduction is then valid after clearing.
                raise NotIntegralAtP(
                    f"coordinate denominator divisible by {self.p}"
                )
            inv_den = int(gmpy2.invert(c.denominator % self.p, self.p))
            cv = c.numerator % self.p * inv_den % self.p
            acc = R.add(acc, R.mul(R.elem([cv]), power))
            power = R.mul(power, R.elem(self.alpha_image))
        return acc

    def key(self):
        return (self.p, self.alpha_image)

    def __repr__(self):
        return f"PrimeData(p={self.p}, f={self.f}, gen={list(self.generator.coords)})"


@dataclass
class MinkowskiDirection:
    """Unit vector of archimedean coordinates with a tracked error bound."""

    vector: tuple[float, ...]
    error: float

    def distance(self, other: "MinkowskiDirection") -> float:
        return _fsqrt(sum((a - b) ** 2 for a, b in zip(self.vector, other.vector)))


# -- operations ---------------------------------------------------------------


def primes_above(F: NumberField, p: int, S: SConfig) -> list[PrimeData]:
    """All primes of O_{E,S} above an unramified rational prime p."""
    if F.discriminant % p == 0:
        raise RamifiedPrime(f"{p} divides the field discriminant")
    mp = list(F.min_poly)
    roots = poly_roots_mod(mp, p)
    out = []
    if len(roots) == F.degree:
        for t in roots:
            gen = _split_prime_generator(F, p, t, S)
            R = ResidueFieldArith(p, [0, 1])
            out.append(PrimeData(p, 1, gen, R, (t,)))
    elif not roots:
        shape = distinct_degree_shape(mp, p)
        if shape != [F.degree]:
            raise FactorizationFailure(
                f"partial splitting at {p} not supported for {F.name}"
            )
        R = ResidueFieldArith(p, [c % p for c in mp])
        alpha_img = tuple([0, 1] + [0] * (F.degree - 2))
        out.append(PrimeData(p, F.degree, F.from_int(p), R, alpha_img))
    else:
        raise FactorizationFailure(
            f"partial splitting at {p} not supported for {F.name}"
        )
    return out


def _lattice_reduce_quadratic(F: NumberField, p: int, t: int):
    """Gauss-reduced basis of the ideal (p, alpha - t) of a quadratic field
    under the Minkowski quadratic form."""
    # form matrix for x = a + b*alpha on totally real/imag quadratic fields:
    # Q(a, b) = sum over embeddings of |a + b sigma(alpha)|^2
    c0, c1, _ = F.min_poly
    s = -Fraction(c1)          # alpha + alpha'
    q = Fraction(c0)           # alpha * alpha'
    # Q(a,b) = 2a^2 + 2s ab + (s^2 - 2q) b^2 for real; same formula works
    # for imaginary quadratic up to positive scaling
    A, B, C = Fraction(2), s, s * s - 2 * q
    if C <= 0:
        A, B, C = Fraction(1), s / 2, q  # |a + b alpha|^2 (imaginary case)

    def qval(v):
        a, b = v
        return A * a * a + 2 * B * a * b + C * b * b

    def qdot(u, v):
        return A * u[0] * v[0] + B * (u[0] * v[1] + u[1] * v[0]) + C * u[1] * v[1]

    u, v = (p, 0), (t, 1)
    if qval(u) < qval(v):
        u, v = v, u
    while True:
        mu = qdot(u, v) / qval(v)
        m = int(round(mu))
        u = (u[0] - m * v[0], u[1] - m * v[1])
        if qval(u) >= qval(v):
            break
        u, v = v, u
    return v, u


def _split_prime_generator(F: NumberField, p: int, t: int, S: SConfig) -> FieldElement:
    """Principal generator of the degree-one prime (p, alpha - t)."""
    if F.degree == 1:
        return F.from_int(p)
    if F.degree == 2:
        v, u = _lattice_reduce_quadratic(F, p, t)
        for cand in (v, u, (v[0] + u[0], v[1] + u[1]), (v[0] - u[0], v[1] - u[1])):
            g = F.element(cand)
            n = g.norm()
            if n != 0 and abs(n) == p:
                return g
        raise FactorizationFailure(f"no generator of norm {p} found (p={p}, t={t})")
    if F.degree == 3:
        return _split_prime_generator_cubic(F, p, t)
    raise FactorizationFailure("generator search implemented for degree <= 3")


def _split_prime_generator_cubic(F: NumberField, p: int, t: int) -> FieldElement:
    """Shortest-vector generator for a degree-one prime of a cubic field.

    Reduces the rank-3 ideal lattice {x : x(t) = 0 mod p} under the
    Minkowski form with a small exact LLL, then scans tiny combinations.
    """
    ivs = [iv for iv, _ in F._embedding_intervals()]
    roots = [float((iv[0] + iv[1]) / 2) for iv in ivs]
    basis = [(p, 0, 0), (-t % p, 1, 0), (-(t * t) % p, 0, 1)]

    def emb(v):
        return [v[0] + v[1] * r + v[2] * r * r for r in roots]

    def qval(v):
        return sum(x * x for x in emb(v))

    # size-reduce + swap (small LLL, float Gram is fine: exact norm check after)
    b = [list(v) for v in basis]
    changed = True
    sweeps = 0
    while changed and sweeps < 60:
        changed = False
        sweeps += 1
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                num = sum(x * y for x, y in zip(emb(b[i]), emb(b[j])))
                den = qval(b[j])
                if den == 0:
                    continue
                m = round(num / den)
                if m:
                    b[i] = [x - m * y for x, y in zip(b[i], b[j])]
                    changed = True
        b.sort(key=qval)
    best = None
    for c0 in range(-2, 3):
        for c1 in range(-2, 3):
            for c2 in range(-2, 3):
                if c0 == c1 == c2 == 0:
                    continue
                v = [
                    c0 * b[0][k] + c1 * b[1][k] + c2 * b[2][k] for k in range(3)
                ]
                g = F.element(v)
                n = g.norm()
                if n != 0 and abs(n) == p:
                    cand = tuple(v)
                    if best is None or cand < best:
                        best = cand
    if best is None:
        raise FactorizationFailure(f"no cubic generator of norm {p} (p={p}, t={t})")
    return F.element(best)


def hensel_lift_root(F: NumberField, p: int, t: int, k: int) -> int:
    """Root of min_poly modulo p^k lifting t (Newton iteration)."""
    mp = F.min_poly
    mod = p
    root = t % p

    def ev(x, m):
        acc = 0
        for c in reversed(mp):
            acc = (acc * x + c) % m
        return acc

    def ev_d(x, m):
        acc = 0
        deg = len(mp) - 1
        for i in range(deg, 0, -1):
            acc = (acc * x + i * mp[i]) % m
        return acc

    while mod < p**k:
        mod = min(mod * mod, p**k)
        f_val = ev(root, mod)
        d_val = ev_d(root, mod)
        root = (root - f_val * int(gmpy2.invert(d_val % mod, mod))) % mod
    return root


def valuation_at(F: NumberField, x: FieldElement, P: PrimeData, max_k: int = 64) -> int:
    """Exact valuation v_P(x) for unramified P (split or inert)."""
    if x.is_zero():
        raise ZeroElement("valuation of zero")
    p = P.p
    # common denominator p-part
    den_v = max(
        (_int_val(c.denominator, p) for c in x.coords), default=0
    )
    scaled = F.element(tuple(c * p**den_v for c in x.coords))
    if P.f == F.degree:
        # inert: v_P = v_p(N(x)) / degree
        n = scaled.norm()
        v = _int_val(n.numerator, p)
        if v % F.degree != 0:
            raise ArithmeticError("inconsistent inert valuation")
        return v // F.degree - den_v
    # split, degree one: evaluate at the p-adic lifted root
    t = P.alpha_image[0]
    k = max_k
    root = hensel_lift_root(F, p, t, k)
    mod = p**k
    acc = 0
    for c in reversed(scaled.coords):
        num = c.numerator % mod
        den = c.denominator % mod
        acc = (acc * root + num * int(gmpy2.invert(den, mod))) % mod
    if acc == 0:
        raise ArithmeticError("valuation exceeds lift precision; raise max_k")
    v = _int_val(acc, p)
    if v >= k - 4:
        return valuation_at(F, x, P, max_k=max_k * 2)
    return v - den_v


def _int_val(n: int, p: int) -> int:
    n = abs(int(n))
    if n == 0:
        raise ZeroElement("valuation of integer zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def factor_principal(
    x: FieldElement, F: NumberField, S: SConfig
) -> list[tuple[PrimeData, int]]:
    """Factor the fractional ideal x*O_{E,S} into unramified primes.

    Output re-multiplies to x up to an S-unit. Primes dividing S are
    stripped; denominators outside S raise NotSIntegral.
    """
    if x.is_zero():
        raise ZeroElement("factoring the zero ideal")
    for c in x.coords:
        if S.strip(c.denominator) != 1:
            raise NotSIntegral(f"denominator {c.denominator} leaves S")
    n = F.norm(x)
    n_num = S.strip(n.numerator)
    n_den = S.strip(n.denominator)
    rational_primes: set[int] = set()
    for part in (n_num, n_den):
        if part != 1:
            rational_primes.update(factor_int(part, S.factor_bound))
    out = []
    for p in sorted(rational_primes):
        if p in S.primes:
            continue
        for P in primes_above(F, p, S):
            v = valuation_at(F, x, P)
            if v != 0:
                out.append((P, v))
    # consistency: remultiplied norm must match up to S
    total = Fraction(1)
    for P, e in out:
        total *= Fraction(P.norm) ** e
    if S.strip((n / total).numerator) != 1 or S.strip((n / total).denominator) != 1:
        raise FactorizationFailure("factorization does not re-multiply to the norm")
    return sorted(out, key=lambda t: (t[0].p, t[0].alpha_image))


def residue_reduce(x: FieldElement, P: PrimeData):
    """Image of a P-integral element in the residue field of P."""
    F = x.field
    v = valuation_at(F, x, P) if not x.is_zero() else 1
    if not x.is_zero() and v < 0:
        raise NotIntegralAtP(f"valuation {v} < 0 at p={P.p}")
    if x.is_zero():
        return P.residue.zero()
    # clear p-denominators coming from the conjugate prime
    p = P.p
    den_v = max((_int_val(c.denominator, p) for c in x.coords), default=0)
    if den_v == 0:
        return P.reduce(x)
    if P.f == F.degree:
        raise NotIntegralAtP("inert prime with p-denominator")
    # multiply by (conjugate generator)^den_v to clear, then correct by the
    # residue of that generator
    scaled = F.element(tuple(c * p**den_v for c in x.coords))
    t = P.alpha_image[0]
    k = 64
    root = hensel_lift_root(F, p, t, k)
    mod = p**k
    acc = 0
    for c in reversed(scaled.coords):
        acc = (acc * root + c.numerator * int(gmpy2.invert(c.denominator % mod, mod))) % mod
    if _int_val(acc, p) < den_v:
        raise NotIntegralAtP("negative valuation after clearing denominators")
    acc //= p**den_v
    return P.residue.elem([acc % p])


def splitting_type(p: int, polys: list[list[int]]) -> list[list[int]]:
    """Factorization shapes (degrees of irreducible factors) mod p."""
    out = []
    for f in polys:
        disc = _poly_disc(f)
        if disc % p == 0:
            raise RamifiedPrime(f"{p} divides the discriminant of {f}")
        out.append(distinct_degree_shape(f, p))
    return out


def _poly_disc(f: list[int]) -> int:
    deg = len(f) - 1
    fp = [i * f[i] for i in range(1, deg + 1)]
    sign = -1 if (deg * (deg - 1) // 2) % 2 else 1
    res = _resultant(f, fp)
    disc = Fraction(sign * res, f[-1])
    if disc.denominator != 1:
        raise ArithmeticError("discriminant came out non-integral")
    return disc.numerator


def _resultant(f, g):
    """Resultant of two integer polynomials via Euclid over the rationals."""
    a = [Fraction(c) for c in f]
    b = [Fraction(c) for c in g]
    res = Fraction(1)

    def deg(h):
        return len(h) - 1

    while True:
        while b and b[-1] == 0:
            b.pop()
        if not b:
            return 0
        if deg(b) == 0:
            res *= b[0] ** deg(a)
            if res.denominator != 1:
                raise ArithmeticError("resultant came out non-integral")
            return res.numerator
        if deg(a) < deg(b):
            if deg(a) % 2 == 1 and deg(b) % 2 == 1:
                res = -res
            a, b = b, a
            continue
        # a = q*b + r
        r = list(a)
        lead = b[-1]
        while len(r) - 1 >= deg(b) and any(c != 0 for c in r):
            if r[-1] == 0:
                r.pop()
                continue
            c = r[-1] / lead
            shift = len(r) - 1 - deg(b)
            for i, bi in enumerate(b):
                r[shift + i] -= c * bi
            r.pop()
        while r and r[-1] == 0:
            r.pop()
        dr = len(r) - 1 if r else -1
        res *= lead ** (deg(a) - (dr if dr >= 0 else 0))
        if dr < 0:
            return 0
        if deg(a) % 2 == 1 and deg(b) % 2 == 1:
            res = -res
        a, b = b, r


def max_contained_root_order(
    F: NumberField, m: int, tau: int, inverse: bool = False
) -> int:
    """n_tau: the largest r | m with the r-th roots of unity fixed by tau.

    With inverse=True, the largest r | m with zeta_r^tau = zeta_r^{-1}.
    """
    if F.n_roots % m != 0:
        raise ValueError("m must divide the root-of-unity order")
    best = 1
    for r in range(1, m + 1):
        if m % r != 0:
            continue
        zr = F.pow(F.zeta(), F.n_roots // r)
        img = F.apply_auto(tau, zr)
        target = F.invert(zr) if inverse else zr
        if img == target:
            best = max(best, r)
    return best


def direction(x: FieldElement, F: NumberField) -> MinkowskiDirection:
    """Normalized archimedean coordinate vector of a nonzero element."""
    if x.is_zero():
        raise ZeroElement("direction of zero")
    coords, err = F.embed_floats(x)
    norm = _fsqrt(sum(c * c for c in coords))
    if norm == 0:
        raise ArithmeticError("embedding underflow; refine intervals")
    return MinkowskiDirection(
        tuple(c / norm for c in coords), error=err / norm + 1e-15
    )


def direction_distance(a: MinkowskiDirection, b: MinkowskiDirection) -> float:
    return a.distance(b)
