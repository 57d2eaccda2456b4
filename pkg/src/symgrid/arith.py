"""Integer and small finite-field primitives.

Everything here is exact. Rational prime factorization is plain trial
division with a hard bound on the certified prime size: exceeding it raises
instead of guessing.
"""

from __future__ import annotations

import gmpy2

from .errors import NormTooLarge

DEFAULT_FACTOR_BOUND = 2**32

# trial division never walks divisors past this; a surviving cofactor must
# then be certified (prime, or an exact prime power) or we refuse
_TRIAL_CAP = 22_000_000


def is_prime(n: int) -> bool:
    return bool(gmpy2.is_prime(int(n)))


def factor_int(n: int, bound: int = DEFAULT_FACTOR_BOUND) -> dict[int, int]:
    """Factor |n| by trial division plus exact perfect-power splitting of
    the cofactor. Every prime factor must be < bound.

    Raises NormTooLarge if a cofactor cannot be certified as a product of
    primes below the bound.
    """
    n = abs(int(n))
    if n == 0:
        raise ValueError("cannot factor 0")
    out: dict[int, int] = {}
    for d in (2, 3, 5):
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
    d = 7
    wheel = (4, 2, 4, 2, 4, 6, 2, 6)
    i = 0
    while d * d <= n:
        if d > _TRIAL_CAP:
            break
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += wheel[i]
        i = (i + 1) % 8
    if n > 1:
        p, e = _certify_prime_power(n)
        if p is None or p >= bound:
            raise NormTooLarge(f"cofactor {n} exceeds factoring bound {bound}")
        out[p] = out.get(p, 0) + e
    if any(p >= bound for p in out):
        big = max(out)
        raise NormTooLarge(f"prime factor {big} exceeds factoring bound {bound}")
    return out


def _certify_prime_power(n: int):
    """(p, e) with n = p^e and p certified prime, else (None, 0).

    Squares arise systematically from norms of involution differences, so
    perfect powers are peeled before the primality test.
    """
    for e in (1, 2, 3, 4):
        root, exact = gmpy2.iroot(gmpy2.mpz(n), e)
        if exact and is_prime(root):
            return int(root), e
    return None, 0


def sqrt_mod_prime(a: int, p: int) -> int | None:
    """A square root of a modulo prime p, or None if a is a non-residue."""
    a %= p
    if p == 2 or a == 0:
        return a
    if gmpy2.legendre(a, p) != 1:
        return None
    if p % 4 == 3:
        return int(gmpy2.powmod(a, (p + 1) // 4, p))
    if p % 8 == 5:
        r = int(gmpy2.powmod(a, (p + 3) // 8, p))
        if r * r % p != a:
            r = r * int(gmpy2.powmod(2, (p - 1) // 4, p)) % p
        return r
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while gmpy2.legendre(z, p) != -1:
        z += 1
    m, c = s, int(gmpy2.powmod(z, q, p))
    t, r = int(gmpy2.powmod(a, q, p)), int(gmpy2.powmod(a, (q + 1) // 2, p))
    while t != 1:
        t2, i = t, 0
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = int(gmpy2.powmod(c, 1 << (m - i - 1), p))
        m, c = i, b * b % p
        r, t = r * b % p, t * (b * b) % p
    return r


# -- polynomials over F_p ---------------------------------------------------

def poly_trim(f: list[int]) -> list[int]:
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_mod(f: list[int], g: list[int], p: int) -> list[int]:
    """f mod g over F_p; g need not be monic."""
    f = [c % p for c in f]
    poly_trim(f)
    dg = len(g) - 1
    inv_lead = int(gmpy2.invert(g[-1], p))
    while len(f) - 1 >= dg and f:
        c = f[-1] * inv_lead % p
        shift = len(f) - 1 - dg
        for i, gi in enumerate(g):
            f[shift + i] = (f[shift + i] - c * gi) % p
        poly_trim(f)
    return f


def poly_mul_mod(a: list[int], b: list[int], g: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return poly_mod(out, g, p)


def poly_pow_mod(a: list[int], e: int, g: list[int], p: int) -> list[int]:
    result = [1]
    base = poly_mod(list(a), g, p)
    while e:
        if e & 1:
            result = poly_mul_mod(result, base, g, p)
        base = poly_mul_mod(base, base, g, p)
        e >>= 1
    return result


def poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = [c % p for c in a], [c % p for c in b]
    poly_trim(a)
    poly_trim(b)
    while b:
        a, b = b, poly_mod(a, b, p)
    if a:
        inv = int(gmpy2.invert(a[-1], p))
        a = [c * inv % p for c in a]
    return a


def poly_roots_mod(f: list[int], p: int) -> list[int]:
    """All roots of f in F_p, ascending. Meant for tiny degrees."""
    if p < 5000:
        return [t for t in range(p) if _poly_eval_mod(f, t, p) == 0]
    # split off the degree-one part via gcd with x^p - x, then scan factors
    xp = poly_pow_mod([0, 1], p, f, p)
    xp_minus_x = list(xp)
    while len(xp_minus_x) < 2:
        xp_minus_x.append(0)
    xp_minus_x[1] = (xp_minus_x[1] - 1) % p
    lin = poly_gcd(f, xp_minus_x, p)
    return sorted(_linear_factor_roots(lin, p))


def _poly_eval_mod(f: list[int], t: int, p: int) -> int:
    acc = 0
    for c in reversed(f):
        acc = (acc * t + c) % p
    return acc


def _linear_factor_roots(g: list[int], p: int) -> list[int]:
    """Roots of a product of distinct linear factors, by random splitting."""
    deg = len(g) - 1
    if deg <= 0:
        return []
    if deg == 1:
        return [(-g[0] * int(gmpy2.invert(g[1], p))) % p]
    if deg == 2:
        # x^2 + bx + c after normalization
        b = g[1] * int(gmpy2.invert(g[2], p)) % p
        c = g[0] * int(gmpy2.invert(g[2], p)) % p
        disc = (b * b - 4 * c) % p
        r = sqrt_mod_prime(disc, p)
        inv2 = int(gmpy2.invert(2, p))
        return [(-b + r) * inv2 % p, (-b - r) * inv2 % p]
    shift = 0
    while True:
        # gcd((x+shift)^((p-1)/2) - 1, g) splits g for most shifts
        base = poly_mod([shift, 1], g, p)
        h = poly_pow_mod(base, (p - 1) // 2, g, p)
        h = list(h)
        if not h:
            h = [0]
        h[0] = (h[0] - 1) % p
        poly_trim(h)
        d = poly_gcd(h, g, p)
        if 0 < len(d) - 1 < deg:
            rest = poly_gcd(g, _poly_quot(g, d, p), p)
            return _linear_factor_roots(d, p) + _linear_factor_roots(rest, p)
        shift += 1


def _poly_quot(f: list[int], g: list[int], p: int) -> list[int]:
    f = [c % p for c in f]
    out = [0] * (len(f) - len(g) + 1)
    inv_lead = int(gmpy2.invert(g[-1], p))
    work = list(f)
    for shift in range(len(out) - 1, -1, -1):
        c = work[shift + len(g) - 1] * inv_lead % p
        out[shift] = c
        if c:
            for i, gi in enumerate(g):
                work[shift + i] = (work[shift + i] - c * gi) % p
    return poly_trim(out)


def distinct_degree_shape(f: list[int], p: int) -> list[int]:
    """Degrees (with multiplicity) of the irreducible factors of f mod p.

    Requires f square-free mod p.
    """
    shape = []
    g = [c % p for c in f]
    poly_trim(g)
    deg_left = len(g) - 1
    xq = [0, 1]
    d = 0
    while deg_left > 0:
        d += 1
        xq = poly_pow_mod(xq, p, g, p)
        diff = list(xq)
        while len(diff) < 2:
            diff.append(0)
        diff[1] = (diff[1] - 1) % p
        poly_trim(diff)
        part = poly_gcd(diff if diff else [0], g, p)
        k = len(part) - 1
        if k > 0:
            shape.extend([d] * (k // d))
            g = _poly_quot(g, part, p)
            deg_left -= k
            xq = poly_mod(xq, g, p)
        if d > deg_left:
            break
    return sorted(shape)


# -- F_q arithmetic (q = p^f, tiny f) ---------------------------------------

class ResidueFieldArith:
    """Arithmetic in F_{p^f} presented as F_p[t]/(modulus).

    Elements are tuples of ints of length f (low-degree first).
    """

    def __init__(self, p: int, modulus: list[int]):
        self.p = int(p)
        self.modulus = [c % p for c in modulus]
        self.f = len(modulus) - 1
        self.order = self.p ** self.f

    def elem(self, coeffs) -> tuple[int, ...]:
        c = [int(x) % self.p for x in coeffs]
        c = c[: self.f] + [0] * max(0, self.f - len(c))
        return tuple(c)

    def zero(self) -> tuple[int, ...]:
        return tuple([0] * self.f)

    def one(self) -> tuple[int, ...]:
        return self.elem([1])

    def is_zero(self, a) -> bool:
        return all(c == 0 for c in a)

    def add(self, a, b):
        return tuple((x + y) % self.p for x, y in zip(a, b))

    def neg(self, a):
        return tuple((-x) % self.p for x in a)

    def mul(self, a, b):
        prod = poly_mul_mod(list(a), list(b), self.modulus, self.p)
        return self.elem(prod)

    def pow(self, a, e: int):
        e = int(e)
        if e < 0:
            a = self.inv(a)
            e = -e
        result = self.one()
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a):
        return self.pow(a, self.order - 2)

    def in_prime_field(self, a) -> bool:
        return all(c == 0 for c in a[1:])
