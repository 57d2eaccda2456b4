"""Discrete variation operators, surjectivity-forcing functions, grids,
dagger/even augmented functions, and the augmented-matrix solver feeding
the tile construction.

The surjectivity certification enumerates entire fibers of the k-th
variation operator through the boundary parametrization: a function on
{1..M}^k is determined by its values on the cells with some coordinate
equal to 1 together with its k-th variation.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import random
from dataclasses import dataclass, field as dc_field

import gmpy2
import numpy as np

from .errors import CertificationImpossible, NoSolution, SizeTooSmall, ZeroElement


# -- variation operators ------------------------------------------------------

def delta_k(f: np.ndarray, moduli, k: int | None = None) -> np.ndarray:
    """Iterated forward differences along every axis, modulo the moduli.

    f has shape (M,)*k (single cyclic factor) or (M,)*k + (r,).
    """
    arr = np.asarray(f)
    moduli = np.asarray(moduli)
    r = len(moduli)
    if arr.shape[-1] != r:
        arr = arr[..., None]
        if r != 1:
            raise ValueError("component axis does not match the moduli")
    if k is None:
        k = arr.ndim - 1
    if any(arr.shape[i] < 2 for i in range(k)):
        raise SizeTooSmall("variation needs size at least 2 in every direction")
    out = arr
    for axis in range(k):
        out = np.diff(out, axis=axis)
    return np.mod(out, moduli)


# -- fiber enumeration ---------------------------------------------------------

def _boundary_cells(k: int, M: int):
    """Cells of {0..M-1}^k with some coordinate equal to 0, lexicographic."""
    return [
        cell
        for cell in itertools.product(range(M), repeat=k)
        if min(cell) == 0
    ]


def _interior_cells(k: int, M: int):
    return [
        cell
        for cell in itertools.product(range(1, M), repeat=k)
    ]


def reconstruct_from_boundary(bvals: np.ndarray, g: np.ndarray, k: int, M: int, moduli):
    """Rebuild the batch of functions from boundary values and variation.

    bvals: (batch, |B|, r); g: ((M-1,)*k, r). Returns (batch, (M,)*k, r).
    """
    moduli = np.asarray(moduli)
    r = len(moduli)
    batch = bvals.shape[0]
    f = np.zeros((batch,) + (M,) * k + (r,), dtype=np.int64)
    bcells = _boundary_cells(k, M)
    for idx, cell in enumerate(bcells):
        f[(slice(None),) + cell] = bvals[:, idx]
    # fill interior lexicographically: f(y + 1) from the variation at y
    signs = {
        v: (-1) ** (k - sum(v)) for v in itertools.product((0, 1), repeat=k)
    }
    for y in itertools.product(range(M - 1), repeat=k):
        target = tuple(c + 1 for c in y)
        if min(target) == 0:
            continue
        acc = np.tile(np.mod(g[y], moduli), (batch, 1)).astype(np.int64)
        for v, s in signs.items():
            if all(t == 1 for t in v):
                continue
            cell = tuple(c + t for c, t in zip(y, v))
            acc -= s * f[(slice(None),) + cell]
        f[(slice(None),) + target] = np.mod(acc, moduli)
    return f


@dataclass
class SmithCertificate:
    moduli: tuple
    k: int
    M: int
    g: tuple  # flattened values over interior cells, component-major
    mode: str  # "exhaustive" | "sampled"
    fiber_size: int
    checked: int
    counting_bound_ok: bool
    seed: int | None = None
    digest: str = ""

    def g_array(self):
        r = len(self.moduli)
        arr = np.array(self.g, dtype=np.int64).reshape((self.M - 1,) * self.k + (r,))
        return arr

    def fingerprint(self) -> str:
        payload = repr(
            (self.moduli, self.k, self.M, self.g, self.mode, self.fiber_size,
             self.checked, self.seed)
        ).encode()
        return hashlib.sha256(payload).hexdigest()[:16]


def _all_surjective_batch(fvals: np.ndarray, moduli) -> np.ndarray:
    """Boolean per batch row: does the function hit every group element."""
    batch = fvals.shape[0]
    cells = int(np.prod(fvals.shape[1:-1]))
    r = fvals.shape[-1]
    flat = fvals.reshape(batch, cells, r)
    # encode tuples as mixed-radix integers
    enc = np.zeros((batch, cells), dtype=np.int64)
    mult = 1
    for i in range(r):
        enc += flat[:, :, i] * mult
        mult *= int(moduli[i])
    order = int(np.prod([int(m) for m in moduli]))
    ok = np.ones(batch, dtype=bool)
    for a in range(order):
        ok &= (enc == a).any(axis=1)
    return ok


def smith_g(
    moduli,
    k: int,
    M: int,
    budget: int = 2**24,
    samples: int = 4096,
    seed: int = 20_240_501,
) -> SmithCertificate:
    """A variation table g such that every f with k-th variation g is
    surjective, with an exhaustive certificate when the fiber fits the
    budget.

    The g-search is lexicographic over value tables; the first certified g
    wins. If the exhaustive mode applies and no g survives, the refutation
    is raised as CertificationImpossible with a witness.
    """
    if M < 2:
        raise SizeTooSmall("M must be at least 2")
    moduli = tuple(int(m) for m in moduli)
    order = 1
    for m in moduli:
        order *= m
    if order == 1:
        g = np.zeros((M - 1,) * k + (len(moduli),), dtype=np.int64)
        return SmithCertificate(moduli, k, M, tuple(g.ravel()), "exhaustive", 1, 1, True)
    n_interior = (M - 1) ** k
    n_boundary = M**k - (M - 1) ** k
    fiber_size = order**n_boundary
    a = order
    counting_ok = M > k * a * math.log(a)
    if fiber_size <= budget:
        cert = _smith_exhaustive(moduli, k, M, order, n_interior, n_boundary)
        cert.counting_bound_ok = counting_ok
        return cert
    if counting_ok:
        return _smith_sampled(moduli, k, M, order, n_interior, samples, seed, counting_ok)
    raise CertificationImpossible(
        f"fiber size {fiber_size} exceeds budget and M <= k a log a"
    )


def _value_tuples(moduli):
    return list(itertools.product(*[range(m) for m in moduli]))


def _smith_exhaustive(moduli, k, M, order, n_interior, n_boundary):
    vals = _value_tuples(moduli)
    r = len(moduli)
    # all boundary assignments, built once
    assignments = np.array(
        list(itertools.product(vals, repeat=n_boundary)), dtype=np.int64
    )  # (order**n_boundary, n_boundary, r)
    for g_flat in itertools.product(vals, repeat=n_interior):
        g = np.array(g_flat, dtype=np.int64).reshape((M - 1,) * k + (r,))
        f = reconstruct_from_boundary(assignments, g, k, M, moduli)
        ok = _all_surjective_batch(f, moduli)
        if bool(ok.all()):
            flat = tuple(int(x) for x in g.ravel())
            return SmithCertificate(
                moduli, k, M, flat, "exhaustive", len(assignments), len(assignments),
                True,
            )
    raise CertificationImpossible(
        "exhaustive search refuted every candidate variation table",
        witness={"moduli": moduli, "k": k, "M": M},
    )


def _smith_sampled(moduli, k, M, order, n_interior, samples, seed, counting_ok):
    vals = _value_tuples(moduli)
    r = len(moduli)
    rng = random.Random(seed)
    n_boundary = M**k - (M - 1) ** k
    for g_flat in itertools.product(vals, repeat=n_interior):
        g = np.array(g_flat, dtype=np.int64).reshape((M - 1,) * k + (r,))
        batch = np.array(
            [
                [vals[rng.randrange(order)] for _ in range(n_boundary)]
                for _ in range(samples)
            ],
            dtype=np.int64,
        )
        f = reconstruct_from_boundary(batch, g, k, M, moduli)
        if bool(_all_surjective_batch(f, moduli).all()):
            return SmithCertificate(
                moduli, k, M, tuple(int(x) for x in g.ravel()), "sampled",
                order**n_boundary, samples, counting_ok, seed=seed,
            )
    raise CertificationImpossible("sampling rejected every candidate table")


def attainment_simulation(cert: SmithCertificate, seed: int) -> bool:
    """Build an adversarial member of the fiber from the seed and report
    whether it attains the zero value. Contractually true for exhaustively
    certified tables."""
    rng = random.Random(seed)
    moduli = cert.moduli
    vals = _value_tuples(moduli)
    order = len(vals)
    n_boundary = cert.M**cert.k - (cert.M - 1) ** cert.k
    bvals = np.array(
        [[vals[rng.randrange(order)] for _ in range(n_boundary)]], dtype=np.int64
    )
    f = reconstruct_from_boundary(bvals, cert.g_array(), cert.k, cert.M, moduli)
    flat = f.reshape(-1, len(moduli))
    return bool((flat == 0).all(axis=1).any())


# -- dagger calculus and even augmented functions -------------------------------

@dataclass(frozen=True)
class GammaData:
    """The automorphism-group data the grid calculus needs, decoupled from
    field arithmetic: elements, composition, inverses, cyclotomic character,
    and the root orders n, n_tau."""

    elements: tuple
    star: tuple
    two_star: tuple
    two_star_star: tuple
    chi: dict
    inv: dict
    compose_table: dict
    n: int
    n_tau: dict  # tau -> n_tau

    @staticmethod
    def from_field(F, n: int | None = None):
        from .fields import NumberField  # noqa: F401  (typing only)
        from .fields import max_contained_root_order

        n = n if n is not None else F.n_roots
        elements = F.gamma
        chi = {g: F.chi[g] % n for g in elements}
        inv = {g: F.inverse_auto(g) for g in elements}
        comp = {(g, h): F.compose(g, h) for g in elements for h in elements}
        n_tau = {
            t: max_contained_root_order(F, n, t) for t in F.gamma2_star
        }
        return GammaData(
            elements=elements,
            star=F.gamma_star,
            two_star=F.gamma2_star,
            two_star_star=F.gamma2_star_star,
            chi=chi,
            inv=inv,
            compose_table=comp,
            n=n,
            n_tau=n_tau,
        )

    def compose(self, g, h):
        return self.compose_table[(g, h)]


def dagger(f: dict, gd: GammaData) -> dict:
    """f-dagger(s) = chi(s) f(s^-1) mod n, on the nonidentity elements."""
    return {s: (gd.chi[s] * f[gd.inv[s]]) % gd.n for s in gd.star}


@dataclass
class EvennessReport:
    dagger_fixed: bool
    divisibility: dict
    h_congruence: dict

    @property
    def is_even(self):
        return (
            self.dagger_fixed
            and all(self.divisibility.values())
            and all(self.h_congruence.values())
        )


def evenness_check(f: dict, h: dict, gd: GammaData) -> EvennessReport:
    """Clause-by-clause evenness verdicts for an augmented function."""
    dag = dagger(f, gd)
    dagger_fixed = all(dag[s] == f[s] % gd.n for s in gd.star)
    divisibility = {}
    for t in gd.two_star:
        d = math.gcd(1 + gd.chi[t], gd.n)
        divisibility[t] = f[t] % d == 0
    h_cong = {}
    for t in gd.two_star_star:
        nt = gd.n_tau[t]
        h_cong[t] = (2 * h.get(t, 0) - f[t]) % nt == 0
    return EvennessReport(dagger_fixed, divisibility, h_cong)


def enumerate_even_augmented(gd: GammaData):
    """All even augmented functions (f, h), deterministic order."""
    out = []
    star = gd.star
    for f_vals in itertools.product(range(gd.n), repeat=len(star)):
        f = dict(zip(star, f_vals))
        rep = evenness_check(f, {t: 0 for t in gd.two_star_star}, gd)
        if not (rep.dagger_fixed and all(rep.divisibility.values())):
            continue
        h_ranges = [range(gd.n_tau[t]) for t in gd.two_star_star]
        for h_vals in itertools.product(*h_ranges):
            h = dict(zip(gd.two_star_star, h_vals))
            if evenness_check(f, h, gd).is_even:
                out.append((f, h))
    return out


# -- the augmented matrix solver --------------------------------------------------

@dataclass
class SymbolMatrix:
    """k x k array: off-diagonal entries are functions on the nonidentity
    automorphisms; diagonal entries share one augmented function."""

    k: int
    off: dict  # (i, j) -> dict, 1-indexed, i != j
    diag_f: dict
    diag_h: dict

    def entry(self, i: int, j: int) -> dict:
        if i == j:
            return self.diag_f
        return self.off[(i, j)]


def lem2_solve(
    f: dict, h: dict, delta: dict, r: dict, k: int, gd: GammaData
) -> SymbolMatrix:
    """Solve for the off-diagonal functions making the row sums and the
    augmented congruence hold, by the explicit elimination with unknowns
    a, b, c, x_1..x_{k-3}."""
    n = gd.n
    if math.gcd(k, n) != 1:
        raise ValueError("k must be coprime to n")
    if k < 3:
        raise ValueError("k must be at least 3")
    if not evenness_check(f, h, gd).is_even:
        raise NoSolution("target augmented function is not even")
    if not evenness_check(delta, r, gd).is_even:
        raise NoSolution("diagonal augmented function is not even")
    kinv = int(gmpy2.invert(k % n, n))
    fk = {s: (kinv * f[s]) % n for s in gd.star}
    base = {s: (fk[s] - delta[s]) % n for s in gd.star}  # f/k - delta
    g_fun = {s: ((k - 2) * base[s]) % n for s in gd.star}

    # split the non-involution part into a transversal and its inverses
    plus, minus = [], []
    assigned = set()
    for s in gd.star:
        if s in gd.two_star or s in assigned:
            continue
        plus.append(s)
        assigned.add(s)
        assigned.add(gd.inv[s])
        if gd.inv[s] != s:
            minus.append(gd.inv[s])

    a = {}
    for s in plus:
        a[s] = g_fun[s] % n
    for s in minus:
        a[s] = 0
    for t in gd.two_star:
        lhs = (1 + gd.chi[t]) % n
        d = math.gcd(lhs, n)
        if g_fun[t] % d != 0:
            raise NoSolution("evenness invariant violated at an involution")
        nd = n // d
        if nd == 1:
            a0 = 0
        else:
            a0 = (g_fun[t] // d) * int(gmpy2.invert((lhs // d) % nd, nd)) % nd
        a[t] = a0 % n
        if t in gd.two_star_star:
            nt = gd.n_tau[t]
            ktinv = int(gmpy2.invert(k % nt, nt))
            eta = ((k - 2) * ((ktinv * h[t]) - r[t])) % nt
            half = nt // 2
            if (a[t] - eta) % nt != 0:
                if half == 0 or ((half * lhs) % n != 0):
                    raise NoSolution("the half-correction is unavailable")
                a[t] = (a[t] + half) % n
            if (a[t] - eta) % nt != 0:
                raise NoSolution("congruence unreachable (invariant breach)")

    adag = dagger(a, gd)
    b = {s: (base[s] - a[s]) % n for s in gd.star}
    c = {s: (base[s] - adag[s]) % n for s in gd.star}
    x = {s: base[s] % n for s in gd.star}

    off = {}
    zero = {s: 0 for s in gd.star}
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i == j:
                continue
            off[(i, j)] = dict(zero)
    for i in range(1, k - 2):
        off[(i, k)] = dict(x)
    off[(k - 2, k - 1)] = dict(a)
    off[(k - 2, k)] = dict(b)
    off[(k - 1, k)] = dict(c)
    for i in range(1, k + 1):
        for j in range(1, i):
            off[(i, j)] = dagger(off[(j, i)], gd)
    mat = SymbolMatrix(k, off, dict(delta), dict(r))
    ok, msg = lem2_check(mat, f, h, gd)
    if not ok:
        raise NoSolution(f"solver output failed the independent checker: {msg}")
    return mat


def lem2_check(mat: SymbolMatrix, f: dict, h: dict, gd: GammaData):
    """Verbatim verification of the two matrix conditions."""
    n = gd.n
    k = mat.k
    for i in range(1, k + 1):
        for s in gd.star:
            total = sum(mat.entry(i, j)[s] for j in range(1, k + 1)) % n
            if (k * total - f[s]) % n != 0:
                return False, f"row {i} fails at {s}"
    for t in gd.two_star_star:
        nt = gd.n_tau[t]
        total = (k * mat.diag_h.get(t, 0)) % nt
        for i in range(1, k + 1):
            for j in range(i + 1, k + 1):
                total = (total + mat.off[(i, j)][t]) % nt
        if (total - h.get(t, 0)) % nt != 0:
            return False, f"augmented congruence fails at {t}"
    # dagger symmetry
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            if i < j:
                dag = dagger(mat.off[(i, j)], gd)
                if any(dag[s] != mat.off[(j, i)][s] for s in gd.star):
                    return False, f"dagger symmetry fails at ({i},{j})"
    return True, "ok"
