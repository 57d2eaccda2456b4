"""Finite-group inhomogeneous cochain calculus: differentials, cup
products, conjugation homotopies, small cohomology by exact integer linear
algebra, central-extension synthesis from character data, and the
exterior-algebra triple-variation expansion.

Sign convention: the differential is chosen so that a 1-cochain c on a
group written multiplicatively satisfies
    (dc)(g, h) = c(gh) - c(g) - g.c(h),
i.e. the negative of the usual bar-resolution differential. This is the
convention under which the z-projection of the unipotent 3x3 group
satisfies d pr_z = pr_x cup pr_y on the nose, and it changes neither
cocycles, coboundaries, nor the Leibniz rule.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field

from .errors import (
    BudgetExceeded,
    DegreeMismatch,
    DependentCharacters,
)


# -- groups -------------------------------------------------------------------

class FiniteGroup:
    """A finite group by multiplication table. Element 0 is the identity."""

    def __init__(self, table, name="G", check=True):
        self.table = tuple(tuple(row) for row in table)
        self.n = len(table)
        self.name = name
        if any(self.table[0][j] != j or self.table[j][0] != j for j in range(self.n)):
            raise ValueError("element 0 must be the identity")
        inv = [None] * self.n
        for i in range(self.n):
            for j in range(self.n):
                if self.table[i][j] == 0:
                    inv[i] = j
        if any(v is None for v in inv):
            raise ValueError("missing inverses")
        self.inv = tuple(inv)
        if check:
            for a in range(self.n):
                for b in range(self.n):
                    for c in range(self.n):
                        if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                            raise ValueError("multiplication is not associative")

    def mul(self, a, b):
        return self.table[a][b]

    def elements(self):
        return range(self.n)

    def __len__(self):
        return self.n

    @staticmethod
    def cyclic(m, name=None):
        table = [[(i + j) % m for j in range(m)] for i in range(m)]
        return FiniteGroup(table, name or f"C{m}", check=False)

    @staticmethod
    def direct_product(G, H):
        n, m = len(G), len(H)
        table = [
            [
                (G.mul(a // m, b // m)) * m + H.mul(a % m, b % m)
                for b in range(n * m)
            ]
            for a in range(n * m)
        ]
        return FiniteGroup(table, f"{G.name}x{H.name}", check=False)


class HeisenbergGroup(FiniteGroup):
    """Unipotent upper-triangular 3x3 matrices over Z/n: triples (x, y, z)
    with (x,y,z)(x',y',z') = (x+x', y+y', z+z'+x y')."""

    def __init__(self, n: int):
        self.order_param = n
        elems = [(x, y, z) for x in range(n) for y in range(n) for z in range(n)]
        index = {e: i for i, e in enumerate(elems)}
        table = []
        for x, y, z in elems:
            row = []
            for x2, y2, z2 in elems:
                row.append(
                    index[((x + x2) % n, (y + y2) % n, (z + z2 + x * y2) % n)]
                )
            table.append(row)
        super().__init__(table, f"Heis{n}", check=False)
        self.elems = elems
        self.index = index

    def pr_x(self, i):
        return self.elems[i][0]

    def pr_y(self, i):
        return self.elems[i][1]

    def pr_z(self, i):
        return self.elems[i][2]

    def center(self):
        return [
            i
            for i in self.elements()
            if all(self.mul(i, j) == self.mul(j, i) for j in self.elements())
        ]

    def commutator_subgroup(self):
        gens = set()
        for a in self.elements():
            for b in self.elements():
                gens.add(
                    self.mul(self.mul(a, b), self.mul(self.inv[a], self.inv[b]))
                )
        # close under multiplication
        closed = set(gens) | {0}
        frontier = list(closed)
        while frontier:
            a = frontier.pop()
            for b in list(closed):
                c = self.mul(a, b)
                if c not in closed:
                    closed.add(c)
                    frontier.append(c)
        return sorted(closed)


def commutator_subgroup(G: FiniteGroup):
    gens = set()
    for a in G.elements():
        for b in G.elements():
            gens.add(G.mul(G.mul(a, b), G.mul(G.inv[a], G.inv[b])))
    closed = set(gens) | {0}
    frontier = list(closed)
    while frontier:
        a = frontier.pop()
        for b in list(closed):
            c = G.mul(a, b)
            if c not in closed:
                closed.add(c)
                frontier.append(c)
    return sorted(closed)


def is_abelian(G: FiniteGroup) -> bool:
    return all(
        G.mul(a, b) == G.mul(b, a) for a in G.elements() for b in G.elements()
    )


# -- modules ------------------------------------------------------------------

class GModule:
    """A finite abelian group (invariant-factor form) with a G-action.

    Elements are int tuples; action maps each group element to an integer
    matrix acting modulo the factors.
    """

    def __init__(self, G: FiniteGroup, moduli, action=None):
        self.G = G
        self.moduli = tuple(int(m) for m in moduli)
        self.r = len(self.moduli)
        if action is None:
            ident = tuple(
                tuple(1 if i == j else 0 for j in range(self.r)) for i in range(self.r)
            )
            action = {g: ident for g in G.elements()}
        self.action = dict(action)
        for g in G.elements():
            for h in G.elements():
                gh = G.mul(g, h)
                lhs = self._mat_mul(self.action[g], self.action[h])
                if self._mat_reduce(lhs) != self._mat_reduce(self.action[gh]):
                    raise ValueError("action is not a homomorphism")

    def _mat_mul(self, A, B):
        return tuple(
            tuple(
                sum(A[i][k] * B[k][j] for k in range(self.r)) for j in range(self.r)
            )
            for i in range(self.r)
        )

    def _mat_reduce(self, A):
        return tuple(
            tuple(A[i][j] % self.moduli[i] for j in range(self.r))
            for i in range(self.r)
        )

    def zero(self):
        return (0,) * self.r

    def reduce(self, v):
        return tuple(x % m for x, m in zip(v, self.moduli))

    def add(self, a, b):
        return tuple((x + y) % m for x, y, m in zip(a, b, self.moduli))

    def neg(self, a):
        return tuple((-x) % m for x, m in zip(a, self.moduli))

    def scale(self, k, a):
        return tuple((k * x) % m for x, m in zip(a, self.moduli))

    def act(self, g, a):
        A = self.action[g]
        return tuple(
            sum(A[i][k] * a[k] for k in range(self.r)) % self.moduli[i]
            for i in range(self.r)
        )

    def elements(self):
        return itertools.product(*[range(m) for m in self.moduli])

    @staticmethod
    def trivial(G, n):
        return GModule(G, (n,))

    @staticmethod
    def cyclic_with_sign_action(G, n, unit_map):
        """Z/n where each g acts by multiplication by unit_map[g]."""
        action = {g: ((unit_map[g] % n,),) for g in G.elements()}
        return GModule(G, (n,), action)


# -- cochains -------------------------------------------------------------------

class Cochain:
    """Inhomogeneous p-cochain G^p -> M, dense or function-backed."""

    def __init__(self, M: GModule, degree: int, values=None, fn=None):
        self.M = M
        self.degree = degree
        self._fn = fn
        self._values = values

    @staticmethod
    def from_function(M, degree, fn):
        return Cochain(M, degree, fn=fn)

    @staticmethod
    def dense(M, degree, table):
        return Cochain(M, degree, values=dict(table))

    def __call__(self, args: tuple):
        if len(args) != self.degree:
            raise DegreeMismatch(f"expected {self.degree} arguments")
        if self._values is not None:
            return self._values.get(tuple(args), self.M.zero())
        return self.M.reduce(self._fn(tuple(args)))

    def materialize(self):
        G = self.M.G
        table = {}
        for args in itertools.product(G.elements(), repeat=self.degree):
            table[args] = self(args)
        return Cochain.dense(self.M, self.degree, table)

    def equals(self, other) -> bool:
        if self.degree != other.degree:
            return False
        G = self.M.G
        return all(
            self(args) == other(args)
            for args in itertools.product(G.elements(), repeat=self.degree)
        )

    def is_zero(self) -> bool:
        G = self.M.G
        return all(
            self(args) == self.M.zero()
            for args in itertools.product(G.elements(), repeat=self.degree)
        )

    def add(self, other):
        return Cochain.from_function(
            self.M, self.degree, lambda a: self.M.add(self(a), other(a))
        )

    def sub(self, other):
        return Cochain.from_function(
            self.M, self.degree, lambda a: self.M.add(self(a), self.M.neg(other(a)))
        )


def differential(c: Cochain) -> Cochain:
    """The negative-bar differential (see module docstring)."""
    M = c.M
    G = M.G
    p = c.degree

    def d_val(args):
        total = M.neg(M.act(args[0], c(args[1:])))
        for i in range(p):
            merged = args[:i] + (G.mul(args[i], args[i + 1]),) + args[i + 2:]
            sign = 1 if i % 2 == 0 else -1
            v = c(merged)
            total = M.add(total, v if sign > 0 else M.neg(v))
        last = c(args[:-1])
        if p % 2 == 0:
            total = M.add(total, last)
        else:
            total = M.add(total, M.neg(last))
        return total

    return Cochain.from_function(M, p + 1, d_val)


def cup(c1: Cochain, c2: Cochain, pairing=None) -> Cochain:
    """Cup product; by default the coefficient pairing is componentwise
    multiplication into the first module (both modules must share moduli)."""
    if c1.M.G is not c2.M.G:
        raise DegreeMismatch("cup over different groups")
    M = c1.M
    p, q = c1.degree, c2.degree
    G = M.G
    if pairing is None:
        if c1.M.moduli != c2.M.moduli:
            raise DegreeMismatch("default cup pairing needs equal moduli")

        def pairing(a, b):
            return tuple((x * y) % m for x, y, m in zip(a, b, M.moduli))

    def val(args):
        left = c1(args[:p])
        g = 0
        for x in args[:p]:
            g = G.mul(g, x)
        right = c2(args[p:])
        right = c2.M.act(g, right)
        return pairing(left, right)

    return Cochain.from_function(M, p + q, val)


# -- conjugation homotopies -----------------------------------------------------

def conjugate_cochain(g, c: Cochain) -> Cochain:
    """(c_g c)(s_1..s_p) = g . c(g^-1 s_1 g, ..., g^-1 s_p g)."""
    M = c.M
    G = M.G
    gi = G.inv[g]

    def val(args):
        conj = tuple(G.mul(G.mul(gi, s), g) for s in args)
        return M.act(g, c(conj))

    return Cochain.from_function(M, c.degree, val)


def _to_homogeneous(c: Cochain):
    """Equivariant function on G^{p+1} from an inhomogeneous cochain."""
    G = c.M.G
    M = c.M

    def s(hs):
        h0 = hs[0]
        quot = tuple(
            G.mul(G.inv[hs[i]], hs[i + 1]) for i in range(len(hs) - 1)
        )
        return M.act(h0, c(quot))

    return s


def _from_homogeneous(M: GModule, p: int, s):
    G = M.G

    def c(args):
        hs = [0]
        for a in args:
            hs.append(G.mul(hs[-1], a))
        return s(tuple(hs))

    return Cochain.from_function(M, p, c)


def homotopy_k(g, c: Cochain) -> Cochain:
    """Prism operator K_g with c_g(c) - c = d(K_g c) + K_g(dc) under the
    module's differential convention."""
    M = c.M
    G = M.G
    p = c.degree
    s = _to_homogeneous(c)

    def k_s(hs):
        # hs has p entries; prism between right-translation-by-g and id
        total = M.zero()
        for r in range(p):
            args = tuple(G.mul(h, g) for h in hs[: r + 1]) + hs[r:]
            v = s(args)
            total = M.add(total, v if r % 2 == 0 else M.neg(v))
        return total

    def k_inhom(args):
        hs = [0]
        for a in args:
            hs.append(G.mul(hs[-1], a))
        return k_s(tuple(hs))

    out = Cochain.from_function(M, p - 1, k_inhom) if p >= 1 else Cochain.from_function(M, 0, lambda a: M.zero())
    return out


def homotopy_k2(g, c: Cochain) -> Cochain:
    """Second-order prism K2_g: the double-prism over vertex maps
    (g-translate, g-translate, identity), with terms indexed by pairs
    r <= r' and signs (-1)^(r+r').

    Satisfies d(K2 c) - K2(dc) = K_{g,g}(c): the doubled one-step homotopy
    is null-homotopic through K2. The two composites enter with opposite
    signs under this package's conventions; a direct degree-1 computation
    shows no natural prism satisfies the same-sign variant.
    """
    M = c.M
    G = M.G
    p = c.degree
    s = _to_homogeneous(c)

    def k2_s(hs):
        # hs has p - 1 entries
        total = M.zero()
        trans = tuple(G.mul(h, g) for h in hs)
        for r in range(p - 1):
            for r2 in range(r, p - 1):
                args = trans[: r + 1] + trans[r:r2 + 1] + hs[r2:]
                v = s(args)
                total = M.add(total, v if (r + r2) % 2 == 0 else M.neg(v))
        return total

    def k2_inhom(args):
        hs = [0]
        for a in args:
            hs.append(G.mul(hs[-1], a))
        return k2_s(tuple(hs))

    if p < 2:
        return Cochain.from_function(M, max(p - 2, 0), lambda a: M.zero())
    return Cochain.from_function(M, p - 2, k2_inhom)


def homotopy_k_doubled(g, c: Cochain) -> Cochain:
    """K_{g,g}: the two-map homotopy with both maps the g-translation."""
    M = c.M
    G = M.G
    p = c.degree
    s = _to_homogeneous(c)

    def k_s(hs):
        total = M.zero()
        for r in range(p):
            args = (
                tuple(G.mul(h, g) for h in hs[: r + 1])
                + tuple(G.mul(h, g) for h in hs[r:])
            )
            v = s(args)
            total = M.add(total, v if r % 2 == 0 else M.neg(v))
        return total

    def k_inhom(args):
        hs = [0]
        for a in args:
            hs.append(G.mul(hs[-1], a))
        return k_s(tuple(hs))

    return Cochain.from_function(M, p - 1, k_inhom)


def conjugation_homotopy_check(
    g, c: Cochain, samples=None, rng=None
) -> bool:
    """Verify c_g(c) - c = d(K_g c) + K_g(dc), pointwise on all arguments
    (samples=None) or on sampled argument tuples."""
    M = c.M
    G = M.G
    lhs = conjugate_cochain(g, c).sub(c)
    rhs = differential(homotopy_k(g, c)).add(homotopy_k(g, differential(c)))
    p = c.degree
    if samples is None:
        tuples = itertools.product(G.elements(), repeat=p)
    else:
        tuples = (
            tuple(rng.randrange(len(G)) for _ in range(p)) for _ in range(samples)
        )
    return all(lhs(t) == rhs(t) for t in tuples)


def two_homotopy_check(g, c: Cochain, samples=None, rng=None) -> bool:
    """Verify d(K2 c) - K2(dc) = K_{g,g}(c) pointwise."""
    M = c.M
    G = M.G
    p = c.degree
    if p < 1:
        return True
    k2_dc = homotopy_k2(g, differential(c))
    if p >= 2:
        lhs = differential(homotopy_k2(g, c)).sub(k2_dc)
    else:
        lhs = Cochain.from_function(M, p - 1, lambda a: M.neg(k2_dc(a)))
    rhs = homotopy_k_doubled(g, c)
    if samples is None:
        tuples = itertools.product(G.elements(), repeat=p - 1)
    else:
        tuples = (
            tuple(rng.randrange(len(G)) for _ in range(p - 1)) for _ in range(samples)
        )
    return all(lhs(t) == rhs(t) for t in tuples)


# -- small cohomology by integer linear algebra ----------------------------------

def smith_normal_form(A):
    """Smith normal form over Z: returns diagonal invariants of A (list)."""
    A = [list(row) for row in A]
    rows, cols = len(A), len(A[0]) if A else 0
    invariants = []
    r = 0
    while r < min(rows, cols):
        # find a pivot
        piv = None
        best = None
        for i in range(r, rows):
            for j in range(r, cols):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < best):
                    piv, best = (i, j), abs(A[i][j])
        if piv is None:
            break
        i0, j0 = piv
        A[r], A[i0] = A[i0], A[r]
        for row in A:
            row[r], row[j0] = row[j0], row[r]
        while True:
            changed = False
            for i in range(rows):
                if i != r and A[i][r] != 0:
                    q = A[i][r] // A[r][r]
                    for j in range(cols):
                        A[i][j] -= q * A[r][j]
                    if A[i][r] != 0:
                        A[r], A[i] = A[i], A[r]
                    changed = True
            for j in range(cols):
                if j != r and A[r][j] != 0:
                    q = A[r][j] // A[r][r]
                    for i in range(rows):
                        A[i][j] -= q * A[i][r]
                    if A[r][j] != 0:
                        for i in range(rows):
                            A[i][r], A[i][j] = A[i][j], A[i][r]
                    changed = True
            if not changed:
                break
        invariants.append(abs(A[r][r]))
        r += 1
    # enforce divisibility chain
    for i in range(len(invariants)):
        for j in range(i + 1, len(invariants)):
            a, b = invariants[i], invariants[j]
            if a == 0 or b == 0:
                continue
            import math

            g = math.gcd(a, b)
            l = a * b // g
            invariants[i], invariants[j] = g, l
    invariants.sort()
    return invariants


def _hermite_solve_membership(basis_cols, target):
    """Whether target is an integer combination of basis columns; via SNF of
    the stacked system (small sizes only). Returns bool."""
    # solve B x = t over Z by reducing [B | t]
    import fractions

    rows = len(target)
    B = [list(col) for col in basis_cols]
    # Gaussian elimination over Q then integrality check of the solution
    n = len(B)
    M = [[fractions.Fraction(B[j][i]) for j in range(n)] for i in range(rows)]
    t = [fractions.Fraction(x) for x in target]
    piv_cols = []
    ri = 0
    for ci in range(n):
        piv = None
        for i in range(ri, rows):
            if M[i][ci] != 0:
                piv = i
                break
        if piv is None:
            continue
        M[ri], M[piv] = M[piv], M[ri]
        t[ri], t[piv] = t[piv], t[ri]
        inv = 1 / M[ri][ci]
        M[ri] = [x * inv for x in M[ri]]
        t[ri] = t[ri] * inv
        for i in range(rows):
            if i != ri and M[i][ci] != 0:
                f = M[i][ci]
                M[i] = [a - f * b for a, b in zip(M[i], M[ri])]
                t[i] = t[i] - f * t[ri]
        piv_cols.append(ci)
        ri += 1
    for i in range(ri, rows):
        if t[i] != 0:
            return False
    return True


def cohomology_small(G: FiniteGroup, M: GModule, p: int, budget: int = 10**7):
    """Invariant factors of H^p(G, M) by exact integer linear algebra."""
    if len(G) ** (p + 1) * M.r > budget:
        raise BudgetExceeded(f"|G|^(p+1) * rank exceeds budget {budget}")

    tuples_p = list(itertools.product(G.elements(), repeat=p))
    tuples_p1 = list(itertools.product(G.elements(), repeat=p + 1))
    tuples_pm1 = list(itertools.product(G.elements(), repeat=p - 1)) if p >= 1 else []

    n_p = len(tuples_p) * M.r

    def d_matrix(tuples_lo, tuples_hi, deg):
        """Integer matrix of the differential C^deg -> C^{deg+1}."""
        idx_lo = {t: i for i, t in enumerate(tuples_lo)}
        A = [[0] * (len(tuples_lo) * M.r) for _ in range(len(tuples_hi) * M.r)]
        for hi, args in enumerate(tuples_hi):
            # first term: -args[0] . c(args[1:])
            tail = args[1:]
            Aact = M.action[args[0]]
            col0 = idx_lo[tail] * M.r
            for i in range(M.r):
                for k in range(M.r):
                    A[hi * M.r + i][col0 + k] -= Aact[i][k]
            for i_merge in range(deg):
                merged = (
                    args[:i_merge]
                    + (G.mul(args[i_merge], args[i_merge + 1]),)
                    + args[i_merge + 2:]
                )
                sign = 1 if i_merge % 2 == 0 else -1
                colm = idx_lo[merged] * M.r
                for i in range(M.r):
                    A[hi * M.r + i][colm + i] += sign
            sign_last = 1 if deg % 2 == 0 else -1
            coll = idx_lo[args[:-1]] * M.r
            for i in range(M.r):
                A[hi * M.r + i][coll + i] += sign_last
        return A

    d_p = d_matrix(tuples_p, tuples_p1, p)
    # kernel lattice of: d_p x = 0 modulo the target moduli
    # solve by stacking [d_p | D_out] and extracting x-part kernel
    n_hi = len(tuples_p1) * M.r
    ext_cols = n_p + n_hi
    A = [[0] * ext_cols for _ in range(n_hi)]
    for i in range(n_hi):
        for j in range(n_p):
            A[i][j] = d_p[i][j]
        A[i][n_p + i] = M.moduli[i % M.r]
    kernel_basis = _integer_kernel(A)
    kernel_x = [row[:n_p] for row in kernel_basis]
    # subgroup generators: image of d_{p-1} plus the coordinate moduli
    sub_gens = []
    if p >= 1:
        d_pm1 = d_matrix(tuples_pm1, tuples_p, p - 1) if p >= 1 else []
        n_lo = len(tuples_pm1) * M.r
        for j in range(n_lo):
            col = [d_pm1[i][j] for i in range(n_p)]
            sub_gens.append(col)
    for i in range(n_p):
        col = [0] * n_p
        col[i] = M.moduli[i % M.r]
        sub_gens.append(col)
    # express subgroup generators in the kernel basis (they must lie in it)
    K = [list(b) for b in kernel_x]
    coords = _solve_in_lattice(K, sub_gens)
    if coords is None:
        raise ArithmeticError("image does not lie in the kernel (bug)")
    inv = smith_normal_form(coords) if coords else []
    rank = len(K)
    factors = []
    nontrivial = [d for d in inv if d != 1]
    # pad with zeros for generators not hit at all (cannot happen here since
    # moduli columns make the quotient finite)
    hit = len(inv)
    for d in nontrivial:
        if d != 0:
            factors.append(d)
    for _ in range(rank - hit):
        factors.append(0)
    return sorted(f for f in factors if f != 1)


def _integer_kernel(A):
    """Basis of the integer kernel of A (list of row vectors)."""
    rows = len(A)
    cols = len(A[0]) if rows else 0
    # column-style HNF on [A; I]
    work = [list(row) for row in A] + [
        [1 if i == j else 0 for j in range(cols)] for i in range(cols)
    ]
    # eliminate columns against rows of A
    r = 0
    col_perm = list(range(cols))
    for i in range(rows):
        piv = None
        for j in range(r, cols):
            if work[i][j] != 0:
                if piv is None or abs(work[i][j]) < abs(work[i][piv]):
                    piv = j
        while True:
            nonzero = [j for j in range(r, cols) if work[i][j] != 0]
            if not nonzero:
                break
            piv = min(nonzero, key=lambda j: abs(work[i][j]))
            done = True
            for j in nonzero:
                if j == piv:
                    continue
                q = work[i][j] // work[i][piv]
                if q:
                    for k in range(len(work)):
                        work[k][j] -= q * work[k][piv]
                if work[i][j] != 0:
                    done = False
            if done:
                break
        nonzero = [j for j in range(r, cols) if work[i][j] != 0]
        if nonzero:
            j0 = nonzero[0]
            for k in range(len(work)):
                work[k][r], work[k][j0] = work[k][j0], work[k][r]
            r += 1
    kernel = []
    for j in range(r, cols):
        vec = [work[rows + i][j] for i in range(cols)]
        kernel.append(vec)
    return kernel


def _solve_in_lattice(basis, targets):
    """Coordinates of each target in the lattice spanned by basis (basis
    rows), or None if some target is outside. Exact over Q with an
    integrality check."""
    from fractions import Fraction

    if not basis:
        return [] if all(all(x == 0 for x in t) for t in targets) else None
    dim = len(basis[0])
    ncols = len(basis)
    out = []
    # precompute an echelon form of the basis matrix (columns = basis vectors)
    Bcols = [list(b) for b in basis]
    for t in targets:
        # solve sum_j x_j basis[j] = t
        Mx = [[Fraction(Bcols[j][i]) for j in range(ncols)] for i in range(dim)]
        rhs = [Fraction(x) for x in t]
        ri = 0
        pivots = []
        for ci in range(ncols):
            piv = None
            for i in range(ri, dim):
                if Mx[i][ci] != 0:
                    piv = i
                    break
            if piv is None:
                continue
            Mx[ri], Mx[piv] = Mx[piv], Mx[ri]
            rhs[ri], rhs[piv] = rhs[piv], rhs[ri]
            inv = 1 / Mx[ri][ci]
            Mx[ri] = [x * inv for x in Mx[ri]]
            rhs[ri] *= inv
            for i in range(dim):
                if i != ri and Mx[i][ci] != 0:
                    f = Mx[i][ci]
                    Mx[i] = [a - f * b for a, b in zip(Mx[i], Mx[ri])]
                    rhs[i] -= f * rhs[ri]
            pivots.append(ci)
            ri += 1
        for i in range(ri, dim):
            if rhs[i] != 0:
                return None
        x = [Fraction(0)] * ncols
        for row, ci in enumerate(pivots):
            x[ci] = rhs[row]
        if any(v.denominator != 1 for v in x):
            return None
        out.append([int(v) for v in x])
    return out


def brute_force_h1(G: FiniteGroup, M: GModule):
    """H^1 by direct enumeration of cocycles and coboundaries (tiny cases)."""
    cocycles = []
    all_maps = itertools.product(list(M.elements()), repeat=len(G))
    for vals in all_maps:
        c = {g: M.reduce(v) for g, v in zip(G.elements(), vals)}
        if c[0] != M.zero():
            continue
        ok = True
        for g in G.elements():
            for h in G.elements():
                if M.add(c[g], M.act(g, c[h])) != c[G.mul(g, h)]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            cocycles.append(tuple(sorted(c.items())))
    cob = set()
    for m in M.elements():
        c = {g: M.add(M.act(g, m), M.neg(M.reduce(m))) for g in G.elements()}
        cob.add(tuple(sorted(c.items())))
    # quotient size
    return len(cocycles) // len(cob)


# -- Heisenberg-type synthesis ----------------------------------------------------

def characters_independent(G: FiniteGroup, chars, n: int) -> bool:
    """Z/n-linear independence of homomorphisms G -> Z/n."""
    r = len(chars)
    for coeffs in itertools.product(range(n), repeat=r):
        if all(c == 0 for c in coeffs):
            continue
        if all(
            sum(c * ch[g] for c, ch in zip(coeffs, chars)) % n == 0
            for g in G.elements()
        ):
            return False
    return True


@dataclass
class CombinedGroup:
    group: FiniteGroup
    n: int
    r: int
    s: int
    elems: list
    index: dict

    def center_contains_fiber(self) -> bool:
        fiber = [
            self.index[(0,) * self.r + mu]
            for mu in itertools.product(range(self.n), repeat=self.s)
        ]
        Gr = self.group
        return all(
            Gr.mul(z, x) == Gr.mul(x, z) for z in fiber for x in Gr.elements()
        )

    def commutator_equals_fiber(self) -> bool:
        Gr = self.group
        comm = set()
        for a in Gr.elements():
            for b in Gr.elements():
                comm.add(Gr.mul(Gr.mul(a, b), Gr.mul(Gr.inv[a], Gr.inv[b])))
        closed = set(comm) | {0}
        frontier = list(closed)
        while frontier:
            a = frontier.pop()
            for b in list(closed):
                c = Gr.mul(a, b)
                if c not in closed:
                    closed.add(c)
                    frontier.append(c)
        fiber = {
            self.index[(0,) * self.r + mu]
            for mu in itertools.product(range(self.n), repeat=self.s)
        }
        return closed == fiber


def heisenberg_combine(n: int, r: int, legs, chars=None, G=None):
    """Group structure on (Z/n)^r x (Z/n)^s from bilinear leg data.

    legs: list of (v, w) pairs of length-r integer vectors; the cocycle is
    c(l1, l2) = (v_j . l1)(w_j . l2) per coordinate j. When chars (functions
    on a finite group G) are supplied, their independence is checked first.
    """
    s = len(legs)
    if chars is not None:
        if not characters_independent(G, chars, n):
            raise DependentCharacters("supplied characters are Z/n-dependent")
    lam = list(itertools.product(range(n), repeat=r))
    mus = list(itertools.product(range(n), repeat=s))
    elems = [l + m for l in lam for m in mus]
    index = {e: i for i, e in enumerate(elems)}

    def coc(l1, l2):
        return tuple(
            (sum(v[i] * l1[i] for i in range(r)) * sum(w[i] * l2[i] for i in range(r)))
            % n
            for v, w in legs
        )

    table = []
    for e1 in elems:
        l1, m1 = e1[:r], e1[r:]
        row = []
        for e2 in elems:
            l2, m2 = e2[:r], e2[r:]
            l3 = tuple((a + b) % n for a, b in zip(l1, l2))
            c = coc(l1, l2)
            m3 = tuple((a + b + cc) % n for a, b, cc in zip(m1, m2, c))
            row.append(index[l3 + m3])
        table.append(row)
    Gr = FiniteGroup(table, name=f"H(n={n},r={r},s={s})", check=False)
    return CombinedGroup(Gr, n, r, s, elems, index)


def wedge_independent(legs, n: int, r: int) -> bool:
    """Z/n-independence of the wedge products of the leg pairs in the
    exterior square, tested via the associated alternating forms."""
    s = len(legs)
    pairs = [(i, j) for i in range(r) for j in range(i + 1, r)]

    def alt_form(v, w):
        return tuple((v[i] * w[j] - v[j] * w[i]) % n for i, j in pairs)

    forms = [alt_form(v, w) for v, w in legs]
    for coeffs in itertools.product(range(n), repeat=s):
        if all(c == 0 for c in coeffs):
            continue
        tot = [0] * len(pairs)
        for c, f in zip(coeffs, forms):
            for k in range(len(pairs)):
                tot[k] = (tot[k] + c * f[k]) % n
        if all(t == 0 for t in tot):
            return False
    return True


# -- variation tensors and the exterior expansion ---------------------------------

class VariationTensor:
    """Antisymmetric coefficient tensor on Gamma^3 with values mod n."""

    def __init__(self, gamma, n: int, coeffs: dict):
        self.gamma = tuple(gamma)
        self.n = n
        self._c = {}
        for (i, j, k), v in coeffs.items():
            self.set_coeff((i, j, k), v)

    def set_coeff(self, idx, v):
        i, j, k = idx
        if len({i, j, k}) < 3:
            if v % self.n != 0:
                raise ValueError("repeated indices force a zero coefficient")
            return
        key, sign = _sort_with_sign(idx)
        self._c[key] = (sign * v) % self.n

    def coeff(self, idx):
        i, j, k = idx
        if len({i, j, k}) < 3:
            return 0
        key, sign = _sort_with_sign(idx)
        return (sign * self._c.get(key, 0)) % self.n

    def is_equivariant(self, compose, chi, twist: int = -2) -> bool:
        """a_{s1 g, s2 g, s3 g} = chi(g)^twist a_{s1,s2,s3} for all g."""
        import gmpy2 as _g

        n = self.n
        for g in self.gamma:
            c = chi[g] % n
            if twist >= 0:
                factor = pow(c, twist, n)
            else:
                factor = pow(int(_g.invert(c, n)), -twist, n)
            for i in self.gamma:
                for j in self.gamma:
                    for k in self.gamma:
                        lhs = self.coeff((compose(i, g), compose(j, g), compose(k, g)))
                        rhs = self.coeff((i, j, k)) * factor % n
                        if lhs != rhs:
                            return False
        return True

    @staticmethod
    def basis_tensor(gamma, n, triple):
        return VariationTensor(gamma, n, {tuple(triple): 1})

    def items(self):
        return sorted(self._c.items())


def _sort_with_sign(idx):
    lst = list(idx)
    sign = 1
    for i in range(len(lst)):
        for j in range(len(lst) - 1 - i):
            if lst[j] > lst[j + 1]:
                lst[j], lst[j + 1] = lst[j + 1], lst[j]
                sign = -sign
    return tuple(lst), sign


def _order_mod(c, n):
    k = 1
    acc = c % n
    while acc != 1:
        acc = acc * c % n
        k += 1
        if k > 4 * n:
            raise ArithmeticError("not a unit")
    return k


class ExteriorElement:
    """Degree-3 element of the exterior algebra over Z/n on generators
    indexed by (slot, sigma), slot in 0..3."""

    def __init__(self, n: int, terms=None):
        self.n = n
        self.terms = {}
        if terms:
            for k, v in terms.items():
                self._add(k, v)

    def _add(self, gens, coeff):
        gens = tuple(gens)
        if len(set(gens)) < 3:
            return
        key, sign = _sort_with_sign(gens)
        v = (self.terms.get(key, 0) + sign * coeff) % self.n
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def add_wedge(self, g1, g2, g3, coeff):
        self._add((g1, g2, g3), coeff)

    def __eq__(self, other):
        return self.n == other.n and self.terms == other.terms

    def is_zero(self):
        return not self.terms

    def items(self):
        return sorted(self.terms.items())


def triple_variation_classes(t: VariationTensor) -> ExteriorElement:
    """The alternating sum over the eight multiplication maps of the
    degree-3 class with coefficients t, expanded in the slot coordinates."""
    n = t.n
    out = ExteriorElement(n)
    vs = list(itertools.product((0, 1), repeat=3))
    for (s1, s2, s3), coeff in t.items():
        for v in vs:
            sign = 1 if (sum(v) % 2 == 0) else -1
            # y^sigma -> y_0^sigma + v_1 y_1^sigma + v_2 y_2^sigma + v_3 y_3^sigma
            opts = [(0, 1)] + [(i + 1, v[i]) for i in range(3)]
            for sl1, c1 in opts:
                if c1 == 0:
                    continue
                for sl2, c2 in opts:
                    if c2 == 0:
                        continue
                    for sl3, c3 in opts:
                        if c3 == 0:
                            continue
                        out.add_wedge(
                            (sl1, s1),
                            (sl2, s2),
                            (sl3, s3),
                            sign * coeff * c1 * c2 * c3,
                        )
    return out


def triple_variation_expected(t: VariationTensor) -> ExteriorElement:
    """The closed form: minus the signed permutation sum in slots 1, 2, 3."""
    n = t.n
    out = ExteriorElement(n)
    for (s1, s2, s3), coeff in t.items():
        for perm, sign in _perms_with_sign((s1, s2, s3)):
            out.add_wedge(
                (1, perm[0]), (2, perm[1]), (3, perm[2]), -sign * coeff
            )
    return out


def _perms_with_sign(triple):
    a, b, c = triple
    return [
        ((a, b, c), 1),
        ((a, c, b), -1),
        ((b, a, c), -1),
        ((b, c, a), 1),
        ((c, a, b), 1),
        ((c, b, a), -1),
    ]


def brute_force_variation(t: VariationTensor) -> ExteriorElement:
    """Independent oracle: expand the product of the three substituted
    linear forms as ordered words, then antisymmetrize word-by-word."""
    n = t.n
    out = ExteriorElement(n)
    for (s1, s2, s3), coeff in t.items():
        for v in itertools.product((0, 1), repeat=3):
            sign = 1 if sum(v) % 2 == 0 else -1
            slots = [0, 1, 2, 3]
            weights = [1, v[0], v[1], v[2]]
            for w1 in slots:
                for w2 in slots:
                    for w3 in slots:
                        c = weights[w1] * weights[w2] * weights[w3]
                        if c == 0:
                            continue
                        out.add_wedge(
                            (w1, s1), (w2, s2), (w3, s3), sign * coeff * c
                        )
    return out
