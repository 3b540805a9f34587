"""Flags in R^n and their wedge-product invariants.

A flag is stored as an ordered basis: column b spans the new direction
of the b-dimensional subspace.  Everything in this module runs in one of
two numeric tiers: exact rationals (``fractions.Fraction``) whenever all
inputs are exact, IEEE doubles otherwise.  The exact tier is used for
all algebraic identities and for realizing flag triples from prescribed
invariants; the float tier feeds the reconstruction pipeline.

The scalar invariants computed here are the triple ratio (six
determinants), the quadruple ratio (eight determinants), and the double
ratio (four determinants, with a leading minus sign that makes the
positive-configuration conventions work out).
"""

import math
import numbers
from fractions import Fraction

import numpy as np

from . import ratlin


def _is_exact(x):
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


def _all_exact(vectors):
    return all(_is_exact(x) for v in vectors for x in v)


def _det_columns(cols):
    """Determinant of the square matrix with the given columns."""
    n = len(cols)
    if any(len(c) != n for c in cols):
        raise ValueError("need %d columns of length %d" % (n, n))
    if _all_exact(cols):
        rows = [[Fraction(cols[j][i]) for j in range(n)] for i in range(n)]
        return ratlin.det(rows)
    m = np.array([[float(cols[j][i]) for j in range(n)] for i in range(n)])
    return float(np.linalg.det(m))


def _primitive(col):
    """Scale an exact column so entries are coprime integers, first nonzero > 0."""
    fracs = [Fraction(x) for x in col]
    denoms = [f.denominator for f in fracs]
    lcm = 1
    for d in denoms:
        lcm = lcm * d // math.gcd(lcm, d)
    ints = [int(f * lcm) for f in fracs]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g:
        ints = [x // g for x in ints]
    for x in ints:
        if x:
            if x < 0:
                ints = [-y for y in ints]
            break
    return tuple(Fraction(x) for x in ints)


class Flag:
    """Full flag in n-space, as an ordered basis of n column vectors."""

    def __init__(self, basis):
        basis = [tuple(v) for v in basis]
        n = len(basis)
        if any(len(v) != n for v in basis):
            raise ValueError("flag basis must be square")
        if _all_exact(basis):
            basis = [_primitive(v) for v in basis]
            self.exact = True
        else:
            # orthonormalize: QR keeps every partial span, so the flag
            # is unchanged while the basis stays well conditioned after
            # many contracting factors have been applied to it
            m = np.array([[float(v[i]) for v in basis] for i in range(n)])
            q, r = np.linalg.qr(m)
            if np.min(np.abs(np.diag(r))) < 1e-13 * np.max(np.abs(m)):
                raise ValueError("flag basis is degenerate")
            basis = [tuple(q[:, j]) for j in range(n)]
            self.exact = False
        if _det_columns(basis) == 0:
            raise ValueError("flag basis is degenerate")
        self.n = n
        self.basis = tuple(basis)
        if self.exact:
            # canonical invariant: the reduced row echelon form of every
            # subspace in the chain, so equality means equality of flags
            # rather than of chosen bases
            canon = []
            for a in range(1, n + 1):
                red, _ = ratlin.rref([list(v) for v in basis[:a]])
                canon.append(tuple(tuple(r) for r in red[:a]))
            self._canon = tuple(canon)

    def subspace(self, a):
        """The first a basis columns, spanning the a-dimensional step."""
        return list(self.basis[:a])

    def __eq__(self, other):
        if not isinstance(other, Flag) or self.n != other.n:
            return False
        if self.exact and other.exact:
            return self._canon == other._canon
        for a in range(1, self.n):
            p = _orth_projector(self.subspace(a))
            q = _orth_projector(other.subspace(a))
            if not np.allclose(p, q, atol=1e-9):
                return False
        return True

    def __hash__(self):
        if self.exact:
            return hash(self._canon)
        return hash(self.n)

    def __repr__(self):
        return "Flag(n=%d, %r)" % (self.n, self.basis)


def _orth_projector(cols):
    m = np.array([[float(x) for x in c] for c in cols]).T
    q, _ = np.linalg.qr(m)
    return q @ q.T


def ascending_flag(n):
    return Flag([[Fraction(int(i == j)) for i in range(n)] for j in range(n)])


def descending_flag(n):
    return Flag([[Fraction(int(i == n - 1 - j)) for i in range(n)] for j in range(n)])


class FlagTuple:
    """Ordered tuple of flags of equal dimension."""

    def __init__(self, flags):
        flags = list(flags)
        if not flags:
            raise ValueError("empty flag tuple")
        n = flags[0].n
        if any(f.n != n for f in flags):
            raise ValueError("flags have mismatched dimensions")
        self.n = n
        self.flags = tuple(flags)

    def __len__(self):
        return len(self.flags)

    def __getitem__(self, i):
        return self.flags[i]


class ProjectiveMap:
    """Invertible n x n matrix, identified up to a nonzero scalar."""

    def __init__(self, matrix):
        rows = [tuple(r) for r in matrix]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("matrix must be square")
        if _all_exact(rows):
            self.exact = True
            rows = [tuple(Fraction(x) for x in r) for r in rows]
            if ratlin.det([list(r) for r in rows]) == 0:
                raise ValueError("matrix is singular")
        else:
            self.exact = False
            arr = np.array([[float(x) for x in r] for r in rows])
            top = np.max(np.abs(arr))
            if not np.isfinite(top) or top == 0.0:
                raise ValueError("matrix is singular")
            # fix the scalar so long products neither overflow nor
            # underflow
            arr = arr / top
            if abs(np.linalg.det(arr)) < 1e-300:
                raise ValueError("matrix is singular")
            rows = [tuple(r) for r in arr]
        self.n = n
        self.matrix = tuple(rows)

    def as_array(self):
        return np.array([[float(x) for x in r] for r in self.matrix])

    def __matmul__(self, other):
        if isinstance(other, ProjectiveMap):
            if self.exact and other.exact:
                prod = ratlin.mat_mul([list(r) for r in self.matrix],
                                      [list(r) for r in other.matrix])
                return ProjectiveMap(prod)
            return ProjectiveMap(self.as_array() @ other.as_array())
        raise TypeError("can only compose with another ProjectiveMap")

    def inverse(self):
        if self.exact:
            return ProjectiveMap(ratlin.inverse([list(r) for r in self.matrix]))
        return ProjectiveMap(np.linalg.inv(self.as_array()))

    def apply_vector(self, v):
        if self.exact and _all_exact([v]):
            return tuple(ratlin.mat_vec([list(r) for r in self.matrix],
                                        [Fraction(x) for x in v]))
        return tuple(self.as_array() @ np.array([float(x) for x in v]))

    def apply(self, flag):
        cols = [self.apply_vector(v) for v in flag.basis]
        try:
            return Flag(cols)
        except ValueError:
            if self.exact and flag.exact:
                raise
            # a strongly contracting map can squash the image basis
            # below machine resolution; the unresolvable fine subspaces
            # are completed orthonormally
            m = np.array([[float(c[i]) for c in cols]
                          for i in range(self.n)])
            q, r = np.linalg.qr(m)
            top = np.max(np.abs(m))
            fixed = [tuple(m[:, j]) if abs(r[j, j]) > 1e-13 * top
                     else tuple(q[:, j]) for j in range(self.n)]
            return Flag(fixed)

    def projectively_equal(self, other, tol=1e-9):
        if self.n != other.n:
            return False
        if self.exact and other.exact:
            a = [x for r in self.matrix for x in r]
            b = [x for r in other.matrix for x in r]
            lam = None
            for x, y in zip(a, b):
                if (x == 0) != (y == 0):
                    return False
                if x != 0 and lam is None:
                    lam = y / x
            return all(y == lam * x for x, y in zip(a, b))
        return projective_matrix_distance(self.as_array(), other.as_array()) <= tol

    def __repr__(self):
        return "ProjectiveMap(%r)" % (self.matrix,)


def projective_matrix_distance(a, b):
    """Max entrywise distance after unit-Frobenius, sign-fixed normalization."""
    def norm(m):
        m = np.asarray(m, dtype=float)
        m = m / np.linalg.norm(m)
        flat = m.ravel()
        for x in flat:
            if abs(x) > 1e-14:
                if x < 0:
                    m = -m
                break
        return m

    return float(np.max(np.abs(norm(a) - norm(b))))


def identity_map(n):
    return ProjectiveMap(ratlin.identity(n))


def interior_points(n):
    """Interior lattice points of the discrete triangle a+b+c=n."""
    return [(a, b, n - a - b)
            for a in range(1, n - 1) for b in range(1, n - a)]


def theta_points(n):
    return [(a, b, n - a - b)
            for a in range(n + 1) for b in range(n + 1 - a)]


class BalancedFunction:
    """Integer function on the discrete triangle a+b+c=n whose sums along
    every line parallel to a side vanish."""

    def __init__(self, n, values):
        vals = {}
        for (a, b, c), v in values.items():
            if a + b + c != n or min(a, b, c) < 0:
                raise ValueError("point (%d,%d,%d) outside triangle" % (a, b, c))
            if v:
                vals[(a, b, c)] = int(v)
        for k in range(n + 1):
            for axis in range(3):
                s = sum(v for p, v in vals.items() if p[axis] == k)
                if s != 0:
                    raise ValueError("line sums must vanish: axis %d level %d" %
                                     (axis, k))
        self.n = n
        self.values = vals

    def __call__(self, a, b, c):
        return self.values.get((a, b, c), 0)

    def __eq__(self, other):
        return (isinstance(other, BalancedFunction) and self.n == other.n
                and self.values == other.values)


def hexagon_cycle(n, a, b, c):
    """The balanced function supported on the small hexagon around (a,b,c)."""
    if min(a, b, c) < 1 or a + b + c != n:
        raise ValueError("hexagon center must be interior")
    vals = {(a + 1, b, c - 1): 1, (a - 1, b, c + 1): -1,
            (a, b - 1, c + 1): 1, (a, b + 1, c - 1): -1,
            (a - 1, b + 1, c): 1, (a + 1, b - 1, c): -1}
    return BalancedFunction(n, vals)


def wedge_bracket(E, a, F, b, G, c):
    """Determinant of (first a columns of E, first b of F, first c of G)."""
    n = E.n
    if F.n != n or G.n != n:
        raise ValueError("flags have mismatched dimensions")
    if a + b + c != n or min(a, b, c) < 0:
        raise ValueError("indices must be nonnegative and sum to n")
    return _det_columns(E.subspace(a) + F.subspace(b) + G.subspace(c))


def multi_bracket(flags_and_dims):
    """Determinant of stacked leading columns of several flags."""
    cols = []
    for flag, a in flags_and_dims:
        cols.extend(flag.subspace(a))
    return _det_columns(cols)


class GenericityError(ValueError):
    pass


def is_generic(tup, arity):
    """Whether every sub-tuple of the given arity meets transversely."""
    if arity not in (2, 3, 4):
        raise ValueError("arity must be 2, 3 or 4")
    flags = tup.flags if isinstance(tup, FlagTuple) else list(tup)
    n = flags[0].n
    if len(flags) < arity:
        raise ValueError("tuple shorter than requested arity")
    import itertools
    for idx in itertools.combinations(range(len(flags)), arity):
        sub = [flags[i] for i in idx]
        for dims in _index_splittings(n, arity):
            val = multi_bracket(list(zip(sub, dims)))
            if (val == 0) if sub[0].exact and all(f.exact for f in sub) \
                    else (abs(val) < 1e-12):
                return False
    return True


def _index_splittings(n, arity):
    if arity == 2:
        return [(a, n - a) for a in range(n + 1)]
    if arity == 3:
        return [(a, b, n - a - b)
                for a in range(n + 1) for b in range(n + 1 - a)]
    return [(a, b, c, n - a - b - c)
            for a in range(n + 1) for b in range(n + 1 - a)
            for c in range(n + 1 - a - b)]


def _require_generic(flags, arity, what):
    if not is_generic(FlagTuple(flags), arity):
        raise GenericityError("non-generic flags in %s" % what)


def triple_ratio(E, F, G, a, b, c):
    """Six-determinant invariant of a generic flag triple."""
    n = E.n
    if min(a, b, c) < 1 or a + b + c != n:
        raise ValueError("need a,b,c >= 1 with a+b+c=n")
    _require_generic([E, F, G], 3, "triple_ratio")
    num = (wedge_bracket(E, a + 1, F, b, G, c - 1)
           * wedge_bracket(E, a, F, b - 1, G, c + 1)
           * wedge_bracket(E, a - 1, F, b + 1, G, c))
    den = (wedge_bracket(E, a - 1, F, b, G, c + 1)
           * wedge_bracket(E, a, F, b + 1, G, c - 1)
           * wedge_bracket(E, a + 1, F, b - 1, G, c))
    return num / den


def quadruple_ratio(E, F, G, a):
    """Eight-determinant invariant; E plays the distinguished role."""
    n = E.n
    if not 1 <= a <= n - 1:
        raise ValueError("need 1 <= a <= n-1")
    _require_generic([E, F, G], 3, "quadruple_ratio")
    num = (wedge_bracket(E, a - 1, F, n - a, G, 1)
           * wedge_bracket(E, a, F, 1, G, n - a - 1)
           * multi_bracket([(E, a + 1), (F, n - a - 1)])
           * multi_bracket([(E, a), (G, n - a)]))
    den = (wedge_bracket(E, a, F, n - a - 1, G, 1)
           * wedge_bracket(E, a - 1, F, 1, G, n - a)
           * multi_bracket([(E, a + 1), (G, n - a - 1)])
           * multi_bracket([(E, a), (F, n - a)]))
    return num / den


def double_ratio(E, F, G, H, a):
    """Four-determinant invariant of a quadruple; only the lines G^(1),
    H^(1) matter from the last two flags."""
    n = E.n
    if not 1 <= a <= n - 1:
        raise ValueError("need 1 <= a <= n-1")
    if not is_generic(FlagTuple([E, F, G]), 3) or \
            not is_generic(FlagTuple([E, F, H]), 3):
        raise GenericityError("non-generic flags in double_ratio")
    num = (wedge_bracket(E, a, F, n - a - 1, G, 1)
           * wedge_bracket(E, a - 1, F, n - a, H, 1))
    den = (wedge_bracket(E, a, F, n - a - 1, H, 1)
           * wedge_bracket(E, a - 1, F, n - a, G, 1))
    return -num / den


def wedge_invariant(phi, E, F, G):
    """Product of brackets raised to the powers of a balanced function."""
    _require_generic([E, F, G], 3, "wedge_invariant")
    one = Fraction(1) if (E.exact and F.exact and G.exact) else 1.0
    out = one
    for (a, b, c), k in phi.values.items():
        out = out * wedge_bracket(E, a, F, b, G, c) ** k
    return out


def hexagon_decomposition(phi):
    """Coefficients of a balanced function in the hexagon-cycle basis."""
    n = phi.n
    centers = interior_points(n)
    pts = theta_points(n)
    cols = []
    for (a, b, c) in centers:
        h = hexagon_cycle(n, a, b, c)
        cols.append([Fraction(h(*p)) for p in pts])
    mat = [[cols[j][i] for j in range(len(centers))] for i in range(len(pts))]
    rhs = [Fraction(phi(*p)) for p in pts]
    sol = ratlin.solve_general(mat, rhs)
    if sol is None:
        raise ValueError("function does not lie in the hexagon-cycle span")
    out = {}
    for center, x in zip(centers, sol):
        if x.denominator != 1:
            raise ValueError("non-integer hexagon coefficient")
        if x:
            out[center] = int(x)
    return out


def combine_hexagons(n, coeffs):
    """Integer combination of hexagon cycles, as a balanced function."""
    vals = {}
    for (a, b, c), k in coeffs.items():
        for p, v in hexagon_cycle(n, a, b, c).values.items():
            vals[p] = vals.get(p, 0) + k * v
    return BalancedFunction(n, vals)


def is_positive_tuple(tup):
    """Positivity of a cyclically ordered flag tuple: all triple ratios over
    distinct triples positive, and double ratios positive for the interleaved
    index patterns i<k<j<l and k<i<l<j."""
    flags = tup.flags if isinstance(tup, FlagTuple) else list(tup)
    n = flags[0].n
    m = len(flags)
    import itertools
    for (i, j, k) in itertools.combinations(range(m), 3):
        if not is_generic(FlagTuple([flags[i], flags[j], flags[k]]), 3):
            raise GenericityError("non-generic triple (%d,%d,%d)" % (i, j, k))
        for (a, b, c) in interior_points(n):
            if triple_ratio(flags[i], flags[j], flags[k], a, b, c) <= 0:
                return False
    for (i, j) in itertools.permutations(range(m), 2):
        for (k, l) in itertools.permutations(range(m), 2):
            if len({i, j, k, l}) < 4:
                continue
            if not (i < k < j < l or k < i < l < j):
                continue
            if not is_generic(FlagTuple([flags[i], flags[j],
                                         flags[k], flags[l]]), 4):
                raise GenericityError(
                    "non-generic quadruple (%d,%d,%d,%d)" % (i, j, k, l))
            for a in range(1, n):
                if double_ratio(flags[i], flags[j], flags[k], flags[l], a) <= 0:
                    return False
    return True


def _corner_bracket_signs(n):
    """Signs of det(e_1..e_a, e_n..e_{a+1}): the bracket of the standard
    ascending/descending pair with no third-flag columns."""
    E = ascending_flag(n)
    F = descending_flag(n)
    return {a: multi_bracket([(E, a), (F, n - a)]) for a in range(n + 1)}


def realize_triple_from_ratios(n, ratios):
    """Generic flag triple with prescribed triple ratios, exact round-trip.

    E and F are pinned to the standard ascending/descending flags, which
    kills the projective ambiguity up to the diagonal torus; the torus is
    fixed by normalizing a family of bracket values to 1.  Bracket values
    m(a,c) = <e^(a), f^(n-a-c), g^(c)> obey, at each interior point,

        t_abc = m(a+1,c-1) m(a,c+1) m(a-1,c) / (m(a-1,c+1) m(a,c-1) m(a+1,c))

    which solves for m(a, c+1) level by level in c.  The columns of G are
    then recovered from linear systems: each bracket is linear in the next
    unknown column.
    """
    ratios = {k: Fraction(v) for k, v in ratios.items()}
    want = set(interior_points(n))
    if set(ratios) != want:
        raise ValueError("need exactly one ratio per interior point")
    if any(v == 0 for v in ratios.values()):
        raise ValueError("ratios must be nonzero")

    corner = _corner_bracket_signs(n)
    m = {}
    for a in range(n + 1):
        m[(a, 0)] = corner[a]
    for a in range(n):
        m[(a, 1)] = Fraction(1)
    for c in range(1, n):
        # level c+1 from levels c and c-1; seed the top entry to 1
        m[(0, c + 1)] = Fraction(1)
        for a in range(1, n - c):
            b = n - a - c
            t = ratios[(a, b, c)]
            m[(a, c + 1)] = (t * m[(a - 1, c + 1)] * m[(a, c - 1)]
                             * m[(a + 1, c)]
                             / (m[(a + 1, c - 1)] * m[(a - 1, c)]))

    E = ascending_flag(n)
    F = descending_flag(n)
    gcols = []
    for c in range(1, n + 1):
        rows = []
        rhs = []
        for a in range(n - c + 1):
            b = n - a - c
            # det(E_a | F_b | g_1..g_{c-1} | x) as a linear form in x
            fixed = E.subspace(a) + F.subspace(b) + gcols
            coeffs = []
            for i in range(n):
                unit = [Fraction(int(r == i)) for r in range(n)]
                coeffs.append(_det_columns(fixed + [unit]))
            rows.append(coeffs)
            rhs.append(m[(a, c)])
        sol = ratlin.solve_general(rows, rhs)
        if sol is None:
            raise ValueError("inconsistent bracket values")
        gcols.append(tuple(sol))
    G = Flag(gcols)

    # G was built from raw columns; Flag canonicalization rescales them,
    # which preserves every ratio but not the raw brackets.  Recheck the
    # definitional contract on the ratios themselves.
    for (a, b, c) in want:
        if triple_ratio(E, F, G, a, b, c) != ratios[(a, b, c)]:
            raise ValueError("realization failed to reproduce ratios")
    return E, F, G


def veronese_flag(n, t):
    """Osculating flag of the moment curve (1, t, ..., t^(n-1)) at t.

    t may be an exact rational, a float, or the symbol ``math.inf`` /
    the string "inf" for the point at infinity.
    """
    if t == math.inf or (isinstance(t, str) and t == "inf"):
        return descending_flag(n)
    exact = _is_exact(t)
    tt = Fraction(t) if exact else float(t)
    cols = []
    for k in range(n):
        # k-th derivative of the moment curve, scaled by 1/k!
        col = []
        for i in range(n):
            if i < k:
                col.append(Fraction(0) if exact else 0.0)
            else:
                col.append(math.comb(i, k) * tt ** (i - k))
        cols.append(col)
    return Flag(cols)


def irreducible_rep(A, n):
    """Symmetric-power action of a unimodular 2x2 matrix on n-space.

    Row k of the output is defined by (alpha t + beta)^k (gamma t +
    delta)^(n-1-k) expanded in powers of t, so the map carries the
    osculating flag at t to the osculating flag at the image of t under
    the fractional linear action.
    """
    (al, be), (ga, de) = (A[0][0], A[0][1]), (A[1][0], A[1][1])
    exact = all(_is_exact(x) for x in (al, be, ga, de))
    if exact:
        al, be, ga, de = Fraction(al), Fraction(be), Fraction(ga), Fraction(de)
    if al * de - be * ga != 1 and (exact or abs(al * de - be * ga - 1) > 1e-9):
        raise ValueError("input matrix must have determinant 1")
    d = n - 1
    rows = []
    for k in range(n):
        # coefficients of (be + al t)^k (de + ga t)^(d-k)
        poly = [Fraction(0) if exact else 0.0] * n
        for i in range(k + 1):
            for j in range(d - k + 1):
                coef = (math.comb(k, i) * al ** i * be ** (k - i)
                        * math.comb(d - k, j) * ga ** j * de ** (d - k - j))
                poly[i + j] += coef
        rows.append(poly)
    return ProjectiveMap(rows)


def double_ratio_vector(E, F, G, H, with_margin=False):
    """All double ratios D_a(E, F, G, H), a = 1 .. n-1, evaluated in
    the basis of lines adapted to the pair (E, F).

    In that basis the invariant is a ratio of consecutive components of
    the G and H lines, which stays well conditioned when G or H sits
    close to an endpoint flag -- the determinant form loses those
    configurations to cancellation.  The optional margins report, per
    component, the smallest relative line component entering that
    ratio; the value of D_a is accurate to roughly machine epsilon
    over its margin."""
    n = E.n
    lines = _flag_pair_lines(E, F)
    P = np.array([[float(c) for c in v] for v in lines]).T
    gs = np.linalg.solve(P, [float(c) for c in G.basis[0]])
    hs = np.linalg.solve(P, [float(c) for c in H.basis[0]])
    g, h = np.abs(gs), np.abs(hs)
    out = []
    margins = []
    for a in range(1, n):
        den = gs[a - 1] * hs[a]
        if den == 0:
            raise GenericityError("non-generic flags in double_ratio")
        out.append(-(gs[a] * hs[a - 1]) / den)
        margins.append(min(min(g[a - 1], g[a]) / np.max(g),
                           min(h[a - 1], h[a]) / np.max(h)))
    if with_margin:
        return out, tuple(float(m) for m in margins)
    return out


def _flag_pair_lines(E, F):
    """Representatives of the lines L_a = E^(a) meet F^(n-a+1)."""
    n = E.n
    exact = E.exact and F.exact
    lines = []
    for a in range(1, n + 1):
        cols = E.subspace(a) + F.subspace(n - a + 1)
        if exact:
            rows = [[Fraction(c[i]) for c in cols] for i in range(n)]
            null = ratlin.nullspace(rows)
            if len(null) != 1:
                raise GenericityError("flag pair not generic")
            coeff = null[0][:a]
            vec = [sum(coeff[j] * cols[j][i] for j in range(a))
                   for i in range(n)]
        else:
            mrows = np.array([[float(c[i]) for c in cols] for i in range(n)])
            _, s, vh = np.linalg.svd(mrows)
            # n rows, n+1 columns: a one-dimensional kernel is the
            # generic picture, rank deficiency means a degenerate pair
            if s[-1] < 1e-9 * s[0]:
                raise GenericityError("flag pair not generic")
            coeff = vh[-1][:a]
            vec = list(np.array([[float(c[i]) for c in cols[:a]]
                                 for i in range(n)]) @ coeff)
        if all(x == 0 for x in vec) if exact else np.allclose(vec, 0):
            raise GenericityError("flag pair not generic")
        lines.append(tuple(vec))
    return lines


def _coords_in_basis(basis_cols, v):
    n = len(v)
    exact = _all_exact(basis_cols) and _all_exact([v])
    if exact:
        rows = [[Fraction(basis_cols[j][i]) for j in range(n)]
                for i in range(n)]
        return ratlin.solve(rows, [Fraction(x) for x in v])
    mrows = np.array([[float(basis_cols[j][i]) for j in range(n)]
                      for i in range(n)])
    return list(np.linalg.solve(mrows, np.array([float(x) for x in v])))


def normalize_triple(E, F, G, E0, F0, G0):
    """Projective map sending (E,F) to (E0,F0) with all double ratios of
    the image of G against G0 equal to 1; returns (map, image flag)."""
    _require_generic([E, F, G], 3, "normalize_triple")
    _require_generic([E0, F0, G0], 3, "normalize_triple reference")
    n = E.n
    lines = _flag_pair_lines(E, F)
    lines0 = _flag_pair_lines(E0, F0)
    exact = all(f.exact for f in (E, F, G, E0, F0, G0))

    # base map: a-th line of (E,F) to a-th line of (E0,F0)
    P = [[lines[a][i] for a in range(n)] for i in range(n)]
    P0 = [[lines0[a][i] for a in range(n)] for i in range(n)]
    if exact:
        M0 = ratlin.mat_mul(P0, ratlin.inverse(P))
    else:
        M0 = (np.array(P0, dtype=float)
              @ np.linalg.inv(np.array(P, dtype=float))).tolist()

    g0 = G0.basis[0]
    w = ProjectiveMap(M0).apply_vector(G.basis[0])
    gc = _coords_in_basis([tuple(l) for l in lines0], g0)
    wc = _coords_in_basis([tuple(l) for l in lines0], w)
    if any(x == 0 for x in gc) or any(x == 0 for x in wc):
        raise GenericityError("degenerate line projections")
    # diagonal correction in the line basis: force each double ratio
    # -(g_{a+1}/h_{a+1})(h_a/g_a) to 1, h_a = d_a w_a
    d = [gc[0] / wc[0] if exact else gc[0] / wc[0]]
    d[0] = Fraction(1) if exact else 1.0
    for a in range(1, n):
        # d_a / d_{a+1} = -(gc_a / wc_a) (wc_{a+1} / gc_{a+1}), 1-indexed
        ratio = -(gc[a - 1] / wc[a - 1]) * (wc[a] / gc[a])
        d.append(d[-1] / ratio)
    D = [[(d[a] if a == b else (Fraction(0) if exact else 0.0))
          for b in range(n)] for a in range(n)]
    if exact:
        corr = ratlin.mat_mul(ratlin.mat_mul(P0, D), ratlin.inverse(P0))
        M = ProjectiveMap(ratlin.mat_mul(corr, M0))
    else:
        P0a = np.array(P0, dtype=float)
        corr = P0a @ np.array(D, dtype=float) @ np.linalg.inv(P0a)
        M = ProjectiveMap(corr @ np.array(M0, dtype=float))
    return M, M.apply(G)


def theta_map(t, E0, F0):
    """Unimodular map with eigenvalue exp(u_a) on the a-th line of the
    pair (E0,F0), where u_a - u_{a+1} = t_a and the u_a sum to zero."""
    n = E0.n
    t = [float(x) for x in t]
    if len(t) != n - 1:
        raise ValueError("need n-1 shear parameters")
    u = [0.0]
    for a in range(n - 1):
        u.append(u[-1] - t[a])
    mean = sum(u) / n
    u = [x - mean for x in u]
    lines = _flag_pair_lines(E0, F0)
    P = np.array([[float(l[i]) for l in lines] for i in range(n)])
    M = P @ np.diag(np.exp(u)) @ np.linalg.inv(P)
    return ProjectiveMap(M)


def elementary_slithering(Eshared, Fg, Fgp):
    """Unimodular map fixing Eshared, acting as the identity on each of
    its successive quotients, and carrying the line decomposition of
    (Eshared, Fgp) to that of (Eshared, Fg).  Sends the flag Fgp to Fg."""
    n = Eshared.n
    lines = _flag_pair_lines(Eshared, Fg)
    linesp = _flag_pair_lines(Eshared, Fgp)
    exact = Eshared.exact and Fg.exact and Fgp.exact
    ecols = [tuple(v) for v in Eshared.basis]
    scaledp = []
    for a in range(n):
        # scale the primed representative so both project to the same
        # vector of E^(a+1)/E^(a)
        ca = _coords_in_basis(ecols, lines[a])[a]
        cpa = _coords_in_basis(ecols, linesp[a])[a]
        if cpa == 0 or ca == 0:
            raise GenericityError("line representatives degenerate")
        s = ca / cpa
        scaledp.append(tuple(s * x for x in linesp[a]))
    P = [[lines[a][i] for a in range(n)] for i in range(n)]
    Pp = [[scaledp[a][i] for a in range(n)] for i in range(n)]
    if exact:
        return ProjectiveMap(ratlin.mat_mul(P, ratlin.inverse(Pp)))
    return ProjectiveMap(np.array(P, dtype=float)
                         @ np.linalg.inv(np.array(Pp, dtype=float)))


def conjugated_slithering(t, E0, F0, Fgp, pivot_first=True):
    """theta_map(t, E0, F0) composed with the elementary factor sending
    Fgp to the non-pivot flag of the pair, composed with the inverse
    theta map.

    Assembled in the line basis of (E0, F0), where the factor minus the
    identity is strictly triangular and the conjugation acts entrywise;
    the plain matrix sandwich would amplify roundoff by exp|t| through
    the structurally vanishing entries."""
    n = E0.n
    if pivot_first:
        S = elementary_slithering(E0, F0, Fgp)
    else:
        S = elementary_slithering(F0, E0, Fgp)
    u = [0.0]
    for a in range(n - 1):
        u.append(u[-1] - float(t[a]))
    lines = _flag_pair_lines(E0, F0)
    P = np.array([[float(l[i]) for l in lines] for i in range(n)])
    Pinv = np.linalg.inv(P)
    M = Pinv @ S.as_array() @ P
    M = M * (n / np.trace(M))
    N = M - np.eye(n)
    for i in range(n):
        for j in range(n):
            keep = (i < j) if pivot_first else (i > j)
            if keep:
                N[i, j] *= math.exp(u[i] - u[j])
            else:
                N[i, j] = 0.0
    return ProjectiveMap(P @ (np.eye(n) + N) @ Pinv)
