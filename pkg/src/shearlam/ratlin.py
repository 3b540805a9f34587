"""Small exact linear algebra toolkit over the rationals.

Matrices are plain lists of rows, entries ``fractions.Fraction``.  All
eliminations use deterministic pivoting (first nonzero entry scanning
rows top to bottom) so that reduced forms, ranks and nullspace bases are
reproducible between runs.
"""

from fractions import Fraction


def mat(rows):
    """Copy a nested iterable into a Fraction matrix."""
    return [[Fraction(x) for x in row] for row in rows]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(m, n):
    return [[Fraction(0)] * n for _ in range(m)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    assert len(a[0]) == k
    out = zeros(n, m)
    for i in range(n):
        ai = a[i]
        for t in range(k):
            x = ai[t]
            if x:
                bt = b[t]
                oi = out[i]
                for j in range(m):
                    oi[j] += x * bt[j]
    return out


def mat_vec(a, v):
    return [sum(ai[j] * v[j] for j in range(len(v))) for ai in a]


def transpose(a):
    return [list(col) for col in zip(*a)]


def det(a):
    """Determinant by fraction-free-ish Gaussian elimination."""
    n = len(a)
    m = [row[:] for row in a]
    sign = 1
    d = Fraction(1)
    for col in range(n):
        piv = None
        for r in range(col, n):
            if m[r][col]:
                piv = r
                break
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            sign = -sign
        d *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                for c in range(col, n):
                    m[r][c] -= f * m[col][c]
    return sign * d


def rref(a):
    """Reduced row echelon form; returns (matrix, pivot column list)."""
    m = [row[:] for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [m[i][j] - f * m[r][j] for j in range(cols)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a):
    if not a:
        return 0
    return len(rref(a)[1])


def nullspace(a):
    """Basis of the right nullspace, one vector per free column."""
    if not a:
        return []
    red, pivots = rref(a)
    cols = len(a[0])
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * cols
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a, b):
    """Solve a x = b for square nonsingular a."""
    n = len(a)
    m = [a[i][:] + [Fraction(b[i])] for i in range(n)]
    red, pivots = rref(m)
    if pivots != list(range(n)):
        raise ValueError("singular system")
    return [red[i][n] for i in range(n)]


def solve_general(a, b):
    """One solution of a x = b, or None when inconsistent."""
    rows = len(a)
    cols = len(a[0]) if rows else 0
    aug = [a[i][:] + [Fraction(b[i])] for i in range(rows)]
    red, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        x[pc] = red[r][cols]
    return x


def inverse(a):
    n = len(a)
    m = [a[i][:] + identity(n)[i] for i in range(n)]
    red, pivots = rref(m)
    if pivots != list(range(n)):
        raise ValueError("matrix not invertible")
    return [row[n:] for row in red]


def row_space_contains(a, v):
    """Whether v lies in the row span of a."""
    return rank(a + [list(v)]) == rank(a)


def sparse_rank(rows):
    """Rank of a sparse matrix given as dicts {column: value}.

    Destructive on copies; picks the shortest available row as pivot to
    keep fill-in low on incidence-type systems.
    """
    rows = [dict(r) for r in rows if r]
    rank = 0
    while rows:
        k = min(range(len(rows)), key=lambda i: len(rows[i]))
        piv = rows.pop(k)
        rank += 1
        col, val = next(iter(piv.items()))
        keep = []
        for r in rows:
            if col in r:
                f = r[col] / val
                for c, v in piv.items():
                    nv = r.get(c, 0) - f * v
                    if nv:
                        r[c] = nv
                    else:
                        r.pop(c, None)
            if r:
                keep.append(r)
        rows = keep
    return rank


def intersection_dim(a, b):
    """Dimension of (row span of a) âˆ© (row span of b)."""
    ra, rb = rank(a), rank(b)
    return ra + rb - rank(a + b)
