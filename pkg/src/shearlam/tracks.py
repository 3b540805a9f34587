"""Trivalent train tracks carrying finitely-many-leaved laminations.

A track is a ribbon graph whose vertices (switches) are trivalent with a
smoothing: one large end opposite two small ends.  Complementary regions
are recovered by face tracing; a valid carrying track of a maximal
lamination on a genus-g surface has 4(g-1) complementary hexagons, each
with exactly three spikes.

The standard fixtures are built from a pants decomposition: each curve
of the decomposition is a closed leaf of the lamination, and each pair
of pants contains three leaves spiraling onto its boundary curves.

Weight systems on the orientation cover (tangent cycles, in plain,
relative and twisted flavors) are handled here as exact linear algebra,
together with the intersection pairing and the cone of transverse
measures.
"""

import itertools
from fractions import Fraction

from . import ratlin


LARGE, SMALL_L, SMALL_R = "large", "small_left", "small_right"


class TrackError(ValueError):
    pass


class TrainTrack:
    """Ribbon graph with smoothed trivalent switches.

    branches are indexed 0..B-1; a branch end is the pair (branch, 0|1).
    Per switch we store the three ends in counterclockwise order plus
    which of them is the large end.
    """

    def __init__(self, num_branches, switch_ends, switch_large, labels=None):
        self.num_branches = num_branches
        self.switch_ends = [tuple(tuple(e) for e in ends)
                            for ends in switch_ends]
        self.switch_large = [tuple(l) for l in switch_large]
        self.num_switches = len(switch_ends)
        self.labels = dict(labels or {})
        self._attach = {}
        for sw, ends in enumerate(self.switch_ends):
            if len(ends) != 3:
                raise TrackError("switch %d is not trivalent" % sw)
            if self.switch_large[sw] not in ends:
                raise TrackError("switch %d: large end not among ends" % sw)
            for e in ends:
                if e in self._attach:
                    raise TrackError("end %r attached twice" % (e,))
                self._attach[e] = sw
        for b in range(num_branches):
            for e in (0, 1):
                if (b, e) not in self._attach:
                    raise TrackError("end (%d,%d) unattached" % (b, e))

    def switch_of(self, branch, end):
        return self._attach[(branch, end)]

    def smalls(self, sw):
        """The two small ends, in (left, right) order: left is the CCW
        successor of the large end."""
        ends = self.switch_ends[sw]
        i = ends.index(self.switch_large[sw])
        return ends[(i + 1) % 3], ends[(i + 2) % 3]

    def euler_characteristic(self):
        return self.num_switches - self.num_branches

    def faces(self):
        """Complementary regions by face tracing.

        Returns a list of faces; each face is a list of corner records
        (switch, in_end, out_end, is_cusp).  Directed edge (b, e) means
        travel along branch b arriving at end e.
        """
        directed = [(b, e) for b in range(self.num_branches) for e in (0, 1)]
        seen = set()
        out = []
        for start in directed:
            if start in seen:
                continue
            face = []
            cur = start
            while True:
                seen.add(cur)
                sw = self._attach[cur]
                ends = self.switch_ends[sw]
                i = ends.index(cur)
                out_end = ends[(i - 1) % 3]
                large = self.switch_large[sw]
                is_cusp = (cur != large and out_end != large)
                face.append((sw, cur, out_end, is_cusp))
                b, e = out_end
                cur = (b, 1 - e)
                if cur == start:
                    break
            out.append(face)
        return out

    def connected(self):
        adj = {i: set() for i in range(self.num_switches)}
        for b in range(self.num_branches):
            s0 = self.switch_of(b, 0)
            s1 = self.switch_of(b, 1)
            adj[s0].add(s1)
            adj[s1].add(s0)
        seen = {0}
        stack = [0]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        return len(seen) == self.num_switches


def validate_track(tt, genus=None):
    """Structural report: Euler characteristic, faces, cusp counts.

    A track passes when every complementary region is a hexagon (three
    cusps) and, if the genus is supplied, the counts match 4(g-1)
    regions and characteristic -6(g-1).
    """
    report = {"errors": [], "num_switches": tt.num_switches,
              "num_branches": tt.num_branches,
              "chi": tt.euler_characteristic()}
    if not tt.connected():
        report["errors"].append("track is disconnected")
    faces = tt.faces()
    cusp_counts = sorted(sum(1 for c in f if c[3]) for f in faces)
    report["num_faces"] = len(faces)
    report["cusp_counts"] = cusp_counts
    for k in cusp_counts:
        if k == 0:
            report["errors"].append("forbidden complementary disk (no cusp)")
        elif k in (1, 2):
            report["errors"].append(
                "forbidden complementary disk (%d-cusp region)" % k)
    if genus is not None:
        if report["chi"] != -6 * (genus - 1):
            report["errors"].append("Euler characteristic %d, expected %d" %
                                    (report["chi"], -6 * (genus - 1)))
        if len(faces) != 4 * (genus - 1):
            report["errors"].append("%d complementary regions, expected %d" %
                                    (len(faces), 4 * (genus - 1)))
        if any(k != 3 for k in cusp_counts):
            report["errors"].append("regions are not all hexagons")
    report["ok"] = not report["errors"]
    return report


# --------------------------------------------------------------- fixtures

def pants_graph(genus):
    """Trivalent multigraph of a pants decomposition: list of curves
    ((p, slot), (q, slot)).  Vertices are pants 0..2(g-1)-1."""
    if genus == 2:
        return [((0, k), (1, k)) for k in range(3)]
    if genus == 3:
        # complete graph on 4 pants
        edges = []
        slot = {p: 0 for p in range(4)}
        for p, q in itertools.combinations(range(4), 2):
            edges.append(((p, slot[p]), (q, slot[q])))
            slot[p] += 1
            slot[q] += 1
        return edges
    if genus == 4:
        # complete bipartite graph on 3+3 pants
        edges = []
        slot = {p: 0 for p in range(6)}
        for p in range(3):
            for q in range(3, 6):
                edges.append(((p, slot[p]), (q, slot[q])))
                slot[p] += 1
                slot[q] += 1
        return edges
    raise ValueError("fixtures are provided for genus 2, 3, 4 only")


def build_pants_track(genus):
    """Carrying track of the spiral lamination of a pants decomposition.

    Leaves: one closed leaf per curve, and per pants p three leaves
    leaf(p,j) running from boundary slot j to slot j+1 mod 3, spiraling
    in the positive direction of each curve at both ends.  Each curve
    carries four switches where spiraling leaves merge, alternating
    between its two adjacent pants sides.
    """
    curves = pants_graph(genus)
    num_pants = 2 * (genus - 1)

    branches = []
    labels = {}

    def new_branch(label):
        b = len(branches)
        branches.append(label)
        labels[b] = label
        return b

    leaf = {}
    for p in range(num_pants):
        for j in range(3):
            leaf[(p, j)] = new_branch(("leaf", p, j))
    arcs = {}
    for ci in range(len(curves)):
        for k in range(4):
            arcs[(ci, k)] = new_branch(("arc", ci, k))

    # leaf ends meeting each pants-side of each curve:
    # slot i of pants p receives end 0 of leaf(p,i) and end 1 of leaf(p,i-1)
    switch_ends = []
    switch_large = []
    switch_info = []

    for ci, ((p, i), (q, j)) in enumerate(curves):
        p_e0 = (leaf[(p, i)], 0)
        p_e1 = (leaf[(p, (i - 1) % 3)], 1)
        q_e0 = (leaf[(q, j)], 0)
        q_e1 = (leaf[(q, (j - 1) % 3)], 1)
        # attachment pattern around the circle: alternate pants sides
        posts = [(p_e0, "above"), (q_e0, "below"),
                 (p_e1, "above"), (q_e1, "below")]
        for k, (leaf_end, side) in enumerate(posts):
            fwd = (arcs[(ci, k)], 0)          # arc from switch k to k+1
            bwd = (arcs[(ci, (k - 1) % 4)], 1)
            # spiraling in the + direction: the forward arc is large,
            # the backward arc and the leaf end are the small ends
            if side == "above":
                ends = (fwd, leaf_end, bwd)
            else:
                ends = (fwd, bwd, leaf_end)
            switch_ends.append(ends)
            switch_large.append(fwd)
            switch_info.append({"curve": ci, "pos": k, "side": side,
                                "leaf_end": leaf_end})

    tt = TrainTrack(len(branches), switch_ends, switch_large, labels)
    tt.genus = genus
    tt.curves = curves
    tt.leaf_branch = leaf
    tt.arc_branch = arcs
    tt.switch_info = switch_info
    return tt


# ------------------------------------------------------- orientation cover

class OrientationCover:
    """Double cover on which all leaves are coherently oriented.

    Cover branches are pairs (branch, o) with o = +1/-1 an orientation
    of the branch relative to a fixed reference direction (end 0 -> end
    1).  Cover switches are pairs (switch, eps) where eps = +1 labels
    the lift whose flow enters through the large end.  The involution
    flips both signs.
    """

    def __init__(self, base):
        self.base = base
        self.branches = [(b, o) for b in range(base.num_branches)
                         for o in (1, -1)]
        self.switches = [(sw, e) for sw in range(base.num_switches)
                         for e in (1, -1)]
        self._check_connected()

    def _flow_class(self, branch, end, o):
        """Cover-switch sign at which the oriented branch (branch, o)
        attaches by its given end.

        With o=+1 the branch is traversed from end 0 to end 1, so it
        enters the switch at end 1 and leaves at end 0.  At an eps=+1
        switch the flow enters through the large end and exits through
        the small ends.
        """
        entering = (end == 1) if o == 1 else (end == 0)
        sw = self.base.switch_of(branch, end)
        is_large = (branch, end) == self.base.switch_large[sw]
        eps = 1 if (entering == is_large) else -1
        return (sw, eps)

    def cover_switch_of(self, cov_branch, end):
        b, o = cov_branch
        return self._flow_class(b, end, o)

    def involution_branch(self, cov_branch):
        b, o = cov_branch
        return (b, -o)

    def involution_switch(self, cov_switch):
        sw, e = cov_switch
        return (sw, -e)

    def switch_branches(self, cov_switch):
        """(large, small_left, small_right) cover branches at a cover
        switch, each as a cover branch (the one attaching there by the
        corresponding base end)."""
        sw, _ = cov_switch
        out = []
        for be in (self.base.switch_large[sw],) + self.base.smalls(sw):
            b, end = be
            hit = [(b, o) for o in (1, -1)
                   if self._flow_class(b, end, o) == cov_switch]
            assert len(hit) == 1
            out.append(hit[0])
        return tuple(out)

    def slit_sign(self, cov_switch):
        """+1 when the two small branches are oriented into the switch,
        converging toward the spike; -1 on the other lift."""
        _, eps = cov_switch
        return -eps

    def slits(self):
        return list(self.switches)

    def _check_connected(self):
        adj = {s: set() for s in self.switches}
        for cb in self.branches:
            s0 = self.cover_switch_of(cb, 0)
            s1 = self.cover_switch_of(cb, 1)
            adj[s0].add(s1)
            adj[s1].add(s0)
        start = self.switches[0]
        seen = {start}
        stack = [start]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != len(self.switches):
            raise TrackError("orientation cover is disconnected: "
                             "the lamination is orientable")


def build_orientation_cover(tt):
    return OrientationCover(tt)


# ----------------------------------------------------------- weight systems

class TangentCycle:
    """Branch weight system on the cover satisfying all switch equations."""

    def __init__(self, cover, weights, check=True):
        self.cover = cover
        self.weights = {cb: weights.get(cb, 0) for cb in cover.branches}
        if check:
            bad = [cs for cs, d in switch_defects(cover, self.weights).items()
            if d != 0]
            if bad:
                raise TrackError("switch equations violated at %r" % (bad[:3],))

    def __call__(self, cov_branch):
        return self.weights[cov_branch]


class RelativeTangentCycle:
    """Branch weight system with slit defects allowed; the boundary
    value at each slit is the switch defect times the slit sign."""

    def __init__(self, cover, weights):
        self.cover = cover
        self.weights = {cb: weights.get(cb, 0) for cb in cover.branches}

    def __call__(self, cov_branch):
        return self.weights[cov_branch]


class TwistedRelativeCycle:
    """Vector-valued relative cycle, equivariant under the orientation
    involution composed with coordinate reversal."""

    def __init__(self, cover, n, weights, check=True, tol=0):
        self.cover = cover
        self.n = n
        self.weights = {cb: tuple(weights.get(cb, (0,) * (n - 1)))
                        for cb in cover.branches}
        for cb in cover.branches:
            if len(self.weights[cb]) != n - 1:
                raise TrackError("weight vectors must have length n-1")
        if check:
            for cb in cover.branches:
                v = self.weights[cb]
                w = self.weights[cover.involution_branch(cb)]
                if any(abs(x - y) > tol for x, y in zip(v, w[::-1])):
                    raise TrackError("twisting equivariance violated at %r"
                                     % (cb,))

    def __call__(self, cov_branch):
        return self.weights[cov_branch]

    def component(self, a):
        """The a-th coordinate (1-indexed) as a relative cycle."""
        return RelativeTangentCycle(
            self.cover, {cb: v[a - 1] for cb, v in self.weights.items()})


def switch_defects(cover, weights):
    """Large-end weight minus the sum of the small-end weights, per
    cover switch."""
    out = {}
    for cs in cover.switches:
        large, s1, s2 = cover.switch_branches(cs)
        out[cs] = weights[large] - weights[s1] - weights[s2]
    return out


def boundary(cycle):
    """Per-slit boundary values of a relative cycle.

    Quasi-additivity reads alpha(large) = alpha(s1) + alpha(s2) -
    eps(s) * boundary(s), so the boundary value is the slit sign times
    the switch defect.
    """
    cover = cycle.cover
    if isinstance(cycle, TwistedRelativeCycle):
        out = {}
        for a in range(1, cycle.n):
            comp = boundary(cycle.component(a))
            for cs, v in comp.items():
                out.setdefault(cs, [0] * (cycle.n - 1))[a - 1] = v
        return {cs: tuple(v) for cs, v in out.items()}
    defects = switch_defects(cover, cycle.weights)
    return {cs: cover.slit_sign(cs) * defects[cs] for cs in cover.switches}


def promote(alpha):
    """View a TangentCycle as a RelativeTangentCycle (boundary zero)."""
    return RelativeTangentCycle(alpha.cover, dict(alpha.weights))


def intersection_number(alpha, sigma):
    """Algebraic intersection pairing of a tangent cycle with a relative
    cycle, evaluated on the cover: half-sum over cover switches of the
    cross products of the two small-end weights, with ties oriented
    from left to right."""
    cover = alpha.cover
    if sigma.cover is not cover and sigma.cover.base is not cover.base:
        raise TrackError("cycles live on different covers")
    if isinstance(sigma, TwistedRelativeCycle):
        return tuple(
            intersection_number(alpha, sigma.component(a))
            for a in range(1, sigma.n))
    total = 0
    for cs in cover.switches:
        _, s1, s2 = cover.switch_branches(cs)
        total += alpha(s1) * sigma(s2) - alpha(s2) * sigma(s1)
    return total / 2 if isinstance(total, float) else Fraction(total, 2)


# ------------------------------------------------------- dimension counts

def _branch_index(cover):
    return {cb: i for i, cb in enumerate(cover.branches)}


def _switch_rows(cover, idx, ncomp=1):
    """Switch-equation rows; with ncomp components the unknown layout is
    branch-major (branch index * ncomp + component)."""
    rows = []
    nb = len(cover.branches)
    for cs in cover.switches:
        large, s1, s2 = cover.switch_branches(cs)
        for c in range(ncomp):
            row = [Fraction(0)] * (nb * ncomp)
            row[idx[large] * ncomp + c] += 1
            row[idx[s1] * ncomp + c] -= 1
            row[idx[s2] * ncomp + c] -= 1
            rows.append(row)
    return rows


def _twist_rows(cover, idx, ncomp):
    """Equivariance rows: weight(iota k) = reversal(weight(k))."""
    rows = []
    nb = len(cover.branches)
    done = set()
    for cb in cover.branches:
        icb = cover.involution_branch(cb)
        if (icb, cb) in done:
            continue
        done.add((cb, icb))
        for c in range(ncomp):
            row = [Fraction(0)] * (nb * ncomp)
            row[idx[icb] * ncomp + c] += 1
            row[idx[cb] * ncomp + (ncomp - 1 - c)] -= 1
            rows.append(row)
    return rows


def cycle_space_dimension(cover, kind, n=2):
    """Dimension of the chosen space of (twisted/relative) cycles.

    For the twisted kinds the equivariance constraint is eliminated by
    substitution (one representative branch per involution orbit), so
    only switch equations remain; ranks are computed by sparse exact
    elimination.
    """
    idx = _branch_index(cover)
    nb = len(cover.branches)
    if kind == "relative":
        return nb
    if kind == "plain":
        rows = []
        for cs in cover.switches:
            large, s1, s2 = cover.switch_branches(cs)
            row = {}
            for cb, coef in ((large, 1), (s1, -1), (s2, -1)):
                row[idx[cb]] = row.get(idx[cb], 0) + coef
            rows.append({c: Fraction(v) for c, v in row.items() if v})
        return nb - ratlin.sparse_rank(rows)
    if kind not in ("twisted-plain", "twisted-relative"):
        raise ValueError("unknown cycle-space kind %r" % (kind,))
    ncomp = n - 1
    # representative (b, +1) per involution orbit; (b, -1) carries the
    # reversed vector of the representative
    rep_idx = {}
    for b in range(cover.base.num_branches):
        rep_idx[(b, 1)] = len(rep_idx)

    def unknown(cb, c):
        b, o = cb
        if o == 1:
            return rep_idx[(b, 1)] * ncomp + c
        return rep_idx[(b, 1)] * ncomp + (ncomp - 1 - c)

    total = len(rep_idx) * ncomp
    if kind == "twisted-relative":
        return total
    rows = []
    for cs in cover.switches:
        large, s1, s2 = cover.switch_branches(cs)
        for c in range(ncomp):
            row = {}
            for cb, coef in ((large, 1), (s1, -1), (s2, -1)):
                u = unknown(cb, c)
                row[u] = row.get(u, 0) + coef
            row = {u: Fraction(v) for u, v in row.items() if v}
            if row:
                rows.append(row)
    return total - ratlin.sparse_rank(rows)


# ------------------------------------------------------------ measure cone

def _dd_cone(inequalities, dim):
    """Extreme rays of {y : A y >= 0} by the double description method.

    Maintains (lineality basis, rays); exact arithmetic throughout.
    Returns rays only; assumes the final cone is pointed.
    """
    lineality = [[Fraction(int(i == j)) for j in range(dim)]
                 for i in range(dim)]
    rays = []       # list of (vector, frozenset of active constraint ids)
    processed = []

    def dot(c, v):
        return sum(Fraction(c[i]) * v[i] for i in range(dim))

    for cid, c in enumerate(inequalities):
        piv = None
        for k, l in enumerate(lineality):
            if dot(c, l) != 0:
                piv = k
                break
        if piv is not None:
            l0 = lineality.pop(piv)
            d0 = dot(c, l0)
            if d0 < 0:
                l0 = [-x for x in l0]
                d0 = -d0
            lineality = [[l[i] - dot(c, l) / d0 * l0[i] for i in range(dim)]
                         for l in lineality]
            new_rays = []
            for v, act in rays:
                dv = dot(c, v)
                w = [v[i] - dv / d0 * l0[i] for i in range(dim)]
                new_rays.append((w, act | {cid}))
            new_rays.append((l0, frozenset()))
            rays = new_rays
        else:
            plus, zero, minus = [], [], []
            for v, act in rays:
                d = dot(c, v)
                if d > 0:
                    plus.append((v, act))
                elif d == 0:
                    zero.append((v, act | {cid}))
                else:
                    minus.append((v, act))
            new_rays = plus + zero
            for (vp, ap) in plus:
                for (vm, am) in minus:
                    common = ap & am
                    # adjacency: no third ray is active on all common
                    # constraints of the pair
                    adjacent = True
                    for (v3, a3) in rays:
                        if v3 is vp or v3 is vm:
                            continue
                        if common <= a3:
                            adjacent = False
                            break
                    if not adjacent:
                        continue
                    dp = dot(c, vp)
                    dm = dot(c, vm)
                    w = [dp * vm[i] - dm * vp[i] for i in range(dim)]
                    new_rays.append((w, (ap & am) | {cid}))
            rays = new_rays
        processed.append(cid)
    return [v for v, _ in rays]


def measure_cone_vertices(cover):
    """Extreme rays of the cone of nonnegative solutions of the switch
    equations, normalized so the branch weights sum to 1."""
    idx = _branch_index(cover)
    nb = len(cover.branches)
    rows = _switch_rows(cover, idx)
    null = ratlin.nullspace(rows)
    d = len(null)
    # x = N y with columns of N the nullspace basis; require x >= 0
    inequalities = []
    for i in range(nb):
        inequalities.append([null[k][i] for k in range(d)])
    rays = _dd_cone(inequalities, d)
    out = []
    for y in rays:
        x = [sum(null[k][i] * y[k] for k in range(d)) for i in range(nb)]
        s = sum(x)
        if s == 0:
            continue
        x = [v / s for v in x]
        if any(v < 0 for v in x):
            continue
        weights = {cb: x[idx[cb]] for cb in cover.branches}
        out.append(TangentCycle(cover, weights))
    out.sort(key=lambda t: tuple(t.weights[cb] for cb in cover.branches))
    return out


# -------------------------------------------------------------- pushforward

def pushforward(incidence, sigma):
    """Linear action of a track self-carrying on (relative) cycles.

    incidence maps each cover branch to a dict {cover branch: integer
    coefficient}; identity branches may be omitted.  The action must
    commute with the orientation involution (checked for twisted input).
    """
    cover = sigma.cover

    def image_weight(cb):
        row = incidence.get(cb, {cb: 1})
        if isinstance(sigma, TwistedRelativeCycle):
            acc = [0] * (sigma.n - 1)
            for src, coef in row.items():
                for c in range(sigma.n - 1):
                    acc[c] += coef * sigma(src)[c]
            return tuple(acc)
        return sum(coef * sigma(src) for src, coef in row.items())

    new = {cb: image_weight(cb) for cb in cover.branches}
    if isinstance(sigma, TwistedRelativeCycle):
        return TwistedRelativeCycle(cover, sigma.n, new)
    if isinstance(sigma, TangentCycle):
        return TangentCycle(cover, new)
    return RelativeTangentCycle(cover, new)
