"""Shear vectors and truncated slithering along separating chains.

The shear vector between two plaques is the log of the double ratios
built from their vertex flags, with the far flag pulled back by the
slithering map: the ordered product of the elementary unipotent factors
of the plaques in between.  Chains crossing a curve lift have two
infinite spiral tails there; the product is truncated at divergence
radius r_max and the dropped tail is estimated from the geometric decay
of the factor norms.

The same chains drive the opposite direction: given the triangle data
and a twisted relative cycle of branch weights, the shear between the
base plaque and any chain plaque accumulates branch weights crossing by
crossing, with a theta correction at the spike of every intermediate
plaque (theta as-is when the spike points left of the transversal,
reversed when it points right).  A crossing of a curve lift contributes
the weight of a single circle branch: the transversal traverses that
branch rectangle once, and the spiral strands it meets near the curve
all run inside the rectangle, so the tails need no extra corrections.
"""

import math

import numpy as np

from . import flags, tracks


class NonconvergenceError(RuntimeError):
    """Truncated product whose factors do not visibly decay."""


# ------------------------------------------------------------ triangle data

def _rot_point(point, k):
    a, b, c = point
    for _ in range(k % 3):
        a, b, c = c, a, b
    return (a, b, c)


class TriangleData:
    """Log triple-ratio invariants of the complementary triangles.

    Values are stored per face key (pants, letter) for the vertex order
    listed by the face's corner cycle (corners in the boundary
    orientation of the face tables, starting at the smallest slot);
    starting the vertex order at another corner permutes the indices of
    each invariant cyclically.
    """

    def __init__(self, unrolling, n, data=None):
        self.u = unrolling
        self.n = n
        self.points = list(flags.interior_points(n))
        self.data = {}
        for key in unrolling.face_table:
            vals = dict(data[key]) if data is not None else \
                {pt: 0.0 for pt in self.points}
            assert set(vals) == set(self.points)
            self.data[key] = vals

    @staticmethod
    def corner_cycle(info):
        """Corner slots in the face's boundary order, from the smallest."""
        sc = info["side_cycle"]
        slots = []
        for i in range(3):
            pair = {sc[i], sc[(i + 1) % 3]}
            for v in range(3):
                if {v % 3, (v - 1) % 3} == pair:
                    slots.append(v)
        k = slots.index(min(slots))
        return tuple(slots[k:] + slots[:k])

    def value(self, face_key, start_slot, point):
        """Invariant at an interior point, for the vertex order starting
        at the corner with the given slot."""
        cyc = self.corner_cycle(self.u.face_table[face_key])
        k = cyc.index(start_slot)
        return self.data[face_key][_rot_point(point, k)]

    def ratios_from(self, face_key, start_slot):
        """Multiplicative triple ratios for the vertex order starting at
        the given corner, as accepted by the flag realization."""
        return {pt: math.exp(self.value(face_key, start_slot, pt))
                for pt in self.points}

    def value_ordered(self, face_key, order, point):
        """Invariant at an interior point for an arbitrary vertex order.

        Matched cyclic permutations of flags and indices preserve the
        triple ratio; odd permutations invert it."""
        cyc = self.corner_cycle(self.u.face_table[face_key])
        q = [None] * 3
        for i in range(3):
            q[cyc.index(order[i])] = point[i]
        even = tuple(order) in (cyc, cyc[1:] + cyc[:1], cyc[2:] + cyc[:2])
        return (1 if even else -1) * self.data[face_key][tuple(q)]

    def ratios_ordered(self, face_key, order):
        return {pt: math.exp(self.value_ordered(face_key, order, pt))
                for pt in self.points}

    def theta(self, face_key, corner_slot):
        """Vector of spike invariants theta_a at one corner."""
        n = self.n
        out = []
        for a in range(1, n):
            s = 0.0
            for (aa, b, c) in self.points:
                if aa == a and b + c == n - a:
                    s += self.value(face_key, corner_slot, (aa, b, c))
            out.append(s)
        return tuple(out)

    def max_abs(self):
        return max((abs(v) for vals in self.data.values()
                    for v in vals.values()), default=0.0)


def _face_representative(u, key):
    """Some plaque of the requested face type, reachable from the base."""
    pants, letter = key
    for region in _regions_covering_pants(u):
        if region.pants == pants:
            plq = region.plaque(())
            if plq.ttype != letter:
                plq = u.cross(plq, 0)
            return plq
    raise KeyError("no region for pants %r" % (pants,))


def _regions_covering_pants(u):
    """One region per pair of pants, opened from the base region by
    crossing curve lifts (cached on the unrolling)."""
    got = getattr(u, "_pants_region_cache", None)
    if got is not None:
        return got
    seen = {u.root.pants}
    regions = [u.root]
    frontier = [u.root]
    want = 2 * (u.genus - 1)
    while len(seen) < want and frontier:
        region = frontier.pop()
        base = region.plaque(())
        for slot in range(3):
            cuff = u.cuff_lift(base, slot)
            far_region = u.far_fan(cuff, cuff.side_of(region))[0]
            if far_region.pants not in seen:
                seen.add(far_region.pants)
                regions.append(far_region)
                frontier.append(far_region)
    assert len(seen) == want
    u._pants_region_cache = regions
    return regions


def measure_triangle_data(fa, n):
    """Triangle data read off from a flag assignment: log triple ratios
    of one representative plaque per face."""
    u = fa.u
    data = {}
    for key, info in u.face_table.items():
        plq = _face_representative(u, key)
        cyc = TriangleData.corner_cycle(info)
        E, F, G = [fa.flag_at(plq, v) for v in cyc]
        vals = {}
        for pt in flags.interior_points(n):
            r = float(flags.triple_ratio(E, F, G, *pt))
            if not r > 0:
                raise flags.GenericityError(
                    "nonpositive triple ratio at %r %r" % (key, pt))
            vals[pt] = math.log(r)
        data[key] = vals
    return TriangleData(u, n, data)


# ----------------------------------------------------------- theta at slits

def theta_table(tau):
    """Spike invariant vectors indexed by switch (slits of the track are
    in bijection with the switches; each switch carries exactly one face
    corner)."""
    out = {}
    for key, info in tau.u.face_table.items():
        for slot, cr in info["corner"].items():
            out[cr["switch"]] = tau.theta(key, slot)
    return out


def theta_from_tau(tau, s):
    """Spike invariant vector at the slit of switch s."""
    return theta_table(tau)[s]


# ----------------------------------------------------------- flag carriers

class FlagAssignment:
    """Flags at the ideal vertices, keyed by the curve lift whose
    forward endpoint is the vertex.  The resolver is called lazily and
    its values are cached."""

    def __init__(self, unrolling, n, resolver):
        self.u = unrolling
        self.n = n
        self._resolver = resolver
        self._cache = {}

    def flag(self, cuff):
        got = self._cache.get(id(cuff))
        if got is None:
            got = self._resolver(cuff)
            self._cache[id(cuff)] = got
        return got

    def flag_at(self, plaque, slot):
        return self.flag(self.u.cuff_lift(plaque, slot))

    def map_flags(self, fn, n):
        """Pointwise transformed assignment (e.g. a symmetric power)."""
        return FlagAssignment(self.u, n, lambda cuff: fn(self.flag(cuff)))


# ------------------------------------------------- shear from branch weights

def _shared_label(a, b):
    """Label of the side shared by two adjacent plaques of one region."""
    wa, wb = a.word, b.word
    if len(wa) < len(wb):
        wa, wb = wb, wa
    assert wa[:-1] == wb and a.region is b.region
    return wa[-1]


def _vertex_side(u, plaque, s_in, s_out):
    """Whether the shared vertex of the entry and exit sides lies left
    or right of the oriented crossing."""
    cycle = u.face_table[(plaque.pants, plaque.ttype)]["side_cycle"]
    idx = cycle.index(s_in)
    return "right" if cycle[(idx + 1) % 3] == s_out else "left"


def _leaf_weight(u, cycle, plaque, side_label):
    """Cycle weight of the leaf crossed when leaving a plaque, read on
    the lift oriented toward the side's left endpoint."""
    sl = u.side_leaf(plaque, side_label)
    o = 1 if sl["end_at"][u.left_corner(plaque, side_label)] == 1 else -1
    return cycle((sl["branch"], o))


def _corr(theta_by_switch, switch, side):
    th = theta_by_switch[switch]
    return th if side == "left" else th[::-1]


def _fan_neighbor_letters(u, plaque, slot):
    """(shallow, deep): side labels toward the fan neighbors of larger
    and smaller coordinate."""
    cuff = u.cuff_lift(plaque, slot)
    region, w0, slot0, t0 = cuff.sides[cuff.side_of(plaque.region)]
    t = u.fan_t(plaque, slot)
    up = u.fan_plaque_at(region, w0, slot0, t0, t + 2)
    down = u.fan_plaque_at(region, w0, slot0, t0, t - 2)
    return _shared_label(plaque, up), _shared_label(plaque, down)


class SigmaAccumulator:
    """Shear vectors sigma(src, T) along a separating chain, accumulated
    from the branch weights of a twisted relative cycle and the spike
    invariants of the triangle data."""

    def __init__(self, unrolling, cycle, theta_by_switch):
        self.u = unrolling
        self.cycle = cycle
        self.theta = theta_by_switch
        self.n1 = cycle.n - 1

    def run(self, src, dst, chain):
        """(sigma_at, sigma_total): one vector per non-gap chain record,
        and the shear vector between the endpoints."""
        sig = (0.0,) * self.n1
        out = []
        cur = src
        pending = None  # spike correction of the plaque being left
        i = 0
        while i < len(chain):
            rec = chain[i]
            if rec.get("gap"):
                if i + 1 >= len(chain):
                    sig, cur = self._cross_gap(sig, cur, pending, rec, dst)
                    return out, sig
                target = chain[i + 1]["plaque"]
                sig, cur = self._cross_gap(sig, cur, pending, rec, target)
                out.append(sig)
                r1 = chain[i + 1]
                pending = _corr(self.theta, r1["switch"], r1["side"])
                i += 2
                continue
            plq = rec["plaque"]
            sig = self._step(sig, cur, plq, pending)
            out.append(sig)
            pending = _corr(self.theta, rec["switch"], rec["side"])
            cur = plq
            i += 1
        sig = self._step(sig, cur, dst, pending)
        return out, sig

    def _step(self, sig, cur, nxt, pending):
        w = _leaf_weight(self.u, self.cycle, cur, _shared_label(cur, nxt))
        if pending is None:
            return tuple(x + y for x, y in zip(sig, w))
        return tuple(x + y - c for x, y, c in zip(sig, w, pending))

    def _cross_gap(self, sig, cur, pending, gap, target):
        u = self.u
        region_n, w0n, slot_n, t0n = gap["near_fan"]
        region_f, w0f, slot_f, t0f = gap["far_fan"]
        assert cur.region is region_n and target.region is region_f
        assert u.fan_min_word(cur, slot_n) == w0n
        assert u.fan_min_word(target, slot_f) == w0f
        t_cur = u.fan_t(cur, slot_n)
        t_tgt = u.fan_t(target, slot_f)
        t_star = min(t_cur, t_tgt - 1)

        # slide down the near fan until radially aligned with a far
        # plaque at or below the target
        t = t_cur
        while t > t_star:
            nxt = u.fan_plaque_at(region_n, w0n, slot_n, t0n, t - 2)
            sig = self._step(sig, cur, nxt, pending)
            t -= 2
            cur = nxt
            sh, dp = _fan_neighbor_letters(u, cur, slot_n)
            pending = _corr(self.theta,
                            u.corner_info(cur, slot_n)["switch"],
                            _vertex_side(u, cur, sh, dp))

        # one crossing of the curve lift, through a single circle branch
        # rectangle; the strands of both spiral tails run inside it
        sh, dp = _fan_neighbor_letters(u, cur, slot_n)
        o = 1 if _vertex_side(u, cur, sh, dp) == "left" else -1
        arc_b = u.track.arc_branch[(gap["cuff"].curve, (t_star + 1) % 4)]
        w = self.cycle((arc_b, o))
        if pending is None:
            sig = tuple(x + y for x, y in zip(sig, w))
        else:
            sig = tuple(x + y - c for x, y, c in zip(sig, w, pending))
        cur = u.fan_plaque_at(region_f, w0f, slot_f, t0f, t_star + 1)

        # slide up the far fan to the target
        t = t_star + 1
        while t < t_tgt:
            sh, dp = _fan_neighbor_letters(u, cur, slot_f)
            pending = _corr(self.theta,
                            u.corner_info(cur, slot_f)["switch"],
                            _vertex_side(u, cur, dp, sh))
            nxt = u.fan_plaque_at(region_f, w0f, slot_f, t0f, t + 2)
            sig = self._step(sig, cur, nxt, pending)
            t += 2
            cur = nxt
        assert cur is target
        return sig, cur


# --------------------------------------------------- slithering from flags

def _other_corner(u, side, slot):
    for v in range(3):
        if side in u.corner_pair(v) and v != slot:
            return v
    raise ValueError("side %r not at corner %r" % (side, slot))


def _opposite_corner(u, side):
    for v in range(3):
        if side not in u.corner_pair(v):
            return v
    raise ValueError("bad side label %r" % (side,))


def _record_factor(u, fa, rec):
    pivot = fa.flag_at(rec["plaque"], rec["slot"])
    Fg = fa.flag_at(rec["plaque"], _other_corner(u, rec["s_in"], rec["slot"]))
    Fgp = fa.flag_at(rec["plaque"],
                     _other_corner(u, rec["s_out"], rec["slot"]))
    return flags.elementary_slithering(pivot, Fg, Fgp)


def slithering(fa, chain, full=False):
    """Ordered product of the elementary factors of a chain, nearest
    plaque leftmost, with a tail estimate for the dropped spiral
    factors.

    Without truncation (no curve lift crossed) the tail estimate is 0.
    With truncation, factor norms are grouped by divergence radius and
    the dropped tail is bounded by extrapolating their geometric decay;
    if no decay is visible the product is reported as nonconvergent."""
    u = fa.u
    total = np.eye(fa.n)
    truncated = False
    by_r = {}
    for rec in chain:
        if rec.get("gap"):
            truncated = True
            continue
        try:
            M = _record_factor(u, fa, rec).as_array()
        except (flags.GenericityError, ValueError):
            # the two off-pivot vertices have converged below machine
            # resolution, so the factor is the identity to within the
            # same resolution
            M = np.eye(fa.n)
        total = total @ M
        dn = float(np.linalg.norm(M - np.eye(fa.n)))
        by_r[rec["r"]] = max(by_r.get(rec["r"], 0.0), dn)
    out = flags.ProjectiveMap(total)
    if full:
        return out, _tail_estimate(by_r, truncated), by_r
    return out, _tail_estimate(by_r, truncated)


def _tail_estimate(by_r, truncated):
    if not truncated:
        return 0.0
    radii = sorted(by_r)
    if not radii or radii[-1] < 2:
        raise NonconvergenceError(
            "cannot certify decay of the dropped factors: no factors "
            "beyond divergence radius 1 (increase r_max)")
    r_lo, r_hi = radii[0], radii[-1]
    m_lo, m_hi = by_r[r_lo], by_r[r_hi]
    if m_hi == 0.0:
        return 0.0
    ratio = (m_hi / m_lo) ** (1.0 / (r_hi - r_lo)) if m_lo > 0 else 1.0
    if not ratio < 1.0:
        raise NonconvergenceError(
            "factor norms do not decay with the divergence radius "
            "(ratio %.3g)" % ratio)
    return m_hi * ratio / (1.0 - ratio)


class ShearRecord:
    """Shear vector between two plaques with its truncation estimate
    and the per-component conditioning margins of the double-ratio
    evaluation."""

    def __init__(self, sigma, tail_estimate, chain, margins=None):
        self.sigma = sigma
        self.tail_estimate = tail_estimate
        self.chain = chain
        self.margins = margins if margins is not None \
            else (1.0,) * len(sigma)

    def __repr__(self):
        return "ShearRecord(%r, tail=%.3g)" % (self.sigma,
                                               self.tail_estimate)


def shear_vector(fa, T, Tp, r_max):
    """Shear vector sigma(T, T') computed from the vertex flags.

    The double ratios are taken along the side of T closest to T',
    oriented to the left as seen from T, with the far vertex flag of T'
    pulled back by the truncated slithering product."""
    u = fa.u
    chain = u.plaque_chain(T, Tp, r_max)
    Sigma, tail = slithering(fa, chain)

    g = _closest_side(u, T, chain, Tp)
    gp = _closest_side(u, Tp, list(reversed(chain)), T)
    x_slot = u.left_corner(T, g)
    z_slot = _opposite_corner(u, g)
    y_slot = [v for v in range(3) if v not in (x_slot, z_slot)][0]
    E = fa.flag_at(T, x_slot)
    F = fa.flag_at(T, y_slot)
    G = fa.flag_at(T, z_slot)
    Gp = Sigma.apply(fa.flag_at(Tp, _opposite_corner(u, gp)))
    ratios, margins = flags.double_ratio_vector(E, F, G, Gp,
                                                with_margin=True)
    sig = []
    for a, d in enumerate(ratios, 1):
        if not d > 0:
            raise flags.GenericityError(
                "nonpositive double ratio in shear vector (a=%d): %r"
                % (a, d))
        sig.append(math.log(d))
    return ShearRecord(tuple(sig), tail, chain, margins)


def _closest_side(u, T, chain, Tp):
    """Label of the side of T crossed first by the transversal to T'."""
    for rec in chain:
        if rec.get("gap"):
            # T is the last plaque before the crossing: it is exited
            # through its deep fan leaf
            slot = rec["near_fan"][2] if rec["near_fan"][0] is T.region \
                else rec["far_fan"][2]
            return _fan_neighbor_letters(u, T, slot)[1]
        return _shared_label(T, rec["plaque"])
    return _shared_label(T, Tp)


# ------------------------------------------------ assembling the full cycle

def assemble_shearing_cycle(fa, r_max):
    """Twisted relative cycle of the shear vectors across the branches.

    Leaf branches are measured on an adjacent plaque pair sharing a lift
    of the leaf; circle branches on a radially aligned pair across a
    lift of the curve at the matching sector.  Returns
    (cycle, tail_estimate): the worst truncation estimate among the
    circle measurements."""
    u = fa.u
    tt = u.track
    weights = {}
    worst_tail = 0.0

    def settle(b, sites):
        # oriented measurements (rec, o); each shear component keeps
        # the value from the site with the widest margin for it
        sig = mar = err = None
        tail = 0.0
        for measure in sites:
            try:
                rec, o = measure()
            except (flags.GenericityError, NonconvergenceError) as e:
                err = e
                continue
            s = rec.sigma if o == 1 else rec.sigma[::-1]
            m = rec.margins if o == 1 else rec.margins[::-1]
            if sig is None:
                sig, mar = list(s), list(m)
            else:
                for i in range(len(sig)):
                    if m[i] > mar[i]:
                        sig[i], mar[i] = s[i], m[i]
            tail = max(tail, rec.tail_estimate)
        if sig is None:
            raise err
        weights[(b, 1)] = tuple(sig)
        weights[(b, -1)] = tuple(reversed(sig))
        return tail

    for b in tt.leaf_branch.values():
        def leaf_measure(plq, s):
            def run():
                rec = shear_vector(fa, plq, u.cross(plq, s), r_max)
                sl = u.side_leaf(plq, s)
                o = 1 if sl["end_at"][u.left_corner(plq, s)] == 1 else -1
                return rec, o
            return run
        sites = [leaf_measure(plq, s)
                 for plq, s in _leaf_site_candidates(u, b)]
        worst_tail = max(worst_tail, settle(b, sites))

    for (ci, k), b in tt.arc_branch.items():
        def arc_measure(plq, slot, side_v):
            def run():
                far, _ = u.jump(plq, slot, 0)
                rec = shear_vector(fa, plq, far, r_max)
                return rec, 1 if side_v == "left" else -1
            return run
        sites = [arc_measure(plq, slot, side_v)
                 for plq, slot, side_v in _radial_site_candidates(u, ci, k)]
        worst_tail = max(worst_tail, settle(b, sites))

    cyc = tracks.TwistedRelativeCycle(u.cover, fa.n, weights, check=False)
    return cyc, worst_tail


def _plaque_with_leaf(u, branch):
    for plq, _ in _leaf_site_candidates(u, branch):
        return plq
    raise KeyError("no plaque carries leaf %r" % (branch,))


def _leaf_site_candidates(u, branch):
    """Plaque/side pairs across lifts of a leaf near the region bases.

    Every plaque of a region over the leaf's pants crosses some lift of
    it; nearby plaques see differently separated vertex flags, so the
    caller can keep the best-conditioned components.  Only the base and
    its immediate neighbours qualify: deeper plaques carry developed
    flags whose own error can dominate the conditioning margin."""
    _, p, _ = u.track.labels[branch]
    words = [()] + [(a,) for a in range(3)]
    for region in _regions_covering_pants(u):
        if region.pants != p:
            continue
        for w in words:
            plq = region.plaque(w)
            tbl = u.face_table[(plq.pants, plq.ttype)]["side_leaf"]
            for s, sl in tbl.items():
                if sl["branch"] == branch:
                    yield plq, s


def _side_of_leaf(u, plaque, branch):
    tbl = u.face_table[(plaque.pants, plaque.ttype)]["side_leaf"]
    for s, sl in tbl.items():
        if sl["branch"] == branch:
            return s
    raise KeyError("leaf %r not on this face" % (branch,))


def _radial_site_candidates(u, ci, k):
    """Fan plaques whose canonical jump crosses the circle of curve ci
    inside the branch rectangle at sector k, with the left/right side
    of the fan vertex as seen from the crossing.

    The sector repeats every other fan member and shows up on every
    lift of the curve, so the same branch can be measured at many
    sites; they differ only in how well separated the vertex flags
    are, and the caller keeps the best-conditioned measurement."""
    seen = set()
    for region in _regions_covering_pants(u):
        base = region.plaque(())
        for slot in range(3):
            if u.corner_info(base, slot)["curve"] != ci:
                continue
            cuff = u.cuff_lift(base, slot)
            for side in (0, 1):
                if cuff.sides[side] is None:
                    u.far_fan(cuff, 1 - side)
                reg, w0, sl, t0 = cuff.sides[side]
                delta = (k - 1 - t0) % 4
                if delta % 2 != 0:
                    continue  # this side has the other sector parity
                # stay in the window next to the minimal word: past it
                # the spiral flags saturate below double precision and
                # the crossing would read back a frozen configuration
                for off in (-4 if delta else 0, delta and 0 or -4):
                    t = t0 + delta + off
                    if (reg.rid, t) in seen:
                        continue
                    seen.add((reg.rid, t))
                    plq = u.fan_plaque_at(reg, w0, sl, t0, t)
                    sh, dp = _fan_neighbor_letters(u, plq, sl)
                    yield plq, sl, _vertex_side(u, plq, sh, dp)


def _radial_near_plaque(u, ci, k):
    """First (canonical) measurement site for the sector."""
    return next(iter(_radial_site_candidates(u, ci, k)))


# --------------------------------------------------------- forward pipeline

def fuchsian_forward(shear_coords, n, unrolling, r_max):
    """Triangle data and shearing cycle of the representation carried by
    a hyperbolic shear system through the principal embedding.

    shear_coords maps base branches to reals and must satisfy the
    switch conditions.  The projective-line flags are derived from the
    two-dimensional reconstruction, mapped onto the rational normal
    curve, and the invariants are measured back from the image flags."""
    from . import param

    u = unrolling
    base_weights = {}
    for b in range(u.track.num_branches):
        x = float(shear_coords[b])
        base_weights[(b, 1)] = (x,)
        base_weights[(b, -1)] = (x,)
    sigma2 = tracks.TwistedRelativeCycle(u.cover, 2, base_weights)
    tau2 = TriangleData(u, 2)

    frame = param.ReconstructionFrame(u, 2, tau2, sigma2, r_max)
    fa = frame.flag_assignment()
    if n != 2:
        fa = fa.map_flags(lambda fl: _osculating_image(fl, n), n)
    tau = measure_triangle_data(fa, n)
    cycle, _ = assemble_shearing_cycle(fa, r_max)
    return tau, cycle


def _osculating_image(fl, n):
    """Image of a projective-line flag under the rational normal curve
    (the line (x : y) goes to the osculating flag at t = y/x).

    Worked in whichever affine chart keeps |t| <= 1: reversing the
    coordinates carries the osculating flag at t to the one at 1/t, so
    large parameters never enter the moment-curve powers."""
    x, y = fl.basis[0][0], fl.basis[0][1]
    if abs(float(y)) <= abs(float(x)):
        return flags.veronese_flag(n, y / x)
    rev = flags.veronese_flag(n, x / y)
    return flags.Flag([tuple(v[::-1]) for v in rev.basis])
