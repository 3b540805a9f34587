"""Holonomy reconstruction from triangle data and a shearing cycle.

The coordinates are turned back into geometry by developing vertex
flags plaque by plaque.  Inside a region each step is exact: the new
plaque's third-vertex flag is the unique flag with the prescribed
triple ratios whose double ratios against the previous plaque differ
from the normalized position by the shear across the crossed leaf.
Crossing a curve lift is where the spiral tails live; there the far
flags are produced by the conjugated-factor product anchored at the
near junction plaque: every separating plaque contributes its
normalized unipotent factor conjugated by the one-parameter group of
the anchor side at time sigma(anchor, T), the shears being accumulated
combinatorially with the spike corrections.  Truncation at divergence
radius r_max drops factors that are exponentially close to the
identity.

The holonomy of a deck element is then the projective map matching the
developed vertex triple of the base plaque with that of its image.
"""

import numpy as np

from . import flags, shearing, tracks


def _entry_side(u, base, plaque, chain):
    """Side through which a chain from `base` enters its final plaque."""
    if not chain:
        return shearing._shared_label(base, plaque)
    last = chain[-1]
    if last.get("gap"):
        fan = last["far_fan"] if last["far_fan"][0] is plaque.region \
            else last["near_fan"]
        return shearing._fan_neighbor_letters(u, plaque, fan[2])[1]
    return shearing._shared_label(last["plaque"], plaque)


def _flag_gap(F, G):
    """Largest gap between corresponding partial spans of two flags."""
    A = np.array([[float(c) for c in v] for v in F.basis]).T
    B = np.array([[float(c) for c in v] for v in G.basis]).T
    qa, _ = np.linalg.qr(A)
    qb, _ = np.linalg.qr(B)
    worst = 0.0
    for j in range(1, A.shape[1]):
        Pj = qa[:, :j] @ qa[:, :j].T
        Qj = qb[:, :j] @ qb[:, :j].T
        worst = max(worst, float(np.linalg.norm(Pj - Qj, 2)))
    return worst


def _side_slots(u, side):
    """(left corner template, other corner, opposite corner) is not well
    defined without a plaque; this returns the two corner slots on a
    side plus the opposite slot."""
    on = [v for v in range(3) if side in u.corner_pair(v)]
    opp = [v for v in range(3) if side not in u.corner_pair(v)][0]
    return on, opp


class ChainFrame:
    """Factor machinery for chains leaving an anchor plaque through a
    fixed side, expressed in the frame of that side's vertex flags."""

    def __init__(self, dev, src, g):
        self.dev = dev
        self.src = src
        self.g = g
        u = dev.u
        tr = dev.triple(src)
        x = u.left_corner(src, g)
        z = shearing._opposite_corner(u, g)
        y = [v for v in range(3) if v not in (x, z)][0]
        self.A = tr[x]   # left endpoint of the oriented anchor side
        self.B = tr[y]
        self.C = tr[z]
        self._gp = {}

    def gprime(self, plaque, s_in):
        """Normalized third-vertex flag of a chain plaque entered
        through the given side (left endpoint of the entry side, seen
        along the transversal, is the endpoint lying right as seen from
        the plaque itself)."""
        key = (plaque.pants, plaque.ttype, s_in)
        got = self._gp.get(key)
        if got is None:
            u = self.dev.u
            y = u.left_corner(plaque, s_in)
            z = shearing._opposite_corner(u, s_in)
            x = [v for v in range(3) if v not in (y, z)][0]
            ratios = self.dev.tau.ratios_ordered(
                (plaque.pants, plaque.ttype), (x, y, z))
            E, F, G = flags.realize_triple_from_ratios(self.dev.n, ratios)
            got = flags.normalize_triple(E, F, G,
                                         self.A, self.B, self.C)[1]
            self._gp[key] = got
        return got

    def _factor(self, rec, sig):
        Gp = self.gprime(rec["plaque"], rec["s_in"])
        return flags.conjugated_slithering(
            sig, self.A, self.B, Gp,
            pivot_first=(rec["side"] != "right"))

    def far_flag(self, plaque):
        """Third-vertex flag (opposite the entry side) of the final
        plaque of the chain from the anchor, in global coordinates."""
        dev = self.dev
        u = dev.u
        chain = u.plaque_chain(self.src, plaque, dev.r_max)
        assert shearing._closest_side(u, self.src, chain, plaque) == self.g
        sigs, total = dev.acc.run(self.src, plaque, chain)
        recs = [r for r in chain if not r.get("gap")]
        assert len(recs) == len(sigs)
        M = flags.identity_map(dev.n)
        for rec, sig in zip(recs, sigs):
            M = self._factor(rec, sig) @ M
        s_in = _entry_side(u, self.src, plaque, chain)
        Th = flags.theta_map(total, self.A, self.B)
        return M.inverse().apply(Th.apply(self.gprime(plaque, s_in)))


class Development:
    """Lazy plaque-by-plaque development of the vertex flags."""

    def __init__(self, unrolling, n, tau, sigma, r_max):
        self.u = unrolling
        self.n = n
        self.tau = tau
        self.sigma = sigma
        self.r_max = r_max
        self.theta = shearing.theta_table(tau)
        self.acc = shearing.SigmaAccumulator(unrolling, sigma, self.theta)
        self._triples = {}
        self._frames = {}
        self._transports = {}
        self._spirals = {}
        self._seed_root()

    # -------------------------------------------------------- anchor setup

    def _seed_root(self):
        u = self.u
        T0 = u.base
        key = (T0.pants, T0.ttype)
        cyc = shearing.TriangleData.corner_cycle(u.face_table[key])
        E, F, G = flags.realize_triple_from_ratios(
            self.n, self.tau.ratios_from(key, cyc[0]))
        self._triples[id(T0)] = {cyc[0]: E, cyc[1]: F, cyc[2]: G}

    def _cross_frame(self, region):
        """Factor machinery anchored on the near side of the cuff that
        separates a region from its parent."""
        got = self._frames.get(region.rid)
        if got is None:
            u = self.u
            cuff = region.parent_cuff
            near = 1 - cuff.side_of(region)
            nregion, w0n, slot_n, _ = cuff.sides[near]
            N = nregion.plaque(w0n)
            self.triple(N)  # recursive: develops the parent region
            g = shearing._fan_neighbor_letters(u, N, slot_n)[1]
            got = (ChainFrame(self, N, g), slot_n)
            self._frames[region.rid] = got
        return got

    def _fan_member(self, plaque):
        """Triple of a member of the fan along a region's parent cuff,
        from two anchored crossing products (slow development up the
        fan would amplify error in the expanding spiral direction)."""
        got = self._triples.get(id(plaque))
        if got is not None:
            return got
        u = self.u
        region = plaque.region
        cuff = region.parent_cuff
        frame, slot_n = self._cross_frame(region)
        _, w0f, slot_f, t0f = cuff.sides[cuff.side_of(region)]
        t = u.fan_t(plaque, slot_f)
        deeper = u.fan_plaque_at(region, w0f, slot_f, t0f, t - 2)
        Fz = frame.far_flag(plaque)
        Fw = frame.far_flag(deeper)
        dp = shearing._fan_neighbor_letters(u, plaque, slot_f)[1]
        z_slot = shearing._opposite_corner(u, dp)
        w_slot = [v for v in range(3) if v not in (slot_f, z_slot)][0]
        xi = self.triple(frame.src)[slot_n]
        got = {slot_f: xi, z_slot: Fz, w_slot: Fw}
        self._triples[id(plaque)] = got
        return got

    def _fan_transport(self, region):
        """Holonomy of the curve bounding a region against its parent,
        as the projective map carrying a parent-fan member one period
        up, together with the sign of the spiral direction in which
        adjacent development contracts.  Makes the whole fan reachable
        from the members next to the landing zone; both the anchored
        products and step-by-step development degrade like e^{|sigma|}
        away from it."""
        got = self._transports.get(region.rid)
        if got is None:
            u = self.u
            cuff = region.parent_cuff
            _, w0f, slot_f, t0f = cuff.sides[cuff.side_of(region)]
            P0 = u.fan_plaque_at(region, w0f, slot_f, t0f, t0f)
            up = u.fan_plaque_at(region, w0f, slot_f, t0f, t0f + 2)
            pair = sorted(u.corner_pair(slot_f))
            a = next(s for s in pair if u.cross(P0, s) is up)
            b = [s for s in pair if s != a][0]
            self.triple(P0)
            M, fwd = self._spiral_matrix(P0, a, b)
            got = (M, 1 if fwd else -1)
            self._transports[region.rid] = got
        return got

    def _match_map(self, key, trP, trQ):
        """Projective map carrying one developed triple to another with
        the same invariants, slot by slot (deck elements preserve the
        corner slots)."""
        cyc = shearing.TriangleData.corner_cycle(self.u.face_table[key])
        model = flags.realize_triple_from_ratios(
            self.n, self.tau.ratios_from(key, cyc[0]))
        nP, nQ = (flags.normalize_triple(
            *([tr[v] for v in cyc] + list(model)))[0] for tr in (trP, trQ))
        return nQ.inverse() @ nP

    def _spiral_matrix(self, P0, a, b):
        """Holonomy of the cuff at the corner between sides a and b, as
        the map carrying a fan member one period (two steps) along the
        run starting with side a, plus whether that direction is the
        contracting one.  One period is developed adjacent both ways;
        the direction whose transporter correctly predicts the next
        period is the contracting one (in the other the per-step error
        grows like e^{|shear|}), and its transporter is kept."""
        u = self.u
        cuff = u.cuff_lift(P0, u.slot_of_pair({a, b}))
        key = (id(cuff), P0.ttype, a)
        got = self._spirals.get(key)
        if got is not None:
            return got
        kk = (P0.pants, P0.ttype)
        best = None
        for fwd, (c, d) in ((True, (a, b)), (False, (b, a))):
            added = []
            cur = P0
            tris = [self._triples[id(P0)]]
            try:
                for j in range(4):
                    letter = (c, d)[j % 2]
                    nxt = u.cross(cur, letter)
                    if id(nxt) not in self._triples:
                        self._develop_adjacent(cur, letter)
                        added.append(id(nxt))
                    tris.append(self._triples[id(nxt)])
                    cur = nxt
                M = self._match_map(kk, tris[0], tris[2])
                mism = max(_flag_gap(M.apply(F), tris[4][v])
                           for v, F in tris[2].items())
            except (flags.GenericityError, ValueError):
                M, mism = None, float("inf")
            for i in added:
                self._triples.pop(i, None)
            if best is None or mism < best[2]:
                best = (M, fwd, mism)
        M, fwd, _ = best
        if M is None:
            raise flags.GenericityError("degenerate spiral transport")
        if not fwd:
            M = M.inverse()
        got = (M, fwd)
        self._spirals[key] = got
        return got

    def _spiral_power(self, P0, a, b, k):
        M, _ = self._spiral_matrix(P0, a, b)
        Mk = M
        for _ in range(k - 1):
            try:
                Mk = Mk @ M
            except ValueError:
                # converged to the cuff endpoints below double
                # precision; the deepest resolvable power stands in
                break
        return Mk

    def _fan_triple(self, region, t):
        """Triple of the parent-fan member of a region at position t,
        by transporting a reference member near the landing zone by
        powers of the cuff holonomy."""
        u = self.u
        cuff = region.parent_cuff
        _, w0f, slot_f, t0f = cuff.sides[cuff.side_of(region)]
        plaque = u.fan_plaque_at(region, w0f, slot_f, t0f, t)
        got = self._triples.get(id(plaque))
        if got is not None:
            return got
        if t == t0f:
            return self._fan_member(plaque)
        M, cd = self._fan_transport(region)
        t_ref = t0f if (t - t0f) % 4 == 0 else t0f + 2 * cd
        k = (t - t_ref) // 4
        ref = self._fan_member(
            u.fan_plaque_at(region, w0f, slot_f, t0f, t_ref))
        if k == 0:
            return ref
        if k < 0:
            M = M.inverse()
        Mk = M
        for _ in range(abs(k) - 1):
            try:
                Mk = Mk @ M
            except ValueError:
                # past this power the transported flags have converged
                # to the curve endpoints below double precision; the
                # deepest resolvable translate stands in for the rest
                break
        got = {v: Mk.apply(F) for v, F in ref.items()}
        self._triples[id(plaque)] = got
        return got

    # --------------------------------------------------------- development

    def triple(self, plaque):
        """Vertex flags of a plaque, keyed by corner slot."""
        got = self._triples.get(id(plaque))
        if got is not None:
            return got
        u = self.u
        region = plaque.region
        if region is u.root:
            seed = u.base
        else:
            cuff = region.parent_cuff
            _, w0f, slot_f, t0f = cuff.sides[cuff.side_of(region)]
            d, _ = u._project_to_fan(plaque.word, region, w0f, slot_f)
            seed = u.fan_plaque_at(region, w0f, slot_f, t0f, t0f + 2 * d)
            self._fan_triple(region, t0f + 2 * d)
        cur = seed
        letters = [letter for _, letter in u._tree_moves(seed, plaque)]
        i = 0
        while i < len(letters):
            if i + 1 < len(letters) and letters[i + 1] != letters[i]:
                # alternating run: a walk along the fan around the
                # corner cuff shared by the two sides; stepped flag by
                # flag the error grows like e^{|shear|} per plaque, so
                # whole periods are carried by the cuff holonomy
                a, b = letters[i], letters[i + 1]
                m = 2
                while i + m < len(letters) and \
                        letters[i + m] == (a, b)[m % 2]:
                    m += 1
                k = m // 2
                Mk = self._spiral_power(cur, a, b, k)
                nxt = cur
                for j in range(2 * k):
                    nxt = u.cross(nxt, (a, b)[j % 2])
                if id(nxt) not in self._triples:
                    self._triples[id(nxt)] = {
                        v: Mk.apply(F)
                        for v, F in self._triples[id(cur)].items()}
                cur = nxt
                i += 2 * k
            else:
                nxt = u.cross(cur, letters[i])
                if id(nxt) not in self._triples:
                    self._develop_adjacent(cur, letters[i])
                cur = nxt
                i += 1
        return self._triples[id(plaque)]

    def _develop_adjacent(self, T, s):
        """Flags of the neighbor across side s from those of T: same
        triple ratios, double ratios shifted by the shear across the
        crossed leaf."""
        u = self.u
        tr = self.triple(T)
        Tn = u.cross(T, s)
        x = u.left_corner(T, s)
        z = shearing._opposite_corner(u, s)
        y = [v for v in range(3) if v not in (x, z)][0]
        on, zn = _side_slots(u, s)
        xn = next(v for v in on
                  if u.cuff_lift(Tn, v) is u.cuff_lift(T, x))
        yn = [v for v in on if v != xn][0]
        sig = shearing._leaf_weight(u, self.sigma, T, s)
        ratios = self.tau.ratios_ordered((Tn.pants, Tn.ttype),
                                         (xn, yn, zn))
        E, F, G = flags.realize_triple_from_ratios(self.n, ratios)
        try:
            G1 = flags.normalize_triple(E, F, G, tr[x], tr[y], tr[z])[1]
            Fzn = flags.theta_map(sig, tr[x], tr[y]).apply(G1)
        except flags.GenericityError:
            # deep in a spiralling fan the outer vertices converge
            # below resolvable precision; past that point the limit
            # flag stands in for all of them
            Fzn = tr[z]
        self._triples[id(Tn)] = {xn: tr[x], yn: tr[y], zn: Fzn}

    def vertex_flag(self, cuff):
        """Flag at the forward endpoint of a curve lift."""
        region, w0, slot, _ = cuff.sides[0]
        return self.triple(region.plaque(w0))[slot]


class ReconstructionFrame:
    """Development plus holonomy evaluation."""

    def __init__(self, unrolling, n, tau, sigma, r_max):
        self.u = unrolling
        self.n = n
        self.tau = tau
        self.sigma = sigma
        self.r_max = r_max
        self.dev = Development(unrolling, n, tau, sigma, r_max)
        key0 = (unrolling.base.pants, unrolling.base.ttype)
        self._cyc0 = shearing.TriangleData.corner_cycle(
            unrolling.face_table[key0])
        self._model = flags.realize_triple_from_ratios(
            n, tau.ratios_from(key0, self._cyc0[0]))

    def flag_assignment(self):
        return shearing.FlagAssignment(self.u, self.n, self.dev.vertex_flag)

    def _normalizer(self, plaque):
        tr = self.dev.triple(plaque)
        trip = [tr[v] for v in self._cyc0]
        return flags.normalize_triple(*(trip + list(self._model)))[0]

    def rho(self, gamma):
        """Holonomy of a deck element: the projective map carrying the
        developed vertex triple of the base plaque to that of its
        image (two generic flag triples with equal invariants are
        matched by exactly one projective map)."""
        m0 = self._normalizer(self.u.base)
        m1 = self._normalizer(gamma.image)
        return m1.inverse() @ m0


class HolonomySet:
    """Holonomy images of a chosen generating set."""

    def __init__(self, frame, generators):
        self.frame = frame
        self.generators = dict(generators)
        self.images = {name: frame.rho(g)
                       for name, g in self.generators.items()}

    def __getitem__(self, name):
        return self.images[name]


def reconstruct(tau, sigma, unrolling, generators, r_max):
    """HolonomySet of the representation with the given coordinates."""
    frame = ReconstructionFrame(unrolling, tau.n, tau, sigma, r_max)
    return HolonomySet(frame, generators)
