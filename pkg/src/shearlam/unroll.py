"""Universal-cover combinatorics of the spiral lamination fixtures.

The lifts of the decomposition curves cut the universal cover into
regions, one per lift of a pair of pants.  Inside a region the lifts of
the two ideal triangles of the pants form an infinite trivalent tree:
vertices are plaques, edges are lifts of the spiraling leaves, and every
plaque is addressed by a reduced word in the side labels {0,1,2} (no
letter repeated twice in a row) relative to the region's base plaque.

Every ideal vertex of every plaque is the forward endpoint of a lift of
a decomposition curve (all leaves spiral in the positive direction).
The plaques sharing that endpoint on one side of the curve lift form a
*fan*: a bi-infinite geodesic of the region's tree.  Fan positions carry
an integer coordinate t that projects to the position of the matching
switch on the base circle modulo 4 (the angle at which the leaf
merges into the circle, unrolled along the lift);
the coordinates of the two sides of one curve lift are interleaved
(even on one side, odd on the other), which pins down the jump move
across the lift.

Deck transformations are represented by the image plaque of the base
plaque: move sequences are intrinsic (side labels and relative fan
offsets only), so composition is replay of concatenated move lists.
"""

import itertools

from . import tracks


def _reduce_word(word, letter):
    if word and word[-1] == letter:
        return word[:-1]
    return word + (letter,)


class Region:
    """Lift of a pair of pants: a trivalent tree of plaques."""

    __slots__ = ("unrolling", "rid", "pants", "base_type", "parent_cuff",
                 "cuffs", "depth")

    def __init__(self, unrolling, rid, pants, base_type, parent_cuff, depth):
        self.unrolling = unrolling
        self.rid = rid
        self.pants = pants
        self.base_type = base_type      # 'A' or 'B', type of the empty word
        self.parent_cuff = parent_cuff  # CuffLift crossed to reach the parent
        self.cuffs = {}                 # fan key -> CuffLift
        self.depth = depth

    def plaque(self, word):
        return self.unrolling._plaque(self, tuple(word))

    def __repr__(self):
        return "Region(%d, pants=%d)" % (self.rid, self.pants)


class Plaque:
    """Lift of one ideal triangle: a vertex of a region's tree."""

    __slots__ = ("region", "word", "ttype")

    def __init__(self, region, word, ttype):
        self.region = region
        self.word = word
        self.ttype = ttype  # 'A' or 'B'

    @property
    def pants(self):
        return self.region.pants

    def __repr__(self):
        return "Plaque(r%d,%s,%s)" % (self.region.rid,
                                      "".join(map(str, self.word)) or ".",
                                      self.ttype)


class CuffLift:
    """Lift of a decomposition curve, with the two adjacent fans.

    sides[k] = (region, fan_min_word, slot, t_of_min_word); side 1 is
    created lazily on the first jump across the lift.
    """

    __slots__ = ("unrolling", "curve", "sides")

    def __init__(self, unrolling, curve):
        self.unrolling = unrolling
        self.curve = curve
        self.sides = [None, None]

    def side_of(self, region):
        for k in (0, 1):
            if self.sides[k] is not None and self.sides[k][0] is region:
                return k
        raise KeyError("region not adjacent to this cuff lift")


class Unrolling:
    """Combinatorial universal cover of one genus-g spiral lamination."""

    def __init__(self, genus):
        self.genus = genus
        self.track = tracks.build_pants_track(genus)
        self.cover = tracks.build_orientation_cover(self.track)
        self._faces = self.track.faces()
        self._build_face_tables()
        self._plaques = {}
        self._regions = []
        self.root = self._new_region(0, "A", None, 0)
        self.base = self.root.plaque(())

    # ------------------------------------------------ fixture face tables

    def _build_face_tables(self):
        """Per pants and triangle letter: cusp switch per corner slot, the
        label of the leaf merging at each corner's cusp, and the counterclockwise cyclic
        order of side labels."""
        tt = self.track
        face_of_pants = {}
        for fid, face in enumerate(self._faces):
            cusp_corners = [c for c in face if c[3]]
            assert len(cusp_corners) == 3
            sw0 = cusp_corners[0][0]
            leafb, _ = tt.switch_info[sw0]["leaf_end"]
            _, p, _ = tt.labels[leafb]
            face_of_pants.setdefault(p, []).append(fid)

        self.face_table = {}
        for p, fids in face_of_pants.items():
            assert len(fids) == 2
            # the 'A' triangle of pants p is the one whose boundary cusp
            # involves end 0 of leaf (p, 0)
            def has_a_mark(fid):
                for (sw, _, _, cusp) in self._faces[fid]:
                    if not cusp:
                        continue
                    b, e = tt.switch_info[sw]["leaf_end"]
                    if tt.labels[b] == ("leaf", p, 0) and e == 0:
                        return True
                return False
            a_fid = fids[0] if has_a_mark(fids[0]) else fids[1]
            b_fid = fids[1] if a_fid == fids[0] else fids[0]
            for letter, fid in (("A", a_fid), ("B", b_fid)):
                info = {"fid": fid, "corner": {}}
                face = self._faces[fid]
                cusp_positions = [i for i, c in enumerate(face) if c[3]]
                # cyclic side order: the leaf branch traversed between
                # consecutive cusps is the side separating those corners
                side_cycle = []
                slots = []
                corner_slot_at = {}
                for ci_pos in cusp_positions:
                    sw = face[ci_pos][0]
                    b, e = tt.switch_info[sw]["leaf_end"]
                    _, pp, j = tt.labels[b]
                    assert pp == p
                    slot = j if e == 0 else (j + 1) % 3
                    corner_slot_at[ci_pos] = slot
                    info["corner"][slot] = {
                        "switch": sw,
                        "curve": tt.switch_info[sw]["curve"],
                        "pos": tt.switch_info[sw]["pos"],
                        "cusp_side": j,
                    }
                    slots.append(slot)
                info["side_leaf"] = {}
                for ii, ci_pos in enumerate(cusp_positions):
                    # side crossed after this cusp, along the traversal
                    nxt = cusp_positions[(ii + 1) % 3]
                    seg = self._face_segment(fid, ci_pos, nxt)
                    leaves = [(bb, ee) for (bb, ee) in seg
                              if tt.labels[bb][0] == "leaf"]
                    assert len(leaves) == 1
                    leafb, e_arr = leaves[0]
                    side = tt.labels[leafb][2]
                    side_cycle.append(side)
                    # the traversal runs from this corner to the next one;
                    # the arrival end of the leaf is the end adjacent to
                    # the next corner's ideal vertex
                    info["side_leaf"][side] = {
                        "branch": leafb,
                        "end_at": {corner_slot_at[nxt]: e_arr,
                                   corner_slot_at[ci_pos]: 1 - e_arr},
                    }
                assert set(info["corner"]) == {0, 1, 2}
                info["slot_order"] = tuple(slots)
                info["side_cycle"] = tuple(side_cycle)
                self.face_table[(p, letter)] = info

        # cross-checks: at each corner the cusp leaves of A and B are
        # the two members of the corner pair {slot-1, slot}
        for p in face_of_pants:
            for slot in range(3):
                da = self.face_table[(p, "A")]["corner"][slot]["cusp_side"]
                db = self.face_table[(p, "B")]["corner"][slot]["cusp_side"]
                assert {da, db} == {slot % 3, (slot - 1) % 3}, \
                    "corner pair mismatch at pants %d slot %d" % (p, slot)

    def _face_segment(self, fid, start, stop):
        """Directed branch ends traversed between two corners of a face
        (the arcs and the one leaf separating the corresponding
        spikes)."""
        face = self._faces[fid]
        out = []
        i = (start + 1) % len(face)
        while True:
            out.append(face[i][1])
            if i == stop:
                break
            i = (i + 1) % len(face)
        return out

    # ------------------------------------------------------- plaque store

    def _new_region(self, pants, base_type, parent_cuff, depth):
        r = Region(self, len(self._regions), pants, base_type, parent_cuff,
                   depth)
        self._regions.append(r)
        return r

    def _plaque(self, region, word):
        key = (region.rid, word)
        got = self._plaques.get(key)
        if got is None:
            ttype = region.base_type if len(word) % 2 == 0 else \
                ("B" if region.base_type == "A" else "A")
            got = Plaque(region, word, ttype)
            self._plaques[key] = got
        return got

    # ------------------------------------------------------------ corners

    def corner_pair(self, slot):
        return frozenset({slot % 3, (slot - 1) % 3})

    def slot_of_pair(self, pair):
        for slot in range(3):
            if self.corner_pair(slot) == frozenset(pair):
                return slot
        raise ValueError("not a corner pair: %r" % (pair,))

    def corner_info(self, plaque, slot):
        return self.face_table[(plaque.pants, plaque.ttype)]["corner"][slot]

    def left_corner(self, plaque, side):
        """Corner slot of the left endpoint of a side, seen from inside
        the plaque facing out across that side (per the boundary
        orientation of the face tables)."""
        cycle = self.face_table[(plaque.pants, plaque.ttype)]["side_cycle"]
        nxt = cycle[(cycle.index(side) + 1) % 3]
        return self.slot_of_pair({side, nxt})

    def side_leaf(self, plaque, side):
        """Leaf branch forming a side of the plaque's face, with the
        end index adjacent to each of the side's two corners."""
        return self.face_table[(plaque.pants, plaque.ttype)]["side_leaf"][side]

    def cross(self, plaque, side):
        """Neighbor across the side with the given label."""
        return plaque.region.plaque(_reduce_word(plaque.word, side))

    # ---------------------------------------------------------------- fans

    def fan_min_word(self, plaque, slot):
        pair = self.corner_pair(slot)
        w = plaque.word
        while w and w[-1] in pair:
            w = w[:-1]
        return w

    def fan_t(self, plaque, slot):
        """Coordinate of the plaque in its fan at the given corner.

        Coordinates project to the position of the matching switch on
        the base circle modulo 4 and increase toward the curve lift;
        both sides of one curve lift share a single coordinate axis,
        anchored once when the lift is first interned."""
        cuff = self.cuff_lift(plaque, slot)
        side = cuff.side_of(plaque.region)
        region, w0, _, t0 = cuff.sides[side]
        d = len(plaque.word) - len(w0)
        if d == 0:
            return t0
        suffix = plaque.word[len(w0):]
        cusp0 = self.corner_info(region.plaque(w0), slot)["cusp_side"]
        sign = 2 if suffix[0] == cusp0 else -2
        return t0 + sign * d

    def region_plaque_t_mod4(self, region, word, slot):
        p = region.plaque(word)
        pos_cusp = self.corner_info(p, slot)["pos"]
        return (pos_cusp - 2) % 4

    def fan_plaque_at(self, region, min_word, slot, t0, t):
        """Plaque of the fan with coordinate t, given the min word's
        anchor coordinate t0."""
        minp = region.plaque(min_word)
        d, rem = divmod(t - t0, 2)
        if rem:
            raise ValueError("coordinate parity mismatch")
        pair = sorted(self.corner_pair(slot))
        cusp0 = self.corner_info(minp, slot)["cusp_side"]
        other0 = [x for x in pair if x != cusp0][0]
        word = min_word
        if d >= 0:
            letters = itertools.cycle([cusp0, other0])
            for _ in range(d):
                word = word + (next(letters),)
        else:
            letters = itertools.cycle([other0, cusp0])
            for _ in range(-d):
                word = word + (next(letters),)
        return region.plaque(word)

    # ---------------------------------------------------------- cuff lifts

    def cuff_lift(self, plaque, slot):
        """The curve lift whose forward endpoint is the plaque's ideal
        vertex at the given corner."""
        region = plaque.region
        w0 = self.fan_min_word(plaque, slot)
        key = (w0, slot)
        got = region.cuffs.get(key)
        if got is None:
            curve = self.corner_info(plaque, slot)["curve"]
            got = CuffLift(self, curve)
            t0 = self.region_plaque_t_mod4(region, w0, slot)
            got.sides[0] = (region, w0, slot, t0)
            region.cuffs[key] = got
        return got

    def _open_far_side(self, cuff, near_side):
        """Create the region on the other side of a cuff lift."""
        far = 1 - near_side
        if cuff.sides[far] is not None:
            return
        region, w0, slot, t0 = cuff.sides[near_side]
        curve = self.track.curves[cuff.curve]
        (p, i), (q, j) = curve
        if region.pants == p and slot == i:
            far_pants, far_slot = q, j
        elif region.pants == q and slot == j:
            far_pants, far_slot = p, i
        else:
            raise AssertionError("cuff bookkeeping mismatch")
        # the far base plaque occupies [t0+1, t0+3]; its type is the one
        # whose cusp position matches that coordinate modulo 4
        t_far = t0 + 1
        base_type = None
        for letter in ("A", "B"):
            pos = self.face_table[(far_pants, letter)]["corner"][far_slot]["pos"]
            if (pos - 2) % 4 == t_far % 4:
                base_type = letter
                break
        if base_type is None:
            raise AssertionError("no triangle type matches far coordinate")
        newr = self._new_region(far_pants, base_type, cuff, region.depth + 1)
        # the far fan's min word is the new region's base plaque, anchored
        # on the shared axis at coordinate t_far
        assert self.region_plaque_t_mod4(newr, (), far_slot) == t_far % 4
        cuff.sides[far] = (newr, (), far_slot, t_far)
        newr.cuffs[((), far_slot)] = cuff

    def far_fan(self, cuff, near_side):
        self._open_far_side(cuff, near_side)
        return cuff.sides[1 - near_side]

    def jump(self, plaque, slot, m=0):
        """Cross the curve lift at the plaque's corner.

        Lands on the far-side plaque with coordinate t+1+2m when the
        current plaque has coordinate t (m=0 is the canonical target;
        other m slide along the far fan)."""
        cuff = self.cuff_lift(plaque, slot)
        near = cuff.side_of(plaque.region)
        t = self.fan_t(plaque, slot)
        region, w0, far_slot, t0 = self.far_fan(cuff, near)
        return (self.fan_plaque_at(region, w0, far_slot, t0, t + 1 + 2 * m),
                far_slot)

    # ------------------------------------------------- separating chains

    def _fan_member_words(self, region, w0, slot):
        """Generator-free access to fan words by signed step count."""
        minp = region.plaque(w0)
        cusp0 = self.corner_info(minp, slot)["cusp_side"]
        pair = sorted(self.corner_pair(slot))
        other0 = [x for x in pair if x != cusp0][0]

        def word_at(d):
            word = w0
            letters = [cusp0, other0] if d >= 0 else [other0, cusp0]
            for i in range(abs(d)):
                word = word + (letters[i % 2],)
            return word
        return word_at

    @staticmethod
    def _tree_dist(a, b):
        k = 0
        while k < len(a) and k < len(b) and a[k] == b[k]:
            k += 1
        return (len(a) - k) + (len(b) - k)

    def _project_to_fan(self, word, region, w0, slot):
        """Closest fan member to a vertex of the region's tree, as a
        signed step count from the fan's min word."""
        word_at = self._fan_member_words(region, w0, slot)
        best_d, best = 0, self._tree_dist(word, w0)
        for sgn in (1, -1):
            d = sgn
            while True:
                dist = self._tree_dist(word, word_at(d))
                if dist < best:
                    best_d, best = d, dist
                    d += sgn
                else:
                    break
        return best_d, best

    def plaque_chain(self, src, dst, r_max):
        """Records for the plaques separating two plaques.

        The transversal joining the two plaques crosses, in order: tree
        plaques within each region, and for every curve lift crossed,
        the two infinite spiral tails hugging it (truncated at
        divergence radius r_max).  Each record carries the plaque, the
        entry and exit side labels, the corner slot whose ideal vertex
        the crossed sides share, whether that vertex lies left or right
        of the oriented transversal, the divergence radius, and the
        curve lift at the vertex."""
        if src is dst:
            return []
        # region path: climb both to the root of the creation tree
        def ancestry(region):
            chain = [region]
            r = region
            while r.parent_cuff is not None:
                side = 1 - r.parent_cuff.side_of(r)
                r = r.parent_cuff.sides[side][0]
                chain.append(r)
            return chain
        anc_s = ancestry(src.region)
        anc_t = ancestry(dst.region)
        set_s = {r.rid for r in anc_s}
        set_t = {r.rid for r in anc_t}
        # nearest common ancestor
        common = None
        for r in anc_s:
            if r.rid in set_t:
                common = r
                break
        up = anc_s[:anc_s.index(common)]
        down = anc_t[:anc_t.index(common)]
        regions = up + [common] + list(reversed(down))
        cuffs = [r.parent_cuff for r in up] + \
            [r.parent_cuff for r in reversed(down)]
        assert len(cuffs) == len(regions) - 1

        # per-region traversal: (objective_in, objective_out) where an
        # objective is either a plaque (the endpoints) or a fan; a gap
        # marker is inserted for every curve lift crossed
        records = []
        for i, region in enumerate(regions):
            fan_in = None if i == 0 else self._region_fan(region, cuffs[i - 1])
            fan_out = None if i == len(regions) - 1 else \
                self._region_fan(region, cuffs[i])
            seg = self._region_segment(region,
                                       src if fan_in is None else None,
                                       dst if fan_out is None else None,
                                       fan_in, fan_out, r_max)
            for (plaque, s_in, s_out, r) in seg:
                if plaque is src or plaque is dst:
                    continue
                slot = self.slot_of_pair({s_in, s_out})
                cycle = self.face_table[(plaque.pants,
                                         plaque.ttype)]["side_cycle"]
                idx = cycle.index(s_in)
                side = "right" if cycle[(idx + 1) % 3] == s_out else "left"
                records.append({
                    "plaque": plaque,
                    "s_in": s_in,
                    "s_out": s_out,
                    "slot": slot,
                    "side": side,
                    "r": r,
                    "cuff": self.cuff_lift(plaque, slot),
                    "switch": self.corner_info(plaque, slot)["switch"],
                })
            if fan_out is not None:
                cuff = cuffs[i]
                near = cuff.side_of(region)
                records.append({
                    "gap": True,
                    "cuff": cuff,
                    "near_fan": cuff.sides[near],
                    "far_fan": cuff.sides[1 - near],
                })
        return records

    def _region_fan(self, region, cuff):
        side = cuff.side_of(region)
        _, w0, slot, _ = cuff.sides[side]
        return (w0, slot)

    def _fan_step_of(self, region, fan, plaque):
        """Signed step count of a fan member from the fan's min word
        (t is affine in the step: t = t(min) + 2*step)."""
        w0, slot = fan
        t0 = self.fan_t(region.plaque(w0), slot)
        t = self.fan_t(plaque, slot)
        d, rem = divmod(t - t0, 2)
        assert rem == 0
        return d

    def _region_segment(self, region, p_in, p_out, fan_in, fan_out, r_max):
        """Ordered (plaque, s_in, s_out, r) for one region's traversal.

        Endpoints are either concrete plaques (p_in / p_out) or fans of
        crossed curve lifts (fan_in / fan_out); a fan endpoint stands
        for the deep end of the fan (coordinates decreasing toward the
        crossing), truncated at divergence radius r_max."""
        # stand-in words deep enough that the geodesic between them
        # enters and leaves each fan at the true junctions
        def deep_proxy(fan, other_word):
            w0, slot = fan
            word_at = self._fan_member_words(region, w0, slot)
            d_ref, _ = self._project_to_fan(other_word, region, w0, slot)
            margin = r_max + self._tree_dist(other_word, w0) + 4
            return word_at(d_ref - margin)

        in_word = p_in.word if fan_in is None else \
            deep_proxy(fan_in, p_out.word if fan_out is None else fan_out[0])
        out_word = p_out.word if fan_out is None else \
            deep_proxy(fan_out, p_in.word if fan_in is None else fan_in[0])

        # tree geodesic between the two words
        words = []
        a, b = in_word, out_word
        k = 0
        while k < len(a) and k < len(b) and a[k] == b[k]:
            k += 1
        cur = a
        words.append(cur)
        for i in range(len(a) - 1, k - 1, -1):
            cur = cur[:-1]
            words.append(cur)
        for i in range(k, len(b)):
            cur = cur + (b[i],)
            words.append(cur)
        plaques = [region.plaque(w) for w in words]

        # divergence radii: depth past the junction inside each crossed
        # fan, 1 elsewhere (minimum over the fans containing the plaque)
        depths = {}

        def mark(fan, indices):
            w0, slot = fan
            members = []
            for i in indices:
                if self.fan_min_word(plaques[i], slot) == w0:
                    members.append(i)
                else:
                    break
            if not members:
                return
            d_junction = self._fan_step_of(region, fan,
                                           plaques[members[-1]])
            for i in members:
                depth = max(1, d_junction -
                            self._fan_step_of(region, fan, plaques[i]))
                depths[i] = min(depths.get(i, depth), depth)

        if fan_in is not None:
            mark(fan_in, range(len(plaques)))
        if fan_out is not None:
            mark(fan_out, range(len(plaques) - 1, -1, -1))
        radii = [depths.get(i, 1) for i in range(len(plaques))]

        out = []
        for idx, plq in enumerate(plaques):
            if radii[idx] > r_max:
                continue
            s_in = self._shared_side(plq, plaques[idx - 1]) if idx > 0 \
                else None
            s_out = self._shared_side(plq, plaques[idx + 1]) \
                if idx < len(plaques) - 1 else None
            out.append((plq, s_in, s_out, radii[idx]))
        return out

    @staticmethod
    def _shared_side(a, b):
        wa, wb = a.word, b.word
        if len(wa) < len(wb):
            wa, wb = wb, wa
        assert wa[:-1] == wb
        return wa[-1]

    # -------------------------------------------------- paths and replay

    def path_moves(self, plaque):
        """Intrinsic move list from the base plaque to the given plaque.

        Moves: ('s', label) crosses a side; ('j', slot, m) crosses the
        curve lift at a corner with slide m relative to the canonical
        target."""
        chain = []
        r = plaque.region
        while r.parent_cuff is not None:
            chain.append(r)
            parent_side = 1 - r.parent_cuff.side_of(r)
            r = r.parent_cuff.sides[parent_side][0]
        assert r is self.root
        moves = []
        cur = self.base
        for reg in reversed(chain):
            cuff = reg.parent_cuff
            parent_side = 1 - cuff.side_of(reg)
            pregion, pw0, pslot, _ = cuff.sides[parent_side]
            # walk within the parent region to the jump fan's min word
            target = pregion.plaque(pw0)
            moves += self._tree_moves(cur, target)
            cur = target
            # slide so the jump lands exactly on the far fan's min word
            t_cur = self.fan_t(cur, pslot)
            freg, fw0, fslot, _ = cuff.sides[cuff.side_of(reg)]
            t_goal = self.fan_t(freg.plaque(fw0), fslot)
            m = (t_goal - (t_cur + 1)) // 2
            moves.append(("j", pslot, m))
            cur, _ = self.jump(cur, pslot, m)
            assert cur.region is freg and cur.word == fw0
        moves += self._tree_moves(cur, plaque)
        return moves

    def _tree_moves(self, src, dst):
        assert src.region is dst.region
        a, b = src.word, dst.word
        k = 0
        while k < len(a) and k < len(b) and a[k] == b[k]:
            k += 1
        out = [("s", a[i]) for i in range(len(a) - 1, k - 1, -1)]
        out += [("s", b[i]) for i in range(k, len(b))]
        return out

    def replay(self, moves, start=None):
        cur = start if start is not None else self.base
        for mv in moves:
            if mv[0] == "s":
                cur = self.cross(cur, mv[1])
            else:
                cur, _ = self.jump(cur, mv[1], mv[2])
        return cur

    # ------------------------------------------------------ deck elements

    def deck(self, plaque):
        """Deck element sending the base plaque to the given plaque."""
        if plaque.ttype != self.base.ttype or plaque.pants != self.base.pants:
            raise ValueError("plaque is not a translate of the base plaque")
        return DeckElement(self, self.path_moves(plaque))


class DeckElement:
    """Label-preserving automorphism, stored as the move list carrying
    the base plaque to its image."""

    __slots__ = ("u", "moves", "_image")

    def __init__(self, unrolling, moves):
        self.u = unrolling
        self.moves = list(moves)
        self._image = unrolling.replay(self.moves)
        base = unrolling.base
        if self._image.ttype != base.ttype or \
                self._image.pants != base.pants:
            raise ValueError("moves do not produce a deck element")

    @property
    def image(self):
        return self._image

    def apply(self, plaque):
        """Image of an arbitrary plaque."""
        return self.u.replay(self.moves + self.u.path_moves(plaque))

    def __mul__(self, other):
        return DeckElement(self.u, self.moves + other.moves)

    def inverse(self):
        """Inverse element, found by replaying the path of the base
        plaque as seen from the image."""
        # the inverse sends image -> base: its image plaque is obtained
        # by replaying, from the base, the reversed intrinsic path from
        # the image back to the base
        rev = _reverse_path(self.u, self._image)
        return DeckElement(self.u, rev)

    def is_identity(self):
        return self._image is self.u.base

    def __eq__(self, other):
        return isinstance(other, DeckElement) and self._image is other._image

    def __hash__(self):
        return hash(id(self._image))

    def __pow__(self, k):
        if k == 0:
            return DeckElement(self.u, [])
        if k < 0:
            return self.inverse() ** (-k)
        out = self
        for _ in range(k - 1):
            out = out * self
        return out


def _reverse_path(u, plaque):
    """Intrinsic move list from `plaque` back to the base plaque.

    Computed by walking the forward path while recording the reversed
    intrinsic moves."""
    fwd = u.path_moves(plaque)
    rev = []
    cur = u.base
    trail = [cur]
    for mv in fwd:
        if mv[0] == "s":
            cur = u.cross(cur, mv[1])
        else:
            cur, _ = u.jump(cur, mv[1], mv[2])
        trail.append(cur)
    # now walk backward: each reversed move is computed from the arrival
    # plaque's own local data
    for mv, before, after in zip(reversed(fwd), reversed(trail[:-1]),
                                 reversed(trail[1:])):
        if mv[0] == "s":
            rev.append(("s", mv[1]))
        else:
            _, slot, m = mv
            cuff = u.cuff_lift(before, slot)
            far_slot = None
            for k in (0, 1):
                if cuff.sides[k] is not None and \
                        cuff.sides[k][0] is after.region:
                    far_slot = cuff.sides[k][2]
            t_after = u.fan_t(after, far_slot)
            t_before = u.fan_t(before, slot)
            mb = (t_before - (t_after + 1)) // 2
            rev.append(("j", far_slot, mb))
    return rev
