"""Surgery on a fiber along a vanishing cycle, with curve transport.

Crossing a fold toward its lower-genus side replaces the fiber by the result
of surgery along the decorating cycle: a nonseparating cycle drops the genus
of its component by one, a separating cycle splits the component in two.

Coordinates: a change-of-coordinates search twists the cycle into a standard
position, where the rules are letter-wise.

* nonseparating, standard position = the curve dual to loop b1 (crossing
  word "b1", isotopic to the model loop a1): curves disjoint from it have
  representatives free of a1 crossings; after the surgery their b1 crossings
  slide off through the caps, so transport deletes the b1 letters and
  re-indexes the remaining handles down by one.
* separating into genus h | g-h, standard position = the handle-boundary
  word a1 b1 A1 B1 ... Ah Bh: a disjoint curve has a representative confined
  to one handle range, and transport re-reads that range as the new
  component's alphabet.

The recorded twist sequence replays forward to transport other curves and
backward (inverted) to lift curves from the surgered fiber into the original
one; the backward direction is the canonical handle-avoiding lift.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import (CoordinateSearchFailed, CurveError, NotTransportable,
                     OrbitCapExceeded)
from .fiber import (Curve, FiberComponent, FiberModel, curve as make_curve,
                    intersection_number, is_separating, normal_form,
                    rep_avoiding, twist_word)
from .words import Word, reduce_cyclic, word_str


class VanishedCycle:
    """Distinguished transport outcome: the curve bounds after surgery."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VANISHED"


VANISHED = VanishedCycle()


def _sep_word(h: int) -> Word:
    """Crossing word of the curve splitting off handles 1..h.

    For a single handle the commutator-shaped word a1 b1 A1 B1 embeds at
    every genus; for h >= 2 the embedded representative is the product of
    vertex-link blocks a_j B_j A_j b_j (the naive concatenation of
    commutator words admits no crossing-free placement).
    """
    if h == 1:
        return (1, 2, -1, -2)
    out = []
    for j in range(1, h + 1):
        a, b = 2 * j - 1, 2 * j
        out += [a, -b, -a, b]
    return tuple(out)


def _generators(genus: int):
    """Twist curves used by the coordinate search: the handle duals plus a
    chain word linking consecutive handles (a Lickorish-sized family)."""
    gens = []
    for l in range(1, 2 * genus + 1):
        gens.append((l,))
    for i in range(1, genus):
        gens.append((2 * i - 1, 2 * i + 1))
    return gens


@dataclass(frozen=True)
class SurgeryCoords:
    """Replayable change of coordinates: twists taking the cycle to a
    standard position in its component."""
    kind: str            # "nonsep" | "sep"
    h: int               # handle split point for "sep", 0 otherwise
    twists: tuple        # ((delta_word, power), ...) applied first-to-last
    genus: int

    def push(self, w: Word) -> Word:
        for delta, power in self.twists:
            w = twist_word(w, delta, self.genus, power)
        return w

    def pull(self, w: Word) -> Word:
        for delta, power in reversed(self.twists):
            w = twist_word(w, delta, self.genus, -power)
        return w


@dataclass(frozen=True)
class SurgeryResult:
    before: FiberModel
    along: Curve
    after: FiberModel
    component_map: tuple   # component_map[i] = tuple of after-indices
    coords: SurgeryCoords
    _tag_map: tuple        # (before_tag -> after tags) bookkeeping pairs

    @property
    def componentMap(self):
        return {i: list(v) for i, v in enumerate(self.component_map)}


def _find_coords(v: Curve, cap_nodes: int = 4000) -> SurgeryCoords:
    """Best-first twist search bringing v to a standard position."""
    g = v.genus
    start = normal_form(v.word, g)
    targets = {}
    if g >= 1:
        targets[normal_form((2,), g)] = ("nonsep", 0)
    for h in range(1, g):
        targets[normal_form(_sep_word(h), g)] = ("sep", h)
    gens = _generators(g)
    seen = {start: ()}
    heap = [(len(start), start)]
    nodes = 0
    while heap:
        _, w = heapq.heappop(heap)
        path = seen[w]
        if w in targets:
            kind, h = targets[w]
            return SurgeryCoords(kind=kind, h=h, twists=path, genus=g)
        nodes += 1
        if nodes > cap_nodes:
            break
        for delta in gens:
            for power in (1, -1):
                try:
                    nxt = normal_form(twist_word(w, delta, g, power), g)
                except (CurveError, OrbitCapExceeded):
                    continue
                if not nxt or nxt in seen:
                    continue
                seen[nxt] = path + ((delta, power),)
                heapq.heappush(heap, (len(nxt), nxt))
    raise CoordinateSearchFailed(
        f"no standard position reached for {word_str(v.word)} (genus {g})")


def surger(F: FiberModel, v: Curve) -> SurgeryResult:
    """Surger F along the embedded essential cycle v."""
    comp = F.components[v.component]
    if comp.genus != v.genus:
        raise CurveError("cycle genus does not match its component")
    if comp.genus == 0:
        raise CurveError("no essential cycle lives in a genus-0 component")
    coords = _find_coords(v)
    fresh = max(c.tag for c in F.components) + 1
    if coords.kind == "nonsep":
        new_comps = [FiberComponent(comp.genus - 1, fresh)]
    else:
        h = coords.h
        new_comps = [FiberComponent(h, fresh),
                     FiberComponent(comp.genus - h, fresh + 1)]
    after_list = [c for c in F.components if c is not comp] + new_comps
    after = FiberModel(after_list)
    cmap = []
    tag_pairs = []
    for i, c in enumerate(F.components):
        if c is comp:
            idxs = tuple(after.components.index(nc) for nc in new_comps)
        else:
            idxs = (after.components.index(c),)
        cmap.append(idxs)
        tag_pairs.append((c.tag, tuple(after.components[j].tag
                                       for j in idxs)))
    return SurgeryResult(before=F, along=v, after=after,
                         component_map=tuple(cmap), coords=coords,
                         _tag_map=tuple(tag_pairs))


def _strip_handle(w: Word) -> Word:
    """Transport rule in nonseparating standard position: drop the letters
    of the surgered handle and shift the rest down."""
    out = []
    for c in w:
        a = abs(c)
        if a == 1:
            raise NotTransportable(
                "representative still crosses the surgered handle")
        if a == 2:
            continue
        out.append((a - 2) * (1 if c > 0 else -1))
    return tuple(out)


def _split_sides(w: Word, h: int):
    """Side of the standard separating curve a word lives on, or None if
    it straddles both handle ranges."""
    lo = all(abs(c) <= 2 * h for c in w)
    hi = all(abs(c) > 2 * h for c in w)
    if lo:
        return 0
    if hi:
        return 1
    return None


def transport(c: Curve, s: SurgeryResult) -> Curve | VanishedCycle:
    """Re-express c in the surgered fiber.

    Requires intersection_number(c, s.along) == 0; raises NotTransportable
    otherwise.  Returns VANISHED when c bounds after the surgery (in
    particular for c isotopic to the surgered cycle itself).
    """
    F = s.before
    if c.component != s.along.component:
        new_idx = s.component_map[c.component][0]
        return Curve(new_idx, c.word, s.after.genus_of(new_idx))
    if intersection_number(c, s.along, F) != 0:
        raise NotTransportable(
            f"cycle {word_str(c.word)} meets the surgered cycle")
    g = c.genus
    w = normal_form(s.coords.push(c.word), g)
    if not w:
        return VANISHED
    if s.coords.kind == "nonsep":
        if any(abs(x) == 1 for x in w):
            w = rep_avoiding(w, g, (1,))
            if w is None:
                raise NotTransportable(
                    f"found no representative of {word_str(c.word)} clear "
                    "of the surgered handle")
        out = _strip_handle(w)
        new_idx = s.component_map[c.component][0]
        new_genus = s.after.genus_of(new_idx)
        nf = normal_form(out, new_genus)
        if not nf:
            return VANISHED
        return Curve(new_idx, nf, new_genus)
    h = s.coords.h
    side = _split_sides(w, h)
    if side is None:
        w1 = rep_avoiding(w, g, tuple(range(2 * h + 1, 2 * g + 1)))
        if w1 is not None:
            w, side = w1, 0
        else:
            w2 = rep_avoiding(w, g, tuple(range(1, 2 * h + 1)))
            if w2 is not None:
                w, side = w2, 1
            else:
                raise NotTransportable(
                    f"no representative of {word_str(c.word)} clears the "
                    "splitting cycle")
    if side == 0:
        out = w
    else:
        out = tuple((abs(x) - 2 * h) * (1 if x > 0 else -1) for x in w)
    new_idx = s.component_map[c.component][side]
    new_genus = s.after.genus_of(new_idx)
    nf = normal_form(out, new_genus)
    if not nf:
        return VANISHED
    return Curve(new_idx, nf, new_genus)


@dataclass(frozen=True)
class Unsurgery:
    """A fiber with one fresh handle re-attached, in standard position.

    `before` is the low (surgered) fiber, `after` the result of attaching a
    handle with feet in the given components.  The belt curve of the new
    handle is the vanishing cycle of a fold whose higher-genus side carries
    `after`; `inject` re-reads a low-side curve in the high model (the
    canonical handle-avoiding lift, so injected curves are always disjoint
    from the belt).
    """
    before: FiberModel
    after: FiberModel
    feet: tuple
    belt: Curve
    component_map: tuple   # before index -> after index

    def inject(self, c: Curve) -> Curve:
        new_idx = self.component_map[c.component]
        g_new = self.after.genus_of(new_idx)
        if c.component == self.feet[0] or c.component == self.feet[1]:
            word = self._inject_word(c)
        else:
            word = c.word
        nf = normal_form(word, g_new)
        if not nf:
            raise CurveError("injected curve collapsed")
        return Curve(new_idx, nf, g_new)

    def _inject_word(self, c: Curve) -> Word:
        k1, k2 = self.feet
        if k1 == k2:
            return c.word
        if c.component == k1:
            return c.word
        g1 = self.before.genus_of(k1)
        return tuple((abs(x) + 2 * g1) * (1 if x > 0 else -1)
                     for x in c.word)


def unsurger(F: FiberModel, feet) -> Unsurgery:
    """Re-attach a handle to F with feet in the named component(s).

    feet = (k, k) adds a handle to component k (genus + 1, belt = the new
    last handle's dual); feet = (k1, k2) with k1 != k2 joins the two
    components (genera add, belt = the standard curve splitting them
    again).  This is the model-level inverse of `surger` and the canonical
    way to label a region swept from the lower-genus side of a fold.
    """
    k1, k2 = feet
    fresh = max(c.tag for c in F.components) + 1
    if k1 == k2:
        g = F.genus_of(k1)
        new_comp = FiberComponent(g + 1, fresh)
        belt_word = (2 * (g + 1),)
    else:
        g1, g2 = F.genus_of(k1), F.genus_of(k2)
        if g1 == 0 or g2 == 0:
            raise CurveError(
                "handle feet in a sphere component would need a trivial "
                "belt cycle")
        new_comp = FiberComponent(g1 + g2, fresh)
        belt_word = _sep_word(g1)
    after_list = [c for i, c in enumerate(F.components) if i not in (k1, k2)]
    after_list.append(new_comp)
    after = FiberModel(after_list)
    new_idx = after.components.index(new_comp)
    cmap = []
    for i, c in enumerate(F.components):
        if i in (k1, k2):
            cmap.append(new_idx)
        else:
            cmap.append(after.components.index(c))
    g_new = new_comp.genus
    belt_nf = normal_form(belt_word, g_new)
    belt = Curve(new_idx, belt_nf, g_new)
    return Unsurgery(before=F, after=after, feet=(k1, k2), belt=belt,
                     component_map=tuple(cmap))


def lift(c: Curve, s: SurgeryResult) -> Curve:
    """Canonical lift of a curve from the surgered fiber back to the
    original one: the representative avoiding the new handle (nonsep) or
    confined to its side (sep), pulled back through the recorded twists.

    Always defined; transport(lift(c), s) recovers c's class.
    """
    inverse_map = {}
    for i, idxs in enumerate(s.component_map):
        for pos, j in enumerate(idxs):
            inverse_map[j] = (i, pos)
    src, pos = inverse_map[c.component]
    if src != s.along.component:
        return Curve(src, c.word, s.before.genus_of(src))
    g = s.before.genus_of(src)
    if s.coords.kind == "nonsep":
        inj = tuple((abs(x) + 2) * (1 if x > 0 else -1) for x in c.word)
    else:
        h = s.coords.h
        if pos == 0:
            inj = c.word
        else:
            inj = tuple((abs(x) + 2 * h) * (1 if x > 0 else -1)
                        for x in c.word)
    w = normal_form(s.coords.pull(inj), g)
    if not w:
        raise CurveError("lift collapsed; surgered fiber curve was trivial")
    return Curve(src, w, g)
