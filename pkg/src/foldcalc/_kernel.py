"""Chord-placement search in the one-vertex polygon model.

Cutting a genus-g surface along the standard loop system opens it into a
4g-gon.  A crossing word then becomes a family of chords of that polygon:
crossing number t of the word contributes one point on the side carrying its
letter and one on the partner side, and consecutive crossings are joined by a
chord through the disk.  The only freedom in such a picture is the ordering
of the crossing points along each loop (the partner side carries them in
reversed order because the gluing is orientation reversing).

This module searches those orderings:

* ``embed`` decides whether a word admits an ordering whose chords are
  pairwise disjoint (the word then describes an embedded curve) and returns
  one such placement.
* ``min_cross`` computes the exact minimum number of transverse crossings
  between the chord systems of two words over all orderings in which each
  word is itself embedded, by depth-first search with branch-and-bound.

This is the hot path of the whole engine.  The same source compiles under
Cython pure mode into ``foldcalc._kernel_c``; ``foldcalc.kernels`` selects
the compiled module at import time when it is available.
"""

from __future__ import annotations

SEARCH_CAP_DEFAULT = 20_000_000


class PlacementCapExceeded(RuntimeError):
    """Raised when the ordering search exceeds its node budget."""


def side_codes(genus):
    """Signed loop codes of the 4g polygon sides in boundary order."""
    codes = []
    for h in range(genus):
        a = 2 * h + 1
        b = 2 * h + 2
        codes.append(a)
        codes.append(b)
        codes.append(-a)
        codes.append(-b)
    return codes


def _build(genus, words):
    """Event and chord tables for a list of crossing words.

    Events are the individual letters; each event owns one point on the
    positive side of its loop and one on the negative side.  Chord t of a
    word joins the entry point of letter t to the exit point of letter t+1
    (a letter exits through the side carrying its own sign).
    """
    side_of = {}
    codes = side_codes(genus)
    for i in range(len(codes)):
        side_of[codes[i]] = i
    ev_code = []
    ev_loop = []
    ev_curve = []
    loops = [[] for _ in range(2 * genus)]
    chords = []
    ev_chords = []
    for q in range(len(words)):
        w = words[q]
        base = len(ev_code)
        n = len(w)
        for t in range(n):
            c = w[t]
            ev_code.append(c)
            ev_loop.append(abs(c) - 1)
            ev_curve.append(q)
            loops[abs(c) - 1].append(base + t)
            ev_chords.append([])
        for t in range(n):
            cid = len(chords)
            e_in = base + t
            e_out = base + (t + 1) % n
            chords.append((e_in, e_out, q))
            ev_chords[e_in].append(cid)
            if e_out != e_in:
                ev_chords[e_out].append(cid)
    return side_of, ev_code, ev_loop, ev_curve, loops, chords, ev_chords


def _point_key(e, code, side_of, ev_loop, loops, rank, span):
    """Boundary coordinate of event e's point on the side carrying `code`."""
    side = side_of[code]
    l = ev_loop[e]
    r = rank[e]
    within = r if code > 0 else len(loops[l]) - 1 - r
    return side * span + within


def _chord_keys(cid, chords, ev_code, side_of, ev_loop, loops, rank, span):
    e_in, e_out, _q = chords[cid]
    k1 = _point_key(e_in, -ev_code[e_in], side_of, ev_loop, loops, rank, span)
    k2 = _point_key(e_out, ev_code[e_out], side_of, ev_loop, loops, rank, span)
    if k1 < k2:
        return k1, k2
    return k2, k1


def _crossing(lo1, hi1, lo2, hi2):
    """Do two boundary chords with distinct endpoints interleave?"""
    in1 = lo1 < lo2 < hi1
    in2 = lo1 < hi2 < hi1
    return in1 != in2


class _State:
    """Mutable search state shared down the recursion."""

    __slots__ = (
        "side_of", "ev_code", "ev_loop", "ev_curve", "loops", "chords",
        "ev_chords", "rank", "next_rank", "missing", "placed", "keys_lo",
        "keys_hi", "plan", "span", "best", "best_orders", "stop_at",
        "find_min", "nodes", "cap",
    )

    def __init__(self, genus, words, stop_at, find_min, cap):
        (self.side_of, self.ev_code, self.ev_loop, self.ev_curve,
         self.loops, self.chords, self.ev_chords) = _build(genus, words)
        ne = len(self.ev_code)
        self.rank = [-1] * ne
        self.next_rank = [0] * (2 * genus)
        self.missing = []
        for cid in range(len(self.chords)):
            e_in, e_out, _q = self.chords[cid]
            self.missing.append(1 if e_in == e_out else 2)
        self.placed = []
        self.keys_lo = [0] * len(self.chords)
        self.keys_hi = [0] * len(self.chords)
        loop_order = sorted(
            range(2 * genus), key=lambda l: (len(self.loops[l]), l))
        self.plan = []
        for l in loop_order:
            for _ in range(len(self.loops[l])):
                self.plan.append(l)
        self.span = ne + 1
        self.best = 1 << 30
        self.best_orders = None
        self.stop_at = stop_at
        self.find_min = find_min
        self.nodes = 0
        self.cap = cap

    def snapshot_orders(self):
        orders = []
        for l in range(len(self.loops)):
            evs = sorted(self.loops[l], key=lambda e: self.rank[e])
            orders.append([e for e in evs])
        return orders

    def run(self):
        self._rec(0, 0)
        return self.best, self.best_orders

    def _rec(self, i, count):
        if self.best <= self.stop_at:
            return
        self.nodes += 1
        if self.nodes > self.cap:
            raise PlacementCapExceeded(
                f"placement search exceeded {self.cap} nodes")
        if i == len(self.plan):
            if count < self.best:
                self.best = count
                self.best_orders = self.snapshot_orders()
            return
        l = self.plan[i]
        cands = self.loops[l]
        for e in cands:
            if self.rank[e] != -1:
                continue
            self.rank[e] = self.next_rank[l]
            self.next_rank[l] += 1
            newly = []
            ok = True
            added = 0
            for cid in self.ev_chords[e]:
                self.missing[cid] -= 1
                if self.missing[cid] == 0:
                    newly.append(cid)
            for cid in newly:
                lo, hi = _chord_keys(
                    cid, self.chords, self.ev_code, self.side_of,
                    self.ev_loop, self.loops, self.rank, self.span)
                self.keys_lo[cid] = lo
                self.keys_hi[cid] = hi
            for idx in range(len(newly)):
                cid = newly[idx]
                qc = self.chords[cid][2]
                lo, hi = self.keys_lo[cid], self.keys_hi[cid]
                for other in self.placed:
                    if _crossing(lo, hi, self.keys_lo[other],
                                 self.keys_hi[other]):
                        if self.chords[other][2] == qc:
                            ok = False
                            break
                        added += 1
                if not ok:
                    break
                for jdx in range(idx):
                    other = newly[jdx]
                    if _crossing(lo, hi, self.keys_lo[other],
                                 self.keys_hi[other]):
                        if self.chords[other][2] == qc:
                            ok = False
                            break
                        added += 1
                if not ok:
                    break
            if ok and count + added < self.best:
                for cid in newly:
                    self.placed.append(cid)
                self._rec(i + 1, count + added)
                for cid in newly:
                    self.placed.pop()
            for cid in self.ev_chords[e]:
                self.missing[cid] += 1
            self.next_rank[l] -= 1
            self.rank[e] = -1
            if self.best <= self.stop_at:
                return


def embed(word, genus, cap=SEARCH_CAP_DEFAULT):
    """Return loop orderings realizing the word as an embedded curve,
    or None when no crossing-free placement exists.

    Orders are lists of event indices (positions in the word) per loop,
    sorted along the loop.
    """
    if len(word) == 0:
        return [[] for _ in range(2 * genus)]
    st = _State(genus, (tuple(word),), stop_at=0, find_min=False, cap=cap)
    best, orders = st.run()
    if orders is None:
        return None
    return orders


def min_cross(w1, w2, genus, stop_at=-1, cap=SEARCH_CAP_DEFAULT):
    """Exact minimum crossing count between the chord systems of two words
    over all placements in which each word is separately embedded.

    Returns (count, orders); count is None when one of the words admits no
    embedded placement at all.  `stop_at` aborts early once the running
    minimum is <= stop_at (useful for disjointness tests).
    """
    st = _State(genus, (tuple(w1), tuple(w2)), stop_at=stop_at,
                find_min=True, cap=cap)
    best, orders = st.run()
    if orders is None:
        return None, None
    return best, orders


def placement_points(words, genus, orders):
    """Chord endpoint coordinates for a completed placement.

    Returns (span, chords) where chords is a list of
    (curve, pos, key_entry, key_exit) in word order per curve; keys are the
    integer boundary coordinates used by the search.
    """
    side_of, ev_code, ev_loop, ev_curve, loops, chords, _ev = _build(
        genus, words)
    ne = len(ev_code)
    span = ne + 1
    rank = [-1] * ne
    for l in range(len(orders)):
        for r in range(len(orders[l])):
            rank[orders[l][r]] = r
    bases = []
    acc = 0
    for w in words:
        bases.append(acc)
        acc += len(w)
    out = []
    for cid in range(len(chords)):
        e_in, e_out, q = chords[cid]
        t = e_in - bases[q]
        k_in = _point_key(e_in, -ev_code[e_in], side_of, ev_loop, loops,
                          rank, span)
        k_out = _point_key(e_out, ev_code[e_out], side_of, ev_loop, loops,
                           rank, span)
        out.append((q, t, k_in, k_out))
    return span, out
