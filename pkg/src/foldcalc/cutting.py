"""Cutting the polygon model along a placed curve.

Given an embedded chord placement of a word, the polygon is cut along the
chords, the side gluings are replayed on the remaining boundary intervals,
and the two parallel copies of the curve are capped with disks.  Component
count and Euler characteristics of the result give the genus bookkeeping of
a surgery without any change of coordinates, which makes this an
independent cross-check for the twist-based surgery engine (and the
component count without caps is the classical separating test).

Chords of an embedded placement never interleave, so the pieces of the cut
polygon follow bracket discipline around the boundary: a piece is exactly
the set of boundary gaps seeing the same stack of open chords.
"""

from __future__ import annotations

from .errors import CurveError
from . import kernels


def _placement_cells(word, genus):
    """Boundary marker sequence and chord data for an embedded placement.

    Returns (markers, chords, gap_side, side_gaps) where markers is the
    cyclic list of boundary items ('corner', side) or ('point', event,
    side_code), and chords are (entry_index, exit_index) into markers.
    """
    word = tuple(word)
    orders = kernels.embed(word, genus)
    if orders is None:
        raise CurveError("word admits no embedded placement")
    codes = kernels.side_codes(genus)
    rank = {}
    loop_count = [len(o) for o in orders]
    for l, evs in enumerate(orders):
        for r, e in enumerate(evs):
            rank[e] = r
    markers = []
    point_at = {}
    for side_idx, code in enumerate(codes):
        markers.append(("corner", side_idx))
        l = abs(code) - 1
        evs = orders[l]
        seq = list(evs) if code > 0 else list(reversed(evs))
        for e in seq:
            point_at[(e, code)] = len(markers)
            markers.append(("point", e, code))
    chords = []
    n = len(word)
    for t in range(n):
        e_in, e_out = t, (t + 1) % n
        k1 = point_at[(e_in, -word[e_in])]
        k2 = point_at[(e_out, word[e_out])]
        chords.append((k1, k2))
    return markers, chords


def _pieces(markers, chords):
    """Piece id per gap (gap g follows marker g) via bracket discipline."""
    nm = len(markers)
    open_at = {}
    close_at = {}
    for cid, (k1, k2) in enumerate(chords):
        a, b = min(k1, k2), max(k1, k2)
        open_at.setdefault(a, []).append(cid)
        close_at.setdefault(b, []).append(cid)
    stack = []
    gap_piece = {}
    pieces = {}
    for pos in range(nm):
        for cid in close_at.get(pos, ()):
            if not stack or stack[-1] != cid:
                # closing out of order: start point was inside; with
                # non-crossing chords this cannot happen
                raise CurveError("placement chords interleave")
            stack.pop()
        for cid in open_at.get(pos, ()):
            stack.append(cid)
        key = tuple(stack)
        if key not in pieces:
            pieces[key] = len(pieces)
        gap_piece[pos] = pieces[key]
    return gap_piece, len(pieces)


class _DSU:
    def __init__(self, n):
        self.p = list(range(n))

    def find(self, x):
        while self.p[x] != x:
            self.p[x] = self.p[self.p[x]]
            x = self.p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.p[ra] = rb


def _analyze(word, genus, capped):
    markers, chords = _placement_cells(word, genus)
    nm = len(markers)
    gap_piece, npieces = _pieces(markers, chords)

    def gap_after(pos):
        return gap_piece[pos]

    def gap_before(pos):
        return gap_piece[(pos - 1) % nm]

    ncells = npieces + (2 if capped else 0)
    dsu = _DSU(ncells)
    CAP_L, CAP_R = npieces, npieces + 1

    # glue boundary gaps side to side (orientation reversing)
    codes = kernels.side_codes(genus)
    side_start = {}
    pos = 0
    side_len = {}
    for side_idx, code in enumerate(codes):
        side_start[code] = pos
        n_pts = sum(1 for m in markers if m[0] == "point" and m[2] == code)
        side_len[code] = n_pts
        pos += 1 + n_pts
    gap_pairs = []
    for code in codes:
        if code < 0:
            continue
        m = side_len[code]
        # gaps of side +code: after markers side_start .. side_start+m
        s_pos = side_start[code]
        t_pos = side_start[-code]
        for k in range(m + 1):
            g1 = (s_pos + k) % nm
            g2 = (t_pos + (m - k)) % nm
            gap_pairs.append((g1, g2))
            dsu.union(gap_piece[g1], gap_piece[g2])

    # chord sides: piece left/right of each directed chord
    chord_sides = []
    for (k1, k2) in chords:
        left = gap_after(k2)
        right = gap_after(k1)
        chord_sides.append((left, right))
        if capped:
            dsu.union(left, CAP_L)
            dsu.union(right, CAP_R)

    comps = {}
    for pid in range(ncells):
        comps.setdefault(dsu.find(pid), []).append(pid)
    if not capped:
        roots = {dsu.find(p) for p in range(npieces)}
        return len(roots), None

    # Euler characteristic per component of the capped closed surface.
    # Cells: faces = pieces + 2 caps; edges = glued gap pairs + 2 copies of
    # each chord; vertices = 2 per event + the single model vertex class.
    events = sorted({m[1] for m in markers if m[0] == "point"})
    chi = {r: 0 for r in comps}
    for pid in range(ncells):
        chi[dsu.find(pid)] += 1
    for (g1, g2) in gap_pairs:
        chi[dsu.find(gap_piece[g1])] -= 1
    for (left, right) in chord_sides:
        chi[dsu.find(left)] -= 1
        chi[dsu.find(right)] -= 1
    # event vertices: the left/right copies live on the chord sides
    n = len(chords)
    for t in range(n):
        left, right = chord_sides[t]
        chi[dsu.find(left)] += 1
        chi[dsu.find(right)] += 1
    corner_gap = gap_piece[0]
    chi[dsu.find(corner_gap)] += 1
    genera = sorted((2 - c) // 2 for c in chi.values())
    for r, c in chi.items():
        if c % 2 != 0:
            raise CurveError("odd Euler characteristic after capping")
    return len(comps), genera


def cut_component_count(word, genus) -> int:
    """Number of components of the surface cut along the curve (no caps).

    1 for a nonseparating curve, 2 for a separating one.
    """
    count, _ = _analyze(word, genus, capped=False)
    return count


def surgered_genera(word, genus):
    """Sorted genera of the closed surface obtained by cutting the
    genus-`genus` model along the placed word and capping both copies."""
    _, genera = _analyze(word, genus, capped=True)
    return genera
