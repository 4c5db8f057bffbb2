"""Combinatorial isomorphism of decorated diagrams.

Two diagrams are isomorphic when an orientation-preserving bijection of
vertices and segments matches kinds, rotations, co-orientations, region
fiber shapes, decorations up to isotopy, the disk boundary order, and the
nesting structure.  Segment ids and the traversal direction of individual
segments are not part of the data.

The search seeds a segment-to-segment correspondence and propagates it
through rotations; components without vertices (fold circles) are matched
by attributes afterwards.  Sizes are desk scale, so the seed loop is
quadratic in segments.
"""

from __future__ import annotations

from itertools import permutations

from .diagram import Diagram, other_side
from .errors import FoldError
from .fiber import normal_form


def _seg_sig(d: Diagram, sid: str, flip: bool):
    s = d.segments[sid]
    higher = other_side(s.higher) if flip else s.higher
    dec = d.decorations.get(sid)
    dw = (dec.component, normal_form(dec.word, dec.genus)) if dec else None
    try:
        hi = d.higher_region(sid)
        lo = d.lower_region(sid)
        fibs = (d.region_by_id(hi.id).fiber, d.region_by_id(lo.id).fiber)
        shapes = tuple(f.genera if f else None for f in fibs)
    except FoldError:
        shapes = None
    return (s.ends is None, higher, dw, shapes)


def _vertex_pieces(d: Diagram):
    """Connected components of segments through shared vertices only."""
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for sid, s in d.segments.items():
        if s.ends is None:
            continue
        parent.setdefault(sid, sid)
        for v in s.ends:
            parent.setdefault(v, v)
            ra, rb = find(sid), find(v)
            if ra != rb:
                parent[ra] = rb
    groups = {}
    for sid, s in d.segments.items():
        if s.ends is None:
            continue
        groups.setdefault(find(sid), set()).add(sid)
    return {min(segs): segs for segs in groups.values()}


def _match_component(d1: Diagram, d2: Diagram, s0: str, t0: str,
                     flip0: bool):
    """Extend s0 -> (t0, flip0) over the connected component; returns the
    (seg_map, vertex_map) or None."""
    seg_map = {s0: (t0, flip0)}
    vmap = {}
    stack = [s0]
    while stack:
        sid = stack.pop()
        tid, flip = seg_map[sid]
        s, t = d1.segments[sid], d2.segments[tid]
        if (s.ends is None) != (t.ends is None):
            return None
        if _seg_sig(d1, sid, False) != _seg_sig(d2, tid, flip):
            return None
        if s.ends is None:
            continue
        for k in range(2):
            v1 = s.ends[k]
            v2 = t.ends[k if not flip else 1 - k]
            if vmap.get(v1, v2) != v2:
                return None
            if v1 in vmap:
                continue
            if d1.vertices[v1].kind != d2.vertices[v2].kind:
                return None
            vmap[v1] = v2
            r1 = [tuple(p) for p in d1.rotations[v1]]
            r2 = [tuple(p) for p in d2.rotations[v2]]
            if len(r1) != len(r2):
                return None
            p1 = (sid, k)
            p2 = (tid, k if not flip else 1 - k)
            try:
                i1, i2 = r1.index(p1), r2.index(p2)
            except ValueError:
                return None
            for off in range(len(r1)):
                q1 = r1[(i1 + off) % len(r1)]
                q2 = r2[(i2 + off) % len(r2)]
                nsid, nk = q1
                ntid, ntk = q2
                nflip = (nk != ntk)
                if nsid in seg_map:
                    if seg_map[nsid] != (ntid, nflip):
                        return None
                else:
                    seg_map[nsid] = (ntid, nflip)
                    stack.append(nsid)
    return seg_map, vmap


def diagram_isomorphic(d1: Diagram, d2: Diagram) -> bool:
    """Decide combinatorial isomorphism of two valid diagrams."""
    if d1.base != d2.base:
        return False
    if len(d1.vertices) != len(d2.vertices) or \
            len(d1.segments) != len(d2.segments):
        return False
    kinds1 = sorted(v.kind for v in d1.vertices.values())
    kinds2 = sorted(v.kind for v in d2.vertices.values())
    if kinds1 != kinds2:
        return False
    try:
        f1 = sorted(f.genera for f in
                    (r.fiber for r in d1.compute_regions()) if f)
        f2 = sorted(f.genera for f in
                    (r.fiber for r in d2.compute_regions()) if f)
    except FoldError:
        return False
    if f1 != f2:
        return False
    comps1 = _vertex_pieces(d1)
    comps2 = _vertex_pieces(d2)
    vertexed1 = sorted(comps1)
    vertexed2 = sorted(comps2)
    circles1 = sorted(s for s in d1.segments
                      if d1.segments[s].ends is None)
    circles2 = sorted(s for s in d2.segments
                      if d2.segments[s].ends is None)
    if len(vertexed1) != len(vertexed2) or len(circles1) != len(circles2):
        return False

    full_seg_map = {}

    def try_components(idx, used):
        if idx == len(vertexed1):
            return match_circles()
        key = vertexed1[idx]
        segs = sorted(s for s in comps1[key] if d1.segments[s].ends)
        s0 = segs[0]
        for key2 in vertexed2:
            if key2 in used:
                continue
            for t0 in sorted(s for s in comps2[key2]
                             if d2.segments[t0 if False else s].ends):
                for flip in (False, True):
                    got = _match_component(d1, d2, s0, t0, flip)
                    if got is None:
                        continue
                    seg_map, _vmap = got
                    saved = dict(full_seg_map)
                    full_seg_map.update(seg_map)
                    if try_components(idx + 1, used | {key2}):
                        return True
                    full_seg_map.clear()
                    full_seg_map.update(saved)
        return False

    def match_circles():
        if not circles1:
            return check_global()
        sigs2 = {}
        for c2 in circles2:
            for flip in (False, True):
                sigs2.setdefault(_seg_sig(d2, c2, flip), []).append(
                    (c2, flip))
        for perm in permutations(circles2):
            ok = True
            trial = {}
            for c1, c2 in zip(circles1, perm):
                matched = None
                for flip in (False, True):
                    if _seg_sig(d1, c1, False) == _seg_sig(d2, c2, flip):
                        matched = flip
                        break
                if matched is None:
                    ok = False
                    break
                trial[c1] = (c2, matched)
            if not ok:
                continue
            saved = dict(full_seg_map)
            full_seg_map.update(trial)
            if check_global():
                return True
            full_seg_map.clear()
            full_seg_map.update(saved)
        return False

    def map_ref(ref):
        if ref.startswith("@"):
            return ref
        sid, _, side = ref.rpartition(":")
        if sid not in full_seg_map:
            return None
        tid, flip = full_seg_map[sid]
        return f"{tid}:{other_side(side) if flip else side}"

    def check_global():
        if len(full_seg_map) != len(d1.segments):
            return False
        # boundary cyclic order (orientation preserving)
        if d1.base == "disk":
            b1 = list(d1.boundary)
            b2 = list(d2.boundary)
            if len(b1) != len(b2):
                return False
            if b1:
                vm = {}
                for sid, (tid, flip) in full_seg_map.items():
                    s, t = d1.segments[sid], d2.segments[tid]
                    if s.ends is None:
                        continue
                    for k in range(2):
                        vm[s.ends[k]] = t.ends[k if not flip else 1 - k]
                image = [vm.get(v) for v in b1]
                if None in image:
                    return False
                dbl = b2 + b2
                if not any(dbl[i:i + len(b2)] == image
                           for i in range(len(b2))):
                    return False
        # nesting structure
        n1 = set()
        for _key, (host, own) in d1.nesting.items():
            h, o = map_ref(host), map_ref(own)
            if h is None or o is None:
                return False
            n1.add((h, o))
        n2 = {(h, o) for _k, (h, o) in d2.nesting.items()}
        if n1 != n2:
            return False
        # region fibers through the mapping
        try:
            for r in d1.compute_regions():
                fib1 = r.fiber
                ref2 = None
                for (sid, side) in sorted(r.sides()):
                    ref2 = map_ref(f"{sid}:{side}")
                    if ref2:
                        break
                if ref2 is None:
                    continue
                fib2 = d2.region_by_ref(ref2).fiber
                g1 = fib1.genera if fib1 else None
                g2 = fib2.genera if fib2 else None
                if g1 != g2:
                    return False
        except FoldError:
            return False
        return True

    return try_components(0, set())
