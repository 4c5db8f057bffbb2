"""Legality checks and rewrites for the elementary moves.

Verdicts are three-valued.  Legal cites the clause that fired; Illegal is
produced only by the matching-cycles biconditional of the mixed-side lune
removal (rule 2); every other failed hypothesis yields Undetermined, since
the move catalog's conditions are sufficient, not necessary.

Rule tags: "1a", "1b" (finger), "2", "3", "4" (lune removal), "cusp-fold",
"r3".  Undetermined verdicts carry the failed hypothesis as the rule, e.g.
"2-hypothesis" for the fiber-genus floor of rule 2.

The applies rebuild the diagram combinatorially and re-derive fiber labels
and decorations: regions that keep a surviving segment side inherit its old
fiber, swept regions are labeled through surgery (forward transport across
a fold toward its lower-genus side, the canonical handle-avoiding lift
toward its higher side), and every apply ends by validating the rewritten
diagram.
"""

from __future__ import annotations

from dataclasses import dataclass

from .diagram import Diagram, Region, Segment, Vertex, other_side
from .errors import (AnchorError, CurveError, FoldError, NotTransportable,
                     RefusedMove)
from .fiber import (Curve, FiberModel, are_isotopic, intersection_number,
                    make_fiber, normal_form)
from .surgery import (VANISHED, lift as surgery_lift, surger, transport,
                      unsurger)
from .validate import expected_lower, validate
from .words import word_str

LEGAL, ILLEGAL, UNDETERMINED = "Legal", "Illegal", "Undetermined"


@dataclass(frozen=True)
class Verdict:
    outcome: str
    rule: str
    explanation: str

    @property
    def legal(self) -> bool:
        return self.outcome == LEGAL

    def __str__(self):
        return f"{self.outcome}({self.rule}): {self.explanation}"

    def to_json(self):
        return {"outcome": self.outcome, "rule": self.rule,
                "explanation": self.explanation}


# -- shared plumbing ---------------------------------------------------------


def _region(d: Diagram, ref) -> Region:
    if isinstance(ref, Region):
        return ref
    try:
        return d.region_by_ref(ref)
    except FoldError:
        try:
            return d.region_by_id(ref)
        except FoldError:
            raise AnchorError(f"no region {ref!r}") from None


def _fiber(d: Diagram, region: Region) -> FiberModel:
    r = d.region_by_id(region.id)
    if r.fiber is None:
        for ref, fib in d.fibers.items():
            try:
                if d.region_by_ref(ref).id == r.id:
                    return fib
            except FoldError:
                continue
        raise AnchorError(f"region {r.ref} carries no fiber label")
    return r.fiber


def _dec(d: Diagram, sid: str) -> Curve:
    dec = d.decorations.get(sid)
    if dec is None:
        raise AnchorError(f"segment {sid} carries no decoration")
    return dec


def _align(c: Curve, F: FiberModel) -> Curve:
    """Reinterpret a curve into an equal-shaped fiber model.

    Fiber labels are plain genus lists, so component identity across equal
    models goes by canonical position.
    """
    if not (0 <= c.component < len(F)) or \
            F.genus_of(c.component) != c.genus:
        raise RefusedMove(
            f"cycle {word_str(c.word)} does not fit fiber {F.genera}")
    return Curve(c.component, c.word, c.genus)


def _transport_across(c: Curve, F_high: FiberModel, v: Curve) -> Curve:
    """Image of c after crossing a fold with cycle v, higher side F_high."""
    sr = surger(F_high, _align(v, F_high))
    out = transport(_align(c, F_high), sr)
    if out is VANISHED:
        raise RefusedMove(
            f"cycle {word_str(c.word)} dies crossing the fold along "
            f"{word_str(v.word)}")
    return out


def _lift_across(c_low: Curve, F_high: FiberModel, v: Curve) -> Curve:
    """Canonical lift of a lower-side cycle to the higher side of a fold."""
    sr = surger(F_high, _align(v, F_high))
    if sr.after.genera != tuple(sorted(
            sr.after.genera)):  # pragma: no cover - canonical by build
        raise AssertionError
    aligned = Curve(c_low.component, c_low.word, c_low.genus)
    if not (0 <= aligned.component < len(sr.after)) or \
            sr.after.genus_of(aligned.component) != aligned.genus:
        raise RefusedMove("lift target does not match the surgered fiber")
    return surgery_lift(aligned, sr)


def _feet_of(F_high: FiberModel, v: Curve):
    """Components of surger(F_high, v).after that carry the surgery caps."""
    sr = surger(F_high, _align(v, F_high))
    idxs = sr.component_map[v.component]
    if len(idxs) == 1:
        return sr, (idxs[0], idxs[0])
    return sr, (idxs[0], idxs[1])


def _fresh_vertex_ids(d: Diagram, n: int):
    out = []
    k = 1
    while len(out) < n:
        vid = f"x{k}"
        if vid not in d.vertices and vid not in out:
            out.append(vid)
        k += 1
    return out


def _fresh_segment_id(d: Diagram, base: str, taken):
    cand = base
    while cand in d.segments or cand in taken:
        cand += "'"
    taken.add(cand)
    return cand


def _quadrants(d: Diagram, vid):
    """quad[j] = region in the corner between rotation ports j and j+1."""
    ports = d.rotations[vid]
    quads = []
    for j in range(len(ports)):
        sid, k = ports[(j + 1) % len(ports)]
        side = "left" if k == 1 else "right"
        quads.append(d.region_of_side(sid, side))
    return quads


# -- checks ------------------------------------------------------------------


def check_finger(d: Diagram, pushing: str, target: str, through) -> Verdict:
    """Push a bit of `pushing` across `target` through the named region."""
    if pushing not in d.segments or target not in d.segments:
        raise AnchorError("finger anchors name unknown segments")
    if pushing == target:
        raise AnchorError("cannot push a segment across itself")
    r = _region(d, through)
    sides_p = [s for s in ("left", "right")
               if d.genus_side(pushing, r) != "not-adjacent"
               and d.region_of_side(pushing, s).id == r.id]
    sides_t = [s for s in ("left", "right")
               if d.region_of_side(target, s).id == r.id]
    if not sides_p or not sides_t:
        raise AnchorError(
            f"segments {pushing}, {target} must both border region {r.ref}")
    gp = d.genus_side(pushing, r)
    gt = d.genus_side(target, r)
    if gp == "lower" or gt == "lower":
        which = []
        if gp == "lower":
            which.append(pushing)
        if gt == "lower":
            which.append(target)
        return Verdict(LEGAL, "1a",
                       f"region {r.ref} is the lower-genus side of "
                       f"{' and '.join(which)}")
    vp, vt = _dec(d, pushing), _dec(d, target)
    F = _fiber(d, r)
    n = intersection_number(vp, vt, F)
    if n == 0:
        return Verdict(
            LEGAL, "1b",
            f"region {r.ref} is the higher-genus side of both; cycles "
            f"{word_str(vp.word)} and {word_str(vt.word)} are disjoint "
            "there")
    return Verdict(
        UNDETERMINED, "1-hypothesis",
        f"region {r.ref} is the higher-genus side of both and the cycles "
        f"{word_str(vp.word)}, {word_str(vt.word)} meet {n} times; no "
        "clause of the finger rule applies")


def _lune_pattern(d: Diagram, lune: Region):
    """Decompose a bigon region bounded by two fold paths crossing twice.

    Returns (x1, x2, path1, path2) where each path is the ordered list of
    segment ids between the two crossings along one side of the lune, and
    the paths may pass through cusps but not through other crossings.
    """
    if len(lune.boundary) != 1:
        raise AnchorError(f"region {lune.ref} is not a bigon")
    walk = lune.boundary[0]
    # each walk entry (seg, side) is a dart: side 'left' means the face
    # lies left of the forward traversal; the vertex after entry i is the
    # head of that dart
    verts = []
    for (sid, side) in walk:
        s = d.segments[sid]
        if s.ends is None:
            raise AnchorError("lune boundary runs through a fold circle")
        verts.append(s.ends[1] if side == "left" else s.ends[0])
    crossings = [i for i, v in enumerate(verts)
                 if d.vertices[v].kind == "crossing"]
    cusps = [i for i, v in enumerate(verts)
             if d.vertices[v].kind == "cusp"]
    if len(crossings) != 2 or len(crossings) + len(cusps) != len(verts):
        raise AnchorError(
            f"region {lune.ref} is not a lune: needs exactly two crossing "
            "corners (plus optional cusps)")
    i1, i2 = crossings
    x1, x2 = verts[i1], verts[i2]
    path1 = [walk[j % len(walk)][0] for j in range(i1 + 1, i2 + 1)]
    path2 = [walk[j % len(walk)][0]
             for j in range(i2 + 1, i2 + 1 + (len(walk) - (i2 - i1)))]
    return x1, x2, path1, path2


def _path_lune_side(d: Diagram, path, lune: Region) -> str:
    sides = {d.genus_side(sid, lune) for sid in path}
    if len(sides) != 1 or "not-adjacent" in sides:
        raise AnchorError("lune side is inconsistent along one path")
    return sides.pop()


def _flanks(d: Diagram, path, x_first, x_last):
    """Strand continuations of a lune path beyond the two crossings."""
    first, last = path[0], path[-1]
    s1 = d.segments[first]
    port_in = (first, 0 if s1.ends[0] == x_first else 1)
    exit1 = d.strand_exit(x_first, port_in)
    s2 = d.segments[last]
    port_out = (last, 0 if s2.ends[0] == x_last else 1)
    exit2 = d.strand_exit(x_last, port_out)
    return exit1[0], exit2[0]


def check_r2_removal(d: Diagram, lune) -> Verdict:
    """Remove a bigon bounded by two fold paths crossing twice."""
    r = _region(d, lune)
    x1, x2, path1, path2 = _lune_pattern(d, r)
    side1 = _path_lune_side(d, path1, r)
    side2 = _path_lune_side(d, path2, r)
    cusped = len(path1) + len(path2) > 2
    if side1 == "lower" and side2 == "lower":
        extra = " (cusps on the lune boundary are fine)" if cusped else ""
        return Verdict(LEGAL, "3",
                       f"the lune {r.ref} lies on the lower-genus side of "
                       f"both fold paths{extra}")
    if cusped:
        return Verdict(
            UNDETERMINED, "cusped-lune",
            "cusps on the lune boundary are only covered when the lune is "
            "on the lower-genus side of both folds")
    F_lune = _fiber(d, r)
    if side1 != side2:
        phi = path1[0] if side1 == "higher" else path2[0]
        x_f, x_l = (x1, x2)
        if min(g for g in F_lune.genera) < 2:
            return Verdict(
                UNDETERMINED, "2-hypothesis",
                f"rule 2 needs every fiber component over the lune to have "
                f"genus at least 2, but the fiber there is {F_lune.genera}")
        sL, sR = _flanks(d, [phi], x_f, x_l)
        hL, hR = d.higher_region(sL), d.higher_region(sR)
        if hL.id != hR.id:
            return Verdict(
                UNDETERMINED, "2-reference",
                f"the runs {sL} and {sR} are measured in different regions "
                f"({hL.ref} vs {hR.ref}); comparing them would need "
                "monodromy data the diagram does not carry")
        cL, cR = _dec(d, sL), _dec(d, sR)
        FH = _fiber(d, hL)
        if are_isotopic(cL, cR, FH):
            return Verdict(
                LEGAL, "2",
                f"the cycles of {phi}'s strand at both crossings match "
                f"measured from {hL.ref}: {word_str(cL.word)}")
        return Verdict(
            ILLEGAL, "2",
            f"the cycles of {phi}'s strand differ at the two crossings "
            f"measured from {hL.ref}: {word_str(cL.word)} vs "
            f"{word_str(cR.word)}; the removal would leave a crossing-free "
            "arc with mismatched end cycles")
    # higher/higher
    star = _closed_star_fibers(d, set(path1) | set(path2), r)
    disconnected = [f.genera for f in star if len(f) > 1]
    if disconnected:
        return Verdict(
            UNDETERMINED, "4-hypothesis",
            f"rule 4 needs connected fibers near the lune; found "
            f"{disconnected[0]}")
    if min(F_lune.genera) < 2:
        return Verdict(
            UNDETERMINED, "4-hypothesis",
            f"rule 4 needs the lune fiber to have genus at least 2; it is "
            f"{F_lune.genera}")
    return Verdict(LEGAL, "4",
                   f"the lune {r.ref} lies on the higher-genus side of "
                   "both folds, nearby fibers are connected, and the lune "
                   f"fiber {F_lune.genera} has genus at least 2")


def _closed_star_fibers(d: Diagram, segs, *extra_regions):
    regions = {r.id: r for r in extra_regions}
    for sid in segs:
        for side in ("left", "right"):
            r = d.region_of_side(sid, side)
            regions[r.id] = r
    return [_fiber(d, r) for r in regions.values()]


def check_cusp_fold(d: Diagram, cusp: str, arc: str) -> Verdict:
    """Push the fold `arc` across the cusp point."""
    v = d.vertices.get(cusp)
    if v is None or v.kind != "cusp":
        raise AnchorError(f"{cusp} is not a cusp vertex")
    s = d.segments.get(arc)
    if s is None:
        raise AnchorError(f"no segment {arc}")
    (a1, _), (a2, _) = d.rotations[cusp]
    if arc in (a1, a2):
        raise AnchorError("the moving fold must not be an arm of the cusp")
    outer = d.higher_region(a1)
    if d.higher_region(a2).id != outer.id:
        raise AnchorError("cusp arms do not share their higher-genus side")
    if d.genus_side(arc, outer) == "not-adjacent":
        raise AnchorError(
            f"fold {arc} does not border the cusp's region {outer.ref}")
    side = d.genus_side(arc, outer)
    return Verdict(LEGAL, "cusp-fold",
                   f"a fold can always cross a cusp; here {outer.ref} is "
                   f"the {side}-genus side of {arc}")


def check_r3(d: Diagram, triangle, moving: str) -> Verdict:
    """Slide the arc `moving` across the opposite crossing of a triangle."""
    r = _region(d, triangle)
    if len(r.boundary) != 1 or len(r.boundary[0]) != 3:
        raise AnchorError(f"region {r.ref} is not a triangle")
    walk = r.boundary[0]
    segs = [s for (s, _) in walk]
    if moving not in segs:
        raise AnchorError(f"{moving} does not bound the triangle {r.ref}")
    corners = []
    for (sid, side) in walk:
        s = d.segments[sid]
        if s.ends is None:
            raise AnchorError("triangle boundary runs through a circle")
        corners.append(s.ends[1] if side == "left" else s.ends[0])
    kinds = {d.vertices[v].kind for v in corners}
    if kinds != {"crossing"}:
        return Verdict(
            UNDETERMINED, "r3-no-cusp",
            "the triangle's corners must all be fold crossings; a cusp "
            "sits on the triangle")
    inside = _cusp_inside(d, r)
    if inside:
        return Verdict(
            UNDETERMINED, "r3-no-cusp",
            f"cusp {inside} lies inside the triangle; the slide needs a "
            "cusp-free triangle")
    star = _closed_star_fibers(d, set(segs), r)
    low = [f for f in star if min(f.genera) < 2]
    if low:
        return Verdict(
            UNDETERMINED, "r3-genus",
            f"the slide needs fiber genus at least 2 throughout the "
            f"triangle's star; found {low[0].genera}")
    n = sum(1 for s in segs if d.genus_side(s, r) == "lower")
    return Verdict(
        LEGAL, "r3",
        f"cusp-free triangle with fiber genus at least 2 nearby; the "
        f"triangle lies on the lower-genus side of {n} of the three folds "
        f"(case n={n})")


# -- rewrites ----------------------------------------------------------------


def _old_handles(d: Diagram):
    handles = {}
    for r in d.compute_regions():
        fib = _fiber(d, r)
        for sd in r.sides():
            handles[sd] = fib
    return handles


def _finish(d_old: Diagram, base, vertices, segments, rotations, boundary,
            nesting, handles, explicit, decorations) -> Diagram:
    """Assemble, label regions via carried handles plus explicit labels,
    validate, and return the rewritten diagram."""
    d = Diagram(base=base, vertices=vertices, segments=segments,
                rotations=rotations, boundary=boundary, nesting=nesting)
    regions = d.compute_regions()
    fibers = {}
    for r in regions:
        cands = []
        for sd in r.sides():
            if sd in explicit:
                cands.append(explicit[sd])
            elif sd in handles:
                cands.append(handles[sd])
        if not cands and r.ref == "@disk":
            if "@disk" in explicit:
                cands.append(explicit["@disk"])
            elif "@disk" in handles:
                cands.append(handles["@disk"])
        if not cands:
            raise RefusedMove(
                f"rewrite left region {r.ref} without a fiber label")
        genera = {c.genera for c in cands}
        if len(genera) != 1:
            raise RefusedMove(
                f"rewrite assigns conflicting fibers {sorted(genera)} to "
                f"region {r.ref}")
        fibers[r.ref] = cands[0]
    out = Diagram(base=base, vertices=vertices, segments=segments,
                  rotations={v: list(p) for v, p in rotations.items()},
                  boundary=boundary, nesting=nesting, fibers=fibers,
                  decorations=decorations)
    report = validate(out)
    if not report.ok:
        raise RefusedMove(f"rewrite produced an invalid diagram:\n{report}")
    return out


def _rebuild_nesting(d: Diagram, segments, vertices, rotations, boundary,
                     seg_map, extra_host=None):
    """Carry nesting entries through a rewrite.

    seg_map maps old segment ids to a representative new id (for face
    handle refs).  Components that lost their entry get one pointing at
    `extra_host` when provided.
    """
    def remap_ref(ref):
        if ref in ("@disk",):
            return ref
        sid, _, side = ref.rpartition(":")
        sid = seg_map.get(sid, sid)
        return f"{sid}:{side}"

    probe = Diagram(base=d.base, vertices=vertices, segments=segments,
                    rotations={v: list(p) for v, p in rotations.items()},
                    boundary=boundary)
    root, comps = probe.components()
    seg_comp = {}
    for key, segs in comps.items():
        for s in segs:
            seg_comp[s] = key
    old_entries = []
    for key, (host, own) in sorted(d.nesting.items()):
        old_entries.append((remap_ref(host), remap_ref(own)))
    nesting = {}
    for key, segs in sorted(comps.items()):
        if key == root or not segs:
            continue
        found = None
        for host, own in old_entries:
            own_sid = own.rpartition(":")[0]
            host_sid = host.rpartition(":")[0]
            if seg_comp.get(own_sid) == key and \
                    seg_comp.get(host_sid) != key:
                found = (host, own)
                break
        if found is None and extra_host is not None:
            host, own = extra_host(key, segs, seg_comp)
            found = (host, own)
        if found is None:
            raise RefusedMove(
                f"rewrite separated component {key} but no nesting host "
                "is known")
        nesting[key] = found
    return nesting


def apply_finger(d: Diagram, pushing: str, target: str, through) -> Diagram:
    """Push a bit of `pushing` across `target`, creating two crossings and
    a lune beyond the target."""
    verdict = check_finger(d, pushing, target, through)
    if not verdict.legal:
        raise RefusedMove(f"finger move not Legal: {verdict}")
    r = _region(d, through)
    P, T = d.segments[pushing], d.segments[target]
    sp = P.higher if d.region_of_side(pushing, P.higher).id == r.id \
        else other_side(P.higher)
    st = T.higher if d.region_of_side(target, T.higher).id == r.id \
        else other_side(T.higher)
    x1, x2 = _fresh_vertex_ids(d, 2)
    taken = set()
    circ_p, circ_t = P.ends is None, T.ends is None
    if circ_p:
        p_a = p_b = _fresh_segment_id(d, f"{pushing}.r", taken)
    else:
        p_a = _fresh_segment_id(d, f"{pushing}.a", taken)
        p_b = _fresh_segment_id(d, f"{pushing}.b", taken)
    p_tip = _fresh_segment_id(d, f"{pushing}.t", taken)
    if circ_t:
        t_a = t_b = _fresh_segment_id(d, f"{target}.r", taken)
    else:
        t_a = _fresh_segment_id(d, f"{target}.a", taken)
        t_b = _fresh_segment_id(d, f"{target}.b", taken)
    t_mid = _fresh_segment_id(d, f"{target}.m", taken)
    dP_east = (sp == "left")
    dT_east = (st == "right")
    # segment ends per the first-crossing-along-the-push convention
    segs = dict(d.segments)
    del segs[pushing], segs[target]
    if circ_p:
        segs[p_a] = Segment(p_a, (x2, x1), P.higher)
    else:
        segs[p_a] = Segment(p_a, (P.ends[0], x1), P.higher)
        segs[p_b] = Segment(p_b, (x2, P.ends[1]), P.higher)
    segs[p_tip] = Segment(p_tip, (x1, x2), P.higher)
    if dT_east:
        tm_ends = (x1, x2)
        ta_end, tb_end = x1, x2
    else:
        tm_ends = (x2, x1)
        ta_end, tb_end = x2, x1
    if circ_t:
        segs[t_a] = Segment(t_a, (tb_end, ta_end), T.higher)
    else:
        segs[t_a] = Segment(t_a, (T.ends[0], ta_end), T.higher)
        segs[t_b] = Segment(t_b, (tb_end, T.ends[1]), T.higher)
    segs[t_mid] = Segment(t_mid, tm_ends, T.higher)
    # rotations at the two new crossings (ccw), from the local templates
    if dP_east and dT_east:
        rot_x1 = [(t_mid, 0), (p_tip, 0), (t_a, 1), (p_a, 1)]
        rot_x2 = [(t_b, 0), (p_tip, 1), (t_mid, 1), (p_b, 0)]
    elif dP_east and not dT_east:
        rot_x1 = [(t_mid, 1), (p_tip, 0), (t_b, 0), (p_a, 1)]
        rot_x2 = [(t_a, 1), (p_tip, 1), (t_mid, 0), (p_b, 0)]
    elif not dP_east and dT_east:
        rot_x1 = [(t_b, 0), (p_tip, 0), (t_mid, 1), (p_a, 1)]
        rot_x2 = [(t_mid, 0), (p_tip, 1), (t_a, 1), (p_b, 0)]
    else:
        rot_x1 = [(t_a, 1), (p_tip, 0), (t_mid, 0), (p_a, 1)]
        rot_x2 = [(t_mid, 1), (p_tip, 1), (t_b, 0), (p_b, 0)]
    port_map = {(pushing, 0): (p_a, 0), (pushing, 1): (p_b, 1),
                (target, 0): (t_a, 0), (target, 1): (t_b, 1)}
    rotations = {}
    for vid, ports in d.rotations.items():
        rotations[vid] = [port_map.get(tuple(p), tuple(p)) for p in ports]
    rotations[x1] = rot_x1
    rotations[x2] = rot_x2
    vertices = list(d.vertices.values()) + [Vertex(x1, "crossing"),
                                            Vertex(x2, "crossing")]
    # fibers and decorations
    vP, vT = _dec(d, pushing), _dec(d, target)
    FM = _fiber(d, r)
    FPfar = _fiber(d, d.region_of_side(pushing, other_side(sp)))
    FB = _fiber(d, d.region_of_side(target, other_side(st)))
    p_high_thru = (P.higher == sp)
    t_high_thru = (T.higher == st)
    try:
        if p_high_thru and t_high_thru:
            dec_tip = _transport_across(vP, FM, vT)
            dec_tmid = _transport_across(vT, FM, vP)
            FL = make_fiber(expected_lower(FB, dec_tip))
        elif p_high_thru:
            dec_tip = _lift_across(vP, FB, vT)
            FL = make_fiber(expected_lower(FB, dec_tip))
            dec_tmid = _transport_across(vT, FB, dec_tip)
        elif t_high_thru:
            dec_tmid = _lift_across(vT, FPfar, vP)
            FL = make_fiber(expected_lower(FPfar, dec_tmid))
            dec_tip = _transport_across(vP, FPfar, dec_tmid)
        else:
            sr_P, feet_m = _feet_of(FPfar, vP)
            sr_T = surger(FB, _align(vT, FB))
            feet_b = tuple(_parent_component(sr_T, j) for j in feet_m)
            U = unsurger(FB, feet_b)
            FL = U.after
            dec_tip = U.belt
            dec_tmid = U.inject(_align(vT, FB))
    except (NotTransportable, CurveError) as e:
        raise RefusedMove(f"finger bookkeeping failed: {e}") from None
    decorations = dict(d.decorations)
    del decorations[pushing], decorations[target]
    decorations[p_a] = vP
    decorations[p_b] = vP
    decorations[t_a] = vT
    decorations[t_b] = vT
    decorations[p_tip] = dec_tip
    decorations[t_mid] = dec_tmid
    handles = _old_handles(d)
    for (osid, nsids) in ((pushing, (p_a, p_b)), (target, (t_a, t_b))):
        for side in ("left", "right"):
            fib = handles.pop((osid, side), None)
            if fib is not None:
                for n in nsids:
                    handles[(n, side)] = fib
    # which flag side of the new middle pieces faces the lune: the tip's
    # higher side faces the beyond region exactly when the push started on
    # the pushing fold's higher side, and t_mid's higher side faces the
    # corridor exactly when the target's higher side was the through region
    lune_p_side = other_side(P.higher) if p_high_thru else P.higher
    lune_t_side = other_side(T.higher) if t_high_thru else T.higher
    explicit = {(p_tip, lune_p_side): FL, (t_mid, lune_t_side): FL}
    nesting = _rebuild_nesting(
        d, list(segs.values()), vertices, rotations, d.boundary,
        {pushing: p_a, target: t_a})
    return _finish(d, d.base, vertices, list(segs.values()), rotations,
                   d.boundary, nesting, handles, explicit, decorations)


def _parent_component(sr, j):
    for i, idxs in enumerate(sr.component_map):
        if j in idxs:
            return i
    raise RefusedMove("foot component lost in surgery bookkeeping")


def _chain_merge(d: Diagram, crossings):
    """Delete crossing vertices, fusing the strand pieces through them.

    Returns (segments, port_map, merged_of, decorations) where merged_of
    maps old segment ids to (new id, flipped).  Decorations of merged
    chains are taken from the chain's first piece.
    """
    joins = {}
    for x in crossings:
        ports = [tuple(p) for p in d.rotations[x]]
        for (a, b) in ((0, 2), (1, 3)):
            pa, pb = ports[a], ports[b]
            joins[pa] = pb
            joins[pb] = pa
    segs = dict(d.segments)
    decorations = dict(d.decorations)
    port_map = {}
    merged_of = {}
    involved = sorted({p[0] for p in joins})
    done = set()
    for sid in involved:
        if sid in done:
            continue
        chain = _trace_chain(d, joins, sid)
        pieces = [p for (p, _f) in chain]
        if any(p in done for p in pieces):
            continue
        done.update(pieces)
        first, flipped0 = chain[0]
        s0 = d.segments[first]
        closed = _chain_closed(d, joins, chain)
        new_id = first
        if closed:
            ends = None
        else:
            head_seg, head_flip = chain[-1]
            sh = d.segments[head_seg]
            tail = s0.ends[1 if flipped0 else 0]
            head = sh.ends[0 if head_flip else 1]
            ends = (tail, head)
        higher = s0.higher if not flipped0 else other_side(s0.higher)
        for p in pieces:
            del segs[p]
        segs[new_id] = Segment(new_id, ends, higher)
        dec = decorations.get(first)
        for p in pieces:
            decorations.pop(p, None)
        if dec is not None:
            decorations[new_id] = dec
        for (p, f) in chain:
            merged_of[p] = (new_id, f)
            s2 = d.segments[p]
            for k in range(2):
                if (p, k) in joins:
                    continue
                if ends is None:
                    continue
                new_end = 0 if (k == (1 if f else 0)) else 1
                port_map[(p, k)] = (new_id, new_end)
    return segs, port_map, merged_of, decorations


def _trace_chain(d: Diagram, joins, sid):
    """Ordered chain [(segment, flipped)] through the joins containing
    sid, starting at a free end when one exists."""
    # find a start: free end
    def other_end(p):
        return (p[0], 1 - p[1])

    cur = (sid, 0)
    seen_ports = set()
    # walk backwards from (sid, 0) to a free end or full cycle
    while cur in joins and cur not in seen_ports:
        seen_ports.add(cur)
        cur = other_end(joins[cur])
    chain = []
    seen = set()
    # cur is a free tail-end (seg, k): traversal enters at end k
    port = cur
    while True:
        s, k = port
        if s in seen:
            break
        seen.add(s)
        flipped = (k == 1)
        chain.append((s, flipped))
        exit_port = (s, 1 - k)
        nxt = joins.get(exit_port)
        if nxt is None:
            break
        port = nxt
    return chain


def _chain_closed(d: Diagram, joins, chain):
    s0, f0 = chain[0]
    entry = (s0, 1 if f0 else 0)
    s1, f1 = chain[-1]
    exit_port = (s1, 0 if f1 else 1)
    return joins.get(exit_port) == entry


def apply_r2_removal(d: Diagram, lune) -> Diagram:
    """Pull the two fold paths of a lune apart, deleting its crossings."""
    verdict = check_r2_removal(d, lune)
    if not verdict.legal:
        raise RefusedMove(f"lune removal not Legal: {verdict}")
    r = _region(d, lune)
    x1, x2, path1, path2 = _lune_pattern(d, r)
    # region fibers at the corners opposite the lune (they survive as the
    # label of the merged between-region, and must agree)
    quads1 = _quadrants(d, x1)
    lune_idx = next(j for j, q in enumerate(quads1) if q.id == r.id)
    w_region = quads1[(lune_idx + 2) % 4]
    quads2 = _quadrants(d, x2)
    lune_idx2 = next(j for j, q in enumerate(quads2) if q.id == r.id)
    e_region = quads2[(lune_idx2 + 2) % 4]
    fw, fe = _fiber(d, w_region), _fiber(d, e_region)
    if fw.genera != fe.genera:
        raise RefusedMove(
            f"corner regions carry different fibers {fw.genera} vs "
            f"{fe.genera}; the uncrossed region would be inconsistent")
    segs, port_map, merged_of, decorations = _chain_merge(d, (x1, x2))
    vertices = [v for v in d.vertices.values() if v.id not in (x1, x2)]
    rotations = {}
    for vid, ports in d.rotations.items():
        if vid in (x1, x2):
            continue
        rotations[vid] = [port_map.get(tuple(p), tuple(p)) for p in ports]
    # the path pieces are swept through, so both their adjacencies change;
    # only flank handles carry over to the merged segments
    mids = set(path1) | set(path2)
    handles = _old_handles(d)
    new_handles = {}
    for (sd, fib) in handles.items():
        sid, side = sd
        if sid in mids:
            continue
        if sid in merged_of:
            new_id, flip = merged_of[sid]
            nside = other_side(side) if flip else side
            new_handles[(new_id, nside)] = fib
        else:
            new_handles[sd] = fib
    seg_map = {old: new for old, (new, _f) in merged_of.items()}

    # sides that faced the surviving between-region, remapped, keyed by
    # the new segment: these are the outward faces of any components the
    # uncrossing separates
    between_sides = []
    for (sid, side) in sorted(w_region.sides() | e_region.sides()):
        if sid in mids:
            continue
        if sid in merged_of:
            nid, flip = merged_of[sid]
            between_sides.append((nid, other_side(side) if flip else side))
        else:
            between_sides.append((sid, side))

    def extra_host(key, comp_segs, seg_comp):
        own = next((f"{s}:{sd}" for (s, sd) in between_sides
                    if seg_comp.get(s) == key), None)
        host = next((f"{s}:{sd}" for (s, sd) in between_sides
                     if seg_comp.get(s) not in (key, None)), None)
        if own is None or host is None:
            raise RefusedMove(
                f"cannot place separated component {key} after the "
                "removal")
        return (host, own)

    nesting = _rebuild_nesting(d, list(segs.values()), vertices, rotations,
                               d.boundary, seg_map, extra_host=extra_host)
    # quote each merged segment's cycle from a flank piece (the path
    # pieces' reference regions die with the lune)
    by_new = {}
    for old, (new, _flip) in merged_of.items():
        by_new.setdefault(new, []).append(old)
    for new_id, pieces in by_new.items():
        flanks = [p for p in sorted(pieces) if p not in mids]
        if not flanks:
            raise RefusedMove(
                f"merged fold {new_id} has no flank piece to quote its "
                "cycle from")
        decorations[new_id] = d.decorations[flanks[0]]
    return _finish(d, d.base, vertices, list(segs.values()), rotations,
                   d.boundary, nesting, new_handles, {}, decorations)


def _walk_from(d: Diagram, region: Region, sid: str):
    """The region's boundary walk rotated to start at segment sid."""
    for walk in region.boundary:
        for i, (s, side) in enumerate(walk):
            if s == sid:
                return walk[i:] + walk[:i]
    raise AnchorError(f"{sid} does not bound region {region.ref}")


def apply_cusp_fold(d: Diagram, cusp: str, arc: str) -> Diagram:
    """Bulge the fold across the cusp point, crossing both arms."""
    verdict = check_cusp_fold(d, cusp, arc)
    if not verdict.legal:
        raise RefusedMove(f"cusp-fold not Legal: {verdict}")
    (a1_, _), (a2_, _) = d.rotations[cusp]
    thru = d.higher_region(a1_)
    s_arc = d.segments[arc]
    sa = s_arc.higher if d.region_of_side(arc, s_arc.higher).id == thru.id \
        else other_side(s_arc.higher)
    if d.region_of_side(arc, sa).id != thru.id:
        raise AnchorError(f"{arc} does not border the cusp's outer region")
    # scan the region walk from the arc: the first arm met is crossed last
    walk = _walk_from(d, thru, arc)
    arms_in_walk = [s for (s, _side) in walk if s in (a1_, a2_)]
    if not arms_in_walk:
        raise AnchorError("cusp arms do not border the shared region")
    armL = arms_in_walk[0]               # crossed last, at x1
    armF = a2_ if armL == a1_ else a1_   # crossed first, at x2
    x1, x2 = _fresh_vertex_ids(d, 2)
    taken = set()
    arc_a = _fresh_segment_id(d, f"{arc}.a", taken)
    arc_mid = _fresh_segment_id(d, f"{arc}.m", taken)
    arc_b = _fresh_segment_id(d, f"{arc}.b", taken)
    circ = s_arc.ends is None
    if circ:
        arc_a = arc_b = _fresh_segment_id(d, f"{arc}.r", taken)
    segs = dict(d.segments)
    del segs[arc]
    if circ:
        segs[arc_a] = Segment(arc_a, (x1, x2), s_arc.higher)
    else:
        segs[arc_a] = Segment(arc_a, (s_arc.ends[0], x2), s_arc.higher)
        segs[arc_b] = Segment(arc_b, (x1, s_arc.ends[1]), s_arc.higher)
    segs[arc_mid] = Segment(arc_mid, (x2, x1), s_arc.higher)

    def split_arm(aid, xv):
        nonlocal segs
        s = d.segments[aid]
        near = _fresh_segment_id(d, f"{aid}.n", taken)
        far = _fresh_segment_id(d, f"{aid}.f", taken)
        if s.ends[0] == cusp:
            segs[near] = Segment(near, (cusp, xv), s.higher)
            segs[far] = Segment(far, (xv, s.ends[1]), s.higher)
            near_port, far_port = (near, 1), (far, 0)
            pmap = {(aid, 0): (near, 0), (aid, 1): (far, 1)}
        else:
            segs[near] = Segment(near, (xv, cusp), s.higher)
            segs[far] = Segment(far, (s.ends[0], xv), s.higher)
            near_port, far_port = (near, 0), (far, 1)
            pmap = {(aid, 1): (near, 1), (aid, 0): (far, 0)}
        del segs[aid]
        return near, far, near_port, far_port, pmap

    nearL, farL, pL_near, pL_far, mapL = split_arm(armL, x1)
    nearF, farF, pF_near, pF_far, mapF = split_arm(armF, x2)
    rot_x2 = [(arc_a, 1), pF_near, (arc_mid, 0), pF_far]
    rot_x1 = [(arc_b, 0), pL_far, (arc_mid, 1), pL_near]
    if sa == "right":
        rot_x1 = list(reversed(rot_x1))
        rot_x2 = list(reversed(rot_x2))
    port_map = dict(mapL)
    port_map.update(mapF)
    if not circ:
        port_map[(arc, 0)] = (arc_a, 0)
        port_map[(arc, 1)] = (arc_b, 1)
    rotations = {}
    for vid, ports in d.rotations.items():
        rotations[vid] = [port_map.get(tuple(p), tuple(p)) for p in ports]
    rotations[x1] = rot_x1
    rotations[x2] = rot_x2
    vertices = list(d.vertices.values()) + [Vertex(x1, "crossing"),
                                            Vertex(x2, "crossing")]
    # bookkeeping
    F_thru = _fiber(d, thru)
    FK = _fiber(d, d.lower_region(a1_))
    F_Q = _fiber(d, d.region_of_side(arc, other_side(sa)))
    vArc = _dec(d, arc)
    vL, vF = _dec(d, armL), _dec(d, armF)
    case_a = (s_arc.higher == sa)
    try:
        if case_a:
            nL = intersection_number(vArc, vL, F_thru)
            nF = intersection_number(vArc, vF, F_thru)
            if nL or nF:
                raise RefusedMove(
                    "the fold's cycle meets a cusp arm cycle "
                    f"({nL} and {nF} crossings); the rewrite's cycle "
                    "bookkeeping needs disjointness when the swept region "
                    "is on the fold's higher-genus side")
            dec_mid = _transport_across(vArc, F_thru, vL)
            dec_nL = _transport_across(vL, F_thru, vArc)
            dec_nF = _transport_across(vF, F_thru, vArc)
            F_Kp = make_fiber(expected_lower(FK, dec_mid))
        else:
            sr_arc, feet_t = _feet_of(F_Q, vArc)
            sr_arm = surger(F_thru, _align(vL, F_thru))
            feet_k = tuple(sr_arm.component_map[j][0] for j in feet_t)
            U = unsurger(FK, feet_k)
            F_Kp = U.after
            dec_mid = U.belt
            dec_nL = _lift_across(vL, F_Q, vArc)
            dec_nF = _lift_across(vF, F_Q, vArc)
    except (NotTransportable, CurveError) as e:
        raise RefusedMove(f"cusp-fold bookkeeping failed: {e}") from None
    decorations = dict(d.decorations)
    for dead in (arc, armL, armF):
        decorations.pop(dead, None)
    decorations[arc_a] = vArc
    if not circ:
        decorations[arc_b] = vArc
    decorations[arc_mid] = dec_mid
    decorations[nearL] = dec_nL
    decorations[nearF] = dec_nF
    decorations[farL] = vL
    decorations[farF] = vF
    handles = _old_handles(d)
    for (osid, nsids) in ((arc, (arc_a,) if circ else (arc_a, arc_b)),
                          (armL, (farL,)), (armF, (farF,))):
        for side in ("left", "right"):
            fib = handles.pop((osid, side), None)
            if fib is not None:
                for n in nsids:
                    handles[(n, side)] = fib
    explicit = {(arc_mid, other_side(sa)): F_Kp}
    nesting = _rebuild_nesting(
        d, list(segs.values()), vertices, rotations, d.boundary,
        {arc: arc_a, armL: farL, armF: farF})
    return _finish(d, d.base, vertices, list(segs.values()), rotations,
                   d.boundary, nesting, handles, explicit, decorations)


def apply_r3(d: Diagram, triangle, moving: str) -> Diagram:
    """Slide the moving arc across the opposite crossing of the triangle."""
    verdict = check_r3(d, triangle, moving)
    if not verdict.legal:
        raise RefusedMove(f"triangle slide not Legal: {verdict}")
    r = _region(d, triangle)
    walk = _walk_from(d, r, moving)
    tri_segs = [s for (s, _) in walk]
    corners = []
    for (sid, side) in walk:
        s = d.segments[sid]
        corners.append(s.ends[1] if side == "left" else s.ends[0])
    # corner after walk[i] joins tri_segs[i] and tri_segs[i+1]
    segs = dict(d.segments)
    decorations = dict(d.decorations)
    flanks = {}
    for i, sid in enumerate(tri_segs):
        s = d.segments[sid]
        e0, e1 = s.ends
        f0 = d.strand_exit(e0, (sid, 0))[0]
        f1 = d.strand_exit(e1, (sid, 1))[0]
        flanks[sid] = (f0, f1)
        segs[sid] = Segment(sid, (e1, e0), s.higher)

    for sid in tri_segs:
        s = d.segments[sid]
        e0, e1 = s.ends
        f0, f1 = flanks[sid]
        # f0 loses its e0 end to e1; f1 loses e1 to e0
        for fid, old_v, new_v in ((f0, e0, e1), (f1, e1, e0)):
            cur = segs[fid]
            if cur.ends is None:
                continue
            new_ends = list(cur.ends)
            # replace one occurrence matching the old corner, preferring
            # the end that actually sat at the corner in the old diagram
            old_ends = d.segments[fid].ends
            for k in range(2):
                if old_ends[k] == old_v and new_ends[k] == old_v:
                    new_ends[k] = new_v
                    break
            else:
                for k in range(2):
                    if new_ends[k] == old_v:
                        new_ends[k] = new_v
                        break
            segs[fid] = Segment(fid, tuple(new_ends), cur.higher)
    # rotations: slot-preserving swap of each arc's two pieces at each
    # corner
    rotations = {vid: [tuple(p) for p in ports]
                 for vid, ports in d.rotations.items()}
    for i in range(3):
        corner = corners[i]
        s1 = tri_segs[i]
        s2 = tri_segs[(i + 1) % 3]
        ports = rotations[corner]
        new_ports = []
        for (pid, k) in ports:
            if pid == s1:
                other = flanks[s1][0] if d.segments[s1].ends[1] == corner \
                    else flanks[s1][1]
                new_ports.append(_port_at(segs, other, corner))
            elif pid == s2:
                other = flanks[s2][0] if d.segments[s2].ends[1] == corner \
                    else flanks[s2][1]
                new_ports.append(_port_at(segs, other, corner))
            elif pid == flanks[s1][0] or pid == flanks[s1][1]:
                new_ports.append(_port_at(segs, s1, corner))
            elif pid == flanks[s2][0] or pid == flanks[s2][1]:
                new_ports.append(_port_at(segs, s2, corner))
            else:
                raise AnchorError("triangle corner touches a foreign fold")
        rotations[corner] = new_ports
    vertices = list(d.vertices.values())
    handles = _old_handles(d)
    for sid in tri_segs:
        handles.pop((sid, "left"), None)
        handles.pop((sid, "right"), None)
    # probe to locate the slid triangle and the new higher sides
    nesting = dict(d.nesting)
    probe = Diagram(base=d.base, vertices=vertices,
                    segments=list(segs.values()),
                    rotations={v: list(p) for v, p in rotations.items()},
                    boundary=d.boundary, nesting=nesting)
    tri_set = set(tri_segs)
    t_new = None
    for reg in probe.compute_regions():
        if {s for (s, _) in reg.sides()} == tri_set and reg.id != r.id:
            t_new = reg
            break
    if t_new is None:
        for reg in probe.compute_regions():
            if {s for (s, _) in reg.sides()} == tri_set:
                t_new = reg
                break
    if t_new is None:
        raise RefusedMove("slide did not produce the mirrored triangle")
    try:
        tri_decs, F_Tp = _r3_bookkeeping(d, probe, r, t_new, walk, segs,
                                         flanks, handles, decorations)
    except (NotTransportable, CurveError) as e:
        raise RefusedMove(f"triangle bookkeeping failed: {e}") from None
    decorations.update(tri_decs)
    explicit = {sd: F_Tp for sd in t_new.sides()}
    return _finish(d, d.base, vertices, list(segs.values()), rotations,
                   d.boundary, nesting, handles, explicit, decorations)


def _port_at(segs, sid, corner):
    s = segs[sid]
    if s.ends is None:
        raise AnchorError("triangle strand closes into a circle")
    if s.ends[0] == corner:
        return (sid, 0)
    if s.ends[1] == corner:
        return (sid, 1)
    raise AnchorError(f"{sid} does not touch corner {corner}")


def _r3_bookkeeping(d, probe, r_old, t_new, walk, segs, flanks, handles,
                    decorations):
    """Fiber of the slid triangle and the cycles of its three sides."""
    tri = [s for (s, _) in walk]
    out_pieces = sorted({f for fs in flanks.values() for f in fs})
    new_hi = {}
    for sid in tri:
        new_hi[sid] = probe.region_of_side(sid, segs[sid].higher)
    # pass 1: decorations quoted from a flank measured in the same region
    tri_decs = {}
    for sid in tri:
        if new_hi[sid].id == t_new.id:
            continue
        for f in flanks[sid]:
            if probe.region_of_side(f, segs[f].higher).id == new_hi[sid].id:
                tri_decs[sid] = decorations[f]
                break
    # pass 2: one transport across an out-piece separating the two
    # reference regions
    for sid in tri:
        if sid in tri_decs or new_hi[sid].id == t_new.id:
            continue
        placed = False
        for f in flanks[sid]:
            hi_f = probe.region_of_side(f, segs[f].higher)
            for mid in out_pieces:
                sides = {probe.region_of_side(mid, "left").id,
                         probe.region_of_side(mid, "right").id}
                if sides != {hi_f.id, new_hi[sid].id}:
                    continue
                fib_f = _region_fiber(probe, hi_f, handles)
                fib_x = _region_fiber(probe, new_hi[sid], handles)
                v_mid = decorations[mid]
                mid_hi = probe.region_of_side(mid, segs[mid].higher)
                if mid_hi.id == hi_f.id:
                    out = _transport_across(decorations[f], fib_f, v_mid)
                else:
                    out = _lift_across(decorations[f], fib_x, v_mid)
                tri_decs[sid] = out
                placed = True
                break
            if placed:
                break
        if not placed:
            raise NotTransportable(
                f"no route to measure the cycle of {sid} after the slide")
    # fiber of the slid triangle
    lower_sides = [sid for sid in tri if new_hi[sid].id != t_new.id]
    if lower_sides:
        sid = sorted(lower_sides)[0]
        fib_hi = _region_fiber(probe, new_hi[sid], handles)
        F_Tp = make_fiber(expected_lower(fib_hi, tri_decs[sid]))
    else:
        # the triangle sits on the higher side of all three folds: attach
        # the moving fold's handle to the far corner region by the chain
        # through the other two arcs
        a_sid = tri[0]
        vA = decorations[a_sid] if a_sid in decorations else \
            d.decorations[tri[0]]
        hiA_old = d.higher_region(a_sid)
        srA, feet = _feet_of(_fiber(d, hiA_old), d.decorations[a_sid])
        b_sid, c_sid = tri[1], tri[2]
        w_old = d.region_of_side(
            b_sid, other_side(_side_facing(d, b_sid, r_old)))
        sr1 = surger(_fiber(d, w_old), _align(d.decorations[b_sid],
                                              _fiber(d, w_old)))
        feet = tuple(_parent_component(sr1, j) for j in feet)
        # the flank of the third arc at the corner away from the moving arc
        cbc = set(d.segments[b_sid].ends) & set(d.segments[c_sid].ends)
        cf = None
        for f in flanks[c_sid]:
            if set(d.segments[f].ends or ()) & cbc:
                cf = f
        if cf is None:
            raise NotTransportable("triangle chain broke at the far corner")
        s_old_hi = d.higher_region(cf)
        sr2 = surger(_fiber(d, s_old_hi),
                     _align(d.decorations[cf], _fiber(d, s_old_hi)))
        feet = tuple(_parent_component(sr2, j) for j in feet)
        U = unsurger(_fiber(d, s_old_hi), feet)
        F_Tp = U.after
        tri_decs[a_sid] = U.belt
        # cycles of the other two sides, injected from the far corner
        for sid2 in (b_sid, c_sid):
            src = None
            for f in flanks[sid2]:
                if d.higher_region(f).id == s_old_hi.id:
                    src = f
            if src is None:
                raise NotTransportable(
                    f"no far-corner measurement for {sid2}")
            tri_decs[sid2] = U.inject(_align(d.decorations[src],
                                             _fiber(d, s_old_hi)))
    return tri_decs, F_Tp


def _side_facing(d: Diagram, sid: str, region: Region) -> str:
    for side in ("left", "right"):
        if d.region_of_side(sid, side).id == region.id:
            return side
    raise AnchorError(f"{sid} does not border {region.ref}")


def _region_fiber(probe: Diagram, region: Region, handles) -> FiberModel:
    for sd in region.sides():
        if sd in handles:
            return handles[sd]
    raise RefusedMove(f"no carried fiber for region {region.ref}")


def _cusp_inside(d: Diagram, r: Region):
    """A cusp vertex nested strictly inside the region, if any."""
    root, comps = d.components()
    boundary_segs = {s for (s, _) in r.boundary[0]} if r.boundary else set()
    region_refs = {f"{s}:{side}" for (s, side) in r.sides()}
    region_refs.add(r.ref)
    for key, segs in comps.items():
        if key == root or not segs:
            continue
        spec = d.nesting.get(key)
        if spec is None:
            continue
        host_ref, _own = spec
        try:
            host_region = d.region_by_ref(host_ref)
        except FoldError:
            continue
        if host_region.id != r.id:
            continue
        for sid in segs:
            ends = d.segments[sid].ends or ()
            for vid in ends:
                if d.vertices[vid].kind == "cusp":
                    return vid
    return None
