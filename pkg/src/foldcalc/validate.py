"""Global validity rules for decorated base diagrams.

A diagram is valid when:

* the rotation system embeds in the base (Euler relation per component,
  counting the disk boundary structure);
* every region carries a fiber label and every segment a decoration living
  in the fiber of its higher-genus side;
* the two sides of each fold segment are distinct regions whose fibers are
  related by surgery along the decoration (genus bookkeeping);
* co-orientations are continuous along strands: through a crossing the two
  germ segments of one strand point their higher sides into quadrants on
  one side of the strand, and at a cusp both arcs share their higher-side
  region;
* the two cycles at a cusp meet transversely in exactly one point;
* where two strands cross and some quadrant is the higher-genus side of
  both, the two decorations measured there are disjoint;
* consecutive pieces of a strand through a crossing that share their
  higher-side region carry isotopic decorations (reference paths hugging
  the arc within one region cannot change the cycle).

Violations are collected into a report, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import cutting
from .diagram import Diagram, Region, other_side
from .errors import EmbeddingError, FoldError
from .fiber import (FiberModel, are_isotopic, intersection_number,
                    normal_form)
from .words import word_str


@dataclass(frozen=True)
class Violation:
    rule: str
    elements: tuple
    message: str

    def __str__(self):
        where = ", ".join(self.elements)
        return f"[{self.rule}] {where}: {self.message}"


@dataclass
class ValidationReport:
    entries: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.entries

    def add(self, rule, elements, message):
        self.entries.append(Violation(rule, tuple(elements), message))

    def __str__(self):
        if self.ok:
            return "valid"
        return "\n".join(str(e) for e in self.entries)

    def to_json(self):
        return [{"rule": e.rule, "elements": list(e.elements),
                 "message": e.message} for e in self.entries]


def expected_lower(fiber: FiberModel, dec) -> tuple:
    """Genera of the fiber after surgery along the decoration, by cutting
    the polygon model (no change of coordinates involved)."""
    comp_genus = fiber.genus_of(dec.component)
    pieces = cutting.surgered_genera(normal_form(dec.word, comp_genus),
                                     comp_genus)
    rest = [g for i, g in enumerate(fiber.genera) if i != dec.component]
    return tuple(sorted(rest + list(pieces)))


def validate(d: Diagram) -> ValidationReport:
    report = ValidationReport()
    try:
        regions = d.compute_regions()
    except EmbeddingError as e:
        report.add("embedding", (), str(e))
        return report

    for ref in d.fibers:
        try:
            d.region_by_ref(ref)
        except FoldError:
            report.add("fiber-label", (ref,),
                       "fiber label attached to no region")
    by_region = {}
    for ref, fib in d.fibers.items():
        try:
            r = d.region_by_ref(ref)
        except FoldError:
            continue
        if r.id in by_region and by_region[r.id] != fib:
            report.add("fiber-label", (r.id,),
                       "conflicting fiber labels for one region")
        by_region[r.id] = fib
    for r in regions:
        if r.id not in by_region:
            report.add("fiber-label", (r.id,),
                       f"region {r.ref} carries no fiber label")
    if not report.ok:
        return report

    def fiber_of(region: Region) -> FiberModel:
        return by_region[region.id]

    # per-segment checks
    for sid, s in sorted(d.segments.items()):
        hi = d.region_of_side(sid, s.higher)
        lo = d.region_of_side(sid, other_side(s.higher))
        if hi.id == lo.id:
            report.add("fold-sides", (sid,),
                       "both sides of a fold lie in one region")
            continue
        dec = d.decorations.get(sid)
        if dec is None:
            report.add("decoration", (sid,),
                       "fold segment carries no vanishing cycle")
            continue
        fh = fiber_of(hi)
        if not (0 <= dec.component < len(fh)) or \
                fh.genus_of(dec.component) != dec.genus:
            report.add("decoration", (sid,),
                       "decoration does not live in the higher-side fiber")
            continue
        want = expected_lower(fh, dec)
        got = fiber_of(lo).genera
        if want != got:
            report.add(
                "genus-bookkeeping", (sid,),
                f"lower fiber {got} is not the surgery of {fh.genera} "
                f"along {word_str(dec.word)} (expected {want})")

    if not report.ok:
        return report

    # cusp condition
    for vid, v in sorted(d.vertices.items()):
        if v.kind != "cusp":
            continue
        (s1, _), (s2, _) = d.rotations[vid]
        h1, h2 = d.higher_region(s1), d.higher_region(s2)
        if h1.id != h2.id:
            report.add("cusp-coorientation", (vid, s1, s2),
                       "the two arcs of a cusp must share their "
                       "higher-genus side")
            continue
        d1, d2 = d.decorations[s1], d.decorations[s2]
        n = intersection_number(d1, d2, fiber_of(h1))
        if n != 1:
            report.add(
                "cusp-condition", (vid, s1, s2),
                f"cusp cycles {word_str(d1.word)} and {word_str(d2.word)} "
                f"meet {n} times; a cusp needs exactly one transverse "
                "crossing")

    # crossings: quadrant faces, strand co-orientation, disjointness,
    # decoration continuity
    for vid, v in sorted(d.vertices.items()):
        if v.kind != "crossing":
            continue
        ports = d.rotations[vid]
        quad = []
        for j in range(4):
            sid, k = ports[(j + 1) % 4]
            arriving_forward = (k == 1)
            side = "left" if arriving_forward else "right"
            quad.append(d.region_of_side(sid, side))
        # quad[j] = region in the corner between ports j and j+1
        for (a, b) in ((0, 2), (1, 3)):
            sa, sb = ports[a][0], ports[b][0]
            ha = d.higher_region(sa)
            hb = d.higher_region(sb)
            qa = {quad[(a - 1) % 4].id, quad[a].id}
            qb = {quad[(b - 1) % 4].id, quad[b].id}
            if ha.id not in qa or hb.id not in qb:
                report.add("strand", (vid, sa, sb),
                           "strand pieces do not flank the crossing")
                continue
            same_side = (
                (ha.id == quad[a].id) == (hb.id == quad[(b - 1) % 4].id))
            if not same_side:
                report.add(
                    "strand-coorientation", (vid, sa, sb),
                    "co-orientation flips while passing the crossing")
            if ha.id == hb.id:
                da, db = d.decorations.get(sa), d.decorations.get(sb)
                if da and db and not are_isotopic(da, db, fiber_of(ha)):
                    report.add(
                        "decoration-continuity", (vid, sa, sb),
                        f"one strand, one reference region, different "
                        f"cycles {word_str(da.word)} vs {word_str(db.word)}")
        for j in range(4):
            s_in, s_out = ports[j][0], ports[(j + 1) % 4][0]
            q = quad[j]
            if d.higher_region(s_in).id == q.id and \
                    d.higher_region(s_out).id == q.id:
                d1, d2 = d.decorations.get(s_in), d.decorations.get(s_out)
                if d1 is None or d2 is None:
                    continue
                n = intersection_number(d1, d2, fiber_of(q))
                if n != 0:
                    report.add(
                        "crossing-condition", (vid, s_in, s_out),
                        f"cycles {word_str(d1.word)} and "
                        f"{word_str(d2.word)} meet {n} times over the "
                        "mutually-higher region; crossing folds need "
                        "disjoint cycles there")

    # base Euler relation (redundant with per-component checks; asserts the
    # documented global count).  Extra components each contribute one more
    # region than a connected count would, so the right-hand side is the
    # component count (disk) or component count plus one (sphere).
    nv, ne, nf = d.euler_summary()
    _root, comps = d.components()
    want = len(comps) + (0 if d.base == "disk" else 1)
    if nv - ne + nf != want:
        report.add("euler", (),
                   f"V-E+F = {nv}-{ne}+{nf} != {want} for the {d.base} "
                   f"with {len(comps)} components")
    return report
