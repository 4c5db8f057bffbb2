"""The .fold and .move file formats.

Both are UTF-8 JSON.  Serialization is canonical: object keys sorted,
element lists sorted by id, cyclic lists (rotations, boundary) rotated to
their lexicographically least form, fiber labels keyed by the canonical
region handle, two-space indentation, trailing newline.  Canonical files
round-trip byte-identically through parse/serialize.

Schema (see docs/format.md for the annotated version):

    {
      "format": "fold/1",
      "base": "disk" | "sphere",
      "vertices": [{"id", "kind"}],
      "segments": [{"id", "ends": [tail, head] | null, "higher"}],
      "rotations": {vertex: ["seg.end", ...]},       # ccw port order
      "boundary": [vertex, ...],                     # disk only, ccw
      "nesting": {component: [host_face, own_face]}, # extra components
      "fibers": {region_ref: [genus, ...]},
      "decorations": [{"segment", "component", "word"}]
    }

Region refs are "segment:side" for any side bordering the region (the
canonical choice is the least one) or "@disk" for the bare inside of the
disk boundary.  Unknown fields anywhere are rejected by name.
"""

from __future__ import annotations

import json

from .diagram import Diagram, Segment, Vertex
from .errors import CurveError, DiagramError, EmbeddingError, ParseError
from .fiber import Curve, FiberModel, curve as make_curve, make_fiber
from .words import parse_word, word_str

FOLD_FORMAT = "fold/1"
MOVE_FORMAT = "move/1"
SCRIPT_FORMAT = "script/1"

_FOLD_FIELDS = {"format", "base", "vertices", "segments", "rotations",
                "boundary", "nesting", "fibers", "decorations"}


def _require(cond, message, field=None):
    if not cond:
        raise ParseError(message, field=field)


def _check_fields(obj, allowed, where):
    for k in obj:
        if k not in allowed:
            raise ParseError(f"unknown field {k!r} in {where}", field=k)


def _port_str(port) -> str:
    return f"{port[0]}.{port[1]}"


def _parse_port(text):
    _require(isinstance(text, str) and "." in text,
             f"bad port {text!r}", "rotations")
    sid, _, end = text.rpartition(".")
    _require(end in ("0", "1"), f"bad port end in {text!r}", "rotations")
    return (sid, int(end))


def _rotate_min(seq):
    if not seq:
        return list(seq)
    seq = list(seq)
    best = min(range(len(seq)), key=lambda i: seq[i:] + seq[:i])
    return seq[best:] + seq[:best]


def parse_diagram(text: str) -> Diagram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"not valid JSON: {e}") from None
    _require(isinstance(data, dict), "top level must be an object")
    _check_fields(data, _FOLD_FIELDS, "diagram")
    _require(data.get("format") == FOLD_FORMAT,
             f"format must be {FOLD_FORMAT!r}", "format")
    base = data.get("base")
    _require(base in ("disk", "sphere"), "base must be disk or sphere",
             "base")
    vertices = []
    for item in data.get("vertices", []):
        _check_fields(item, {"id", "kind"}, "vertex")
        _require(isinstance(item.get("id"), str), "vertex needs an id",
                 "vertices")
        vertices.append(Vertex(id=item["id"], kind=item.get("kind", "")))
    segments = []
    for item in data.get("segments", []):
        _check_fields(item, {"id", "ends", "higher"}, "segment")
        _require(isinstance(item.get("id"), str), "segment needs an id",
                 "segments")
        ends = item.get("ends")
        if ends is not None:
            _require(isinstance(ends, list) and len(ends) == 2,
                     f"segment {item['id']}: ends must be a pair", "ends")
            ends = tuple(ends)
        segments.append(Segment(id=item["id"], ends=ends,
                                higher=item.get("higher", "")))
    rotations = {}
    rot = data.get("rotations", {})
    _require(isinstance(rot, dict), "rotations must be an object",
             "rotations")
    for vid, ports in rot.items():
        rotations[vid] = [_parse_port(p) for p in ports]
    boundary = data.get("boundary", [])
    nesting = {}
    for comp, spec in (data.get("nesting") or {}).items():
        _require(isinstance(spec, list) and len(spec) == 2,
                 f"nesting of {comp} must be [host_face, own_face]",
                 "nesting")
        nesting[comp] = (spec[0], spec[1])
    fibers = {}
    for ref, genera in (data.get("fibers") or {}).items():
        _require(isinstance(genera, list) and genera and
                 all(isinstance(g, int) and g >= 0 for g in genera),
                 f"fiber at {ref} must be a nonempty list of genera",
                 "fibers")
        fibers[ref] = make_fiber(genera)
    try:
        d = Diagram(base=base, vertices=vertices, segments=segments,
                    rotations=rotations, boundary=boundary, nesting=nesting,
                    fibers=fibers)
    except DiagramError as e:
        raise ParseError(str(e)) from None
    decorations = {}
    for item in data.get("decorations", []):
        _check_fields(item, {"segment", "component", "word"}, "decoration")
        sid = item.get("segment")
        _require(sid in d.segments, f"decoration for unknown segment {sid}",
                 "decorations")
        _require(sid not in decorations,
                 f"duplicate decoration for segment {sid}", "decorations")
        comp = item.get("component", 0)
        try:
            region = d.higher_region(sid)
        except (DiagramError, EmbeddingError) as e:
            raise ParseError(
                f"decoration of {sid}: cannot resolve its higher side "
                f"({e})", field="decorations") from None
        fib = None
        for ref, f in d.fibers.items():
            try:
                if d.region_by_ref(ref).id == region.id:
                    fib = f
                    break
            except DiagramError:
                continue
        _require(fib is not None,
                 f"decoration of {sid}: its higher side has no fiber label",
                 "decorations")
        try:
            decorations[sid] = make_curve(fib, comp, item.get("word", ""))
        except (CurveError, ValueError) as e:
            raise ParseError(f"decoration of {sid}: {e}",
                             field="decorations") from None
    d.decorations.update(decorations)
    return d


def serialize_diagram(d: Diagram) -> str:
    regions = d.compute_regions()
    ref_of_region = {}
    for r in regions:
        ref_of_region[r.id] = r.ref
    fibers = {}
    for ref, fib in d.fibers.items():
        r = d.region_by_ref(ref)
        fibers[ref_of_region[r.id]] = fib.to_json()
    data = {
        "format": FOLD_FORMAT,
        "base": d.base,
        "vertices": [{"id": v.id, "kind": v.kind}
                     for v in sorted(d.vertices.values(),
                                     key=lambda v: v.id)],
        "segments": [{"id": s.id,
                      "ends": list(s.ends) if s.ends else None,
                      "higher": s.higher}
                     for s in sorted(d.segments.values(),
                                     key=lambda s: s.id)],
        "rotations": {
            vid: _rotate_min([_port_str(p) for p in ports])
            for vid, ports in sorted(d.rotations.items())
            if d.vertices[vid].kind != "boundary-end"},
        "boundary": _rotate_min(list(d.boundary)),
        "nesting": {k: list(v) for k, v in sorted(d.nesting.items())},
        "fibers": fibers,
        "decorations": [
            {"segment": sid, "component": c.component,
             "word": word_str(c.word)}
            for sid, c in sorted(d.decorations.items())],
    }
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


# -- moves -------------------------------------------------------------------

_ANCHORS = {
    "finger": {"pushing", "target", "through"},
    "r2-removal": {"lune"},
    "cusp-fold": {"cusp", "arc"},
    "r3": {"triangle", "moving"},
}


def parse_move(text: str) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"not valid JSON: {e}") from None
    return move_from_json(data)


def move_from_json(data) -> dict:
    _require(isinstance(data, dict), "move must be an object")
    _check_fields(data, {"format", "kind", "anchors"}, "move")
    _require(data.get("format") == MOVE_FORMAT,
             f"format must be {MOVE_FORMAT!r}", "format")
    kind = data.get("kind")
    _require(kind in _ANCHORS, f"unknown move kind {kind!r}", "kind")
    anchors = data.get("anchors")
    _require(isinstance(anchors, dict), "anchors must be an object",
             "anchors")
    _check_fields(anchors, _ANCHORS[kind], f"{kind} anchors")
    for k in _ANCHORS[kind]:
        _require(k in anchors and isinstance(anchors[k], str),
                 f"{kind} move needs anchor {k!r}", "anchors")
    return {"kind": kind, "anchors": dict(anchors)}


def move_to_json(move: dict) -> dict:
    return {"format": MOVE_FORMAT, "kind": move["kind"],
            "anchors": dict(move["anchors"])}


def serialize_move(move: dict) -> str:
    return json.dumps(move_to_json(move), indent=2, sort_keys=True) + "\n"


def parse_script(text: str) -> list:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"not valid JSON: {e}") from None
    _require(isinstance(data, dict), "script must be an object")
    _check_fields(data, {"format", "steps"}, "script")
    _require(data.get("format") == SCRIPT_FORMAT,
             f"format must be {SCRIPT_FORMAT!r}", "format")
    steps = []
    for item in data.get("steps", []):
        _check_fields(item, {"kind", "anchors", "expect"}, "script step")
        move = move_from_json({"format": MOVE_FORMAT,
                               "kind": item.get("kind"),
                               "anchors": item.get("anchors")})
        expect = item.get("expect")
        if expect is not None:
            _check_fields(expect, {"outcome", "rule"}, "step expectation")
        steps.append({"kind": move["kind"], "anchors": move["anchors"],
                      "expect": expect})
    return steps


def serialize_script(steps) -> str:
    out = []
    for st in steps:
        item = {"kind": st["kind"], "anchors": dict(st["anchors"])}
        if st.get("expect") is not None:
            item["expect"] = dict(st["expect"])
        out.append(item)
    return json.dumps({"format": SCRIPT_FORMAT, "steps": out}, indent=2,
                      sort_keys=True) + "\n"
