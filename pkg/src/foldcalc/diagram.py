"""Decorated planar base diagrams.

The critical image is an embedded graph on a disk or sphere base:

* vertices: 4-valent crossings (two fold strands meeting transversely),
  cusps (two fold strands with a common endpoint), and degree-1 ends on the
  disk boundary;
* segments: fold-arc pieces between vertices, or vertexless fold circles,
  each co-oriented toward its higher-genus side (left/right of the
  tail-to-head traversal);
* a rotation system: counterclockwise port order at every vertex, with the
  convention that the two ports of one strand sit opposite each other at a
  crossing; disconnected pieces record which face of which component hosts
  them (`nesting`);
* derived regions labeled by FiberModels and one decorating Curve per
  segment, living in the fiber of the segment's higher-genus side.

Face tracing uses the predecessor rule (next dart leaves through the
rotation predecessor of the arrival port), so a traced face lies on the
left of its forward darts.  On the disk base the boundary circle joins the
graph as virtual edges strung counterclockwise through the boundary-end
vertices; the unique all-virtual face is the outside of the base and is
dropped from the region list, giving the Euler count V - E + F = 1 with
the boundary structure included.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DiagramError, EmbeddingError, MeasureOnHigherSide
from .fiber import Curve, FiberModel

LEFT, RIGHT = "left", "right"
DISK_FACE = "@disk"
OUTER = "@outer"

VERTEX_KINDS = ("crossing", "cusp", "boundary-end")
_DEGREE = {"crossing": 4, "cusp": 2, "boundary-end": 1}


def other_side(side: str) -> str:
    return LEFT if side == RIGHT else RIGHT


@dataclass(frozen=True)
class Vertex:
    id: str
    kind: str


@dataclass(frozen=True)
class Segment:
    id: str
    ends: tuple | None   # (tail id, head id), or None for a fold circle
    higher: str          # side with the higher-genus fiber: left | right


@dataclass(frozen=True)
class Region:
    id: str
    ref: str             # canonical "seg:side" handle ("@disk" if bare)
    fiber: FiberModel | None
    boundary: tuple      # tuple of walks, each a tuple of (segment, side)

    def sides(self):
        out = set()
        for walk in self.boundary:
            out.update(walk)
        return out


class Diagram:
    """Immutable decorated diagram; rewrites build new instances."""

    def __init__(self, base, vertices, segments, rotations, boundary=(),
                 nesting=None, fibers=None, decorations=None):
        if base not in ("disk", "sphere"):
            raise DiagramError(f"unknown base {base!r}")
        self.base = base
        vertices = list(vertices)
        segments = list(segments)
        self.vertices = {v.id: v for v in vertices}
        if len(self.vertices) != len(vertices):
            raise DiagramError("duplicate vertex id")
        self.segments = {s.id: s for s in segments}
        if len(self.segments) != len(segments):
            raise DiagramError("duplicate segment id")
        self.rotations = {v: [tuple(p) for p in ports]
                          for v, ports in rotations.items()}
        self.boundary = tuple(boundary)
        self.nesting = {k: tuple(v) for k, v in (nesting or {}).items()}
        self.fibers = dict(fibers or {})            # region ref -> FiberModel
        self.decorations = dict(decorations or {})  # segment id -> Curve
        self._structural_check()
        self._regions = None
        self._side_region = {}

    # -- structure -----------------------------------------------------------

    def _structural_check(self):
        ports_at = {v: [] for v in self.vertices}
        for v in self.vertices.values():
            if v.kind not in VERTEX_KINDS:
                raise DiagramError(f"vertex {v.id}: unknown kind {v.kind!r}")
            if v.kind == "boundary-end" and self.base != "disk":
                raise DiagramError(
                    f"vertex {v.id}: boundary-end needs a disk base")
        for s in self.segments.values():
            if s.higher not in (LEFT, RIGHT):
                raise DiagramError(f"segment {s.id}: bad side {s.higher!r}")
            if s.ends is not None:
                if len(s.ends) != 2:
                    raise DiagramError(f"segment {s.id}: need two ends")
                for k, vid in enumerate(s.ends):
                    if vid not in self.vertices:
                        raise DiagramError(
                            f"segment {s.id}: unknown vertex {vid}")
                    ports_at[vid].append((s.id, k))
        for vid, ports in ports_at.items():
            kind = self.vertices[vid].kind
            if len(ports) != _DEGREE[kind]:
                raise DiagramError(
                    f"vertex {vid}: degree {len(ports)} != {_DEGREE[kind]} "
                    f"for a {kind}")
            rot = self.rotations.get(vid)
            if kind == "boundary-end":
                self.rotations[vid] = [ports[0]]
                continue
            if rot is None:
                raise DiagramError(f"vertex {vid}: missing rotation")
            if sorted(rot) != sorted(ports):
                raise DiagramError(
                    f"vertex {vid}: rotation must order its ports")
        for vid in list(self.rotations):
            if vid not in self.vertices:
                raise DiagramError(f"rotation for unknown vertex {vid}")
        bends = sorted(v.id for v in self.vertices.values()
                       if v.kind == "boundary-end")
        if self.base == "disk":
            if sorted(self.boundary) != bends:
                raise DiagramError(
                    "boundary must list exactly the boundary-end vertices")
        elif self.boundary:
            raise DiagramError("sphere base has no boundary list")

    # -- components ----------------------------------------------------------

    def components(self):
        """(root_key, {component key: set of segment ids}).  Keys are the
        least segment id; the disk-boundary component is keyed '@disk' and
        is the root on a disk base."""
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

        for sid in self.segments:
            parent[sid] = sid
        for vid in self.vertices:
            parent[vid] = vid
        if self.base == "disk":
            parent[DISK_FACE] = DISK_FACE
            for vid in self.boundary:
                union(vid, DISK_FACE)
        for s in self.segments.values():
            if s.ends:
                union(s.id, s.ends[0])
                union(s.id, s.ends[1])
        groups = {}
        for sid in self.segments:
            groups.setdefault(find(sid), set()).add(sid)
        if self.base == "disk":
            groups.setdefault(find(DISK_FACE), set())
        keyed = {}
        disk_root = find(DISK_FACE) if self.base == "disk" else None
        for root, segs in groups.items():
            key = DISK_FACE if root == disk_root else min(segs)
            keyed[key] = segs
        if self.base == "disk":
            root_key = DISK_FACE
        else:
            root_key = min(keyed) if keyed else None
        return root_key, keyed

    # -- face tracing --------------------------------------------------------

    def _faces_of_component(self, segs, with_boundary):
        """Face cycles (tuples of darts) of one component.  A dart is
        (segment id, dir) with dir 0 = tail-to-head, or (('@b', j), dir)
        for the j-th virtual boundary edge."""
        incident = {}
        for sid in sorted(segs):
            s = self.segments[sid]
            for k in range(2):
                incident.setdefault(s.ends[k], []).append((s.id, k))
        rot = {vid: list(self.rotations[vid]) for vid in incident}
        bverts = list(self.boundary) if with_boundary else []
        nb = len(bverts)
        for j, vid in enumerate(bverts):
            arc = rot[vid][0]
            prev_e = (("@b", (j - 1) % nb), 1)
            next_e = (("@b", j), 0)
            rot[vid] = [arc, prev_e, next_e]

        def head(dart):
            (eid, d) = dart
            if isinstance(eid, tuple):
                j = eid[1]
                return bverts[(j + 1) % nb] if d == 0 else bverts[j]
            s = self.segments[eid]
            return s.ends[1] if d == 0 else s.ends[0]

        def next_dart(dart):
            v = head(dart)
            ports = rot[v]
            arrival = (dart[0], 1 - dart[1])
            try:
                i = ports.index(arrival)
            except ValueError:
                raise EmbeddingError(
                    f"dangling port at vertex {v}") from None
            eid, k = ports[(i - 1) % len(ports)]
            return (eid, k)

        domain = []
        for vid in sorted(rot):
            for (eid, k) in rot[vid]:
                domain.append((eid, k))
        seen = set()
        faces = []
        for d0 in domain:
            if d0 in seen:
                continue
            cyc = []
            d = d0
            while True:
                if d in seen:
                    raise EmbeddingError("face walk collided; the rotation "
                                         "system is inconsistent")
                seen.add(d)
                cyc.append(d)
                d = next_dart(d)
                if d == d0:
                    break
            faces.append(tuple(cyc))
        # Euler: every component embeds in the sphere
        nv = len(incident)
        ne = sum(1 for _ in segs) + nb
        if nv - ne + len(faces) != 2:
            raise EmbeddingError(
                f"component violates the Euler relation: V={nv} E={ne} "
                f"F={len(faces)}")
        return faces

    def _face_lists(self):
        root_key, comps = self.components()
        face_lists = {}
        for key, segs in sorted(comps.items()):
            vertexed = {sid for sid in segs
                        if self.segments[sid].ends is not None}
            if key == DISK_FACE and not vertexed:
                face_lists[key] = [(OUTER,), (DISK_FACE,)]
            elif vertexed:
                face_lists[key] = self._faces_of_component(
                    vertexed, with_boundary=(key == DISK_FACE))
            else:
                sid = min(segs)
                face_lists[key] = [((sid, 0),), ((sid, 1),)]
        return root_key, comps, face_lists

    # -- regions -------------------------------------------------------------

    def compute_regions(self):
        """Faces grouped into regions with deterministic ids.

        Raises EmbeddingError for a non-planar rotation system or
        inconsistent nesting data.
        """
        if self._regions is not None:
            return self._regions
        root_key, comps, face_lists = self._face_lists()
        face_ref = {}
        ref_to_face = {}
        for key, faces in face_lists.items():
            for f in faces:
                ref = _face_handle(f)
                face_ref[(key, f)] = ref
                if ref in ref_to_face:
                    raise EmbeddingError(f"ambiguous face handle {ref}")
                ref_to_face[ref] = (key, f)
        for key in comps:
            if key != root_key and key not in self.nesting:
                raise EmbeddingError(
                    f"component {key} needs a nesting entry")
        for key in self.nesting:
            if key == root_key or key not in comps:
                raise EmbeddingError(f"nesting entry for bad component "
                                     f"{key}")
        parent = {}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for node in face_ref:
            parent[node] = node
        for key, (host_ref, own_ref) in sorted(self.nesting.items()):
            own = ref_to_face.get(own_ref)
            host = ref_to_face.get(host_ref)
            if own is None or own[0] != key:
                raise EmbeddingError(
                    f"nesting of {key}: {own_ref} is not a face of it")
            if host is None or host[0] == key:
                raise EmbeddingError(
                    f"nesting of {key}: bad host face {host_ref}")
            ra, rb = find(host), find(own)
            if ra == rb:
                raise EmbeddingError(f"nesting of {key}: cyclic")
            parent[ra] = rb
        groups = {}
        for node in parent:
            groups.setdefault(find(node), []).append(node)
        drop = None
        if self.base == "disk":
            outer_face = _outer_face(face_lists[DISK_FACE])
            drop = find((DISK_FACE, outer_face))
        entries = []
        for root, members in groups.items():
            if root == drop:
                continue
            walks = []
            refs = []
            for (key, f) in members:
                refs.append(face_ref[(key, f)])
                walk = tuple(_dart_side(d) for d in f if not _is_virtual(d))
                if walk:
                    walks.append(walk)
            real_refs = [r for r in refs if not r.startswith("@")]
            ref = min(real_refs) if real_refs else DISK_FACE
            entries.append((ref, tuple(sorted(walks))))
        entries.sort()
        regions = []
        for i, (ref, walks) in enumerate(entries):
            fib = self.fibers.get(ref)
            if fib is None:
                keys = {f"{s}:{side}" for walk in walks for (s, side) in walk}
                keys.add(ref)
                for key in self.fibers:
                    if key in keys:
                        fib = self.fibers[key]
                        break
            regions.append(Region(id=f"r{i}", ref=ref, fiber=fib,
                                  boundary=walks))
        self._regions = regions
        self._side_region = {}
        for r in regions:
            for sd in r.sides():
                self._side_region[sd] = r
        return regions

    # -- lookups -------------------------------------------------------------

    def region_of_side(self, sid, side) -> Region:
        self.compute_regions()
        r = self._side_region.get((sid, side))
        if r is None:
            raise DiagramError(f"no region borders {sid}:{side}")
        return r

    def region_by_ref(self, ref) -> Region:
        regions = self.compute_regions()
        for r in regions:
            if r.ref == ref:
                return r
        if ":" in ref:
            sid, side = ref.rsplit(":", 1)
            return self.region_of_side(sid, side)
        raise DiagramError(f"no region {ref}")

    def region_by_id(self, rid) -> Region:
        for r in self.compute_regions():
            if r.id == rid:
                return r
        raise DiagramError(f"no region {rid}")

    def higher_region(self, sid) -> Region:
        return self.region_of_side(sid, self.segments[sid].higher)

    def lower_region(self, sid) -> Region:
        return self.region_of_side(
            sid, other_side(self.segments[sid].higher))

    def genus_side(self, sid, region) -> str:
        """'higher' | 'lower' | 'not-adjacent'."""
        rid = region.id if isinstance(region, Region) else region
        self.compute_regions()
        s = self.segments[sid]
        hi = self._side_region.get((sid, s.higher))
        lo = self._side_region.get((sid, other_side(s.higher)))
        if hi is not None and hi.id == rid:
            return "higher"
        if lo is not None and lo.id == rid:
            return "lower"
        return "not-adjacent"

    def measure_cycle(self, sid, region) -> Curve:
        """The stored decoration, measurable only from the higher side."""
        side = self.genus_side(sid, region)
        if side == "higher":
            dec = self.decorations.get(sid)
            if dec is None:
                raise DiagramError(f"segment {sid} carries no decoration")
            return dec
        if side == "lower":
            raise MeasureOnHigherSide(
                f"segment {sid}: cycles are measured on the higher-genus "
                "side; cross the fold via transport instead")
        raise DiagramError(f"segment {sid} does not border that region")

    # -- strands -------------------------------------------------------------

    def strand_exit(self, vid, arrival_port):
        """Port continuing the strand through a crossing or cusp."""
        v = self.vertices[vid]
        rot = self.rotations[vid]
        i = rot.index(tuple(arrival_port))
        if v.kind == "crossing":
            return rot[(i + 2) % 4]
        if v.kind == "cusp":
            return rot[(i + 1) % 2]
        return None

    def arc_ports(self, sid):
        """The maximal fold arc through segment sid, walked through
        crossings only.  Returns (ordered segment ids, closed) where closed
        means the walk came back around (a circle through crossings)."""
        s = self.segments[sid]
        if s.ends is None:
            return [sid], True
        chain = [sid]
        start_port = (sid, 0)
        # walk forward out of ends[1]
        cur = (sid, 1)
        closed = False
        while True:
            vid = self.segments[cur[0]].ends[cur[1]]
            if self.vertices[vid].kind != "crossing":
                break
            nxt = self.strand_exit(vid, cur)
            step = (nxt[0], 1 - nxt[1])
            if (nxt[0], nxt[1]) == start_port or step == (sid, 1):
                closed = True
                break
            chain.append(nxt[0])
            cur = step
            if len(chain) > len(self.segments) + 1:
                raise DiagramError("strand walk runaway")
        if closed:
            return chain, True
        cur = (sid, 0)
        while True:
            vid = self.segments[cur[0]].ends[cur[1]]
            if self.vertices[vid].kind != "crossing":
                break
            nxt = self.strand_exit(vid, cur)
            chain.insert(0, nxt[0])
            cur = (nxt[0], 1 - nxt[1])
            if len(chain) > len(self.segments) + 1:
                raise DiagramError("strand walk runaway")
        return chain, False

    def euler_summary(self):
        """(V, E, F) over the whole diagram, counting boundary structure
        and all regions (outer face excluded on the disk).  A vertexless
        fold circle counts as one vertex and one edge so the counts form a
        cell structure."""
        self.compute_regions()
        circles = sum(1 for s in self.segments.values() if s.ends is None)
        nv = len(self.vertices) + circles
        ne = (sum(1 for s in self.segments.values())
              + (len(self.boundary) if self.base == "disk" else 0))
        nf = len(self._regions)
        return nv, ne, nf


def _is_virtual(dart):
    return isinstance(dart[0], tuple) or dart[0] in (OUTER, DISK_FACE)


def _dart_side(dart):
    (sid, d) = dart
    return (sid, LEFT if d == 0 else RIGHT)


def _face_handle(face):
    real = sorted(_dart_side(d) for d in face if not _is_virtual(d))
    if not real:
        if face == (DISK_FACE,):
            return DISK_FACE
        if face == (OUTER,):
            return OUTER
        # all-virtual traced face: the outside of the disk
        return OUTER
    sid, side = real[0]
    return f"{sid}:{side}"


def _outer_face(faces):
    for f in faces:
        if all(_is_virtual(d) for d in f):
            return f
    raise EmbeddingError("disk boundary has no outer face")
