"""Fiber models: closed orientable surfaces and simple closed curves.

A FiberModel is an ordered list of components, each a closed orientable
surface of some genus carried by the standard one-vertex polygon model (see
``words``).  Curves live in a single component and are stored as reduced
cyclic crossing words with the loop system.

Isotopy classification goes through free homotopy: two essential simple
closed curves on an orientable surface are isotopic exactly when they are
freely homotopic (up to orientation reversal), so the normal form is a
canonical representative of the conjugacy class in the surface group.  For
the torus that class is an exponent pair; for genus >= 2 the one-relator
presentation dual to the loop system has pieces of length one, so Dehn's
algorithm applies and a bounded breadth-first closure over relator rewrites
finds the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import kernels
from .errors import CurveError, OrbitCapExceeded
from .words import (Word, canonical_cycle, canonical_rotation, exponent_vector,
                    is_proper_power, link_relator, min_genus, parse_word,
                    reduce_cyclic, reverse_word, word_str)

ORBIT_CAP_DEFAULT = 120_000


@dataclass(frozen=True, order=True)
class FiberComponent:
    """One closed orientable component, fixed polygon model per genus."""
    genus: int
    tag: int = 0

    def __post_init__(self):
        if self.genus < 0:
            raise ValueError("genus must be nonnegative")

    @property
    def euler(self) -> int:
        return 2 - 2 * self.genus


class FiberModel:
    """Nonempty ordered list of FiberComponents, canonically sorted.

    Equality compares the genus sequences only; tags are bookkeeping that
    lets surgery results say which component descended from which.
    """

    __slots__ = ("components",)

    def __init__(self, components):
        comps = tuple(sorted(components, key=lambda c: (c.genus, c.tag)))
        if not comps:
            raise ValueError("a fiber model needs at least one component")
        object.__setattr__(self, "components", comps)

    @property
    def genera(self) -> tuple:
        return tuple(c.genus for c in self.components)

    @property
    def euler(self) -> int:
        return sum(c.euler for c in self.components)

    def genus_of(self, component: int) -> int:
        return self.components[component].genus

    def __len__(self):
        return len(self.components)

    def __eq__(self, other):
        return isinstance(other, FiberModel) and self.genera == other.genera

    def __hash__(self):
        return hash(self.genera)

    def __repr__(self):
        return f"FiberModel{self.genera}"

    def to_json(self):
        return list(self.genera)


def make_fiber(genera) -> FiberModel:
    """Build a canonical FiberModel with one component per genus entry."""
    genera = list(genera)
    if not genera:
        raise ValueError("empty genus list")
    return FiberModel(FiberComponent(g, tag=i) for i, g in enumerate(genera))


@dataclass(frozen=True)
class Curve:
    """Simple closed essential curve in one fiber component.

    `word` is the reduced cyclic crossing word with the component's loop
    system; the constructor path (`curve`) verifies that the word admits a
    crossing-free chord placement and is essential.
    """
    component: int
    word: Word
    genus: int

    def __str__(self):
        return f"[{self.component}] {word_str(self.word)}"

    def to_json(self):
        return {"component": self.component, "word": word_str(self.word)}


def curve(F: FiberModel, component: int, word) -> Curve:
    """Validated Curve constructor; `word` is a tuple or 'a1 b1' text."""
    if isinstance(word, str):
        word = parse_word(word)
    word = tuple(word)
    if not 0 <= component < len(F):
        raise CurveError(f"no component {component} in {F!r}")
    g = F.genus_of(component)
    red = reduce_cyclic(word)
    if not red:
        raise CurveError("word reduces to the trivial curve")
    if min_genus(red) > g:
        raise CurveError(
            f"letters exceed genus-{g} loop system: {word_str(red)}")
    if is_proper_power(red):
        raise CurveError(f"word is a proper power: {word_str(red)}")
    if kernels.embed(red, g) is None:
        raise CurveError(f"word is not embeddable: {word_str(red)}")
    if not normal_form(red, g):
        raise CurveError(f"curve is null-homotopic: {word_str(red)}")
    return Curve(component, red, g)


# ---------------------------------------------------------------------------
# normal forms


def _mechanical(m: int, n: int, la: int, lb: int) -> Word:
    """Evenly interleaved word with m copies of la and n copies of lb."""
    if m == 0:
        return (lb,) * n
    if n == 0:
        return (la,) * m
    total = m + n
    out = []
    for i in range(total):
        if (i + 1) * n // total > i * n // total:
            out.append(lb)
        else:
            out.append(la)
    return tuple(out)


@lru_cache(maxsize=None)
def _rewrite_table(genus: int):
    """Dehn rewriting rules s -> t for the dual one-relator presentation.

    Keys are subwords of length >= half the relator taken from any rotation
    of the relator or its inverse; values are the strictly-shorter or
    equal-length complements.  Pieces have length one, so these rules
    realize Dehn's algorithm and its conjugacy variant.
    """
    R = link_relator(genus)
    n = len(R)
    half = n // 2
    table = {}
    for base in (R, reverse_word(R)):
        for i in range(n):
            rho = base[i:] + base[:i]
            for L in range(half, n + 1):
                s = rho[:L]
                t = reverse_word(rho[L:])
                table.setdefault(s, set()).add(t)
    return {s: tuple(sorted(ts)) for s, ts in table.items()}


def _apply_rewrites(w: Word, genus: int):
    """All words obtainable from cyclic word w by one rewrite."""
    table = _rewrite_table(genus)
    n = len(w)
    half = 2 * genus
    out = set()
    if n < half:
        return out
    doubled = w + w
    for i in range(n):
        for L in range(half, min(4 * genus, n) + 1):
            s = doubled[i:i + L]
            repls = table.get(s)
            if not repls:
                continue
            rest = doubled[i + L:i + n]
            for t in repls:
                out.add(reduce_cyclic(t + rest))
    return out


@lru_cache(maxsize=None)
def normal_form(word: Word, genus: int, cap: int = ORBIT_CAP_DEFAULT) -> Word:
    """Canonical representative of the unoriented free homotopy class.

    Genus 0: everything is trivial.  Genus 1: the class is its exponent
    pair, canonicalized to a mechanical word.  Genus >= 2: bounded
    breadth-first closure under length-nonincreasing Dehn rewrites, then
    the least word among the shortest visited, over rotations and reversal.
    """
    w = reduce_cyclic(tuple(word))
    if not w:
        return ()
    if genus == 0:
        return ()
    if genus == 1:
        a, b = exponent_vector(w, 1)
        if a == 0 and b == 0:
            return ()
        if a < 0 or (a == 0 and b < 0):
            a, b = -a, -b
        la = 1 if a >= 0 else -1
        lb = 2 if b >= 0 else -2
        return canonical_rotation(_mechanical(abs(a), abs(b), la, lb))
    start = canonical_cycle(w)
    seen = {start}
    queue = [start]
    while queue:
        cur = queue.pop()
        for rep in (cur, reverse_word(cur)):
            for nxt in _apply_rewrites(rep, genus):
                key = canonical_cycle(nxt)
                if key not in seen:
                    if len(seen) >= cap:
                        raise OrbitCapExceeded(
                            f"normal form orbit exceeded {cap} words")
                    seen.add(key)
                    queue.append(key)
    best = min(seen, key=lambda x: (len(x), x))
    return best


@lru_cache(maxsize=None)
def _full_rewrite_table(genus: int):
    """Relator rewrites at every split length, including the growing ones.

    Used when a representative must avoid certain loops: the normal form
    minimizes length, but clearing a handle can require a longer word, so
    this search walks the conjugacy class with growth allowed.
    """
    R = link_relator(genus)
    n = len(R)
    table = {}
    for base in (R, reverse_word(R)):
        for i in range(n):
            rho = base[i:] + base[:i]
            for L in range(1, n):
                s = rho[:L]
                t = reverse_word(rho[L:])
                table.setdefault(s, set()).add(t)
    return {s: tuple(sorted(ts)) for s, ts in table.items()}


@lru_cache(maxsize=None)
def rep_avoiding(word: Word, genus: int, banned_loops: tuple,
                 maxlen: int = 0, cap: int = 60_000):
    """A representative of the word's class whose letters avoid the given
    1-based loop codes, or None if the bounded search finds none.

    Breadth-first over relator rewrites with growth allowed up to maxlen;
    returns the least such word by (length, letters).
    """
    banned = set(banned_loops)
    start = canonical_cycle(reduce_cyclic(tuple(word)))
    if not any(abs(c) in banned for c in start):
        return start
    if genus < 2:
        # torus classes: the exponent pair is the class; avoidance is
        # possible only if the banned loops carry exponent zero, and then
        # the mechanical word of the free axis works
        ex = exponent_vector(start, max(genus, 1))
        if any(ex[b - 1] for b in banned if b - 1 < len(ex)):
            return None
        return normal_form(start, genus)
    if maxlen <= 0:
        maxlen = max(2 * len(start), len(start) + 4 * genus) + 2
    table = _full_rewrite_table(genus)
    seen = {start}
    frontier = [start]
    best = None
    while frontier and best is None:
        nxt = []
        for w in frontier:
            for rep in (w, reverse_word(w)):
                n = len(rep)
                dbl = rep + rep
                for i in range(n):
                    for L in range(1, min(4 * genus, n) + 1):
                        s = dbl[i:i + L]
                        repls = table.get(s)
                        if not repls:
                            continue
                        rest = dbl[i + L:i + n]
                        for t in repls:
                            new = reduce_cyclic(t + rest)
                            if len(new) > maxlen:
                                continue
                            key = canonical_cycle(new)
                            if key in seen:
                                continue
                            if len(seen) >= cap:
                                return best
                            seen.add(key)
                            nxt.append(key)
                            if not any(abs(c) in banned for c in key):
                                if best is None or \
                                        (len(key), key) < (len(best), best):
                                    best = key
        frontier = nxt
    return best


# ---------------------------------------------------------------------------
# curve operations


def normalize(c: Curve) -> Curve:
    """Canonical isotopy-class representative of c."""
    nf = normal_form(c.word, c.genus)
    if not nf:
        raise CurveError("normalization collapsed the curve")
    return Curve(c.component, nf, c.genus)


def are_isotopic(c1: Curve, c2: Curve, F: FiberModel) -> bool:
    """Same component and same normal form."""
    _check_in(F, c1)
    _check_in(F, c2)
    if c1.component != c2.component:
        return False
    return normal_form(c1.word, c1.genus) == normal_form(c2.word, c2.genus)


@lru_cache(maxsize=None)
def _min_cross_cached(w1: Word, w2: Word, genus: int) -> int:
    n, _orders = kernels.min_cross(w1, w2, genus)
    if n is None:
        raise CurveError("word admits no embedded placement")
    return n


def intersection_number(c1: Curve, c2: Curve, F: FiberModel) -> int:
    """Geometric (minimal) intersection number.

    Curves in different components are disjoint.  Within a component the
    number is the exact minimum crossing count over chord placements of the
    two normal forms; the acceptance suite pins this against an exhaustive
    independent oracle.
    """
    _check_in(F, c1)
    _check_in(F, c2)
    if c1.component != c2.component:
        return 0
    g = c1.genus
    w1 = normal_form(c1.word, g)
    w2 = normal_form(c2.word, g)
    if (w2, w1) < (w1, w2):
        w1, w2 = w2, w1
    return _min_cross_cached(w1, w2, g)


def is_separating(c: Curve, F: FiberModel) -> bool:
    """Mod-2 homology test: an embedded closed curve separates exactly when
    its crossing parities with every loop vanish."""
    _check_in(F, c)
    return all(e % 2 == 0 for e in exponent_vector(c.word, c.genus))


def _check_in(F: FiberModel, c: Curve):
    if not 0 <= c.component < len(F):
        raise CurveError(f"curve component {c.component} outside {F!r}")
    if F.genus_of(c.component) != c.genus:
        raise CurveError("curve genus does not match the fiber component")


# ---------------------------------------------------------------------------
# Dehn twist action on words

def _in_arc(x: int, a: int, b: int) -> bool:
    """Is x strictly inside the cyclic arc from a to b (increasing keys)?"""
    if a < b:
        return a < x < b
    return x > a or x < b


def twist_word(c: Word, d: Word, genus: int, power: int = 1) -> Word:
    """Crossing word of the image of c under the Dehn twist along d.

    Both words are placed together at minimal crossings; each crossing is
    then replaced by a detour running once around d (power times, direction
    per the crossing sign).  The result is reduced but not normalized.
    """
    if power == 0 or not c:
        return c
    n, orders = kernels.min_cross(c, d, genus)
    if n is None:
        raise CurveError("twist of a non-embeddable word")
    if n == 0:
        return c
    span, chords = kernels.placement_points((tuple(c), tuple(d)), genus,
                                            orders)
    c_chords = [(t, ki, ko) for q, t, ki, ko in chords if q == 0]
    d_chords = [(t, ki, ko) for q, t, ki, ko in chords if q == 1]
    nd = len(d)
    modulus = span * (4 * genus + 1)
    # crossings[t] = list of (arc_position, d_pos, sign) on chord t of c
    crossings = {}
    for t, p1, p2 in c_chords:
        hits = []
        for s, q1, q2 in d_chords:
            i1 = _in_arc(q1, p1, p2)
            i2 = _in_arc(q2, p1, p2)
            if i1 == i2:
                continue
            x = q1 if i1 else q2
            sign = 1 if i1 else -1
            hits.append(((x - p1) % modulus, s, sign))
        if hits:
            hits.sort()
            crossings[t] = hits
    out = []
    for t in range(len(c)):
        out.append(c[t])
        for _dist, s, sign in crossings.get(t, ()):
            direction = sign * (1 if power > 0 else -1)
            for _rep in range(abs(power)):
                if direction > 0:
                    for k in range(nd):
                        out.append(d[(s + 1 + k) % nd])
                else:
                    for k in range(nd):
                        out.append(-d[(s - k) % nd])
    return reduce_cyclic(tuple(out))

