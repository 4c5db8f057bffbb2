"""Cyclic crossing words for curves on a one-vertex polygon model.

A closed orientable surface of genus g is modelled as a 4g-gon with side
word a1 b1 A1 B1 a2 b2 A2 B2 ... (capital = inverse), all corners glued to
a single vertex.  The 2g loops a1, b1, ..., ag, bg form the standard loop
system; its complement is an open disk.

A curve is recorded by the cyclic sequence of its transverse crossings with
the loop system.  Letters are encoded as nonzero ints: loop index l (0-based,
a1=0, b1=1, a2=2, ...) with sign s gives the letter s*(l+1).  Crossing a loop
"positively" means the strand leaves the polygon through the side carrying
the positive label and re-enters through its partner.

Words compare up to cyclic rotation; unoriented curves additionally compare
up to reversal (reverse the sequence and invert every letter).
"""

from __future__ import annotations

import re

Word = tuple  # tuple of nonzero ints

_LETTER_RE = re.compile(r"^([a-bA-B])(\d+)$")


def letter_str(c: int) -> str:
    """Render a letter code as e.g. 'a1', 'B2'."""
    if c == 0:
        raise ValueError("letter code 0 is not a letter")
    loop = abs(c) - 1
    name = "ab"[loop % 2] + str(loop // 2 + 1)
    return name if c > 0 else name.upper()


def parse_letter(tok: str) -> int:
    m = _LETTER_RE.match(tok)
    if not m:
        raise ValueError(f"bad letter {tok!r}")
    kind, idx = m.group(1), int(m.group(2))
    if idx < 1:
        raise ValueError(f"bad letter index in {tok!r}")
    loop = 2 * (idx - 1) + (0 if kind.lower() == "a" else 1)
    code = loop + 1
    return code if kind.islower() else -code


def parse_word(text: str) -> Word:
    """Parse 'a1 b1 A1' style text into a word tuple."""
    toks = text.split()
    return tuple(parse_letter(t) for t in toks)


def word_str(w: Word) -> str:
    return " ".join(letter_str(c) for c in w)


def min_genus(w: Word) -> int:
    """Smallest genus whose loop system supports every letter of w."""
    if not w:
        return 0
    return (max(abs(c) for c in w) + 1) // 2


def reverse_word(w: Word) -> Word:
    """The same curve traversed backwards."""
    return tuple(-c for c in reversed(w))


def reduce_cyclic(w: Word) -> Word:
    """Free reduction of a cyclic word: cancel adjacent x x^-1 pairs,
    including around the wrap point, to exhaustion."""
    out = list(w)
    changed = True
    while changed and out:
        changed = False
        i = 0
        while i < len(out) and len(out) >= 2:
            j = (i + 1) % len(out)
            if out[i] == -out[j]:
                if j > i:
                    del out[j], out[i]
                else:
                    del out[i], out[j]
                changed = True
                i = 0
            else:
                i += 1
    return tuple(out)


def rotations(w: Word):
    for i in range(len(w)):
        yield w[i:] + w[:i]


def canonical_rotation(w: Word) -> Word:
    """Lexicographically least rotation (letters ordered by int value)."""
    if not w:
        return w
    return min(rotations(w))


def canonical_cycle(w: Word) -> Word:
    """Least representative over all rotations and the reversal."""
    if not w:
        return w
    return min(canonical_rotation(w), canonical_rotation(reverse_word(w)))


def is_proper_power(w: Word) -> bool:
    """True if the cyclic word is u^k for some k >= 2."""
    n = len(w)
    if n == 0:
        return False
    for p in range(1, n):
        if n % p == 0 and w == w[p:] + w[:p]:
            return True
    return False


def exponent_vector(w: Word, genus: int) -> tuple:
    """Signed crossing counts with each loop (the homology class of the
    curve in the basis dual to the loop system)."""
    v = [0] * (2 * genus)
    for c in w:
        v[abs(c) - 1] += 1 if c > 0 else -1
    return tuple(v)


def link_relator(genus: int) -> Word:
    """Crossing word of a small circle around the model vertex.

    Walking the corners of the 4g-gon around the glued vertex crosses every
    loop germ once; the resulting cyclic word is the relator of the dual
    presentation of the surface group.  For genus 1 it is a1 B1 A1 b1.
    """
    n = 4 * genus
    # side s (0..n-1) carries code: handle h contributes (+a,+b,-a,-b)
    codes = []
    for h in range(genus):
        a, b = 2 * h + 1, 2 * h + 2
        codes += [a, b, -a, -b]
    partner = {}
    for i, c in enumerate(codes):
        for j, d in enumerate(codes):
            if d == -c:
                partner[i] = j
    word = []
    i = 0
    seen = 0
    while seen < n:
        word.append(codes[i])
        i = (partner[i] + 1) % n
        seen += 1
    if i != 0:
        raise AssertionError("vertex walk did not close up")
    return tuple(word)
