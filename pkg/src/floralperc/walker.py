"""Interface walking core shared by static tracing and the live explorer.

The interface runs along hexagon edges and through the diagonals of split
hexagons, with blue always on the right.  State is (vertex, travel vdir,
via) where via records whether the last segment was an ordinary edge or a
split diagonal.  Each move inspects the hexagons ahead through a
``resolve`` callable, which lets the same code serve three masters:

* static tracing -- resolve looks states up in a full configuration;
* live exploration -- resolve samples undetermined cells from their exact
  conditional law (and records the revelation);
* exact law enumeration -- resolve raises NeedCell so a driver can branch
  over the possible outcomes.

Sector bookkeeping at a vertex reached with travel direction u: the right
flank occupies slot u+4, the left flank slot u+2, the front slot u (after
a diagonal the front is two hexagons, slots u+5 and u+1, flanked by the
halves of the traversed hexagon).  Sweeping from the blue (right) side,
the continuation is the boundary before the first yellow sector; sweeping
from the yellow side, the boundary before the first blue one.  The sweeps
disagree exactly at pinch vertices, where a split diagonal ends between
oppositely colored sectors and the strand pairing is genuinely ambiguous:
the two pairings wrap the pinched local cluster on opposite sides, mirror
images of each other, and the color-swap mirror symmetry of the measure
forces the symmetric convention -- a fair coin, asked from the resolver
under a ("coin", vertex, travel) key.  A second passage through the same
vertex takes the remaining strand (the traversed-segment set makes that
choice forced), keeping the curve non-self-crossing.
"""

from __future__ import annotations

from .lattice import hex_at_slot, edge_step, diagonal_step
from .measure import EDGE_BLUE

EDGE = 0
DIAG = 1


class NeedCell(Exception):
    """Raised by enumerating resolvers when an undetermined cell is hit."""

    def __init__(self, cell):
        self.cell = cell


class RunawayWalk(RuntimeError):
    pass


def _tight_right(v, u, via, resolve):
    """Continuation hugging the blue side (first yellow sector ends it)."""
    if via == EDGE:
        rf = resolve(hex_at_slot(v, (u + 4) % 6))
        if not EDGE_BLUE[rf, (u + 1) % 6]:
            w = (u + 4) % 6
            return diagonal_step(v, w), w, DIAG
        f = resolve(hex_at_slot(v, u))
        if not EDGE_BLUE[f, (u + 4) % 6]:
            w = (u + 5) % 6
            return edge_step(v, w), w, EDGE
        if not EDGE_BLUE[f, (u + 3) % 6]:
            return diagonal_step(v, u), u, DIAG
        lf = resolve(hex_at_slot(v, (u + 2) % 6))
        if EDGE_BLUE[lf, u % 6]:
            w = (u + 2) % 6
            return diagonal_step(v, w), w, DIAG
        w = (u + 1) % 6
        return edge_step(v, w), w, EDGE
    pr = resolve(hex_at_slot(v, (u + 5) % 6))
    if not EDGE_BLUE[pr, (u + 3) % 6]:
        w = (u + 4) % 6
        return edge_step(v, w), w, EDGE
    if not EDGE_BLUE[pr, (u + 2) % 6]:
        w = (u + 5) % 6
        return diagonal_step(v, w), w, DIAG
    pl = resolve(hex_at_slot(v, (u + 1) % 6))
    if not EDGE_BLUE[pl, (u + 5) % 6]:
        return edge_step(v, u), u, EDGE
    if not EDGE_BLUE[pl, (u + 4) % 6]:
        w = (u + 1) % 6
        return diagonal_step(v, w), w, DIAG
    w = (u + 2) % 6
    return edge_step(v, w), w, EDGE


def _tight_left(v, u, via, resolve):
    """Continuation hugging the yellow side (first blue sector ends it)."""
    if via == EDGE:
        lf = resolve(hex_at_slot(v, (u + 2) % 6))
        if EDGE_BLUE[lf, u % 6]:
            w = (u + 2) % 6
            return diagonal_step(v, w), w, DIAG
        f = resolve(hex_at_slot(v, u))
        if EDGE_BLUE[f, (u + 3) % 6]:
            w = (u + 1) % 6
            return edge_step(v, w), w, EDGE
        if EDGE_BLUE[f, (u + 4) % 6]:
            return diagonal_step(v, u), u, DIAG
        rf = resolve(hex_at_slot(v, (u + 4) % 6))
        if EDGE_BLUE[rf, (u + 1) % 6]:
            w = (u + 5) % 6
            return edge_step(v, w), w, EDGE
        w = (u + 4) % 6
        return diagonal_step(v, w), w, DIAG
    pl = resolve(hex_at_slot(v, (u + 1) % 6))
    if EDGE_BLUE[pl, (u + 4) % 6]:
        w = (u + 2) % 6
        return edge_step(v, w), w, EDGE
    if EDGE_BLUE[pl, (u + 5) % 6]:
        w = (u + 1) % 6
        return diagonal_step(v, w), w, DIAG
    pr = resolve(hex_at_slot(v, (u + 5) % 6))
    if EDGE_BLUE[pr, (u + 2) % 6]:
        return edge_step(v, u), u, EDGE
    if EDGE_BLUE[pr, (u + 3) % 6]:
        w = (u + 5) % 6
        return diagonal_step(v, w), w, DIAG
    w = (u + 4) % 6
    return edge_step(v, w), w, EDGE


def advance(v, u, via, resolve, used=None):
    """One interface move; returns (new_vertex, new_travel, new_via).

    When the two sweeps disagree (a pinch), a fair coin is requested from
    the resolver under the key ("coin", v, u) unless the traversed-segment
    set ``used`` forces the remaining strand.
    """
    right = _tight_right(v, u, via, resolve)
    left = _tight_left(v, u, via, resolve)
    if right == left:
        choice = right
        if used is not None and frozenset((v, choice[0])) in used:
            raise RunawayWalk("forced continuation retraces the curve")
    else:
        r_free = used is None or frozenset((v, right[0])) not in used
        l_free = used is None or frozenset((v, left[0])) not in used
        if r_free and l_free:
            choice = left if resolve(("coin", v, u)) else right
        elif r_free:
            choice = right
        elif l_free:
            choice = left
        else:
            raise RunawayWalk("both pinch strands already traversed")
    if used is not None:
        used.add(frozenset((v, choice[0])))
    return choice


COIN_LAW = ((False, 0.5), (True, 0.5))


def walk_interface(domain, resolve, budget=None):
    """Trace the full interface from a to c; returns the vertex polyline."""
    if budget is None:
        budget = 10 * max(len(domain.cells), 1) + 100
    j = domain.a_junction
    v, u, via = j.vertex, j.travel, EDGE
    target = domain.c_vertex
    verts = [v]
    used = set()
    while v != target:
        v, u, via = advance(v, u, via, resolve, used)
        verts.append(v)
        if len(verts) > budget:
            raise RunawayWalk(
                "interface exceeded %d segments; inconsistent state" % budget)
    return verts


def config_resolver(domain, states, rng=None, coins=None):
    """Resolver over a full configuration (array over domain.cells) + fixed.

    Pinch coins come from ``coins`` (a mapping (vertex, travel) -> bool,
    e.g. an exploration's coin log), else from ``rng``; with neither, a
    deterministic stream seeded from the configuration bytes is used, so a
    bare trace is reproducible.
    """
    import numpy as np

    index = domain.cell_index
    fixed = domain.fixed
    state_box = [rng]

    def resolve(cell):
        if isinstance(cell, tuple) and len(cell) == 3 and cell[0] == "coin":
            key = (cell[1], cell[2])
            if coins is not None and key in coins:
                return coins[key]
            if state_box[0] is None:
                seed = np.random.SeedSequence(
                    [int(x) for x in states[:64]] + [len(states)])
                state_box[0] = np.random.Generator(np.random.Philox(seed))
            return bool(state_box[0].random() < 0.5)
        i = index.get(cell)
        if i is not None:
            return states[i]
        st = fixed.get(cell)
        if st is None:
            raise KeyError("walk left the colored domain at %r" % (cell,))
        return st

    return resolve
