"""Exact probability law of a single flower.

A flower is a central hexagon (the iris) with its six neighbors (petals,
numbered 1..6 counterclockwise starting directly east of the iris).  Petals
and all non-flower hexagons are fair blue/yellow coins.  The iris takes one
of five states: blue, yellow, or one of three split (half-and-half) states,
with weights (a, a, s, s, s) -- except when the petals form a *trigger*
(three blue, three yellow, with a contiguous same-color pair), in which case
the iris is blue or yellow with probability 1/2 each.

The whole joint law fits in a 320-row table (64 petal patterns x 5 iris
states), so every conditional here is computed by exact enumeration.
Arithmetic is generic: pass float parameters for double precision, Fraction
(or any exact field element) for exact results.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

# Hexagon states.  Split k has its blue half covering edges
# {2k, 2k+1, 2k+2 mod 6}; edges are indexed counterclockwise with edge 0
# facing east.  The three splits realize the three distinct vertex-to-vertex
# diagonals of the hexagon.
BLUE = 0
YELLOW = 1
SPLIT0 = 2
SPLIT1 = 3
SPLIT2 = 4
UNDETERMINED = 255

SPLIT_STATES = (SPLIT0, SPLIT1, SPLIT2)
IRIS_STATES = (BLUE, YELLOW, SPLIT0, SPLIT1, SPLIT2)
PETAL_STATES = (BLUE, YELLOW)

STATE_NAMES = {BLUE: "B", YELLOW: "Y", SPLIT0: "S0", SPLIT1: "S1",
               SPLIT2: "S2", UNDETERMINED: "?"}
NAME_STATES = {v: k for k, v in STATE_NAMES.items()}


def _build_edge_blue_table():
    t = np.zeros((5, 6), dtype=bool)
    t[BLUE, :] = True
    for k in range(3):
        for e in (2 * k, 2 * k + 1, 2 * k + 2):
            t[SPLIT0 + k, e % 6] = True
    return t

# EDGE_BLUE[state, edge] is True when the shape owning that edge is blue.
EDGE_BLUE = _build_edge_blue_table()


def edge_is_blue(state, edge):
    """Color of the half-hexagon facing edge ``edge`` (0..5, ccw from east)."""
    return bool(EDGE_BLUE[state, edge % 6])


def split_diagonal_vertices(state):
    """Corner indices (m1, m2) of the split diagonal, corners ccw from 30 deg.

    Corner m sits between edges m and m+1.  The blue half of split k spans
    corners 2k-1 .. 2k+2, so the diagonal runs from corner 2k-1 to 2k+2.
    """
    if state not in SPLIT_STATES:
        raise ValueError("not a split state: %r" % (state,))
    k = state - SPLIT0
    return ((2 * k - 1) % 6, (2 * k + 2) % 6)


def is_trigger(petals):
    """True iff the six determined petals form a trigger pattern.

    A trigger has exactly three blue and three yellow petals with at least
    one cyclically adjacent blue pair.
    """
    if len(petals) != 6:
        raise ValueError("need exactly 6 petals")
    for p in petals:
        if p not in PETAL_STATES:
            raise ValueError("petal not determined: %r" % (p,))
    blues = [p == BLUE for p in petals]
    if sum(blues) != 3:
        return False
    return any(blues[i] and blues[(i + 1) % 6] for i in range(6))


def _petal_bits(petals):
    # bit j set <=> petal j+1 is blue
    return sum(1 << j for j, p in enumerate(petals) if p == BLUE)


def _bits_petals(bits):
    return tuple(BLUE if (bits >> j) & 1 else YELLOW for j in range(6))


TRIGGER_LUT = np.array(
    [is_trigger(_bits_petals(b)) for b in range(64)], dtype=bool)

N_TRIGGER_PATTERNS = int(TRIGGER_LUT.sum())  # 18 of the 64 petal patterns


@dataclass(frozen=True)
class ModelParams:
    """Flower measure parameters (a, s) with 2a + 3s = 1 and a^2 >= 2s^2."""

    a: object
    s: object

    def __post_init__(self):
        a, s = self.a, self.s
        if a < 0 or s < 0:
            raise ValueError("parameters must be non-negative")
        lin = 2 * a + 3 * s - 1
        quad = a * a - 2 * s * s
        if self.exact:
            if lin != 0:
                raise ValueError("2a + 3s = 1 violated: a=%s s=%s" % (a, s))
            if quad < 0:
                raise ValueError("a^2 >= 2 s^2 violated: a=%s s=%s" % (a, s))
        else:
            if abs(lin) > 1e-12:
                raise ValueError("2a + 3s = 1 violated: a=%r s=%r" % (a, s))
            if quad < -1e-12:
                raise ValueError("a^2 >= 2 s^2 violated: a=%r s=%r" % (a, s))

    @property
    def exact(self):
        return not isinstance(self.a, float) or not isinstance(self.s, float)

    @property
    def half(self):
        return Fraction(1, 2) if self.exact else 0.5

    @classmethod
    def from_s(cls, s):
        """Build params from s alone via a = (1 - 3s)/2."""
        if isinstance(s, float):
            return cls((1.0 - 3.0 * s) / 2.0, s)
        return cls((1 - 3 * s) / 2, s)

    @classmethod
    def site_percolation(cls):
        """The s = 0 point, plain site percolation on the triangular lattice."""
        return cls.from_s(0.0)


def iris_distribution(petals, params):
    """Exact iris law given six determined petals: (B, Y, S0, S1, S2)."""
    half = params.half
    if is_trigger(petals):
        zero = half - half
        return (half, half, zero, zero, zero)
    return (params.a, params.a, params.s, params.s, params.s)


def flower_prob(petals, iris, params):
    """Probability of one fully determined flower state."""
    if iris not in IRIS_STATES:
        raise ValueError("iris not determined: %r" % (iris,))
    w = params.half ** 6
    return w * iris_distribution(petals, params)[iris]


def enumerate_flower(params):
    """The exact joint table: 320 rows of (petals, iris, probability)."""
    rows = []
    for bits in range(64):
        petals = _bits_petals(bits)
        dist = iris_distribution(petals, params)
        w = params.half ** 6
        for iris in IRIS_STATES:
            rows.append((petals, iris, w * dist[iris]))
    return rows


class FlowerMeasure:
    """Conditional laws over a single flower, memoized per parameter point.

    Partial states are tuples (iris, p1, .., p6) with UNDETERMINED holes.
    Cell index 0 is the iris, 1..6 the petals.
    """

    def __init__(self, params):
        self.params = params
        self._cond_cache = {}

    def completions(self, partial):
        """All (full_state, prob) consistent with the partial assignment."""
        iris, petals = partial[0], partial[1:]
        iris_choices = IRIS_STATES if iris == UNDETERMINED else (iris,)
        petal_choices = [PETAL_STATES if p == UNDETERMINED else (p,)
                         for p in petals]
        out = []
        for ps in product(*petal_choices):
            dist = iris_distribution(ps, self.params)
            w = self.params.half ** 6
            for ir in iris_choices:
                p = w * dist[ir]
                if p > 0:
                    out.append(((ir,) + ps, p))
        return out

    def partial_prob(self, partial):
        """Total mass of all completions of the partial assignment."""
        return sum(p for _, p in self.completions(partial))

    def conditional_law(self, partial, target):
        """Exact law of cell ``target`` given the determined cells.

        Returns a tuple of (state, prob) pairs with probabilities summing to
        one.  Raises ValueError when the partial state itself has zero mass.
        """
        if partial[target] != UNDETERMINED:
            raise ValueError("target cell already determined")
        key = (partial, target)
        hit = self._cond_cache.get(key)
        if hit is not None:
            return hit
        totals = {}
        norm = None
        for full, p in self.completions(partial):
            totals[full[target]] = totals.get(full[target], p - p) + p
            norm = p if norm is None else norm + p
        if norm is None or norm == 0:
            raise ValueError(
                "partial flower state has probability zero: %r" % (partial,))
        law = tuple(sorted((st, p / norm) for st, p in totals.items()))
        self._cond_cache[key] = law
        return law

    def sample_conditional(self, partial, target, rng):
        """Draw the target cell from its exact conditional law."""
        law = self.conditional_law(partial, target)
        u = rng.random()
        acc = 0.0
        for st, p in law:
            acc += float(p)
            if u < acc:
                return st
        return law[-1][0]


def conditional_sample(partial, target, params, rng):
    """One-shot form of FlowerMeasure.sample_conditional."""
    return FlowerMeasure(params).sample_conditional(partial, target, rng)


def swap_colors(state):
    """Blue<->yellow on a single state; splits keep their diagonal.

    Flipping the halves of split k yields the complementary edge window,
    which is the same diagonal with colors exchanged.  Within the 3-state
    split alphabet that flip is realized jointly with a 180-degree rotation
    (see swap_flower), under which split k maps to itself.
    """
    if state == BLUE:
        return YELLOW
    if state == YELLOW:
        return BLUE
    return state


def swap_flower(petals, iris):
    """Color swap composed with 180-degree rotation; an exact symmetry.

    Petal j moves to petal j+3 with its color flipped; a whole iris flips
    color; a split iris is fixed (rotating its halves and then swapping
    colors restores the same edge window).
    """
    new_petals = tuple(
        swap_colors(petals[(j + 3) % 6]) for j in range(6))
    return new_petals, swap_colors(iris)


def parse_param_grid(text):
    """Parse a parameter grid file: one "a s" pair per line.

    Blank lines and '#' comments are skipped.  Malformed lines raise
    ValueError mentioning the 1-based line number.
    """
    grid = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError("line %d: expected 'a s', got %r" % (ln, raw))
        try:
            a, s = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError("line %d: non-numeric entry in %r" % (ln, raw))
        try:
            grid.append(ModelParams(a, s))
        except ValueError as e:
            raise ValueError("line %d: %s" % (ln, e))
    return grid
