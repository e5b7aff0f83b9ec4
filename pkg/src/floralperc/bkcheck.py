"""Exact verification of the restricted disjoint-occurrence inequality.

For path-type events on a single flower (with a few surrounding cells),
E(X1 o ... o Xn) <= prod E(Xi) holds whenever a^2 >= 2 s^2; general events
violate it.  Everything here is computed by exhaustive enumeration in
exact arithmetic: Fractions on rational parameter points, and elements of
Q(sqrt 2) at the constraint boundary a = sqrt(2) s, where the tight case
of the inequality, (a+s)^2 >= s, degenerates to equality.

Events: X^color_{S,T} requires every hexagon of S and T to carry the color
and a same-color shape path (possibly through the iris) connecting S to T.
In a disjoint product, same-color witnesses are hexagon-disjoint while
opposite-color witnesses may share a split iris, one half each; witnesses
include the endpoint sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product

from . import measure as M
from .lattice import neighbor, flower_petals, hex_distance


class Q2:
    """Exact p + q*sqrt(2) with Fraction coefficients (ring operations)."""

    __slots__ = ("p", "q")

    def __init__(self, p, q=0):
        self.p = Fraction(p)
        self.q = Fraction(q)

    def __add__(self, other):
        other = _q2(other)
        return Q2(self.p + other.p, self.q + other.q)

    __radd__ = __add__

    def __sub__(self, other):
        other = _q2(other)
        return Q2(self.p - other.p, self.q - other.q)

    def __rsub__(self, other):
        return _q2(other) - self

    def __mul__(self, other):
        other = _q2(other)
        return Q2(self.p * other.p + 2 * self.q * other.q,
                  self.p * other.q + self.q * other.p)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Q2(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __neg__(self):
        return Q2(-self.p, -self.q)

    def sign(self):
        if self.p == 0 and self.q == 0:
            return 0
        if self.p >= 0 and self.q >= 0:
            return 1
        if self.p <= 0 and self.q <= 0:
            return -1
        # opposite signs: compare p^2 with 2 q^2
        lead = 1 if self.p > 0 else -1
        return lead if self.p * self.p > 2 * self.q * self.q else -lead

    def __eq__(self, other):
        return (self - other).sign() == 0

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __hash__(self):
        return hash((self.p, self.q))

    def __float__(self):
        return float(self.p) + float(self.q) * math.sqrt(2.0)

    def __repr__(self):
        return "Q2(%s, %s)" % (self.p, self.q)


def _q2(x):
    if isinstance(x, Q2):
        return x
    return Q2(x)


def boundary_params():
    """The exact point with a^2 = 2 s^2: s = 3 - 2 sqrt2, a = 3 sqrt2 - 4."""
    s = Q2(3, -2)
    a = Q2(-4, 3)
    return M.ModelParams(a, s)


def rational_grid(n=20, s_max=Fraction(19, 120), include_boundary=True):
    """Parameter grid: n rational points from s=0 plus the exact boundary."""
    pts = []
    for k in range(n):
        s = s_max * k / (n - 1) if n > 1 else Fraction(0)
        pts.append(M.ModelParams.from_s(Fraction(s)))
    if include_boundary:
        pts.append(boundary_params())
    return pts


# -- scenes and events ---------------------------------------------------------


@dataclass(frozen=True)
class PathEvent:
    """Same-color connection between two iris-free endpoint sets."""

    color: int
    S: frozenset
    T: frozenset
    label: str = ""

    def __post_init__(self):
        if not self.S or not self.T or (self.S & self.T):
            raise ValueError("endpoint sets must be disjoint and non-empty")

    def cells(self):
        return self.S | self.T


class Scene:
    """A single flower plus whichever nearby filler cells events mention.

    States enumerate exactly: 320 flower states times 2^k filler coins.
    The scene graph carries the model connectivity (split-iris halves are
    separate shapes).
    """

    def __init__(self, iris=(0, 0), extra_cells=()):
        self.iris = iris
        self.petals = flower_petals(iris)
        self.extra = tuple(sorted(set(extra_cells) - {iris} -
                                  set(self.petals)))
        self.cells = (iris,) + self.petals + self.extra
        self.index = {h: i for i, h in enumerate(self.cells)}
        self.adj = []
        for h in self.cells:
            row = []
            for d in range(6):
                nb = neighbor(h, d)
                if nb in self.index:
                    row.append((d, nb))
            self.adj.append(row)

    def validate_event(self, ev):
        for cell in ev.cells():
            if cell == self.iris:
                raise ValueError("endpoint sets may not contain the iris")
            if cell not in self.index:
                raise ValueError("event cell %r outside the scene" % (cell,))

    def assignments(self, params):
        """(assignment dict, exact probability) over all scene states."""
        fm = M.FlowerMeasure(params)
        half = params.half
        filler_w = half ** len(self.extra)
        flower_states = fm.completions(tuple([M.UNDETERMINED] * 7))
        for bits in range(1 << len(self.extra)):
            extra_assign = {c: (M.BLUE if (bits >> j) & 1 else M.YELLOW)
                            for j, c in enumerate(self.extra)}
            for full, p in flower_states:
                assign = dict(extra_assign)
                assign[self.iris] = full[0]
                for petal, st in zip(self.petals, full[1:]):
                    assign[petal] = st
                yield assign, p * filler_w

    # -- witnesses -------------------------------------------------------------

    def _paths(self, assign, ev):
        """All minimal-ish connecting witnesses: simple paths S -> T whose
        cells all show the event color along the traversal."""
        color_blue = (ev.color == M.BLUE)
        out = []
        seen_states = set()

        def ok_cell(cell):
            st = assign[cell]
            if cell == self.iris:
                return True  # halves checked edge-wise
            return st == ev.color

        def edge_ok(h1, d, h2):
            st1, st2 = assign[h1], assign[h2]
            return M.edge_is_blue(st1, d) == color_blue and \
                M.edge_is_blue(st2, (d + 3) % 6) == color_blue

        def dfs(cell, visited):
            if cell in ev.T:
                out.append(frozenset(visited))
                return
            for d, nb in self.adj[self.index[cell]]:
                if nb in visited or not ok_cell(nb):
                    continue
                if not edge_ok(cell, d, nb):
                    continue
                dfs(nb, visited | {nb})

        for s in ev.S:
            if ok_cell(s):
                dfs(s, frozenset([s]))
        return out

    def event_holds(self, assign, ev):
        if any(assign[c] != ev.color for c in ev.cells()):
            return False
        return bool(self._paths(assign, ev))

    def disjoint_product_holds(self, assign, events):
        """Existence of pairwise-compatible witnesses for all events.

        Witness of an event: its endpoint sets plus a connecting path.
        Same-color witnesses must be cell-disjoint; opposite-color
        witnesses may share the iris when it is split (one half each), and
        at most two events may use the iris at all.
        """
        for ev in events:
            if any(assign[c] != ev.color for c in ev.cells()):
                return False

        def fits(used, path_cells, color):
            for cell in path_cells:
                for other_color in used.get(cell, ()):
                    if cell != self.iris:
                        return False
                    if other_color == color:
                        return False
                    if assign[self.iris] not in M.SPLIT_STATES:
                        return False
                if cell == self.iris and len(used.get(cell, ())) >= 2:
                    return False
            return True

        def rec(k, used):
            if k == len(events):
                return True
            ev = events[k]
            base = ev.cells()
            if not fits(used, base, ev.color):
                return False
            for path in self._paths(assign, ev):
                cells = path | base
                if not fits(used, cells, ev.color):
                    continue
                used2 = {c: v[:] for c, v in used.items()}
                for c in cells:
                    used2.setdefault(c, []).append(ev.color)
                if rec(k + 1, used2):
                    return True
            return False

        return rec(0, {})


def event_expectation(events, scene, params):
    """Exact probability of one event or of a disjoint product.

    The indicator is parameter-free, so it is aggregated once into counts
    per (petal pattern, iris state) and then weighted exactly; results are
    cached on the scene for reuse across parameter grids.
    """
    if isinstance(events, PathEvent):
        events = (events,)
    events = tuple(events)
    for ev in events:
        scene.validate_event(ev)
    n_states = 320 * (1 << len(scene.extra))
    if n_states > (1 << 20):
        raise ValueError("scene too large for exhaustive enumeration")
    key = tuple((ev.color, tuple(sorted(ev.S)), tuple(sorted(ev.T)))
                for ev in events)
    cache = getattr(scene, "_indicator_cache", None)
    if cache is None:
        cache = scene._indicator_cache = {}
    table = cache.get(key)
    if table is None:
        table = {}
        ref = M.ModelParams.from_s(Fraction(1, 10))
        for assign, _ in scene.assignments(ref):
            if len(events) == 1:
                hit = scene.event_holds(assign, events[0])
            else:
                hit = scene.disjoint_product_holds(assign, events)
            if hit:
                fkey = (tuple(assign[p] for p in scene.petals),
                        assign[scene.iris])
                table[fkey] = table.get(fkey, 0) + 1
        cache[key] = table
    half = params.half
    filler_w = half ** len(scene.extra)
    total = params.a - params.a  # typed zero
    for (petals, iris), count in table.items():
        total = total + M.flower_prob(petals, iris, params) \
            * (count * filler_w)
    return total


# -- the catalog and the verdicts ----------------------------------------------


def default_catalog(max_products=220):
    """Event tuples drawn from petals and first-ring filler, both colors.

    Singles, two-fold, and a few three-fold products; endpoint sets are
    pairwise disjoint within each tuple.  Each tuple gets a scene holding
    only the filler cells its events mention, keeping enumeration at
    320 * 2^k states with small k.
    """
    iris = (0, 0)
    petals = flower_petals(iris)
    ring = first_ring(iris)
    singles = []
    for color in (M.BLUE, M.YELLOW):
        for s, t in combinations(petals, 2):
            singles.append(PathEvent(color, frozenset([s]), frozenset([t])))
        for s in petals[::2]:
            for t in ring[::3]:
                if hex_distance(s, t) >= 2:
                    singles.append(PathEvent(color, frozenset([s]),
                                             frozenset([t])))
    tuples = [(ev,) for ev in singles]
    pairs = []
    for e1, e2 in combinations(singles, 2):
        if e1.cells() & e2.cells():
            continue
        pairs.append((e1, e2))
    step = max(1, len(pairs) // max_products)
    tuples.extend(pairs[::step][:max_products])
    triples = 0
    for e1, e2 in pairs[::7]:
        if triples >= 12:
            break
        for e3 in singles:
            if e3.cells() & (e1.cells() | e2.cells()):
                continue
            tuples.append((e1, e2, e3))
            triples += 1
            break
    scenes = {}
    catalog = []
    for events in tuples:
        extra = tuple(sorted(
            c for ev in events for c in ev.cells() if c not in petals))
        scene = scenes.get(extra)
        if scene is None:
            scene = scenes[extra] = Scene(iris, extra_cells=extra)
        catalog.append((scene, events))
    return catalog


def first_ring(iris):
    """The twelve filler hexagons at lattice distance two from the iris."""
    ring = set()
    for p in flower_petals(iris):
        for nb in (neighbor(p, d) for d in range(6)):
            if hex_distance(nb, iris) == 2:
                ring.add(nb)
    return sorted(ring)


@dataclass
class BKRow:
    tuple_id: int
    a: float
    s: float
    lhs: object
    rhs: object
    margin: object
    ok: bool


def verify_bk_catalog(grid, catalog=None):
    """Exact check of E(prod o) <= prod E over a parameter grid.

    ``catalog``: list of (scene, events) pairs.  Returns (rows, all_ok);
    margins are exact field elements (Fraction or Q2), non-negative
    everywhere iff the inequality holds on the grid.
    """
    if catalog is None:
        catalog = default_catalog()
    rows = []
    all_ok = True
    for params in grid:
        for tid, (scene, events) in enumerate(catalog):
            lhs = event_expectation(events, scene, params)
            rhs = params.half * 2  # typed one
            for ev in events:
                rhs = rhs * event_expectation(ev, scene, params)
            margin = rhs - lhs
            ok = margin >= (margin - margin)
            all_ok = all_ok and ok
            rows.append(BKRow(tuple_id=tid, a=float(params.a),
                              s=float(params.s), lhs=lhs, rhs=rhs,
                              margin=margin, ok=ok))
    return rows, all_ok


def counterexample_check(params):
    """The unrestricted inequality fails: P(A o B^c) > P(A) P(B^c) for s>0.

    A: petals 1, 4, 5 mutually connected through blue cells of the
    complementary flower part (petals 2, 3, 6 and the iris), with no
    requirement on petals 1, 4, 5 themselves; B: petals 1, 4, 5 all blue.
    B^c is determined by petals 1, 4, 5 alone, so A n B^c = A o B^c and
    both sides are exact sums over the 320-row table.
    """
    scene = Scene()
    fm = M.FlowerMeasure(params)
    p1, p4, p5 = scene.petals[0], scene.petals[3], scene.petals[4]
    targets = (p1, p4, p5)
    connectors = (scene.petals[1], scene.petals[2], scene.petals[5],
                  scene.iris)

    def a_holds(assign):
        # single blue complementary component adjacent to all three targets
        comp_cells = [c for c in connectors
                      if assign[c] == M.BLUE or
                      (c == scene.iris and assign[c] in M.SPLIT_STATES)]
        for seed in comp_cells:
            comp = {seed}
            frontier = [seed]
            while frontier:
                h = frontier.pop()
                for d, nb in scene.adj[scene.index[h]]:
                    if nb in comp or nb not in comp_cells:
                        continue
                    if M.edge_is_blue(assign[h], d) and \
                            M.edge_is_blue(assign[nb], (d + 3) % 6):
                        comp.add(nb)
                        frontier.append(nb)
            if all(_touches_blue(scene, assign, comp, t) for t in targets):
                return True
        return False

    zero = params.a - params.a
    p_a = zero
    p_a_bc = zero
    p_bc = zero
    for assign, p in scene.assignments(params):
        in_b = all(assign[t] == M.BLUE for t in targets)
        in_a = a_holds(assign)
        if in_a:
            p_a = p_a + p
            if not in_b:
                p_a_bc = p_a_bc + p
        if not in_b:
            p_bc = p_bc + p
    lhs = p_a_bc
    rhs = p_a * p_bc
    return lhs, rhs, (lhs - rhs) > zero


def _touches_blue(scene, assign, comp, target):
    ti = scene.index[target]
    for d, nb in scene.adj[ti]:
        if nb in comp and M.edge_is_blue(assign[nb], (d + 3) % 6):
            return True
    return False
