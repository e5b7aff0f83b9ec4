"""The live exploration process: on-demand revelation with exact conditionals.

The process starts at the marked vertex a and grows the interface vertex by
vertex, coloring any hexagon it needs: fillers by a fair coin, flower cells
from the exact conditional law given whatever of their flower is already
determined.  Blue stays on the right throughout.  Passing through a split
iris is one logical step with an intermediate vertex at the far end of the
diagonal (the multistep), so every step ends flanked by an ordinary edge.

Besides sampling, the same transition logic supports exact branching
(step_outcomes) for law comparisons on small domains, and deterministic
fast-forwarding through already-revealed territory, which slit_domain uses
so the stopped state is a proper admissible marked vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import measure as M
from . import walker
from .lattice import (DiscreteDomain, walk_ring, neighbors, hex_corner_int,
                      hex_at_slot, AdmissibilityError)
from .sampler import (EstimateWithCI, ConfigSampler, CrossingTester,
                      crossing_spec, estimate_crossing)

_COIN = ((M.BLUE, 0.5), (M.YELLOW, 0.5))


class ExplorationState:
    """Mutable exploration-in-progress."""

    __slots__ = ("domain", "fm", "revealed", "vertices", "u", "via",
                 "finished", "steps", "log", "used", "coins")

    def __init__(self, domain, fm):
        self.domain = domain
        self.fm = fm
        self.revealed = {}
        j = domain.a_junction
        self.vertices = [j.vertex]
        self.u = j.travel
        self.via = walker.EDGE
        self.finished = False
        self.steps = 0
        self.log = []
        self.used = set()
        self.coins = {}

    @property
    def tip(self):
        return self.vertices[-1]

    def copy(self):
        s = ExplorationState(self.domain, self.fm)
        s.revealed = dict(self.revealed)
        s.vertices = list(self.vertices)
        s.u = self.u
        s.via = self.via
        s.finished = self.finished
        s.steps = self.steps
        s.log = list(self.log)
        s.used = set(self.used)
        s.coins = dict(self.coins)
        return s

    def known_state(self, cell, extra=None):
        if isinstance(cell, tuple) and len(cell) == 3 and cell[0] == "coin":
            if extra is not None and cell in extra:
                return extra[cell]
            return self.coins.get((cell[1], cell[2]))
        if extra is not None:
            st = extra.get(cell)
            if st is not None:
                return st
        st = self.revealed.get(cell)
        if st is not None:
            return st
        return self.domain.fixed.get(cell)

    def conditional_law(self, cell, extra=None):
        """Exact law of an undetermined cell given everything revealed.

        Pinch-coin keys ("coin", vertex, travel) get the fair two-point
        law; real cells get the flower conditional or the filler coin.
        """
        if isinstance(cell, tuple) and len(cell) == 3 and cell[0] == "coin":
            if self.fm.params.exact:
                half = self.fm.params.half
                return ((False, half), (True, half))
            return walker.COIN_LAW
        dom = self.domain
        if cell not in dom.cell_set:
            raise AssertionError(
                "resolving a cell outside the domain: %r" % (cell,))
        hit = dom.flower_of.get(cell)
        if hit is None:
            if self.fm.params.exact:
                half = self.fm.params.half
                return ((M.BLUE, half), (M.YELLOW, half))
            return _COIN
        fi, pos = hit
        iris, petals = dom.flowers[fi]
        members = (iris,) + tuple(petals)
        partial = []
        for m in members:
            st = self.known_state(m, extra)
            partial.append(M.UNDETERMINED if st is None else st)
        return self.fm.conditional_law(tuple(partial), pos)


def start_exploration(domain, params):
    return ExplorationState(domain, M.FlowerMeasure(params))


def explore_step(state, rng):
    """One logical step: advance to the next vertex, through any diagonal.

    Appends one path vertex, or two when the move runs a split-iris
    diagonal (the far diagonal end is an intermediate vertex of the step).
    """
    if state.finished:
        return state
    newly = []

    def resolve(cell):
        st = state.known_state(cell)
        if st is not None:
            return st
        law = state.conditional_law(cell)
        u = rng.random()
        acc = 0.0
        st = law[-1][0]
        for cand, p in law:
            acc += float(p)
            if u < acc:
                st = cand
                break
        if isinstance(cell, tuple) and len(cell) == 3 and cell[0] == "coin":
            state.coins[(cell[1], cell[2])] = st
        else:
            state.revealed[cell] = st
            newly.append((cell, st))
        return st

    v, u, via = walker.advance(state.tip, state.u, state.via, resolve,
                               state.used)
    state.vertices.append(v)
    if via == walker.DIAG and v != state.domain.c_vertex:
        v, u, via = walker.advance(v, u, via, resolve, state.used)
        state.vertices.append(v)
    state.u, state.via = u, via
    state.steps += 1
    state.log.append((len(state.vertices) - 1, tuple(newly)))
    if v == state.domain.c_vertex:
        state.finished = True
    return state


@dataclass
class ExplorationPath:
    vertices: tuple
    revealed: dict
    log: tuple
    finished: bool
    steps: int = 0


def run_exploration(domain, params, rng, budget=None, stop=None):
    """Run the exploration to completion (or until ``stop`` says enough)."""
    if budget is None:
        budget = 10 * max(len(domain.cells), 1) + 100
    state = start_exploration(domain, params)
    while not state.finished:
        explore_step(state, rng)
        if state.steps > budget:
            raise walker.RunawayWalk("exploration exceeded %d steps" % budget)
        if stop is not None and stop(state):
            break
    return ExplorationPath(vertices=tuple(state.vertices),
                           revealed=dict(state.revealed),
                           log=tuple(state.log), finished=state.finished,
                           steps=state.steps)


# -- exact branching over one step -------------------------------------------


def step_outcomes(state):
    """All (probability, successor state) pairs of the next logical step.

    Exact counterpart of explore_step: branches over every undetermined
    cell the step would reveal, weighting by the exact conditional law.
    Probabilities are exact when the measure's parameters are exact.
    """
    out = []

    def attempt(decided, prob, v0, u0, via0, trail, second_leg):
        def resolve(cell):
            st = state.known_state(cell, decided)
            if st is None:
                raise walker.NeedCell(cell)
            return st

        try:
            v, u, via = walker.advance(v0, u0, via0, resolve)
        except walker.NeedCell as e:
            for cand, p in state.conditional_law(e.cell, decided):
                attempt({**decided, e.cell: cand}, prob * p,
                        v0, u0, via0, trail, second_leg)
            return
        trail2 = trail + [v]
        if via == walker.DIAG and not second_leg \
                and v != state.domain.c_vertex:
            attempt(decided, prob, v, u, via, trail2, True)
            return
        s2 = state.copy()
        s2.revealed.update(decided)
        s2.vertices.extend(trail2)
        s2.u, s2.via = u, via
        s2.steps += 1
        s2.log.append((len(s2.vertices) - 1, tuple(decided.items())))
        if trail2[-1] == state.domain.c_vertex:
            s2.finished = True
        out.append((prob, s2))

    one = state.fm.params.half * 2
    attempt({}, one, state.tip, state.u, state.via, [], False)
    return out


def enumerate_path_law(domain, params, budget=None):
    """Exact distribution over full exploration paths (small domains only)."""
    if budget is None:
        budget = 10 * max(len(domain.cells), 1) + 100
    law = {}
    start = start_exploration(domain, params)
    one = start.fm.params.half * 2
    stack = [(one, start)]
    while stack:
        prob, st = stack.pop()
        if st.finished:
            key = tuple(st.vertices)
            law[key] = law.get(key, prob * 0) + prob
            continue
        if st.steps > budget:
            raise walker.RunawayWalk("enumeration exceeded step budget")
        for p, s2 in step_outcomes(st):
            stack.append((prob * p, s2))
    return law


# -- slit domains -------------------------------------------------------------


def fast_forward(state):
    """Advance through deterministic moves until a fresh cell is needed."""
    while not state.finished:
        def resolve(cell):
            st = state.known_state(cell)
            if st is None:
                raise walker.NeedCell(cell)
            return st

        try:
            v, u, via = walker.advance(state.tip, state.u, state.via, resolve)
        except walker.NeedCell:
            return state
        state.vertices.append(v)
        if via == walker.DIAG and v != state.domain.c_vertex:
            try:
                v, u, via = walker.advance(v, u, via, resolve)
            except walker.NeedCell:
                # both petals past the diagonal are fresh: stop before it
                state.vertices.pop()
                return state
            state.vertices.append(v)
        state.u, state.via = u, via
        state.steps += 1
        state.log.append((len(state.vertices) - 1, ()))
        if v == state.domain.c_vertex:
            state.finished = True
    return state


def tip_is_clean(state):
    """True when the tip's forward cell is undetermined (or we are done).

    After fast_forward the tip can still sit just before the diagonal of an
    already-revealed split iris whose far petals are unknown; such a state
    is mid-multistep and not a valid marked vertex.
    """
    if state.finished:
        return True
    front = hex_at_slot(state.tip, state.u)
    return state.known_state(front) is None


def _front_on_target_side(state):
    """Whether the tip's forward cell connects to c through fresh cells.

    The explorer may dive into a pocket its own banks have sealed off; a
    valid marked quadruple needs the forward cell in the component of c.
    """
    front = hex_at_slot(state.tip, state.u)
    target = state.domain.c_junction.interior_cell
    if front == target:
        return True
    unrevealed = state.domain.cell_set - state.revealed.keys()
    if front not in unrevealed or target not in unrevealed:
        return False
    seen = {front}
    frontier = [front]
    while frontier:
        h = frontier.pop()
        for nb in neighbors(h):
            if nb == target:
                return True
            if nb in unrevealed and nb not in seen:
                seen.add(nb)
                frontier.append(nb)
    return False


def stabilize(state, rng):
    """Flush deterministic moves; finish any pending multistep by sampling,
    and keep exploring through any sealed-off pocket the tip points into.

    The result is a stopping state whose tip is a proper marked vertex on
    the component of c, so stopping here preserves the exploration's
    Markov structure (the extra moves are part of the stopping rule).
    """
    while True:
        fast_forward(state)
        if state.finished:
            return state
        if tip_is_clean(state) and _front_on_target_side(state):
            return state
        explore_step(state, rng)


def _component_of(cells, seed):
    comp = {seed}
    frontier = [seed]
    while frontier:
        h = frontier.pop()
        for nb in neighbors(h):
            if nb in cells and nb not in comp:
                comp.add(nb)
                frontier.append(nb)
    return comp


def slit_domain(domain, state):
    """The admissible domain left after an exploration prefix.

    The revealed hexagons join the boundary; the new domain is the
    connected component of c in what remains, marked at (tip, c).
    Deterministic moves are flushed first so the tip's forward cell is
    genuinely undetermined.
    """
    if not state.revealed:
        return domain
    if not state.finished:
        fast_forward(state)
    if state.finished:
        raise ValueError("exploration already finished; no slit domain left")
    unrevealed = domain.cell_set - state.revealed.keys()
    seed = domain.c_junction.interior_cell
    if seed not in unrevealed:
        raise AdmissibilityError("target-side cell already revealed")
    comp = _component_of(unrevealed, seed)
    fixed = dict(domain.fixed)
    fixed.update(state.revealed)
    boundary = set(domain.boundary) | set(state.revealed)
    flowers_in, boundary_flowers = [], list(domain.boundary_flowers)
    for iris, petals in domain.flowers:
        members = {iris, *petals}
        if members & comp:
            flowers_in.append((iris, petals))
        else:
            boundary_flowers.append((iris, petals))
    walk, junctions = walk_ring(comp)
    by_vertex = {j.vertex: j for j in junctions}
    tip = state.tip
    if tip not in by_vertex:
        raise AdmissibilityError("exploration tip is not a boundary junction")
    if domain.c_vertex not in by_vertex:
        raise AdmissibilityError("target vertex lost from the boundary")
    marked = {name: by_vertex[j.vertex]
              for name, j in domain.marked.items() if j.vertex in by_vertex}
    exterior = set(domain.exterior) | (unrevealed - comp)
    material = set(domain.material_fixed) | set(state.revealed)
    return DiscreteDomain(cells=comp, fixed=fixed, boundary=boundary,
                          flowers=flowers_in, walk=walk, junctions=junctions,
                          a_junction=by_vertex[tip],
                          c_junction=by_vertex[domain.c_vertex],
                          marked=marked, eps=domain.eps,
                          label=domain.label + "+slit",
                          boundary_flowers=boundary_flowers,
                          exterior=exterior, material_fixed=material)


# -- the domain Markov crossing identity --------------------------------------


def _arc_vertices(domain, j1, j2):
    """Vertices on the ccw boundary arc from j1 to j2.

    The exploration touching one of these has walked into the arc, which
    decides the crossing game per the hit-order convention.  Junction
    vertices belong to the arc that follows them ccw: j1 in, j2 out.
    """
    verts = set()
    for pos in domain.arc_positions(j1, j2):
        c_in, d, _ = domain.walk[pos]
        verts.add(hex_corner_int(c_in, (d - 1) % 6))
        verts.add(hex_corner_int(c_in, d))
    verts.add(j1.vertex)
    verts.discard(j2.vertex)
    return verts


def _first_hit(vertices, start, bc_verts, cd_verts):
    """0/1 for the first touch of [b,c] / [c,d] among new path vertices."""
    for v in vertices[start:]:
        if v in bc_verts:
            return 0.0
        if v in cd_verts:
            return 1.0
    return None


@dataclass
class MarkovReport:
    nested: EstimateWithCI
    direct: EstimateWithCI
    z: float
    t: int
    n_outer: int
    n_inner: int
    determined: int


def markov_crossing_test(domain, spec, t, n_outer, n_inner, params, rng,
                         n_direct=None):
    """Check the crossing Markov identity.

    The mean over t-step exploration prefixes of the slit-domain crossing
    probability is compared with the plain crossing probability.  Prefixes
    that have already decided the game (touched [b,c] or [c,d]) contribute
    the hit-order 0/1 value.
    """
    if n_direct is None:
        n_direct = n_outer * n_inner // 2
    bc_verts = _arc_vertices(domain, spec.b, spec.c)
    cd_verts = _arc_vertices(domain, spec.c, spec.d)
    master = int(rng.integers(2 ** 62))
    vals = np.empty(n_outer)
    determined = 0
    for i in range(n_outer):
        sub = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([master, i])))
        state = start_exploration(domain, params)
        outcome = None
        scanned = 1
        for _ in range(t):
            explore_step(state, sub)
            outcome = _first_hit(state.vertices, scanned, bc_verts, cd_verts)
            scanned = len(state.vertices)
            if outcome is not None or state.finished:
                if outcome is None:
                    outcome = 1.0  # reached c itself; c counts toward [c,d]
                break
        if outcome is None:
            stabilize(state, sub)
            outcome = _first_hit(state.vertices, scanned, bc_verts, cd_verts)
            if outcome is None and state.finished:
                outcome = 1.0
        if outcome is None:
            slit = slit_domain(domain, state)
            sspec = crossing_spec(
                slit,
                a_junction=slit.a_junction,
                b_junction=slit.junction_at(spec.b.vertex),
                c_junction=slit.junction_at(spec.c.vertex),
                d_junction=slit.junction_at(spec.d.vertex),
                color=spec.color)
            cs = ConfigSampler(slit, params)
            est = CrossingTester(cs, sspec).estimate(n_inner, sub)
            vals[i] = est.mean
        else:
            vals[i] = outcome
            determined += 1
    nested = EstimateWithCI(mean=float(vals.mean()),
                            stderr=float(vals.std(ddof=1) / np.sqrt(n_outer)),
                            n=n_outer)
    direct = estimate_crossing(domain, spec, params, n_direct, rng)
    z = (nested.mean - direct.mean) / float(
        np.hypot(nested.stderr, direct.stderr))
    return MarkovReport(nested=nested, direct=direct, z=float(z), t=t,
                        n_outer=n_outer, n_inner=n_inner,
                        determined=determined)
