"""Hexagonal lattice geometry, floral arrangements, and discrete domains.

Conventions (fixed once, used everywhere):

* Axial coordinates (q, r); hexagon centers at (q + r/2, r*sqrt(3)/2),
  center spacing 1.  Hexagons have an east-facing edge; edge k faces
  direction 60k degrees, counterclockwise, k = 0..5.  The neighbor across
  edge k is (q, r) + AXIAL_DIR[k].
* Integer center coordinates (X, Y) = (2q + r, 3r); Euclidean position is
  (X/2, Y*sqrt(3)/6).  Hexagon corners and lattice vertices live on the same
  integer grid: corner m of a hexagon (m = 0..5, at angle 60m + 30 from the
  center) is the center plus VD[m].
* A lattice vertex joins exactly three hexagons.  Vertices with Y = 1 mod 3
  have hexagons in slot directions {1, 3, 5} (odd vdirs), vertices with
  Y = 2 mod 3 in slots {0, 2, 4}; edge steps from a vertex use the
  complementary vdirs.  "vdir" w means direction 60w + 30 degrees; a step
  along an edge adds VD[w] to the vertex, a step along a split-hexagon
  diagonal adds 2*VD[w].

A domain is discretized per the construction rules of the model: the cell
set is the union of fillers and whole flowers inside the shape; the boundary
is the internal lattice boundary, with any flower it cuts absorbed whole.
The colored boundary splits into a blue arc (counterclockwise from a to c)
and a yellow arc, meeting at the marked vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# vdir -> (dX, dY): vertex step along direction 60w + 30
VD = ((1, 1), (0, 2), (-1, 1), (-1, -1), (0, -2), (1, -1))
# hex neighbor direction k -> axial offset
AXIAL_DIR = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))

SQRT3 = math.sqrt(3.0)


class DiscretizationTooCoarse(ValueError):
    pass


class AdmissibilityError(ValueError):
    pass


def neighbors(h):
    q, r = h
    return [(q + dq, r + dr) for dq, dr in AXIAL_DIR]


def neighbor(h, d):
    dq, dr = AXIAL_DIR[d % 6]
    return (h[0] + dq, h[1] + dr)


def hex_distance(h1, h2):
    dq = h1[0] - h2[0]
    dr = h1[1] - h2[1]
    return (abs(dq) + abs(dr) + abs(dq + dr)) // 2


def center_int(h):
    q, r = h
    return (2 * q + r, 3 * r)


def hex_from_center_int(X, Y):
    r = Y // 3
    return ((X - r) // 2, r)


def int_to_euclid(p):
    return (p[0] * 0.5, p[1] * (SQRT3 / 6.0))


def hex_center(h):
    return int_to_euclid(center_int(h))


def hex_corner_int(h, m):
    X, Y = center_int(h)
    dx, dy = VD[m % 6]
    return (X + dx, Y + dy)


def hex_corners(h):
    return [int_to_euclid(hex_corner_int(h, m)) for m in range(6)]


def hex_at_slot(v, w):
    """Hexagon occupying slot direction w at vertex v (must exist there)."""
    dx, dy = VD[w % 6]
    X, Y = v[0] + dx, v[1] + dy
    if Y % 3 != 0:
        raise ValueError("no hexagon in slot %d at vertex %r" % (w, v))
    return hex_from_center_int(X, Y)


def vertex_slots(v):
    """The three slot vdirs occupied by hexagons around vertex v."""
    m = v[1] % 3
    if m == 1:
        return (1, 3, 5)
    if m == 2:
        return (0, 2, 4)
    raise ValueError("not a lattice vertex: %r" % (v,))


def edge_step(v, w):
    dx, dy = VD[w % 6]
    return (v[0] + dx, v[1] + dy)


def diagonal_step(v, w):
    dx, dy = VD[w % 6]
    return (v[0] + 2 * dx, v[1] + 2 * dy)


class FloralArrangement:
    """Designation of iris hexagons.

    Either periodic -- the triangular sublattice spanned by (p, 0), (0, p)
    in axial coordinates, shifted by ``offset`` -- or an explicit validated
    iris set.  Placement rules: irises pairwise at hex distance >= 3 (two
    non-iris hexagons between), and the periodic pattern has the 60-degree
    rotational symmetry of the sublattice.
    """

    def __init__(self, period=None, offset=(0, 0), iris_set=None):
        if (period is None) == (iris_set is None):
            raise ValueError("give exactly one of period, iris_set")
        if period is not None and period < 3:
            raise ValueError(
                "period %d < 3 leaves fewer than two hexagons between irises"
                % period)
        self.period = period
        self.offset = tuple(offset)
        if iris_set is not None:
            iris_set = frozenset(tuple(h) for h in iris_set)
            for h in iris_set:
                for dq in range(-2, 3):
                    for dr in range(-2, 3):
                        other = (h[0] + dq, h[1] + dr)
                        if other != h and other in iris_set \
                                and hex_distance(h, other) < 3:
                            raise ValueError(
                                "irises %r, %r closer than distance 3"
                                % (h, other))
        self._iris_set = iris_set

    @classmethod
    def none(cls):
        return cls(iris_set=frozenset())

    @property
    def period_vectors(self):
        if self.period is None:
            return None
        return ((self.period, 0), (0, self.period))

    def contains(self, h):
        if self._iris_set is not None:
            return h in self._iris_set
        p = self.period
        return (h[0] - self.offset[0]) % p == 0 and \
               (h[1] - self.offset[1]) % p == 0

    def irises_in(self, cells):
        return sorted(h for h in cells if self.contains(h))


def place_irises(period, offset, bbox):
    """Periodic iris arrangement clipped to an axial bounding box.

    ``bbox`` is (qmin, qmax, rmin, rmax), inclusive.  Returns an explicit
    FloralArrangement; the underlying infinite pattern is the triangular
    sublattice of the given period.
    """
    if period < 3:
        raise ValueError(
            "period %d < 3 leaves fewer than two hexagons between irises"
            % period)
    qmin, qmax, rmin, rmax = bbox
    oq, orr = offset
    out = []
    for q in range(qmin, qmax + 1):
        if (q - oq) % period:
            continue
        for r in range(rmin, rmax + 1):
            if (r - orr) % period == 0:
                out.append((q, r))
    arr = FloralArrangement(iris_set=frozenset(out))
    arr.period = period
    arr.offset = tuple(offset)
    return arr


def flower_petals(iris):
    """Petals 1..6 of an iris, petal j directly across edge j-1."""
    return tuple(neighbor(iris, d) for d in range(6))


@dataclass(frozen=True)
class ShapeSpec:
    """Catalog shape with marked boundary points (Euclidean, unit scale)."""

    kind: str                      # triangle | rect | polygon | halfplane_box
    params: tuple = ()
    marks: tuple = ()              # ((name, (x, y)), ...)

    @classmethod
    def unit_triangle(cls):
        apex = (0.5, SQRT3 / 2.0)
        return cls("triangle", params=((0.0, 0.0), (1.0, 0.0), apex),
                   marks=(("a", (0.0, 0.0)), ("b", (1.0, 0.0)), ("c", apex)))

    @classmethod
    def rect(cls, x0, y0, x1, y1, marks):
        return cls("rect", params=(x0, y0, x1, y1), marks=tuple(marks))

    @classmethod
    def polygon(cls, pts, marks):
        return cls("polygon", params=tuple(pts), marks=tuple(marks))

    def polygon_points(self):
        if self.kind == "triangle":
            return list(self.params)
        if self.kind == "rect":
            x0, y0, x1, y1 = self.params
            return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
        if self.kind == "polygon":
            return list(self.params)
        raise ValueError("shape %s has no polygon form" % self.kind)


def _point_in_polygon(pt, poly):
    x, y = pt
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > y) != (y2 > y):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xi > x:
                inside = not inside
    return inside


def _dist_to_polygon(pt, poly):
    x, y = pt
    best = math.inf
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        dx, dy = x2 - x1, y2 - y1
        L2 = dx * dx + dy * dy
        t = 0.0 if L2 == 0 else max(0.0, min(1.0, ((x - x1) * dx + (y - y1) * dy) / L2))
        px, py = x1 + t * dx, y1 + t * dy
        best = min(best, math.hypot(x - px, y - py))
    return best


@dataclass(frozen=True)
class Junction:
    """A boundary vertex where two ring cells and one interior cell meet.

    ``walk_gap`` is the boundary-walk position: the vertex sits between walk
    edges walk_gap and walk_gap+1.  ``travel`` is the vdir from the vertex
    toward the interior cell (the initial travel direction of an interface
    leaving this vertex).
    """

    vertex: tuple
    walk_gap: int
    interior_cell: tuple
    travel: int


def walk_ring(interior):
    """Trace the outer boundary of a connected cell set, ccw (interior left).

    Returns (walk, junctions) where walk is a list of (inner_cell, dir,
    outer_cell) directed boundary edges in ccw order and junctions the list
    of Junction records.  Raises AdmissibilityError when the edge count
    reveals holes (inner boundary cycles), which are unsupported.
    """
    if not interior:
        raise AdmissibilityError("empty interior")
    total = 0
    for c in interior:
        for d in range(6):
            if neighbor(c, d) not in interior:
                total += 1
    c0 = min(interior, key=lambda h: (h[1], h[0]))
    start = (c0, 4)  # SW neighbor of the bottom-most cell is outside
    if neighbor(*start) in interior:
        raise AssertionError("boundary walk start is not a boundary edge")
    walk = []
    cur = start
    while True:
        c, d = cur
        walk.append((c, d, neighbor(c, d)))
        x = neighbor(c, (d + 1) % 6)
        if x not in interior:
            cur = (c, (d + 1) % 6)
        else:
            cur = (x, (d - 1) % 6)
        if cur == start:
            break
        if len(walk) > total:
            raise AssertionError("boundary walk failed to close")
    if len(walk) != total:
        raise AdmissibilityError(
            "interior has holes (inner boundary cycles); unsupported")
    junctions = []
    n = len(walk)
    for j in range(n):
        c, d, _ = walk[j]
        c2, d2, _ = walk[(j + 1) % n]
        if c2 == c and d2 == (d + 1) % 6:
            X, Y = center_int(c)
            dx, dy = VD[d]
            junctions.append(Junction(vertex=(X + dx, Y + dy), walk_gap=j,
                                      interior_cell=c, travel=(d + 3) % 6))
    return walk, junctions


def _components(cells):
    cells = set(cells)
    comps = []
    while cells:
        seed = cells.pop()
        comp = {seed}
        frontier = [seed]
        while frontier:
            h = frontier.pop()
            for nb in neighbors(h):
                if nb in cells:
                    cells.discard(nb)
                    comp.add(nb)
                    frontier.append(nb)
        comps.append(comp)
    return comps


class DiscreteDomain:
    """A discretized domain with colored boundary arcs and marked vertices.

    ``cells`` are the random (interior) hexagons; ``fixed`` maps boundary
    hexagons to their imposed states (measure.BLUE etc.; split states occur
    on slit-domain banks).  ``walk`` is the ccw boundary-edge sequence; the
    blue arc is the ccw stretch of walk positions from a to c.
    """

    def __init__(self, cells, fixed, boundary, flowers, walk, junctions,
                 a_junction, c_junction, marked=None, eps=1.0, label="",
                 boundary_flowers=(), exterior=(), material_fixed=()):
        self.cells = tuple(sorted(cells))
        self.cell_index = {h: i for i, h in enumerate(self.cells)}
        self.cell_set = frozenset(self.cells)
        self.fixed = dict(fixed)
        self.boundary = frozenset(boundary)
        self.exterior = frozenset(exterior)
        self.material_fixed = frozenset(material_fixed)
        self.flowers = tuple(flowers)
        self.boundary_flowers = tuple(boundary_flowers)
        self.walk = tuple(walk)
        self.junctions = tuple(junctions)
        self.a_junction = a_junction
        self.c_junction = c_junction
        self.marked = dict(marked or {})
        self.eps = eps
        self.label = label
        self._arrays = None
        # role map over random cells
        self.role = {}
        self.flower_of = {}
        for fi, (iris, petals) in enumerate(self.flowers):
            if iris in self.cell_index:
                self.role[iris] = "iris"
            self.flower_of[iris] = (fi, 0)
            for j, p in enumerate(petals):
                if p in self.cell_index:
                    self.role[p] = "petal"
                self.flower_of[p] = (fi, j + 1)
        for h in self.cells:
            self.role.setdefault(h, "filler")

    def replace(self, **kw):
        base = dict(cells=self.cells, fixed=self.fixed,
                    boundary=self.boundary, flowers=self.flowers,
                    walk=self.walk, junctions=self.junctions,
                    a_junction=self.a_junction, c_junction=self.c_junction,
                    marked=self.marked, eps=self.eps, label=self.label,
                    boundary_flowers=self.boundary_flowers,
                    exterior=self.exterior,
                    material_fixed=self.material_fixed)
        base.update(kw)
        return DiscreteDomain(**base)

    # -- marked vertices ---------------------------------------------------

    @property
    def a_vertex(self):
        return self.a_junction.vertex

    @property
    def c_vertex(self):
        return self.c_junction.vertex

    def junction_near(self, point):
        """The boundary junction whose vertex is Euclid-nearest to point."""
        return min(self.junctions,
                   key=lambda j: _dist2(int_to_euclid(j.vertex), point))

    def junction_at(self, vertex):
        for j in self.junctions:
            if j.vertex == tuple(vertex):
                return j
        raise KeyError("no junction at vertex %r" % (vertex,))

    # -- arcs ----------------------------------------------------------------

    def arc_positions(self, start_junction, end_junction):
        """Walk positions of the ccw boundary arc from one junction to another."""
        n = len(self.walk)
        i = (start_junction.walk_gap + 1) % n
        j = end_junction.walk_gap
        if i <= j:
            return tuple(range(i, j + 1))
        return tuple(range(i, n)) + tuple(range(0, j + 1))

    @property
    def blue_positions(self):
        return self.arc_positions(self.a_junction, self.c_junction)

    @property
    def yellow_positions(self):
        return self.arc_positions(self.c_junction, self.a_junction)

    @property
    def blue_arc(self):
        return _dedup(self.walk[p][2] for p in self.blue_positions)

    @property
    def yellow_arc(self):
        return _dedup(self.walk[p][2] for p in self.yellow_positions)

    def state_of_fixed(self, h):
        return self.fixed.get(h)

    # -- io -------------------------------------------------------------------

    def snapshot(self):
        """Versioned plain-text snapshot, one record per hexagon."""
        from . import measure as M
        lines = ["floralperc-domain v1 eps=%r label=%s" % (self.eps, self.label)]
        for h in self.cells:
            lines.append("%d %d %s" % (h[0], h[1], self.role[h]))
        for h in sorted(self.boundary):
            st = self.fixed.get(h)
            col = "none" if st is None else M.STATE_NAMES[st]
            lines.append("%d %d boundary %s" % (h[0], h[1], col))
        ja, jc = self.a_junction, self.c_junction
        lines.append("mark a %d %d" % ja.vertex)
        lines.append("mark c %d %d" % jc.vertex)
        for name, j in sorted(self.marked.items()):
            lines.append("mark %s %d %d" % ((name,) + j.vertex))
        return "\n".join(lines) + "\n"


def _dist2(p, q):
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def _dedup(seq):
    out = []
    for x in seq:
        if not out or out[-1] != x:
            out.append(x)
    return tuple(out)


def _whole_flowers(cells, arrangement):
    """(kept_flowers, dropped_cells): flowers whole in ``cells`` vs. cut ones."""
    flowers = []
    dropped = set()
    for iris in arrangement.irises_in(cells):
        petals = flower_petals(iris)
        members = [iris] + list(petals)
        if all(m in cells for m in members):
            flowers.append((iris, petals))
        else:
            dropped.update(m for m in members if m in cells)
    return flowers, dropped


def assemble_domain(omega, arrangement, a_target, c_target, marks=(),
                    eps=1.0, label=""):
    """Shared domain assembly from a raw candidate cell set.

    Applies the construction rules: drop cut flowers, take the internal
    lattice boundary (absorbing flowers it cuts), keep the a,c component of
    the interior, trace the ring, pick marked junctions, and color the arcs
    (ccw a->c arc blue).
    """
    omega = set(omega)
    flowers, dropped = _whole_flowers(omega, arrangement)
    omega -= dropped
    if not omega:
        raise DiscretizationTooCoarse("no cells survive discretization")
    bdry = {h for h in omega if any(nb not in omega for nb in neighbors(h))}
    flowers_in = []
    for iris, petals in flowers:
        members = {iris, *petals}
        if members & bdry:
            bdry |= members
        else:
            flowers_in.append((iris, petals))
    int0 = omega - bdry
    if not int0:
        raise DiscretizationTooCoarse("no interior cells at this scale")
    comps = _components(int0)

    def comp_of(point):
        cell = min(int0, key=lambda h: _dist2(hex_center(h), point))
        for comp in comps:
            if cell in comp:
                return comp
        raise AssertionError

    comp_a = comp_of(a_target)
    if comp_of(c_target) is not comp_a:
        raise DiscretizationTooCoarse(
            "marked points fall in different lattice components")
    interior = comp_a
    flowers_in = [f for f in flowers_in if f[0] in interior]
    # compact boundary annulus: cells adjacent to the kept interior, plus
    # whole flowers absorbed by it
    ring_cells = set()
    for h in interior:
        for nb in neighbors(h):
            if nb not in interior:
                ring_cells.add(nb)
    if not ring_cells <= omega:
        missing = sorted(ring_cells - omega)
        raise DiscretizationTooCoarse(
            "interior touches the shape hull at %r; enlarge the shape "
            "or refine epsilon" % (missing[:3],))
    boundary = set(ring_cells)
    for iris, petals in flowers:
        members = {iris, *petals}
        if members & boundary and not members <= interior:
            boundary |= members
    boundary_flowers = [f for f in flowers
                        if ({f[0], *f[1]} & boundary) and f[0] not in interior]
    walk, junctions = walk_ring(interior)
    if len(junctions) < 2:
        raise AdmissibilityError("fewer than two boundary junctions")

    def pick(point):
        return min(junctions,
                   key=lambda j: _dist2(int_to_euclid(j.vertex), point))

    ja = pick(a_target)
    jc = pick(c_target)
    if ja.vertex == jc.vertex:
        raise AdmissibilityError("marked vertices coincide")
    marked = {name: pick(pt) for name, pt in marks}
    dom = DiscreteDomain(cells=interior, fixed={}, boundary=boundary,
                         flowers=flowers_in, walk=walk, junctions=junctions,
                         a_junction=ja, c_junction=jc, marked=marked,
                         eps=eps, label=label,
                         boundary_flowers=boundary_flowers)
    return color_boundary(dom)


def color_boundary(domain):
    """Assign arc colors to the ring cells: ccw a->c arc blue, rest yellow.

    Only ring cells (boundary hexagons adjacent to the interior) are
    colored; deeper boundary-flower cells stay uncolored, which the model
    permits.  Any whole blue/yellow coloring of flower cells has positive
    probability, so no recoloring pass is needed here.
    """
    from . import measure as M
    fixed = dict(domain.fixed)
    seen = {}
    for pos in domain.blue_positions:
        seen.setdefault(domain.walk[pos][2], M.BLUE)
    for pos in domain.yellow_positions:
        cell = domain.walk[pos][2]
        if seen.get(cell, M.YELLOW) == M.BLUE:
            raise AdmissibilityError(
                "ring cell %r lies on both arcs; domain too thin" % (cell,))
        seen[cell] = M.YELLOW
    for iris, petals in domain.boundary_flowers:
        if iris in seen:
            raise AssertionError("iris %r on the ring" % (iris,))
    fixed.update(seen)
    return domain.replace(fixed=fixed)


def build_domain(shape, eps, arrangement=None, a_point=None, c_point=None):
    """Discretize a catalog shape at scale eps.

    Cell selection keeps hexagons whose closure lies in the shape interior
    (center strictly inside with clearance one circumradius).  Marked points
    default to the shape's 'a' and 'c' marks.
    """
    if arrangement is None:
        arrangement = FloralArrangement.none()
    poly = [(x / eps, y / eps) for x, y in shape.polygon_points()]
    marks = [(name, (x / eps, y / eps)) for name, (x, y) in shape.marks]
    mdict = dict(marks)
    a_target = tuple(v / eps for v in a_point) if a_point else mdict.get("a")
    c_target = tuple(v / eps for v in c_point) if c_point else mdict.get("c")
    if a_target is None or c_target is None:
        raise ValueError("shape needs marked points a and c")
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    clearance = 1.0 / SQRT3
    omega = set()
    rmin = int(math.floor(min(ys) / (SQRT3 / 2))) - 1
    rmax = int(math.ceil(max(ys) / (SQRT3 / 2))) + 1
    for r in range(rmin, rmax + 1):
        y = r * SQRT3 / 2
        qmin = int(math.floor(min(xs) - r / 2)) - 1
        qmax = int(math.ceil(max(xs) - r / 2)) + 1
        for q in range(qmin, qmax + 1):
            c = (q + r / 2, y)
            if _point_in_polygon(c, poly) and \
                    _dist_to_polygon(c, poly) > clearance:
                omega.add((q, r))
    return assemble_domain(omega, arrangement, a_target, c_target,
                           marks=marks, eps=eps, label=shape.kind)


def rect_domain(nq, nr, arrangement=None, a_corner="sw", c_corner="ne"):
    """Axial parallelogram {0 <= q < nq, 0 <= r < nr} built lattice-natively.

    In Euclidean terms this is the 60-degree rhombus spanned by the lattice
    basis vectors; its long diagonal is the axial transpose axis.  Marked
    vertices default to the two 60-degree corners (sw and ne), which lie on
    that axis.
    """
    if arrangement is None:
        arrangement = FloralArrangement.none()
    omega = {(q, r) for q in range(nq) for r in range(nr)}
    corners = {
        "sw": hex_center((0, 0)),
        "ne": hex_center((nq - 1, nr - 1)),
        "se": hex_center((nq - 1, 0)),
        "nw": hex_center((0, nr - 1)),
    }
    return assemble_domain(omega, arrangement, corners[a_corner],
                           corners[c_corner],
                           marks=tuple(corners.items()),
                           eps=1.0, label="rhombus")


def halfplane_box(width, height, arrangement=None):
    """Half-plane box: rows 0..height-1, centers |x| <= width/2.

    The marked vertex a sits at the bottom center (the origin end of the
    would-be real axis), c at the top center.  Bottom cells east of a are on
    the blue arc, matching blue-on-the-right for an upward exploration.
    """
    if arrangement is None:
        arrangement = FloralArrangement.none()
    omega = set()
    half = width / 2.0
    for r in range(height):
        qlo = int(math.ceil(-half - r / 2))
        qhi = int(math.floor(half - r / 2))
        for q in range(qlo, qhi + 1):
            omega.add((q, r))
    top = (height - 1) * SQRT3 / 2
    return assemble_domain(omega, arrangement, (0.0, 0.0), (0.0, top),
                           eps=1.0, label="halfplane_box")


@dataclass
class AdmissibilityReport:
    no_partial_flowers: bool
    boundary_two_arcs: bool
    marked_vertices_ok: bool
    offender: object = None

    @property
    def ok(self):
        return (self.no_partial_flowers and self.boundary_two_arcs
                and self.marked_vertices_ok)


def check_admissible(domain, params=None):
    """Check the three admissibility conditions, report-valued.

    1. no partial flowers among the random cells;
    2. the colored boundary forms two arcs, blue and yellow, lattice
       connected (via same-color facing edges), meeting exactly at the
       marked vertices, with a positive-probability coloring of every
       boundary flower;
    3. each marked vertex joins one blue-facing cell, one yellow-facing
       cell, and one interior cell.
    """
    from . import measure as M
    offender = None

    ok1 = True
    known = domain.cell_set | domain.fixed.keys() | domain.exterior
    for iris, petals in domain.flowers:
        members = {iris, *petals}
        if (members & domain.cell_set) and not members <= known:
            ok1 = False
            offender = iris
            break

    ok2 = True
    for positions, blue in ((domain.blue_positions, True),
                            (domain.yellow_positions, False)):
        if not _arc_is_valid(domain, positions, blue):
            ok2 = False
            offender = offender or ("blue" if blue else "yellow", "arc")
            break
    if ok2 and not _boundary_flowers_supported(domain, params):
        ok2 = False
        offender = offender or "zero-probability boundary flower coloring"

    ok3 = True
    for j in (domain.a_junction, domain.c_junction):
        v, u = j.vertex, j.travel
        front = hex_at_slot(v, u)
        right = hex_at_slot(v, (u + 4) % 6)
        left = hex_at_slot(v, (u + 2) % 6)
        st_r = domain.fixed.get(right)
        st_l = domain.fixed.get(left)
        if front not in domain.cell_set or st_r is None or st_l is None:
            ok3 = False
            offender = offender or v
            break
        # the two boundary cells meet along the edge opposite the interior
        # cell; the halves flanking that edge must differ in color (a split
        # iris counts through the half on its arc side)
        f_r = M.edge_is_blue(st_r, (u + 2) % 6)
        f_l = M.edge_is_blue(st_l, (u + 5) % 6)
        if f_r == f_l:
            ok3 = False
            offender = offender or v
            break

    return AdmissibilityReport(ok1, ok2, ok3, offender)


def _arc_is_valid(domain, positions, blue):
    """One boundary arc is a connected colored chain.

    Every position must be colored.  A position whose inward face shows
    the wrong color is tolerated only for split irises: their matching
    half serves the other arc or stays unused (the model does not require
    coloring everything), and the chain may pinch to a point there.
    Matched positions must follow each other at lattice distance <= 1.
    """
    from . import measure as M
    matched = False
    for pos in positions:
        _, d, cell = domain.walk[pos]
        st = domain.fixed.get(cell)
        if st is None:
            return False
        if M.edge_is_blue(st, (d + 3) % 6) == blue:
            matched = True
        elif st not in M.SPLIT_STATES:
            return False
    return matched


def _boundary_flowers_supported(domain, params):
    """Every partially colored flower must have positive probability."""
    from . import measure as M
    if params is None:
        params = M.ModelParams.from_s(0.1)
    fm = M.FlowerMeasure(params)
    for iris, petals in tuple(domain.boundary_flowers) + tuple(domain.flowers):
        partial = [domain.fixed.get(iris, M.UNDETERMINED)]
        partial += [domain.fixed.get(p, M.UNDETERMINED) for p in petals]
        if all(st == M.UNDETERMINED for st in partial):
            continue
        try:
            if fm.partial_prob(tuple(partial)) == 0:
                return False
        except ValueError:
            return False
    return True
