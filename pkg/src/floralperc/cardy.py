"""Crossing-probability formula, cross-ratios, and separation functions.

The limiting crossing probability of a conformal rectangle is the
normalized incomplete integral of (s(1-s))^(-2/3) at the cross-ratio x of
the four marked points.  The integrand's endpoint singularities vanish
under s = u^3, after which a fixed Gauss-Legendre rule reaches full double
precision; values above x = 1/2 use the exact reflection F(x) = 1-F(1-x).

Separation estimates measure, on the equilateral triangle with free
(uncolored) boundary, the probability that a path connecting two sides
cuts a given interior point off from the third side; the harmonic limit of
the base-excluding function grows linearly in height, 2/sqrt(3) * y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import measure as M
from .lattice import ShapeSpec, build_domain, hex_center, FloralArrangement
from .sampler import ConfigSampler, EstimateWithCI

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def _incomplete(x):
    """integral of (s(1-s))^(-2/3) ds from 0 to x, for x <= 1/2.

    Substituting s = u^3 gives 3 * integral (1-u^3)^(-2/3) du up to
    x^(1/3), an analytic integrand on [0, (1/2)^(1/3)].
    """
    b = x ** (1.0 / 3.0)
    u = 0.5 * b * (_GL_NODES + 1.0)
    w = 0.5 * b * _GL_WEIGHTS
    return float(np.sum(w * 3.0 * (1.0 - u ** 3) ** (-2.0 / 3.0)))


_HALF_INCOMPLETE = _incomplete(0.5)


def cardy_F(x):
    """The crossing formula at cross-ratio x in [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("cross-ratio must lie in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if x > 0.5:
        return 1.0 - cardy_F(1.0 - x)
    return _incomplete(x) / (2.0 * _HALF_INCOMPLETE)


def halfplane_cross_ratio(pa, pb, pc, pd):
    """x such that the Moebius map with (pb,pc,pd) -> (1, inf, 0) sends
    pa -> 1-x.  Points are extended reals on the half-plane boundary in
    counterclockwise (increasing, up to one wrap) order.
    """
    pts = [pa, pb, pc, pd]
    n_inf = sum(1 for p in pts if math.isinf(p))
    if n_inf > 1 or len({p for p in pts}) != 4:
        raise ValueError("marked points must be distinct (one may be inf)")
    order = [(p, i) for i, p in enumerate(pts)]
    ranked = sorted(order)
    wraps = 0
    pos = [None] * 4
    for rank, (_, i) in enumerate(ranked):
        pos[i] = rank
    for i in range(4):
        if pos[(i + 1) % 4] < pos[i]:
            wraps += 1
    if wraps != 1:
        raise ValueError("marked points not in counterclockwise order")

    def moeb(z):
        # (pb, pc, pd) -> (1, inf, 0)
        if math.isinf(z):
            return (pb - pc) / (pb - pd) if not math.isinf(pb) else 1.0
        if math.isinf(pb):
            return (z - pd) / (z - pc)
        if math.isinf(pc):
            return (z - pd) / (pb - pd)
        if math.isinf(pd):
            return (pb - pc) / (z - pc)
        return ((z - pd) * (pb - pc)) / ((z - pc) * (pb - pd))

    x = 1.0 - moeb(pa)
    if not 0.0 < x < 1.0:
        raise ValueError("cross-ratio fell outside (0,1): %r" % x)
    return x


@dataclass(frozen=True)
class SeparationQuery:
    z: tuple                    # Euclidean point in the unit triangle
    color: int = M.BLUE
    func: str = "u"             # u: A-B path separating z from C; v, w cyclic
    margin: float = 0.04


_FUNC_SIDES = {"u": ("A", "B", "C"), "v": ("B", "C", "A"),
               "w": ("C", "A", "B")}


class SeparationEstimator:
    """Prepared estimator for the three separation functions on a triangle.

    Percolation is free (every hexagon random, the boundary located but
    not colored).  An event for function u: some cluster of the query
    color contains cells on both side A and side B, and removing it
    disconnects z's hexagon from side C in the plain adjacency graph.
    """

    def __init__(self, eps, params, arrangement=None):
        shape = ShapeSpec.unit_triangle()
        self.eps = eps
        self.domain = build_domain(shape, eps, arrangement)
        self.sampler = ConfigSampler(self.domain, params, free=True)
        dom, cs = self.domain, self.sampler
        self.side_cells = {}
        names = ("a", "b", "c")
        for k, side in enumerate(("C", "A", "B")):
            j1 = dom.marked[names[k]]
            j2 = dom.marked[names[(k + 1) % 3]]
            cells = sorted({dom.walk[p][2] for p in dom.arc_positions(j1, j2)})
            self.side_cells[side] = np.array(
                [cs.index[h] for h in cells if h in cs.index], dtype=np.int64)

    def cell_of(self, z):
        """Index of the hexagon containing the Euclidean point z."""
        zx, zy = z[0] / self.eps, z[1] / self.eps
        best, best_d = None, math.inf
        r0 = round(zy / (math.sqrt(3) / 2.0))
        for r in range(r0 - 1, r0 + 2):
            q0 = round(zx - r / 2.0)
            for q in range(q0 - 1, q0 + 2):
                c = hex_center((q, r))
                d = (c[0] - zx) ** 2 + (c[1] - zy) ** 2
                if d < best_d:
                    best, best_d = (q, r), d
        i = self.sampler.index.get(best)
        if i is None:
            raise ValueError("point %r is not inside the domain" % (z,))
        return i

    def _check_margin(self, query):
        x, y = query.z
        pts = [(0.0, 0.0), (1.0, 0.0), (0.5, math.sqrt(3) / 2.0)]
        for k in range(3):
            x1, y1 = pts[k]
            x2, y2 = pts[(k + 1) % 3]
            dx, dy = x2 - x1, y2 - y1
            L = math.hypot(dx, dy)
            dist = abs((x - x1) * dy - (y - y1) * dx) / L
            if dist < query.margin:
                raise ValueError(
                    "query point %r within %.3f of the boundary"
                    % (query.z, query.margin))

    def frequencies(self, queries, n, rng, batch=64):
        """Event frequencies for several queries sharing the samples."""
        for q in queries:
            self._check_margin(q)
        cs = self.sampler
        z_idx = [self.cell_of(q.z) for q in queries]
        hits = np.zeros(len(queries))
        done = 0
        while done < n:
            b = min(batch, n - done)
            states = cs.sample_batch(rng, b)
            for k in range(b):
                self._accumulate(states[k], queries, z_idx, hits)
            done += b
        means = hits / n
        se = np.sqrt(means * (1.0 - means) / n)
        return [EstimateWithCI(mean=float(m), stderr=float(s), n=n)
                for m, s in zip(means, se)]

    def _accumulate(self, states, queries, z_idx, hits):
        cs = self.sampler
        labels = {}
        for color in {q.color for q in queries}:
            labels[color] = cs.component_labels(states, color == M.BLUE)
        for qi, q in enumerate(queries):
            s1, s2, s_cut = _FUNC_SIDES[q.func]
            lab = labels[q.color]
            other = M.YELLOW if q.color == M.BLUE else M.BLUE
            has = states != other
            a_ids = np.unique(lab[self.side_cells[s1]
                                  [has[self.side_cells[s1]]]])
            b_ids = np.unique(lab[self.side_cells[s2]
                                  [has[self.side_cells[s2]]]])
            cross = np.intersect1d(a_ids, b_ids, assume_unique=True)
            if not len(cross):
                continue
            target = self.side_cells[s_cut]
            for cid in cross:
                in_cluster = (lab == cid) & has
                if in_cluster[z_idx[qi]]:
                    hits[qi] += 1
                    break
                keep = ~in_cluster
                mask = keep[cs.ei] & keep[cs.ej]
                g = csr_matrix(
                    (np.ones(int(mask.sum()), dtype=np.int8),
                     (cs.ei[mask], cs.ej[mask])),
                    shape=(cs.n, cs.n))
                _, comp = connected_components(g, directed=False)
                tgt = target[keep[target]]
                if len(tgt) and not np.any(comp[tgt] == comp[z_idx[qi]]):
                    hits[qi] += 1
                    break


def estimate_separation(query, eps, params, n, rng, arrangement=None):
    """Monte Carlo frequency of one separation event."""
    est = SeparationEstimator(eps, params, arrangement)
    return est.frequencies([query], n, rng)[0]


@dataclass
class ScanRow:
    spec_id: str
    x: float
    F: float
    estimate: float
    stderr: float
    n: int
    z: float
    supported: bool = True


def cardy_scan(entries, params, n, rng, free=True):
    """Crossing estimates against the formula for a list of prepared specs.

    Each entry is (spec_id, domain, CrossingSpec, x) with x the conformal
    cross-ratio, or None when no analytic map is available (the row is
    emitted unsupported rather than failing).
    """
    from .sampler import CrossingTester
    rows = []
    for k, (spec_id, domain, spec, x) in enumerate(entries):
        if x is None:
            rows.append(ScanRow(spec_id=spec_id, x=float("nan"),
                                F=float("nan"), estimate=float("nan"),
                                stderr=float("nan"), n=0, z=float("nan"),
                                supported=False))
            continue
        cs = ConfigSampler(domain, params, free=free)
        est = CrossingTester(cs, spec).estimate(n, rng)
        f = cardy_F(x)
        z = (est.mean - f) / est.stderr if est.stderr > 0 else 0.0
        rows.append(ScanRow(spec_id=spec_id, x=x, F=f, estimate=est.mean,
                            stderr=est.stderr, n=est.n, z=float(z)))
    return rows


def halfplane_box_entry(spec_id, width, height, reals, eps=1.0,
                        arrangement=None, color=M.BLUE):
    """Scan entry for a half-plane box with four marked reals on its base.

    The box stands in for the upper half-plane through the identity
    embedding, so the cross-ratio comes directly from the marked points
    (snapped to their boundary junctions).
    """
    from .lattice import halfplane_box, int_to_euclid
    from .sampler import crossing_spec
    dom = halfplane_box(int(width / eps), int(height / eps), arrangement)
    pa, pb, pc, pd = [r / eps for r in reals]
    ja = dom.junction_near((pa, 0.0))
    jb = dom.junction_near((pb, 0.0))
    jc = dom.junction_near((pc, 0.0))
    jd = dom.junction_near((pd, 0.0))
    spec = crossing_spec(dom, a_junction=ja, b_junction=jb, c_junction=jc,
                         d_junction=jd, color=color)
    snapped = [int_to_euclid(j.vertex)[0] * eps for j in (ja, jb, jc, jd)]
    x = halfplane_cross_ratio(*snapped)
    return (spec_id, dom, spec, x)
