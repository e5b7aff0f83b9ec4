"""Path-regularity detectors and estimators for interface curves.

Doublebacks, triple visits, boundary double visits, multi-arm annulus
events, box-counting dimension, and the weighted endpoint-excised distance
between curves.  Detectors work on polyline curves given as (n, 2) float
arrays (lattice-unit Euclidean coordinates); see floralperc.loewner for
converting exploration paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import measure as M
from .lattice import hex_center, neighbor, flower_petals
from .sampler import EstimateWithCI, ConfigSampler


def as_xy(path):
    """Curve input -> (n, 2) float array (accepts complex or vertex lists)."""
    arr = np.asarray(path)
    if arr.dtype == complex:
        return np.column_stack([arr.real, arr.imag])
    if arr.ndim == 2 and arr.shape[1] == 2:
        return arr.astype(float)
    raise ValueError("cannot interpret path of shape %r" % (arr.shape,))


def vertices_xy(vertices):
    """Integer lattice vertices -> Euclidean coordinate array."""
    v = np.asarray(vertices, dtype=float)
    return np.column_stack([v[:, 0] * 0.5, v[:, 1] * (math.sqrt(3) / 6.0)])


def discrete_frechet(p, q):
    """Discrete Frechet distance between two polylines (order preserving)."""
    p = as_xy(p)
    q = as_xy(q)
    d = np.sqrt(((p[:, None, :] - q[None, :, :]) ** 2).sum(axis=2))
    n, m = d.shape
    ca = np.empty((n, m))
    ca[0, 0] = d[0, 0]
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], d[0, j])
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], d[i, 0])
        row_prev = ca[i - 1]
        row = ca[i]
        for j in range(1, m):
            row[j] = max(d[i, j],
                         min(row_prev[j], row_prev[j - 1], row[j - 1]))
    return float(ca[-1, -1])


def matched_sup_distance(p, q):
    """Reparameterization-infimum sup distance: Frechet, either orientation."""
    return min(discrete_frechet(p, q), discrete_frechet(p, q[::-1]))


# -- doublebacks --------------------------------------------------------------


def _min_windows(pts, delta):
    """For each start i, the smallest j with diam(pts[i..j]) >= delta."""
    n = len(pts)
    out = np.full(n, -1)
    j = 0
    for i in range(n):
        j = max(j, i)
        while j < n:
            seg = pts[i:j + 1]
            dx = seg[:, 0].max() - seg[:, 0].min()
            dy = seg[:, 1].max() - seg[:, 1].min()
            if math.hypot(dx, dy) >= delta:
                break
            j += 1
        if j >= n:
            break
        out[i] = j
    return out


def detect_doubleback(path, delta, eta):
    """Count disjoint window pairs that double back within eta.

    A doubleback pair is two time-disjoint subpaths, each of diameter at
    least delta, that stay eta-close under matched reparameterization
    (Frechet distance, either orientation).  Scanning is greedy over
    minimal-diameter windows with a bounding-box prefilter, and each
    counted pair consumes its first window, so the count is a
    well-defined lower bound on the number of disjoint doublebacks.
    """
    if eta >= delta:
        raise ValueError("eta must be smaller than delta")
    pts = as_xy(path)
    n = len(pts)
    if n < 4:
        return 0
    ends = _min_windows(pts, delta)
    count = 0
    i = 0
    while i < n and ends[i] >= 0:
        j = ends[i]
        w1 = pts[i:j + 1]
        lo1 = w1.min(axis=0) - eta
        hi1 = w1.max(axis=0) + eta
        found = False
        k = j + 1
        while k < n and ends[k] >= 0:
            kk = ends[k]
            w2 = pts[k:kk + 1]
            if np.all(w2.max(axis=0) >= lo1) and np.all(w2.min(axis=0) <= hi1):
                if matched_sup_distance(w1, w2) <= eta:
                    count += 1
                    found = True
                    break
            k += 1
        i = j + 1 if found else i + 1
    return count


# -- triple visits and boundary double visits ---------------------------------


def _candidate_centers(pts, radius):
    """Grid-deduplicated path points, one per occupied cell of size radius."""
    cell = np.floor(pts / max(radius, 1e-9)).astype(np.int64)
    _, idx = np.unique(cell, axis=0, return_index=True)
    return pts[np.sort(idx)]


def _visit_pattern(dist, d1, d2, k_visits, near_extra=None):
    """Greedy scan for far,(in,far)^k interleaving.

    dist: distances from the center along the path; ``near_extra`` is an
    optional boolean mask restricting one of the in-ball visits (the
    boundary variant needs at least one visit near the boundary), so each
    choice of which visit carries the restriction is tried.
    """
    inside = dist <= d1
    far = dist >= d2
    if near_extra is not None:
        return any(_scan_pattern(inside, far, k_visits, near_extra, which)
                   for which in range(k_visits))
    return _scan_pattern(inside, far, k_visits, None, -1)


def _scan_pattern(inside, far, k_visits, near_extra, which):
    n = len(inside)
    i = 0
    # need: far, then k_visits times (inside, far)
    state = 0
    visits = 0
    while i < n:
        if state == 0:
            if far[i]:
                state = 1
        else:
            need_near = (near_extra is not None and visits == which)
            good = inside[i] and (near_extra[i] if need_near else True)
            if good:
                visits += 1
                state = 0
                if visits == k_visits:
                    # one more far point required after the last visit
                    j = i + 1
                    while j < n:
                        if far[j]:
                            return True
                        j += 1
                    return False
        i += 1
    return False


def detect_triple_visit(path, d1, d2):
    """Three returns to one d1-ball separated by d2-excursions.

    True iff times t_a < t_1 < t_b < t_2 < t_c < t_3 < t_d exist with the
    three middle points inside a ball of radius d1 around some path point
    and the four separators at distance >= d2 from its center.
    """
    if d1 >= d2:
        raise ValueError("d1 must be smaller than d2")
    pts = as_xy(path)
    if len(pts) < 7:
        return False
    for c in _candidate_centers(pts, d1 / 2.0):
        dist = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
        if _visit_pattern(dist, d1, d2, 3):
            return True
    return False


def detect_boundary_double_visit(path, boundary_pts, d1, d2):
    """Two returns near the boundary: the Definition-7 style modification.

    ``boundary_pts``: (m, 2) array sampling the domain boundary (ring cell
    centers work).  True iff times t_a < t_1 < t_b < t_2 < t_c exist with
    both middle points in a d1-ball around a path point, at least one of
    them within d1 of the boundary, and the separators d2-far.
    """
    if d1 >= d2:
        raise ValueError("d1 must be smaller than d2")
    pts = as_xy(path)
    if len(pts) < 5:
        return False
    bpts = as_xy(boundary_pts)
    from scipy.spatial import cKDTree
    tree = cKDTree(bpts)
    bdist = tree.query(pts, k=1)[0]
    near_boundary = bdist <= d1
    if not near_boundary.any():
        return False
    centers = _candidate_centers(pts[near_boundary], d1 / 2.0)
    for c in centers:
        dist = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
        if _visit_pattern(dist, d1, d2, 2, near_extra=near_boundary):
            return True
    return False


# -- multi-arm annulus events --------------------------------------------------


@dataclass(frozen=True)
class AnnulusSpec:
    center: tuple
    inner: float
    outer: float
    arms: int
    polychromatic: bool = True   # "not all one color"

    def __post_init__(self):
        if not 0 < self.inner < self.outer:
            raise ValueError("need 0 < inner < outer")
        if self.arms < 1:
            raise ValueError("need at least one arm")


class _BareRegion:
    """Duck-typed stand-in for DiscreteDomain over a raw cell set."""

    def __init__(self, cells, flowers):
        self.cells = tuple(sorted(cells))
        self.boundary = frozenset()
        self.flowers = tuple(flowers)
        self.boundary_flowers = ()
        self.fixed = {}
        self.material_fixed = frozenset()


def annulus_region(spec, arrangement=None):
    """Cells of the annulus plus the flower structure intersecting it."""
    cx, cy = spec.center
    cells = set()
    r_lo = int(math.floor((cy - spec.outer) / (math.sqrt(3) / 2))) - 1
    r_hi = int(math.ceil((cy + spec.outer) / (math.sqrt(3) / 2))) + 1
    for r in range(r_lo, r_hi + 1):
        q_lo = int(math.floor(cx - spec.outer - r / 2)) - 1
        q_hi = int(math.ceil(cx + spec.outer - r / 2)) + 1
        for q in range(q_lo, q_hi + 1):
            x, y = hex_center((q, r))
            d = math.hypot(x - cx, y - cy)
            if spec.inner <= d <= spec.outer:
                cells.add((q, r))
    flowers = []
    if arrangement is not None:
        seen = set()
        for h in cells:
            for cand in [h] + list(neighbor(h, d) for d in range(6)):
                if cand in seen or not arrangement.contains(cand):
                    continue
                seen.add(cand)
                flowers.append((cand, flower_petals(cand)))
    return _BareRegion(cells, flowers)


class ArmEventCounter:
    """Prepared annulus arm counter, cluster-label disjointness.

    An arm is a monochrome cluster of the annulus sub-configuration
    containing both an inner-rim and an outer-rim cell; distinct clusters
    are distinct arms of that color (opposite-color arms may share a mixed
    iris, which separate per-color label spaces allow automatically).
    """

    def __init__(self, spec, params, arrangement=None, region=None):
        self.spec = spec
        region = region or annulus_region(spec, arrangement)
        self.sampler = ConfigSampler(region, params, free=True)
        cs = self.sampler
        cx, cy = spec.center
        inner_rim, outer_rim = [], []
        for i, h in enumerate(cs.cells):
            for nb in (neighbor(h, d) for d in range(6)):
                if nb in cs.index:
                    continue
                x, y = hex_center(nb)
                d = math.hypot(x - cx, y - cy)
                if d < spec.inner:
                    inner_rim.append(i)
                elif d > spec.outer:
                    outer_rim.append(i)
        self.inner_rim = np.unique(np.array(inner_rim, dtype=np.int64))
        self.outer_rim = np.unique(np.array(outer_rim, dtype=np.int64))
        if not len(self.inner_rim) or not len(self.outer_rim):
            raise ValueError("annulus too thin at this lattice scale")

    def arm_counts(self, states):
        counts = {}
        for color, blue in ((M.BLUE, True), (M.YELLOW, False)):
            lab = self.sampler.component_labels(states, blue)
            other = M.YELLOW if blue else M.BLUE
            has = states != other
            ids_in = np.unique(
                lab[self.inner_rim[has[self.inner_rim]]])
            ids_out = np.unique(
                lab[self.outer_rim[has[self.outer_rim]]])
            counts[color] = len(np.intersect1d(ids_in, ids_out,
                                               assume_unique=True))
        return counts[M.BLUE], counts[M.YELLOW]

    def event(self, states):
        nb, ny = self.arm_counts(states)
        if self.spec.polychromatic:
            return nb + ny >= self.spec.arms and nb >= 1 and ny >= 1
        return max(nb, ny) >= self.spec.arms

    def estimate(self, n, rng, batch=64):
        hits = 0
        done = 0
        while done < n:
            b = min(batch, n - done)
            states = self.sampler.sample_batch(rng, b)
            for k in range(b):
                hits += bool(self.event(states[k]))
            done += b
        mean = hits / n
        return EstimateWithCI(mean=mean,
                              stderr=math.sqrt(mean * (1 - mean) / n), n=n)


def estimate_arm_event(domain, spec, params, n, rng, arrangement=None):
    """Monte Carlo probability of the k-arm annulus event.

    ``domain`` bounds the annulus: it must lie strictly inside (half-
    annulus handling is not implemented, so touching the boundary is an
    error).  Sampling runs on the bare annulus region, which carries the
    same measure.
    """
    if domain is not None:
        cx, cy = spec.center
        region = annulus_region(spec, arrangement)
        missing = [h for h in region.cells if h not in domain.cell_set
                   and h not in domain.boundary]
        if missing:
            raise ValueError(
                "annulus touches the domain boundary (no half-annulus mode)")
    counter = ArmEventCounter(spec, params, arrangement)
    return counter.estimate(n, rng)


# -- box dimension -------------------------------------------------------------


@dataclass
class SlopeReport:
    slope: float
    intercept: float
    r2: float
    scales: np.ndarray
    counts: np.ndarray


def box_dimension(path, scales):
    """Least-squares slope of log N(theta) against log(1/theta).

    Counts boxes visited by the polyline's vertices and segment midpoints;
    scales must number at least 4 and span at least two octaves.
    """
    pts = as_xy(path)
    if len(pts) < 2 or float(np.ptp(pts, axis=0).max()) == 0.0:
        raise ValueError("degenerate path")
    scales = np.asarray(sorted(scales, reverse=True), dtype=float)
    if len(scales) < 4 or scales[0] / scales[-1] < 4.0:
        raise ValueError("need >= 4 scales spanning >= 2 octaves")
    mids = 0.5 * (pts[:-1] + pts[1:])
    cloud = np.concatenate([pts, mids])
    counts = []
    for theta in scales:
        cells = np.floor(cloud / theta).astype(np.int64)
        counts.append(len(np.unique(cells, axis=0)))
    counts = np.array(counts, dtype=float)
    xs = np.log(1.0 / scales)
    ys = np.log(counts)
    A = np.vstack([xs, np.ones_like(xs)]).T
    coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
    resid = ys - A @ coef
    ss_t = float(((ys - ys.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_t if ss_t > 0 else 1.0
    return SlopeReport(slope=float(coef[0]), intercept=float(coef[1]),
                       r2=r2, scales=scales, counts=counts)


# -- the weighted endpoint-excised distance ------------------------------------


@dataclass
class CurvePair:
    curve1: np.ndarray
    curve2: np.ndarray
    a: tuple
    c: tuple

    def __post_init__(self):
        self.curve1 = as_xy(self.curve1)
        self.curve2 = as_xy(self.curve2)


def _portion_outside(pts, a, c, radius):
    """Last exit from the a-ball to first entry into the c-ball after it."""
    da = np.hypot(pts[:, 0] - a[0], pts[:, 1] - a[1])
    dc = np.hypot(pts[:, 0] - c[0], pts[:, 1] - c[1])
    in_a = np.nonzero(da <= radius)[0]
    start = int(in_a[-1]) if len(in_a) else 0
    after = np.nonzero(dc[start:] <= radius)[0]
    end = start + int(after[0]) if len(after) else len(pts) - 1
    if end <= start:
        return pts[start:start + 1]
    return pts[start:end + 1]


def dist_metric(pair, weights, base_radius=None):
    """Weighted sum of sup distances outside shrinking endpoint balls.

    weights lambda_l (summing to one) weight the matched-sup distance
    between the curve portions outside balls of radius base_radius * 2^-l
    around a and c; the dyadic ball neighborhoods stand in for the
    conformal crosscut neighborhoods on catalog shapes.
    """
    w = np.asarray(weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError("weights must sum to one")
    if base_radius is None:
        span = np.ptp(np.concatenate([pair.curve1, pair.curve2]), axis=0)
        base_radius = float(max(span)) / 2.0
    total = 0.0
    for ell, lam in enumerate(w, start=1):
        r = base_radius * 2.0 ** (-ell)
        p1 = _portion_outside(pair.curve1, pair.a, pair.c, r)
        p2 = _portion_outside(pair.curve2, pair.a, pair.c, r)
        total += lam * matched_sup_distance(p1, p2)
    return total
