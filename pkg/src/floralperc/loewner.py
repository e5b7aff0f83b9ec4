"""Half-plane capacity, the discrete zipper, and driving-function statistics.

A curve in the closed upper half-plane is encoded by its ordered complex
points; the zipper peels it off with elementary vertical-slit maps

    g(z) = Re w + sqrt((z - Re w)^2 + (Im w)^2),

where w is the image of the next curve point under the maps composed so
far.  Each step contributes driving value Re w and half-plane capacity
(Im w)^2 / 2; with capacity A(t) = 2t the time increment is (Im w)^2 / 4.

The forward direction is served two independent ways: an ODE integrator
for point trajectories and tips (the round-trip oracle), and the exact
inverse slit-map composition.  Statistics helpers test the scaling-limit
fingerprints: zero drift, second moment 6t, exponential tails, and the
geometric bounds Im gamma(t) <= 2 sqrt(t), sup|gamma| >= |lambda_t|/4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import int_to_euclid


@dataclass
class DrivingSample:
    """Capacity-parameterized driving data (t strictly increasing)."""

    t: np.ndarray
    lam: np.ndarray
    base: float = 0.0
    tip_index: np.ndarray = None     # indices into the source curve, if any

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.lam = np.asarray(self.lam, dtype=float)
        if len(self.t) and np.any(np.diff(self.t) <= 0):
            raise ValueError("capacity times must increase strictly")

    @property
    def t_max(self):
        return float(self.t[-1]) if len(self.t) else 0.0

    def lam_at(self, times):
        """Piecewise-constant interpolation (left-continuous in capacity)."""
        times = np.asarray(times, dtype=float)
        if np.any(times > self.t_max + 1e-12):
            raise ValueError("driving sample does not cover requested time")
        idx = np.searchsorted(self.t, times, side="left")
        idx = np.clip(idx, 0, len(self.lam) - 1)
        return self.lam[idx]


class ZipperDegeneracy(ValueError):
    pass


def _slit_image(z, lam, h2):
    """Apply g(z) = lam + sqrt((z-lam)^2 + h2) on the correct branch.

    The principal square root lands in the lower half-plane when
    Re(z - lam) < 0; flip to keep images in the closed upper half-plane
    with the sign of the real part preserved.
    """
    u = (z - lam) ** 2 + h2
    s = np.sqrt(u)
    re = (z - lam).real if np.ndim(z) else (z - lam).real
    flip = (s.imag < 0) | ((s.imag == 0) & (s.real * re < 0))
    s = np.where(flip, -s, s)
    return lam + s


def zipper_extract(points, coarsen=0.0, t_floor=1.0, t_cut=None,
                   drop_im=1e-12):
    """Discrete zipper: curve points -> DrivingSample.

    ``points``: complex array, first point on the real axis.  Points whose
    running image has Im below ``drop_im`` contribute no capacity and are
    skipped (curve touching the swallowed region or the axis).  With
    ``coarsen`` = alpha > 0, points whose capacity increment would stay
    below alpha * max(t, t_floor) are dropped: a relative-capacity
    decimation that keeps the driving at a fixed resolution per capacity
    octave (calibrated in the tests).  Extraction stops once t exceeds
    ``t_cut`` if given.
    """
    pts = np.asarray(points, dtype=complex)
    if len(pts) == 0:
        return DrivingSample(t=np.zeros(0), lam=np.zeros(0), base=0.0,
                             tip_index=np.zeros(0, dtype=int))
    base = pts[0]
    if abs(base.imag) > 1e-9:
        raise ValueError("curve must start on the real axis")
    if np.any(pts.imag < -1e-9):
        raise ValueError("curve exits the upper half-plane")
    arr = pts[1:].copy()
    ts, lams, keep = [], [], []
    t = 0.0
    k = 0
    n = len(arr)
    while k < n:
        w = arr[k]
        im = w.imag
        if im < -1e-6:
            raise ZipperDegeneracy(
                "image of point %d fell below the axis" % (k + 1))
        dt = 0.25 * im * im
        if im <= drop_im or t + dt == t or \
                (coarsen > 0.0 and dt < coarsen * max(t, t_floor)
                 and k != n - 1):
            k += 1
            continue
        lam = w.real
        t += dt
        ts.append(t)
        lams.append(lam)
        keep.append(k + 1)
        if k + 1 < n:
            arr[k + 1:] = _slit_image(arr[k + 1:], lam, im * im)
        k += 1
        if t_cut is not None and t >= t_cut:
            break
    return DrivingSample(t=np.array(ts), lam=np.array(lams),
                         base=float(base.real),
                         tip_index=np.array(keep, dtype=int))


def hcap(points):
    """Total half-plane capacity A (the 1/z coefficient); paper time A/2."""
    d = zipper_extract(points)
    return 2.0 * float(d.t[-1]) if len(d.t) else 0.0


def weld_tips(driving):
    """Exact tips of the discrete hull: f_1 o ... o f_k (lam_k).

    The inverse elementary maps are f(wv) = lam + sqrt((wv-lam)^2 - h^2);
    composing them in original order at the running driving value yields
    the curve the zipper would have produced.  O(n) per tip, O(n^2) total,
    so this is meant for end-tip checks and short drivings.
    """
    t = driving.t
    lam = driving.lam
    dts = np.diff(np.concatenate([[0.0], t]))
    h2s = 4.0 * dts
    tips = np.empty(len(t), dtype=complex)
    for k in range(len(t)):
        z = complex(lam[k], 0.0) + 1j * math.sqrt(max(h2s[k], 0.0))
        for j in range(k - 1, -1, -1):
            u = (z - lam[j]) ** 2 - h2s[j]
            s = complex(np.sqrt(u))
            if s.imag < 0:
                s = -s
            z = lam[j] + s
        tips[k] = z
    return tips


def forward_loewner(driving, z, n_substeps=8):
    """Trajectory of g_t(z) under dg/dt = 2 / (g - lam_t).

    Piecewise-constant driving between sample times, RK4 substeps inside
    each interval.  Returns (times, values); integration reports a swallow
    (trajectory meeting the driving value) by truncating with a flag.
    """
    if z.imag < 0:
        raise ValueError("z must lie in the closed upper half-plane")
    t_nodes = np.concatenate([[0.0], driving.t])
    lam_nodes = np.concatenate([[driving.base], driving.lam])
    g = complex(z)
    times = [0.0]
    values = [g]
    swallowed = False
    for i in range(len(driving.t)):
        lam = lam_nodes[i]
        dt = (t_nodes[i + 1] - t_nodes[i]) / n_substeps
        for _ in range(n_substeps):
            if abs(g - lam) < 1e-9:
                swallowed = True
                break

            def f(w):
                return 2.0 / (w - lam)

            k1 = f(g)
            k2 = f(g + 0.5 * dt * k1)
            k3 = f(g + 0.5 * dt * k2)
            k4 = f(g + dt * k3)
            g = g + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if swallowed:
            break
        times.append(float(t_nodes[i + 1]))
        values.append(g)
    return np.array(times), np.array(values, dtype=complex), swallowed


def tip_from_driving(driving, T=None, n_steps=4000, y0=1e-9):
    """Curve tip gamma(T) by reverse-flow integration (round-trip oracle).

    Solves the reverse flow z' = -2 / (z - lam(T - s)) from z = lam(T),
    s in [0, T].  The launch is singular (z - lam grows like 2 i sqrt(s)),
    so integrate in sigma with s = T sigma^2, which makes the right-hand
    side regular, and use RK4 on a uniform sigma grid.  Independent of the
    slit-map welding, which is the point: it checks the zipper rather than
    inverting it symbolically.
    """
    if T is None:
        T = driving.t_max
    lam_T = float(driving.lam_at(T))
    if T <= 0:
        return complex(lam_T, y0)

    def lam_of(tt):
        return float(driving.lam_at(min(max(tt, 0.0), driving.t_max)))

    def f(w, sigma):
        lam = lam_of(T - T * sigma * sigma)
        d = w - lam
        if d == 0:
            d = complex(0.0, y0)
        return -4.0 * T * sigma / d

    # first step from the local expansion z = lam(T) + 2 i sqrt(T) sigma,
    # where the flow launches off the driving value
    dsig = 1.0 / n_steps
    sigma = dsig
    z = complex(lam_T, 2.0 * math.sqrt(T) * sigma)
    for _ in range(n_steps - 1):
        k1 = f(z, sigma)
        k2 = f(z + 0.5 * dsig * k1, sigma + 0.5 * dsig)
        k3 = f(z + 0.5 * dsig * k2, sigma + 0.5 * dsig)
        k4 = f(z + dsig * k3, sigma + dsig)
        z = z + (dsig / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        sigma += dsig
    return z


def brownian_driving(t_max, dt, rng, variance_rate=6.0, base=0.0):
    """Synthetic control: lambda_t = base + B(variance_rate * t)."""
    n = int(math.ceil(t_max / dt))
    t = dt * np.arange(1, n + 1)
    steps = rng.normal(0.0, math.sqrt(variance_rate * dt), size=n)
    return DrivingSample(t=t, lam=base + np.cumsum(steps), base=base)


def path_to_halfplane(vertices, a_vertex):
    """Lattice path vertices -> complex curve based at the origin.

    Identity embedding of the lattice: Euclidean coordinates relative to
    the start vertex; valid as a half-plane curve while it stays away from
    the far sides of its box.
    """
    ax, ay = int_to_euclid(a_vertex)
    out = np.empty(len(vertices), dtype=complex)
    for i, v in enumerate(vertices):
        x, y = int_to_euclid(v)
        out[i] = complex(x - ax, y - ay)
    return out


def smooth_midpoints(points):
    """Corner-cutting pass: midpoints of segments, endpoints kept."""
    pts = np.asarray(points, dtype=complex)
    if len(pts) < 3:
        return pts
    mids = 0.5 * (pts[:-1] + pts[1:])
    return np.concatenate([pts[:1], mids, pts[-1:]])


@dataclass
class DrivingStats:
    t_grid: np.ndarray
    mean: np.ndarray
    mean_stderr: np.ndarray
    second_over_t: np.ndarray
    second_stderr: np.ndarray
    lag1_corr: float
    n: int

    def mean_ok(self, n_sigma=3.0):
        return np.all(np.abs(self.mean) <= n_sigma * self.mean_stderr)

    def variance_ok(self, rel_tol=0.15, target=6.0):
        return np.all(np.abs(self.second_over_t - target) <= rel_tol * target)


def driving_stats(samples, t_grid):
    """Per grid time: mean, second moment over t, increment diagnostics."""
    if len(samples) < 30:
        raise ValueError("need at least 30 driving samples")
    t_grid = np.asarray(t_grid, dtype=float)
    lam = np.array([s.lam_at(t_grid) - s.base for s in samples])
    n = len(samples)
    mean = lam.mean(axis=0)
    mean_se = lam.std(axis=0, ddof=1) / math.sqrt(n)
    sq = lam ** 2
    second = sq.mean(axis=0) / t_grid
    second_se = sq.std(axis=0, ddof=1) / t_grid / math.sqrt(n)
    if len(t_grid) >= 3:
        inc = np.diff(lam, axis=1)
        a = inc[:, :-1].ravel()
        b = inc[:, 1:].ravel()
        a = a - a.mean()
        b = b - b.mean()
        denom = math.sqrt(float((a * a).sum() * (b * b).sum()))
        lag1 = float((a * b).sum() / denom) if denom > 0 else 0.0
    else:
        lag1 = 0.0
    return DrivingStats(t_grid=t_grid, mean=mean, mean_stderr=mean_se,
                        second_over_t=second, second_stderr=second_se,
                        lag1_corr=lag1, n=n)


@dataclass
class TailGeometryReport:
    slope: float
    intercept: float
    r2: float
    n_points: int
    im_bound_ok: bool
    im_bound_margin: float
    sup_bound_ok: bool
    sup_bound_margin: float


def tail_and_geometry_check(samples, curves, t, mesh_tol=2.0):
    """Exponential-tail fit and the two geometric bounds.

    Fits log P[|lambda_t| > x] against x / sqrt(t) over the empirical
    quantile range; checks Im gamma(t_k) <= 2 sqrt(t_k) + mesh_tol and
    sup_{s<=t_k} |gamma(s)| >= |lambda_{t_k}|/4 - mesh_tol for every
    retained (curve point, capacity time) pair of every sample.
    """
    vals = np.abs(np.array([s.lam_at(t) - s.base for s in samples]))
    qs = np.quantile(vals, np.linspace(0.5, 0.98, 13))
    xs, ys = [], []
    for q in qs:
        p = float((vals > q).mean())
        if 0 < p < 1:
            xs.append(q / math.sqrt(t))
            ys.append(math.log(p))
    xs = np.array(xs)
    ys = np.array(ys)
    if len(xs) >= 3:
        A = np.vstack([xs, np.ones_like(xs)]).T
        coef, *_ = np.linalg.lstsq(A, ys, rcond=None)
        slope, intercept = float(coef[0]), float(coef[1])
        resid = ys - A @ coef
        ss_t = float(((ys - ys.mean()) ** 2).sum())
        r2 = 1.0 - float((resid ** 2).sum()) / ss_t if ss_t > 0 else 1.0
    else:
        slope, intercept, r2 = 0.0, 0.0, 1.0

    im_ok = True
    sup_ok = True
    im_margin = math.inf
    sup_margin = math.inf
    for drv, curve in zip(samples, curves):
        pts = np.asarray(curve, dtype=complex)
        if drv.tip_index is None or not len(drv.t):
            continue
        tips = pts[drv.tip_index]
        bound = 2.0 * np.sqrt(drv.t) + mesh_tol
        im_margin = min(im_margin, float((bound - tips.imag).min()))
        if np.any(tips.imag > bound):
            im_ok = False
        run_sup = np.maximum.accumulate(np.abs(pts - pts[0]))[drv.tip_index]
        need = np.abs(drv.lam - drv.base) / 4.0 - mesh_tol
        sup_margin = min(sup_margin, float((run_sup - need).min()))
        if np.any(run_sup < need):
            sup_ok = False
    return TailGeometryReport(slope=slope, intercept=intercept, r2=r2,
                              n_points=len(xs), im_bound_ok=im_ok,
                              im_bound_margin=im_margin, sup_bound_ok=sup_ok,
                              sup_bound_margin=sup_margin)


def exploration_driving(domain, params, rng, t_max, coarsen=0.01,
                        smooth=True):
    """One exploration in a half-plane box, zipped up to capacity time t_max.

    The walk stops once its height guarantees capacity 2 t_max (the hull
    reaching height h has t >= h^2/4), then the identity-embedded, midpoint
    smoothed vertex curve is zipped with relative-capacity decimation.
    Returns (driving, curve points).
    """
    from . import explorer as E
    h_stop = 2.0 * math.sqrt(t_max)
    ay = domain.a_vertex[1]

    def stop(state):
        return (state.tip[1] - ay) * (math.sqrt(3.0) / 6.0) >= h_stop

    path = E.run_exploration(domain, params, rng, stop=stop)
    pts = path_to_halfplane(path.vertices, domain.a_vertex)
    if smooth:
        pts = smooth_midpoints(pts)
    drv = zipper_extract(pts, coarsen=coarsen, t_cut=t_max)
    return drv, pts
