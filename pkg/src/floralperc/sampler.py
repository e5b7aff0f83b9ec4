"""Configuration sampling, clustering, crossings, and static interfaces.

Sampling is vectorized: all coins (fillers and petals) in one draw, then
irises flower by flower from the exact conditional law given their petals,
which is the factorized form of the model measure.  Flowers that are
partially pinned (slit-domain banks, revealed cells) are drawn jointly from
their exact conditional completion table.

Connectivity is the model's: same-color shapes sharing an edge segment.  A
split hexagon contributes one shape per color, each owning three
consecutive edges, so a per-color graph over cells with edges gated by the
facing half-colors represents the shape adjacency exactly.  Components come
from scipy's connected_components (union-find equivalent, C speed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import measure as M
from .lattice import neighbor
from . import walker


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    stderr: float
    n: int

    def z_against(self, value):
        if self.stderr == 0:
            return 0.0 if self.mean == value else float("inf")
        return (self.mean - value) / self.stderr


_EB = M.EDGE_BLUE.astype(np.uint8)
_EBF = _EB.ravel()
_BITW = np.array([1, 2, 4, 8, 16, 32], dtype=np.int64)
_TRIG = M.TRIGGER_LUT


class ConfigSampler:
    """Prepared sampler for one domain and parameter point.

    ``free=True`` ignores the boundary coloring and treats every hexagon of
    the domain (interior and boundary) as random; used for crossing and
    separation estimates of the unconditioned measure.
    """

    def __init__(self, domain, params, free=False):
        self.domain = domain
        self.params = params
        self.free = free
        if free:
            cells = list(domain.cells) + sorted(domain.boundary)
            flowers = tuple(domain.flowers) + tuple(domain.boundary_flowers)
            fixed = {}
        else:
            cells = list(domain.cells)
            flowers = tuple(domain.flowers)
            fixed = domain.fixed
        self.cells = tuple(cells)
        self.index = {h: i for i, h in enumerate(self.cells)}
        self.n = len(self.cells)

        full, partial = [], []
        for iris, petals in flowers:
            members = (iris,) + tuple(petals)
            rand = [m for m in members if m in self.index]
            if len(rand) == 7:
                full.append((iris, petals))
            elif rand:
                partial.append((iris, petals, rand))
        self.iris_idx = np.array([self.index[f[0]] for f in full],
                                 dtype=np.int64)
        self.petal_idx = np.array(
            [[self.index[p] for p in f[1]] for f in full],
            dtype=np.int64).reshape(len(full), 6)
        a, s = float(params.a), float(params.s)
        self.cuts = np.array([a, 2 * a, 2 * a + s, 2 * a + 2 * s])

        fm = M.FlowerMeasure(params)
        self._partial = []
        for iris, petals, rand in partial:
            members = (iris,) + tuple(petals)
            part = tuple(fixed.get(m, M.UNDETERMINED) for m in members)
            comps = fm.completions(part)
            if not comps:
                raise ValueError(
                    "flower at %r pinned to a zero-probability state" % (iris,))
            pos = [j for j, m in enumerate(members) if m in self.index]
            idx = np.array([self.index[members[j]] for j in pos],
                           dtype=np.int64)
            table = np.array([[st[j] for j in pos] for st, _ in comps],
                             dtype=np.uint8)
            w = np.array([float(p) for _, p in comps])
            cum = np.cumsum(w / w.sum())
            self._partial.append((idx, table, cum))

        # one entry per unordered adjacent cell pair: (i, j, dir i->j)
        ei, ej, ed = [], [], []
        for i, h in enumerate(self.cells):
            for d in range(3):
                jdx = self.index.get(neighbor(h, d))
                if jdx is not None:
                    ei.append(i)
                    ej.append(jdx)
                    ed.append(d)
        self.ei = np.array(ei, dtype=np.int32)
        self.ej = np.array(ej, dtype=np.int32)
        self.ed = np.array(ed, dtype=np.int64)
        self.ed3 = (self.ed + 3) % 6

        # revealed material: boundary cells that were interior before a slit
        # was cut; they carry cluster connectivity with pinned states
        mat = () if free else tuple(sorted(getattr(domain, "material_fixed",
                                                   frozenset())))
        self.material = mat
        self.mat_index = {h: self.n + k for k, h in enumerate(mat)}
        self.mat_states = np.array([fixed[h] for h in mat], dtype=np.uint8)
        rf_i, rf_m, rf_d = [], [], []
        mm = {True: ([], []), False: ([], [])}
        for k, h in enumerate(mat):
            st_h = int(self.mat_states[k])
            for d in range(6):
                nb = neighbor(h, d)
                i = self.index.get(nb)
                if i is not None:
                    rf_i.append(i)
                    rf_m.append(self.n + k)
                    rf_d.append(d)
                    continue
                k2 = self.mat_index.get(nb)
                if k2 is not None and self.n + k < k2:
                    st_n = int(self.mat_states[k2 - self.n])
                    for blue in (True, False):
                        a_face = bool(_EB[st_h, d])
                        b_face = bool(_EB[st_n, (d + 3) % 6])
                        if a_face == blue and b_face == blue:
                            mm[blue][0].append(self.n + k)
                            mm[blue][1].append(k2)
        self.rf_i = np.array(rf_i, dtype=np.int32)
        self.rf_m = np.array(rf_m, dtype=np.int32)
        rf_d = np.array(rf_d, dtype=np.int64)
        # face of the material side is constant; keep per-color masks and
        # the random side's facing dir for per-sample gating
        self.rf_d3 = (rf_d + 3) % 6
        mat_face = _EBF[self.mat_states[self.rf_m - self.n].astype(np.int64)
                        * 6 + rf_d] if len(rf_d) else np.zeros(0, np.uint8)
        self.rf_mat_blue = mat_face.astype(bool)
        self.mm = {blue: (np.array(rows, dtype=np.int32),
                          np.array(cols, dtype=np.int32))
                   for blue, (rows, cols) in mm.items()}

    @property
    def n_nodes(self):
        return self.n + len(self.material)

    def material_edges(self, states, blue):
        """Graph edges involving revealed-material nodes, for one color."""
        if not len(self.material):
            z = np.zeros(0, dtype=np.int32)
            return z, z
        keep = self.rf_mat_blue if blue else ~self.rf_mat_blue
        ri = self.rf_i[keep]
        rm = self.rf_m[keep]
        face = _EBF[states[ri].astype(np.int64) * 6 + self.rf_d3[keep]]
        if not blue:
            face = 1 - face
        ok = face.astype(bool)
        rows = np.concatenate([ri[ok], self.mm[blue][0]])
        cols = np.concatenate([rm[ok], self.mm[blue][1]])
        return rows, cols

    def sample_batch(self, rng, batch):
        """(batch, n) uint8 state matrix drawn from the domain measure."""
        states = rng.integers(0, 2, size=(batch, self.n), dtype=np.uint8)
        if len(self.iris_idx):
            petals = states[:, self.petal_idx]          # (B, F, 6)
            bits = ((petals == M.BLUE) * _BITW).sum(axis=2)
            trig = _TRIG[bits]
            u = rng.random(size=bits.shape)
            iris = np.searchsorted(self.cuts, u, side="right").astype(np.uint8)
            iris[trig] = (u[trig] >= 0.5).astype(np.uint8)
            states[:, self.iris_idx] = iris
        for idx, table, cum in self._partial:
            rows = np.searchsorted(cum, rng.random(batch), side="right")
            rows = np.minimum(rows, len(cum) - 1)
            states[:, idx] = table[rows]
        return states

    def sample(self, rng):
        return self.sample_batch(rng, 1)[0]

    # -- connectivity -------------------------------------------------------

    def active_edges(self, states, blue):
        """Mask over the prepared edge list for one color."""
        si = states[self.ei].astype(np.int64)
        sj = states[self.ej].astype(np.int64)
        if blue:
            return (_EBF[si * 6 + self.ed] & _EBF[sj * 6 + self.ed3]).astype(bool)
        return ((1 - _EBF[si * 6 + self.ed])
                & (1 - _EBF[sj * 6 + self.ed3])).astype(bool)

    def component_labels(self, states, blue):
        mask = self.active_edges(states, blue)
        row = self.ei[mask]
        col = self.ej[mask]
        g = csr_matrix((np.ones(len(row), dtype=np.int8), (row, col)),
                       shape=(self.n, self.n))
        _, labels = connected_components(g, directed=False)
        return labels


def sample_configuration(domain, params, rng):
    """One configuration of the domain's random cells; boundary stays fixed."""
    cs = ConfigSampler(domain, params)
    return Configuration(domain, cs.sample(rng), sampler=cs)


class Configuration:
    """Assignment of a state to every random cell, plus the fixed boundary."""

    def __init__(self, domain, states, sampler=None):
        self.domain = domain
        self.states = np.asarray(states, dtype=np.uint8)
        self.sampler = sampler

    def state(self, cell):
        i = self.domain.cell_index.get(cell)
        if i is not None:
            return int(self.states[i])
        st = self.domain.fixed.get(cell)
        if st is None:
            raise KeyError("cell %r has no state" % (cell,))
        return st

    def resolver(self):
        return walker.config_resolver(self.domain, self.states)

    def rle(self):
        """Run-length encoded state string aligned with domain.cells order."""
        out = []
        run_state, run_len = None, 0
        for s in self.states:
            if s == run_state:
                run_len += 1
            else:
                if run_state is not None:
                    out.append("%s:%d" % (M.STATE_NAMES[int(run_state)], run_len))
                run_state, run_len = int(s), 1
        if run_state is not None:
            out.append("%s:%d" % (M.STATE_NAMES[run_state], run_len))
        return ",".join(out)

    @classmethod
    def from_rle(cls, domain, text):
        states = []
        for tok in text.split(","):
            name, count = tok.split(":")
            states.extend([M.NAME_STATES[name]] * int(count))
        if len(states) != len(domain.cells):
            raise ValueError("RLE length %d != cell count %d"
                             % (len(states), len(domain.cells)))
        return cls(domain, np.array(states, dtype=np.uint8))


class ClusterLabels:
    """Per-color component ids over the shapes of a configuration.

    A whole hexagon is one shape; a split hexagon contributes its blue half
    to the blue id space and its yellow half to the yellow id space.
    """

    def __init__(self, config, blue_labels, yellow_labels, sampler):
        self.config = config
        self._labels = {True: blue_labels, False: yellow_labels}
        self._sampler = sampler

    def label(self, cell, color):
        st = self.config.state(cell)
        blue = (color == M.BLUE)
        if blue and st == M.YELLOW:
            return None
        if not blue and st == M.BLUE:
            return None
        return int(self._labels[blue][self._sampler.index[cell]])

    def n_clusters(self, color):
        blue = (color == M.BLUE)
        labels = self._labels[blue]
        has = self.config.states != (M.YELLOW if blue else M.BLUE)
        return len(np.unique(labels[has]))

    def same_cluster(self, cell1, cell2, color):
        l1 = self.label(cell1, color)
        l2 = self.label(cell2, color)
        return l1 is not None and l1 == l2


def build_clusters(config, sampler=None):
    """Connected components of both color graphs for a full configuration."""
    if np.any(config.states == M.UNDETERMINED):
        raise ValueError("configuration has undetermined cells")
    cs = sampler or config.sampler or ConfigSampler(config.domain,
                                                    M.ModelParams.from_s(0.0))
    if cs.free or len(cs.cells) != len(config.states):
        raise ValueError("sampler cell order does not match configuration")
    blue = cs.component_labels(config.states, True)
    yellow = cs.component_labels(config.states, False)
    return ClusterLabels(config, blue, yellow, cs)


@dataclass(frozen=True)
class CrossingSpec:
    """Crossing event: color path from boundary arc [a,b] to arc [c,d]."""

    a: object
    b: object
    c: object
    d: object
    color: int = M.BLUE


def crossing_spec(domain, b_point=None, d_point=None, color=M.BLUE,
                  a_junction=None, b_junction=None, c_junction=None,
                  d_junction=None):
    """Resolve a CrossingSpec on a domain.

    By default a and c are the domain's own marked vertices and b, d are the
    junctions nearest the given Euclidean points; orientation a, b, c, d
    must be counterclockwise.
    """
    ja = a_junction or domain.a_junction
    jc = c_junction or domain.c_junction
    jb = b_junction or domain.junction_near(b_point)
    jd = d_junction or domain.junction_near(d_point)
    gaps = [ja.walk_gap, jb.walk_gap, jc.walk_gap, jd.walk_gap]
    if len(set(gaps)) != 4:
        raise ValueError("marked vertices must be distinct")
    rel = [(g - gaps[0]) % len(domain.walk) for g in gaps]
    if not (rel[1] < rel[2] < rel[3]):
        raise ValueError("marked vertices not in counterclockwise order")
    return CrossingSpec(ja, jb, jc, jd, color)


class CrossingTester:
    """Prepared crossing test via two virtual hub nodes.

    The crossing cluster may use random cells and revealed-material cells
    (hexagons that were interior before a slit was cut); it touches a
    boundary arc where one of its shapes presents the spec color across an
    edge toward an arc cell.  Original boundary hexagons locate the arcs
    but never carry the cluster, so the event is literally the same event
    as in the unslit domain with the revealed cells pinned -- which is what
    makes the crossing Markov identity exact.
    """

    def __init__(self, sampler, spec):
        self.sampler = sampler
        self.spec = spec
        self.blue = (spec.color == M.BLUE)
        dom = sampler.domain
        self.src = self._arc_candidates(dom, spec.a, spec.b)
        self.dst = self._arc_candidates(dom, spec.c, spec.d)
        if (not len(self.src[0][0]) and not len(self.src[1])) or \
                (not len(self.dst[0][0]) and not len(self.dst[1])):
            raise ValueError("crossing spec arcs have no attachments")

    def _arc_candidates(self, dom, j1, j2):
        """Attachment points along one boundary arc.

        Returns ((random cell indices, facing dirs), constant material
        nodes).  A random cell attaches when its face toward the arc cell
        carries the color (checked per sample); a material cell's faces are
        pinned, so its attachments reduce to a constant node list.  In free
        mode the arc cells themselves are random and a cluster touches the
        arc by containing one.
        """
        cs = self.sampler
        cells, dirs = [], []
        mat_nodes = set()
        for pos in dom.arc_positions(j1, j2):
            c_in, d, out = dom.walk[pos]
            if cs.free:
                i = cs.index.get(out)
                if i is not None:
                    cells.append(i)
                    dirs.append(0)
                continue
            i = cs.index.get(c_in)
            if i is not None:
                cells.append(i)
                dirs.append(d)
            # material neighbors of the arc cell, and the arc cell itself
            # when it is revealed material (a bank cell on the arc)
            k = cs.mat_index.get(out)
            if k is not None and \
                    bool(_EB[cs.mat_states[k - cs.n], (d + 3) % 6]) == self.blue:
                mat_nodes.add(k)
            for dd in range(6):
                nb = neighbor(out, dd)
                k = cs.mat_index.get(nb)
                if k is None:
                    continue
                if bool(_EB[cs.mat_states[k - cs.n], (dd + 3) % 6]) == self.blue:
                    mat_nodes.add(k)
        return ((np.array(cells, dtype=np.int32),
                 np.array(dirs, dtype=np.int64)),
                np.array(sorted(mat_nodes), dtype=np.int32))

    def _hub_rows(self, states, hub, cand):
        (cells, dirs), mat_nodes = cand
        if self.sampler.free:
            other = M.YELLOW if self.blue else M.BLUE
            ok = states[cells] != other
        else:
            face = _EBF[states[cells].astype(np.int64) * 6 + dirs]
            if not self.blue:
                face = 1 - face
            ok = face.astype(bool)
        rows = [cells[ok].astype(np.int32), mat_nodes]
        row = np.concatenate(rows)
        col = np.full(len(row), hub, dtype=np.int32)
        return row, col

    def has_crossing(self, states):
        cs = self.sampler
        mask = cs.active_edges(states, self.blue)
        row = [cs.ei[mask]]
        col = [cs.ej[mask]]
        mrow, mcol = cs.material_edges(states, self.blue)
        row.append(mrow)
        col.append(mcol)
        nn = cs.n_nodes
        for hub, cand in ((nn, self.src), (nn + 1, self.dst)):
            r, c = self._hub_rows(states, hub, cand)
            row.append(r)
            col.append(c)
        row = np.concatenate(row)
        col = np.concatenate(col)
        g = csr_matrix((np.ones(len(row), dtype=np.int8), (row, col)),
                       shape=(nn + 2, nn + 2))
        _, labels = connected_components(g, directed=False)
        return labels[nn] == labels[nn + 1]

    def estimate(self, n, rng, batch=256):
        if n < 1:
            raise ValueError("need at least one sample")
        hits = 0
        done = 0
        while done < n:
            b = min(batch, n - done)
            states = self.sampler.sample_batch(rng, b)
            for k in range(b):
                hits += bool(self.has_crossing(states[k]))
            done += b
        mean = hits / n
        stderr = float(np.sqrt(mean * (1.0 - mean) / n))
        return EstimateWithCI(mean=mean, stderr=stderr, n=n)


def has_crossing(config, spec, sampler=None):
    cs = sampler or config.sampler or ConfigSampler(config.domain,
                                                    M.ModelParams.from_s(0.0))
    return CrossingTester(cs, spec).has_crossing(config.states)


def estimate_crossing(domain, spec, params, n, rng, free=False, batch=256):
    """Monte Carlo crossing probability with standard error."""
    cs = ConfigSampler(domain, params, free=free)
    return CrossingTester(cs, spec).estimate(n, rng, batch=batch)


def trace_interface(config, domain=None, budget=None):
    """The static interface of a full configuration, a to c, blue right."""
    dom = domain or config.domain
    try:
        return walker.walk_interface(dom, config.resolver(), budget=budget)
    except KeyError as e:
        raise ValueError("configuration inconsistent with boundary: %s" % e)
