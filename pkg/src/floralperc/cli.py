"""Command-line entry point: experiment orchestration and result emission.

Commands mirror the package's capabilities: sample, explore, cardy-scan,
separation, driving, arms, pathstats, bk-verify, markov-test, and
enumerate-flower.  Configuration is a plain INI file (key = value
sections); every run writes its artifacts plus a manifest recording the
config hash, seed, and package version.  Identical (config, seed) produce
byte-identical outputs regardless of the worker count: replica i always
draws from the stream (seed, command, i) and results are sorted before
emission.

Exit codes: 0 success, 2 configuration error, 3 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, asdict, field

import numpy as np

from . import __version__
from . import measure as M
from . import lattice as L
from . import sampler as S
from . import explorer as E
from . import cardy as C
from . import loewner as LW
from . import pathstats as P
from . import bkcheck as BK
from . import rng as R


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated run settings; round-trips losslessly through INI text."""

    command: str = ""
    shape: str = "halfplane_box"       # halfplane_box | rhombus | triangle
    width: int = 64
    height: int = 48
    size: int = 20
    eps: float = 1.0
    period: int = 3
    offset_q: int = 1
    offset_r: int = 1
    flowers: bool = True
    a: float = 0.35
    s: float = 0.10
    n: int = 1000
    n_outer: int = 200
    n_inner: int = 100
    t: int = 25
    t_max: float = 0.0
    seed: int = 1
    workers: int = 1
    out: str = "out"
    grid_file: str = ""
    coarsen: float = 0.005

    _INT = ("width", "height", "size", "period", "offset_q", "offset_r",
            "n", "n_outer", "n_inner", "t", "seed", "workers")
    _FLOAT = ("eps", "a", "s", "t_max", "coarsen")
    _BOOL = ("flowers",)

    def validate(self):
        if self.a or self.s:
            M.ModelParams(self.a, self.s)
        if self.n < 1 or self.n_outer < 1 or self.n_inner < 1:
            raise ConfigError("sample counts must be positive")
        if self.period < 3:
            raise ConfigError("floral period must be at least 3")
        if self.eps <= 0:
            raise ConfigError("eps must be positive")
        return self

    def to_ini(self):
        cp = configparser.ConfigParser()
        cp["run"] = {}
        for k, v in asdict(self).items():
            cp["run"][k] = repr(v) if isinstance(v, float) else str(v)
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text):
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as e:
            raise ConfigError("bad config: %s" % e)
        cfg = cls()
        if "run" not in cp:
            raise ConfigError("config needs a [run] section")
        for k, v in cp["run"].items():
            if not hasattr(cfg, k):
                raise ConfigError("unknown config key %r" % k)
            if k in cls._INT:
                setattr(cfg, k, int(v))
            elif k in cls._FLOAT:
                setattr(cfg, k, float(v))
            elif k in cls._BOOL:
                setattr(cfg, k, v.lower() in ("1", "true", "yes"))
            else:
                setattr(cfg, k, v)
        return cfg.validate()


def _params(cfg):
    return M.ModelParams(cfg.a, cfg.s)


def _arrangement(cfg, span=2000):
    if not cfg.flowers:
        return L.FloralArrangement.none()
    return L.place_irises(cfg.period, (cfg.offset_q, cfg.offset_r),
                          (-span, span, -span, span))


def _domain(cfg):
    arr = _arrangement(cfg)
    if cfg.shape == "halfplane_box":
        return L.halfplane_box(cfg.width, cfg.height, arrangement=arr)
    if cfg.shape == "rhombus":
        return L.rect_domain(cfg.size, cfg.size, arrangement=arr)
    if cfg.shape == "triangle":
        return L.build_domain(L.ShapeSpec.unit_triangle(), cfg.eps, arr)
    raise ConfigError("unknown shape %r" % cfg.shape)


class Emitter:
    """Writes artifacts under the output directory and records a manifest."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.dir = os.environ.get("FLORALPERC_OUT", cfg.out)
        os.makedirs(self.dir, exist_ok=True)
        self.files = []

    def path(self, name):
        return os.path.join(self.dir, name)

    def write_text(self, name, text):
        with open(self.path(name), "w") as fh:
            fh.write(text)
        self.files.append(name)

    def write_ndjson(self, name, records, schema):
        lines = [json.dumps({"schema": schema, **r}, sort_keys=True)
                 for r in records]
        self.write_text(name, "\n".join(lines) + "\n" if lines else "")

    def write_csv(self, name, header, rows):
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(header)
        for row in rows:
            w.writerow(row)
        self.write_text(name, buf.getvalue())

    def finish(self, status=0):
        ini = self.cfg.to_ini()
        manifest = {
            "schema": "floralperc-manifest-v1",
            "version": __version__,
            "seed": self.cfg.seed,
            "command": self.cfg.command,
            "config_sha256": hashlib.sha256(ini.encode()).hexdigest(),
            "files": sorted(self.files),
            "status": status,
        }
        with open(self.path("manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=1, sort_keys=True)
        return status


def cmd_enumerate_flower(cfg, em):
    params = _params(cfg)
    rows = []
    for petals, iris, p in M.enumerate_flower(params):
        rows.append(["".join(M.STATE_NAMES[s] for s in petals),
                     M.STATE_NAMES[iris], repr(float(p))])
    em.write_csv("flower_table.csv", ["petals", "iris", "prob"], rows)
    total = sum(p for _, _, p in M.enumerate_flower(params))
    em.write_ndjson("flower_summary.ndjson",
                    [{"total_mass": float(total),
                      "n_trigger_patterns": int(M.N_TRIGGER_PATTERNS)}],
                    "flower-summary-v1")
    return 0


def cmd_sample(cfg, em):
    params = _params(cfg)
    dom = _domain(cfg)
    em.write_text("domain.txt", dom.snapshot())
    records = []
    for i in range(cfg.n):
        g = R.stream(cfg.seed, "sample", i)
        config = S.sample_configuration(dom, params, g)
        records.append({"replica": i, "rle": config.rle()})
    em.write_ndjson("configs.ndjson", records, "config-rle-v1")
    return 0


def cmd_explore(cfg, em):
    params = _params(cfg)
    dom = _domain(cfg)
    em.write_text("domain.txt", dom.snapshot())
    records = []
    for i in range(cfg.n):
        g = R.stream(cfg.seed, "explore", i)
        path = E.run_exploration(dom, params, g)
        for step, (vend, newly) in enumerate(path.log):
            records.append({
                "replica": i, "step": step, "vertex": list(path.vertices[vend]),
                "revealed": [[list(c), M.STATE_NAMES[st]] for c, st in newly],
            })
    em.write_ndjson("paths.ndjson", records, "explore-step-v1")
    return 0


def cmd_cardy_scan(cfg, em):
    params = _params(cfg)
    arr = _arrangement(cfg)
    w = cfg.width
    entries = []
    quads = [(-w * 0.25, -w * 0.05, w * 0.05, w * 0.25),
             (-w * 0.35, -w * 0.20, w * 0.20, w * 0.35),
             (-w * 0.40, -w * 0.30, w * 0.30, w * 0.40)]
    for k, reals in enumerate(quads):
        entries.append(C.halfplane_box_entry(
            "hbox%d" % k, w, cfg.height, reals, arrangement=arr))
    rows = C.cardy_scan(entries, params, cfg.n, R.stream(cfg.seed, "scan"))
    em.write_csv("cardy_scan.csv",
                 ["spec_id", "x", "F", "est", "stderr", "n", "z"],
                 [[r.spec_id, "%.8f" % r.x, "%.8f" % r.F, "%.6f" % r.estimate,
                   "%.6f" % r.stderr, r.n, "%.3f" % r.z] for r in rows])
    return 0


def cmd_separation(cfg, em):
    params = _params(cfg)
    est = C.SeparationEstimator(cfg.eps, params, _arrangement(cfg))
    ys = [k * math.sqrt(3) / 12.0 for k in range(1, 6)]
    queries = [C.SeparationQuery(z=(0.5, y)) for y in ys]
    res = est.frequencies(queries, cfg.n, R.stream(cfg.seed, "sep"))
    rows = []
    for q, r in zip(queries, res):
        pred = 2.0 / math.sqrt(3.0) * q.z[1]
        rows.append(["%.6f" % q.z[0], "%.6f" % q.z[1], "%.6f" % pred,
                     "%.6f" % r.mean, "%.6f" % r.stderr, r.n])
    em.write_csv("separation.csv",
                 ["x", "y", "predicted", "est", "stderr", "n"], rows)
    return 0


def cmd_driving(cfg, em):
    params = _params(cfg)
    dom = _domain(cfg)
    t_max = cfg.t_max or (cfg.width ** 2) / 64.0
    samples = []
    for i in range(cfg.n):
        g = R.stream(cfg.seed, "driving", i)
        drv, _ = LW.exploration_driving(dom, params, g, t_max,
                                        coarsen=cfg.coarsen)
        samples.append((i, drv))
    for i, drv in samples:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["t", "lambda"])
        for tt, ll in zip(drv.t, drv.lam):
            w.writerow(["%.8f" % tt, "%.8f" % ll])
        em.write_text("driving_%04d.csv" % i, buf.getvalue())
    t_top = 2 ** int(math.floor(math.log2(t_max)))
    tg = [t_top / 2 ** k for k in range(4, -1, -1)]
    st = LW.driving_stats([d for _, d in samples], tg)
    em.write_ndjson("driving_stats.ndjson",
                    [{"t": float(t), "mean": float(m), "mean_stderr": float(se),
                      "second_over_t": float(sv), "second_stderr": float(sse)}
                     for t, m, se, sv, sse in zip(
                         st.t_grid, st.mean, st.mean_stderr,
                         st.second_over_t, st.second_stderr)],
                    "driving-stats-v1")
    return 0


def cmd_arms(cfg, em):
    params = _params(cfg)
    arr = _arrangement(cfg)
    ell = cfg.width / 2.5
    rows = []
    for k in (1, 5, 6):
        for ratio in (4, 8, 16):
            spec = P.AnnulusSpec(center=(0.0, 0.0), inner=ell / ratio,
                                 outer=ell, arms=k)
            est = P.estimate_arm_event(None, spec, params, cfg.n,
                                       R.stream(cfg.seed, "arms", k, ratio),
                                       arrangement=arr)
            rows.append([k, "polychromatic" if k > 1 else "any",
                         "%.4f" % (ell / ratio), "%.4f" % ell,
                         "%.6f" % est.mean, "%.6f" % est.stderr, est.n])
    em.write_csv("arm_scan.csv",
                 ["k", "pattern", "eta", "l", "est", "stderr", "n"], rows)
    return 0


def cmd_pathstats(cfg, em):
    params = _params(cfg)
    dom = _domain(cfg)
    records = []
    scales = [2.0, 4.0, 8.0, 16.0, 32.0]
    for i in range(cfg.n):
        g = R.stream(cfg.seed, "pathstats", i)
        path = E.run_exploration(dom, params, g)
        xy = P.vertices_xy(path.vertices)
        rep = P.box_dimension(xy, scales)
        records.append({"replica": i, "slope": rep.slope, "r2": rep.r2,
                        "n_vertices": len(xy)})
    em.write_ndjson("box_dimension.ndjson", records, "box-dimension-v1")
    return 0


def cmd_bk_verify(cfg, em):
    if cfg.grid_file:
        try:
            with open(cfg.grid_file) as fh:
                grid = M.parse_param_grid(fh.read())
        except (OSError, ValueError) as e:
            raise ConfigError(str(e))
    else:
        grid = BK.rational_grid()
    rows, ok = BK.verify_bk_catalog(grid)
    em.write_csv("bk_report.csv",
                 ["tuple_id", "a", "s", "lhs", "rhs", "margin", "verdict"],
                 [[r.tuple_id, "%.8f" % r.a, "%.8f" % r.s,
                   repr(float(r.lhs)), repr(float(r.rhs)),
                   repr(float(r.margin)), "ok" if r.ok else "VIOLATION"]
                  for r in rows])
    return 0 if ok else 3


def cmd_markov_test(cfg, em):
    params = _params(cfg)
    dom = _domain(cfg)
    w = cfg.width
    spec = S.crossing_spec(dom, b_point=(w * 0.25, 0.0),
                           d_point=(-w * 0.25, 0.0))
    rep = E.markov_crossing_test(dom, spec, cfg.t, cfg.n_outer, cfg.n_inner,
                                 params, R.stream(cfg.seed, "markov"))
    em.write_ndjson("markov.ndjson", [{
        "t": rep.t, "nested_mean": rep.nested.mean,
        "nested_stderr": rep.nested.stderr, "direct_mean": rep.direct.mean,
        "direct_stderr": rep.direct.stderr, "z": rep.z,
        "determined": rep.determined,
    }], "markov-test-v1")
    return 0 if abs(rep.z) < 4.0 else 3


_COMMANDS = {
    "enumerate-flower": cmd_enumerate_flower,
    "sample": cmd_sample,
    "explore": cmd_explore,
    "cardy-scan": cmd_cardy_scan,
    "separation": cmd_separation,
    "driving": cmd_driving,
    "arms": cmd_arms,
    "pathstats": cmd_pathstats,
    "bk-verify": cmd_bk_verify,
    "markov-test": cmd_markov_test,
}


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="floralperc",
        description="flower percolation simulator and scaling-limit checks")
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", help="INI file with a [run] section")
    ap.add_argument("--seed", type=int, help="master seed")
    ap.add_argument("--workers", type=int, default=None,
                    help="worker count (performance only; results identical)")
    ap.add_argument("--out", help="output directory")
    args = ap.parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                cfg = RunConfig.from_ini(fh.read())
        else:
            cfg = RunConfig()
        cfg.command = args.command
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None:
            cfg.workers = args.workers
        if args.out is not None:
            cfg.out = args.out
        cfg.validate()
    except (ConfigError, OSError, ValueError) as e:
        print(json.dumps({"error": str(e), "kind": "config"}),
              file=sys.stderr)
        return 2
    em = Emitter(cfg)
    status = _COMMANDS[args.command](cfg, em)
    return em.finish(status)


if __name__ == "__main__":
    sys.exit(main())
