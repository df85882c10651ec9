"""Data behind each figure: grids, curves, region rasters, level sets, trajectories.

Each builder returns a :class:`FigureData` holding named CSV tables, a
matplotlib script that renders them, and metadata (levels, initial
conditions) recording the choices made.  Nothing here draws anything.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import contourpy
import numpy as np
from scipy.optimize import brentq

from . import clf as catalog
from .clf import Clf, ClfId
from .controllers import ControllerSpec
from .dynamics import ModelId, PopulationState
from .simulator import IntegratorConfig, integrate
from .verifier import DomainGrid, classify_regions

__all__ = ["FigureData", "FIGURES", "build_figure", "OPEN_LOOP_LEVELS"]

OPEN_LOOP_LEVELS = (2.1, 2.5, 3.0, 4.0)
SURFACE_RANGE = (0.05, 4.0, 120)
LEVELSET_RANGE = (0.02, 4.0, 300)


@dataclass
class FigureData:
    id: str
    tables: dict[str, list[list]] = field(default_factory=dict)
    headers: dict[str, list[str]] = field(default_factory=dict)
    script: str = ""
    meta: dict = field(default_factory=dict)

    def add_table(self, name: str, header: list[str], rows) -> None:
        self.headers[name] = header
        self.tables[name] = rows

    def render_csv(self, name: str) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.headers[name])
        for row in self.tables[name]:
            w.writerow([_fmt(v) for v in row])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _surface(clf: Clf):
    lo, hi, n = SURFACE_RANGE
    ax = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(ax, ax)
    V = catalog.value(clf, PopulationState(X, Y))
    return [[x, y, v] for x, y, v in zip(X.ravel(), Y.ravel(), V.ravel())]


def _level_sets(clf: Clf, levels):
    lo, hi, n = LEVELSET_RANGE
    ax = np.linspace(lo, hi, n)
    X, Y = np.meshgrid(ax, ax)
    V = catalog.value(clf, PopulationState(X, Y))
    gen = contourpy.contour_generator(X, Y, V, line_type=contourpy.LineType.Separate)
    rows = []
    for level in levels:
        for seg, line in enumerate(gen.lines(level)):
            rows.extend([level, seg, float(px), float(py)] for px, py in line)
    return rows


def _on_level(clf: Clf, level: float, angle: float) -> PopulationState:
    """Point on ``{V = level}`` along a log-space ray from ``(1, 1)``."""
    d = (math.cos(angle), math.sin(angle))

    def f(r):
        return float(catalog.value(clf, PopulationState(math.exp(r * d[0]), math.exp(r * d[1])))) - level

    r = brentq(f, 0.0, 30.0, xtol=1e-14)
    return PopulationState(math.exp(r * d[0]), math.exp(r * d[1]))


def _trajectory_rows(model, ctrl, starts, t_end, clf):
    rows = []
    cfg = IntegratorConfig(t_end=t_end, samples=401)
    for k, s0 in enumerate(starts):
        tr = integrate(model, ctrl, s0, cfg, clfs=[clf])
        V = next(iter(tr.clf_values.values()))
        rows.extend([k, t, x, y, u, v] for t, x, y, u, v in zip(tr.t, tr.X, tr.Y, tr.U, V))
    return rows


_SURFACE_SCRIPT = '''\
import sys
import numpy as np
import matplotlib.pyplot as plt

d = np.loadtxt("{csv}", delimiter=",", skiprows=1)
n = int(round(np.sqrt(len(d))))
X, Y, V = (d[:, j].reshape(n, n) for j in range(3))
fig = plt.figure()
ax = fig.add_subplot(projection="3d")
ax.plot_surface(X, Y, np.minimum(V, {vmax}), cmap="viridis")
ax.scatter([1], [1], [0], color="b")
ax.set_xlabel("X"); ax.set_ylabel("Y"); ax.set_title("{title}")
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "{png}")
'''

_OVERLAY_SCRIPT = '''\
import sys
import numpy as np
import matplotlib.pyplot as plt

lv = np.loadtxt("{levels}", delimiter=",", skiprows=1)
tr = np.loadtxt("{traj}", delimiter=",", skiprows=1)
fig, ax = plt.subplots()
for key in sorted(set(map(tuple, lv[:, :2]))):
    m = (lv[:, 0] == key[0]) & (lv[:, 1] == key[1])
    ax.plot(lv[m, 2], lv[m, 3], color="0.6", lw=0.8)
for k in np.unique(tr[:, 0]):
    m = tr[:, 0] == k
    ax.plot(tr[m, 2], tr[m, 3], color="{color}")
ax.plot([1], [1], "bo")
ax.set_xlim(0, 4); ax.set_ylim(0, 4)
ax.set_xlabel("X"); ax.set_ylabel("Y"); ax.set_title("{title}")
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "{png}")
'''


def fig_open_loop(**_) -> FigureData:
    """Open-loop (``U = 1``) orbits on the invariant levels ``X + Y - ln(XY) = c``."""
    fd = FigureData("open-loop")
    ctrl = ControllerSpec.constant(1.0)
    rows = []
    starts = []
    for level in OPEN_LOOP_LEVELS:
        # start on Y = 1, X > 1:  X - ln X = c - 1
        X0 = brentq(lambda X: X - math.log(X) - (level - 1.0), 1.0, 50.0, xtol=1e-15)
        starts.append([level, X0, 1.0])
        for model in ModelId:
            tr = integrate(model, ctrl, PopulationState(X0, 1.0), IntegratorConfig(1e-10, 1e-12, 20.0, samples=401))
            C = tr.X + tr.Y - np.log(tr.X) - np.log(tr.Y)
            rows.extend([level, model.value, t, x, y, c] for t, x, y, c in zip(tr.t, tr.X, tr.Y, C))
    fd.add_table("trajectories", ["level", "model", "t", "X", "Y", "invariant"], rows)
    fd.meta = {"levels": list(OPEN_LOOP_LEVELS), "initial_conditions": starts, "t_end": 20.0}
    fd.script = '''\
import sys, csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("open-loop_trajectories.csv")))
fig, ax = plt.subplots()
for level in sorted({r["level"] for r in rows}):
    sel = [r for r in rows if r["level"] == level and r["model"] == "predator-only"]
    ax.plot([float(r["X"]) for r in sel], [float(r["Y"]) for r in sel], label="C = " + level)
ax.plot([1], [1], "bo")
ax.set_xlabel("X"); ax.set_ylabel("Y"); ax.legend(); ax.set_title("Open loop, U = 1")
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "open-loop.png")
'''
    return fd


def fig_v_sf(**_) -> FigureData:
    fd = FigureData("V-sf")
    fd.add_table("surface", ["X", "Y", "V"], _surface(Clf(ClfId.V_SF_STRICT)))
    fd.meta = {"clf": "V_SF_STRICT", "range": list(SURFACE_RANGE)}
    fd.script = _SURFACE_SCRIPT.format(csv="V-sf_surface.csv", vmax=10, title="V_SF_STRICT", png="V-sf.png")
    return fd


def fig_psi_curves(**_) -> FigureData:
    fd = FigureData("psi-curves")
    S = np.linspace(0.05, 5.0, 400)
    fd.add_table("curves", ["S", "psi_S", "psi_inv_S"],
                 [[s, a, b] for s, a, b in zip(S, catalog.psi(S), catalog.psi(1.0 / S))])
    fd.meta = {"S_range": [0.05, 5.0], "samples": 400}
    fd.script = '''\
import sys
import numpy as np
import matplotlib.pyplot as plt

d = np.loadtxt("psi-curves_curves.csv", delimiter=",", skiprows=1)
plt.plot(d[:, 0], d[:, 1], "b", label="psi(S)")
plt.plot(d[:, 0], d[:, 2], "r", label="psi(1/S)")
plt.ylim(0, 5); plt.xlabel("S"); plt.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "psi-curves.png")
'''
    return fd


def fig_v_both(eps: float | None = None, **_) -> FigureData:
    eps = 0.5 if eps is None else eps
    fd = FigureData("V-both")
    fd.add_table("surface", ["X", "Y", "V"], _surface(Clf(ClfId.V_BOTH_STRICT, eps)))
    fd.meta = {"clf": "V_BOTH_STRICT", "eps": eps, "range": list(SURFACE_RANGE)}
    fd.script = _SURFACE_SCRIPT.format(csv="V-both_surface.csv", vmax=10,
                                       title=f"V_BOTH_STRICT, eps={eps:g}", png="V-both.png")
    return fd


def fig_region_forwarding(grid: DomainGrid | None = None, **_) -> FigureData:
    grid = grid or DomainGrid(3.0, 200)
    fd = FigureData("region-forwarding")
    rm = classify_regions(grid, ControllerSpec.forwarding(), Clf(ClfId.V_FORWARDING))
    label = np.where(rm.clf_failure, "CLF_FAILURE", np.where(rm.u_negative, "U_NEGATIVE", "U_POSITIVE"))
    rows = [[x, y, u, l, g, int(n), int(f), lab] for x, y, u, l, g, n, f, lab in zip(
        rm.X.ravel(), rm.Y.ravel(), rm.U.ravel(), rm.L.ravel(), rm.G.ravel(),
        rm.u_negative.ravel(), rm.clf_failure.ravel(), label.ravel())]
    fd.add_table("raster", ["X", "Y", "U", "L", "G", "u_negative", "clf_failure", "label"], rows)
    fd.meta = {**grid.describe(), **rm.counts()}
    fd.script = '''\
import sys, csv
import matplotlib.pyplot as plt

rows = list(csv.DictReader(open("region-forwarding_raster.csv")))
colors = {"U_POSITIVE": "green", "U_NEGATIVE": "pink", "CLF_FAILURE": "red"}
fig, ax = plt.subplots()
for lab, c in colors.items():
    sel = [r for r in rows if r["label"] == lab]
    ax.scatter([float(r["X"]) for r in sel], [float(r["Y"]) for r in sel], s=2, c=c, label=lab)
ax.plot([1], [1], "bo")
ax.set_xscale("log"); ax.set_yscale("log"); ax.set_xlabel("X"); ax.set_ylabel("Y"); ax.legend()
plt.savefig(sys.argv[1] if len(sys.argv) > 1 else "region-forwarding.png")
'''
    return fd


def _overlay(fid, clf, model, ctrl, levels, start_level, angles, t_end, color, title):
    fd = FigureData(fid)
    fd.add_table("levels", ["level", "segment", "X", "Y"], _level_sets(clf, levels))
    starts = [_on_level(clf, start_level, a) for a in angles]
    fd.add_table("trajectories", ["traj", "t", "X", "Y", "U", "V"],
                 _trajectory_rows(model, ctrl, starts, t_end, clf))
    fd.meta = {
        **clf.describe(), **ctrl.describe(), "model": model.value,
        "levels": list(levels), "start_level": start_level,
        "initial_conditions": [[float(s.X), float(s.Y)] for s in starts], "t_end": t_end,
    }
    fd.script = _OVERLAY_SCRIPT.format(levels=f"{fid}_levels.csv", traj=f"{fid}_trajectories.csv",
                                       color=color, title=title, png=f"{fid}.png")
    return fd


_LEVELS = (0.05, 0.2, 0.5, 1.0, 2.0, 3.0)
_ANGLES = tuple(2.0 * math.pi * k / 6 + math.pi / 12 for k in range(6))


def fig_v_both_levels(eps: float | None = None, **_) -> FigureData:
    eps = 0.9 if eps is None else eps
    return _overlay("V-both-levels", Clf(ClfId.V_BOTH_STRICT, eps), ModelId.SIMULTANEOUS,
                    ControllerSpec.mixed_linear(eps), _LEVELS, 2.0, _ANGLES, 40.0, "k",
                    f"V_BOTH_STRICT level sets, eps={eps:g}")


def fig_backstepping(**_) -> FigureData:
    return _overlay("backstepping-trajectories", Clf(ClfId.V_BACKSTEPPING), ModelId.PREDATOR_ONLY,
                    ControllerSpec.backstepping_positive(), _LEVELS, 2.0, _ANGLES, 40.0, "b",
                    "U = Y^2/X over V_BACKSTEPPING level sets")


# figure id -> builder, in display order
FIGURES = {
    "open-loop": fig_open_loop,
    "V-sf": fig_v_sf,
    "psi-curves": fig_psi_curves,
    "V-both": fig_v_both,
    "region-forwarding": fig_region_forwarding,
    "V-both-levels": fig_v_both_levels,
    "backstepping-trajectories": fig_backstepping,
}


def build_figure(fid: str, **kw) -> FigureData:
    try:
        builder = FIGURES[fid]
    except KeyError:
        raise KeyError(f"unknown figure id {fid!r}; choose from {', '.join(FIGURES)}") from None
    return builder(**kw)
