"""Command-line front end.

    predprey verify     grid-scan certificates, JSON report
    predprey simulate   trajectory CSVs plus manifest
    predprey figures    figure data, plot scripts, manifest
    predprey regions    sign / CLF-failure raster for an input-affine CLF
    predprey invariant  open-loop conservation check

Exit codes: 0 success, 1 a check or integration failed, 2 bad configuration.
Settings come from ``--config FILE`` (flat ``key = value`` lines, keys
spelled like the long flags without dashes) and are overridden by flags.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import clf as catalog
from .clf import Clf, ClfId, NoDecompositionError, PairingError
from .controllers import ControllerKind, ControllerSpec
from .dynamics import ModelId, PopulationState
from .figures import FIGURES, build_figure
from .ode import IntegrationError
from .simulator import (
    IntegratorConfig,
    integrate,
    invariant_drift,
    orbit_recurrence,
    random_initial_conditions,
    write_csv,
)
from .verifier import (
    DomainGrid,
    classify_regions,
    consistency_sweep,
    nonstrict_witness,
    ray_unboundedness_probe,
    scan_positive_definite,
    scan_vdot_negative,
    scan_vdot_nonpositive,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("verify", "simulate", "figures", "regions", "invariant")
DRIFT_BOUND = 1e-7


class ConfigError(ValueError):
    pass


# -- config ------------------------------------------------------------------

_DEFAULTS = {
    "model": None,
    "controller": None,
    "eps": None,
    "u0": None,
    "clf": None,
    "grid_a": 3.0,
    "grid_n": 200,
    "tol": None,
    "t_end": None,
    "x0": None,
    "out": "out",
    "seed": 0,
    "random": 0,
    "id": None,
    "strict": False,
    "sweep": False,
}


def read_config_file(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected 'key = value'")
        key, val = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _DEFAULTS and key != "command":
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val
    return out


def _coerce(key, val):
    if val is None:
        return None
    if key in ("grid_a", "eps", "u0", "tol", "t_end"):
        return float(val)
    if key in ("grid_n", "seed", "random"):
        return int(val)
    if key in ("strict", "sweep"):
        return val if isinstance(val, bool) else str(val).lower() in ("1", "true", "yes", "on")
    if key == "x0":
        if isinstance(val, str):
            val = [v for v in val.replace(";", " ").split() if v]
        return [_parse_point(v) for v in val]
    if key == "clf" and isinstance(val, str):
        return [v.strip() for v in val.split(",") if v.strip()]
    return val


def _parse_point(text: str):
    try:
        X, Y = (float(v) for v in text.split(","))
        return PopulationState(X, Y)
    except ValueError as exc:
        raise ConfigError(f"bad initial condition {text!r}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="predprey", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"predprey {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config")
        sp.add_argument("--model")
        sp.add_argument("--controller")
        sp.add_argument("--eps", type=float)
        sp.add_argument("--u0", type=float, help="constant harvest level")
        sp.add_argument("--clf", action="append", help="catalog id; repeat or comma-separate")
        sp.add_argument("--grid-a", type=float)
        sp.add_argument("--grid-n", type=int)
        sp.add_argument("--tol", type=float, help="relative tolerance (abs = tol/100)")
        sp.add_argument("--t-end", type=float)
        sp.add_argument("--x0", action="append", help="initial condition X,Y; repeatable")
        sp.add_argument("--out")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--random", type=int, help="number of seeded random initial conditions")
        sp.add_argument("--id", help="figure id, or 'all'")
        sp.add_argument("--strict", action="store_true", default=None)
        sp.add_argument("--sweep", action="store_true", default=None,
                        help="also run the catalog consistency sweep")
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        try:
            cfg.update(read_config_file(args.config))
        except OSError as exc:
            raise ConfigError(str(exc)) from None
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            if key == "clf":
                val = ",".join(val)
            cfg[key] = val
    try:
        cfg = {k: _coerce(k, v) for k, v in cfg.items()}
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    cfg["command"] = args.command
    return cfg


def _controller(cfg) -> ControllerSpec | None:
    if cfg["controller"] is None:
        return None
    try:
        return ControllerSpec.parse(cfg["controller"], eps=cfg["eps"], U0=cfg["u0"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _clfs(cfg, default) -> list[Clf]:
    names = cfg["clf"] or default
    eps = 0.5 if cfg["eps"] is None else cfg["eps"]
    out = []
    for n in names:
        try:
            out.append(Clf.parse(n, eps))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def _model(cfg, ctrl: ControllerSpec | None) -> ModelId | None:
    if cfg["model"] is None:
        return None
    try:
        model = ModelId.parse(cfg["model"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if ctrl is not None and model not in ctrl.models:
        raise ConfigError(f"controller {ctrl.name} is designed for "
                          f"{', '.join(sorted(m.value for m in ctrl.models))}, not {model.value}")
    return model


def _integrator(cfg, t_end_default, tol_default) -> IntegratorConfig:
    tol = cfg["tol"] or tol_default
    try:
        return IntegratorConfig(rel_tol=tol, abs_tol=tol * 1e-2, t_end=cfg["t_end"] or t_end_default)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _grid(cfg) -> DomainGrid:
    try:
        return DomainGrid(cfg["grid_a"], cfg["grid_n"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


# -- output ------------------------------------------------------------------


def _write_atomic(path: Path, text: str) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    data = text.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
    return hashlib.sha256(data).hexdigest()


def _config_echo(cfg) -> dict:
    out = {}
    for k, v in sorted(cfg.items()):
        if k == "out":
            continue
        if k == "x0" and v is not None:
            v = [[float(s.X), float(s.Y)] for s in v]
        out[k] = v
    return out


class _Outputs:
    """Collects written files and their checksums for the manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.sums: dict[str, str] = {}

    def write(self, name: str, text: str) -> None:
        self.sums[name] = _write_atomic(self.root / name, text)

    def manifest(self, cfg, extra=None, started=None) -> None:
        doc = {
            "tool": "predprey",
            "version": __version__,
            "config": _config_echo(cfg),
            "outputs": dict(sorted(self.sums.items())),
        }
        if extra:
            doc.update(extra)
        _write_atomic(self.root / "manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
        # wall-clock time lives outside the manifest so manifests stay byte-identical
        if started is not None:
            _write_atomic(self.root / "timing.json",
                          json.dumps({"wall_clock_seconds": time.perf_counter() - started}) + "\n")


# -- commands ----------------------------------------------------------------


def cmd_verify(cfg, started=None) -> int:
    ctrl = _controller(cfg)
    clfs = _clfs(cfg, [c.value for c in ClfId if Clf.parse(c.value, 0.5).strict])
    model = _model(cfg, ctrl)
    grid = _grid(cfg)
    plans = []
    for c in clfs:
        pairs = catalog.designated_pairings(c)
        if ctrl is not None:
            pairs = [(m, k) for m, k in pairs if k == ctrl]
        if model is not None:
            pairs = [(m, k) for m, k in pairs if m is model]
        if not pairs:
            raise ConfigError(
                f"{c.name} is paired with "
                + " or ".join(f"{k.name} on {m.value}" for m, k in catalog.designated_pairings(c))
            )
        plans.append((c, pairs))

    reports = []
    witnesses = {}
    for c, pairs in plans:
        reports.append(scan_positive_definite(c, grid))
        for m, k in pairs:
            if cfg["strict"] or c.strict:
                reports.append(scan_vdot_negative(c, m, k, grid))
            else:
                reports.append(scan_vdot_nonpositive(c, m, k, grid))
            if not c.strict:
                w = nonstrict_witness(c, m, k)
                witnesses[c.name] = [float(w.X), float(w.Y)]
        reports.append(ray_unboundedness_probe(c))
    if cfg["sweep"]:
        reports.append(consistency_sweep(DomainGrid(cfg["grid_a"], min(cfg["grid_n"], 100))))

    passed = all(r.passed for r in reports)
    doc = {
        "verdict": "pass" if passed else "fail",
        "checks": [r.to_dict() for r in reports],
        "note": "sampled grid certificates; no claim is made between grid points",
    }
    if witnesses:
        doc["nonstrict_witnesses"] = witnesses
    out = _Outputs(Path(cfg["out"]))
    out.write("verify_report.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    out.manifest(cfg, None, started)
    for r in reports:
        print(r.summary())
    return EXIT_OK if passed else EXIT_FAIL


def cmd_simulate(cfg, started=None) -> int:
    ctrl = _controller(cfg) or ControllerSpec.constant(1.0)
    model = _model(cfg, ctrl) or sorted(ctrl.models, key=lambda m: m.value)[0]
    icfg = _integrator(cfg, 50.0, 1e-8)
    starts = list(cfg["x0"] or [])
    if cfg["random"]:
        starts += random_initial_conditions(cfg["random"], cfg["seed"])
    if not starts:
        starts = [PopulationState(2.0, 1.0)]
    if cfg["clf"]:
        clfs = _clfs(cfg, [])
        for c in clfs:
            try:
                catalog.check_pairing(c, model, ctrl)
            except PairingError as exc:
                raise ConfigError(str(exc)) from None
    else:
        # every catalog entry designated for this closed loop
        candidates = [Clf(i) for i in ClfId if i not in (ClfId.V1_BOTH, ClfId.V_BOTH_STRICT)]
        if ctrl.eps is not None:
            candidates += [Clf(ClfId.V1_BOTH, ctrl.eps), Clf(ClfId.V_BOTH_STRICT, ctrl.eps)]
        clfs = [c for c in candidates if (model, ctrl) in catalog.designated_pairings(c)]

    out = _Outputs(Path(cfg["out"]))
    runs = []
    status = EXIT_OK
    for k, s0 in enumerate(starts):
        name = f"trajectory_{k:03d}.csv"
        entry = {"file": name, "x0": [float(s0.X), float(s0.Y)]}
        try:
            tr = integrate(model, ctrl, s0, icfg, clfs=clfs)
        except IntegrationError as exc:
            entry["error"] = str(exc)
            entry["failed_at"] = exc.t
            runs.append(entry)
            status = EXIT_FAIL
            continue
        if ctrl.kind is ControllerKind.CONSTANT and ctrl.U0 == 1.0:
            tr.clf_values["invariant"] = tr.X + tr.Y - np.log(tr.X) - np.log(tr.Y)
            entry["invariant_drift"] = invariant_drift(tr)
        buf = io.StringIO()
        write_csv(tr, buf)
        out.write(name, buf.getvalue())
        entry["final"] = [float(tr.X[-1]), float(tr.Y[-1])]
        runs.append(entry)
    out.manifest(cfg, {"model": model.value, "controller": ctrl.describe(),
                       "integrator": vars(icfg) | {"max_step": str(icfg.max_step)},
                       "runs": runs}, started)
    print(f"wrote {len(out.sums)} trajectories to {cfg['out']}")
    return status


def cmd_figures(cfg, started=None) -> int:
    fid = cfg["id"] or "all"
    ids = list(FIGURES) if fid == "all" else [fid]
    unknown = [i for i in ids if i not in FIGURES]
    if unknown:
        raise ConfigError(f"unknown figure id {unknown[0]!r}; choose from all, {', '.join(FIGURES)}")
    out = _Outputs(Path(cfg["out"]))
    meta = {}
    for i in ids:
        kw = {"grid": _grid(cfg)}
        if cfg["eps"] is not None:
            kw["eps"] = cfg["eps"]
        fd = build_figure(i, **kw)
        for table in fd.tables:
            out.write(f"{i}_{table}.csv", fd.render_csv(table))
        out.write(f"plot_{i}.py", fd.script)
        meta[i] = fd.meta
        print(f"figure {i}: {', '.join(fd.tables)}")
    out.manifest(cfg, {"figures": meta}, started)
    return EXIT_OK


def cmd_regions(cfg, started=None) -> int:
    ctrl = _controller(cfg) or ControllerSpec.forwarding()
    default = "V_FORWARDING" if ctrl.kind is ControllerKind.FORWARDING else "V_BACKSTEPPING"
    clf = _clfs(cfg, [default])[0]
    grid = _grid(cfg)
    try:
        rm = classify_regions(grid, ctrl, clf)
    except NoDecompositionError as exc:
        raise ConfigError(str(exc)) from None
    out = _Outputs(Path(cfg["out"]))
    lines = ["X,Y,U,L,G,u_negative,clf_failure"]
    for row in zip(rm.X.ravel(), rm.Y.ravel(), rm.U.ravel(), rm.L.ravel(), rm.G.ravel(),
                   rm.u_negative.ravel(), rm.clf_failure.ravel()):
        lines.append(",".join(f"{v:.17g}" for v in row[:5]) + f",{int(row[5])},{int(row[6])}")
    out.write("regions.csv", "\n".join(lines) + "\n")
    counts = rm.counts()
    out.write("regions_summary.json", json.dumps(
        {**counts, **clf.describe(), **ctrl.describe(), **grid.describe()}, indent=2, sort_keys=True) + "\n")
    out.manifest(cfg, None, started)
    print(json.dumps(counts, sort_keys=True))
    return EXIT_OK


def cmd_invariant(cfg, started=None) -> int:
    icfg = _integrator(cfg, 100.0, 1e-10)
    starts = cfg["x0"] or [PopulationState(2.0, 1.0), PopulationState(0.5, 3.0)]
    model = _model(cfg, None) or ModelId.PREDATOR_ONLY
    results = []
    ok = True
    for s0 in starts:
        try:
            tr = integrate(model, ControllerSpec.constant(1.0), s0, icfg)
        except IntegrationError as exc:
            results.append({"x0": [float(s0.X), float(s0.Y)], "error": str(exc), "failed_at": exc.t})
            ok = False
            continue
        drift = invariant_drift(tr)
        rec = orbit_recurrence(tr)
        ok &= drift < DRIFT_BOUND
        results.append({
            "x0": [float(s0.X), float(s0.Y)],
            "drift": drift,
            "verdict": "pass" if drift < DRIFT_BOUND else "fail",
            "return_time": None if rec is None else rec[0],
            "return_distance": None if rec is None else rec[1],
        })
        print(f"x0=({float(s0.X):g}, {float(s0.Y):g}) drift={drift:.3e}")
    out = _Outputs(Path(cfg["out"]))
    out.write("invariant_report.json", json.dumps(
        {"bound": DRIFT_BOUND, "model": model.value, "results": results}, indent=2, sort_keys=True) + "\n")
    out.manifest(cfg, None, started)
    return EXIT_OK if ok else EXIT_FAIL


_DISPATCH = {
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "figures": cmd_figures,
    "regions": cmd_regions,
    "invariant": cmd_invariant,
}


def main(argv=None) -> int:
    started = time.perf_counter()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
        return _DISPATCH[cfg["command"]](cfg, started)
    except ConfigError as exc:
        print(f"predprey: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
