"""Command-line entry point: ``resonant-nls <subcommand> [flags]``.

Every subcommand writes its CSV(s) and a ``manifest.json`` (config echo plus
SHA-256 of each artifact) into ``--out`` and prints one verdict line::

    VERDICT <subcommand> PASS|FAIL key=value ...

Failures inside a module print ``ERROR <subcommand> <kind> message`` and
exit with status 2.
"""

from __future__ import annotations

import argparse
import csv
import glob
import hashlib
import json
import math
import os
import sys
from typing import List, Optional, Sequence

from . import diagnostics as diag
from .config import ConfigError, RunConfig, load_config, parse_config
from .dynamics import SimulationAborted, Trajectory, evolve
from .grid import SpatialGrid, read_snapshot, set_workers, write_snapshot
from .resonance import ModeBand, closed_form_resonances, enumerate_resonances, kernel_sum
from .state import VectorField, mass, write_diagnostics_csv
from .symmetry import GroupElement, OutOfResolution, verify_covariance

THREADS_ENV = "RESONANT_NLS_THREADS"
SUBCOMMANDS = ("simulate", "verify-resonance", "measure-bilinear", "morawetz",
               "scatter-probe", "covariance")


def _f(v) -> str:
    return repr(float(v))


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out: str, command: str, cfg: RunConfig, artifacts: Sequence[str], extra=None):
    man = {
        "command": command,
        "config": cfg.echo(),
        "artifacts": {os.path.relpath(a, out): _sha256(a) for a in sorted(artifacts)},
    }
    if extra:
        man["parameters"] = extra
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _verdict(command: str, ok: bool, **fields) -> str:
    parts = [f"VERDICT {command} {'PASS' if ok else 'FAIL'}"]
    for k, v in fields.items():
        parts.append(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}")
    return " ".join(parts)


def _snapshot_paths(directory: str) -> List[str]:
    return sorted(glob.glob(os.path.join(directory, "snap_*.bin")))


def load_trajectory(directory: str) -> Trajectory:
    """Read ``snap_*.bin`` files (or ``<dir>/snapshots/snap_*.bin``) in name order."""
    paths = _snapshot_paths(directory) or _snapshot_paths(os.path.join(directory, "snapshots"))
    if not paths:
        raise FileNotFoundError(f"no snapshots found under {directory}")
    traj = Trajectory()
    for p in paths:
        modes, grid, J, t = read_snapshot(p)
        traj.append(t, VectorField(modes, grid, J))
    return traj


def _run_simulation(cfg: RunConfig, snapshots_dir: Optional[str] = None):
    u0 = cfg.initial_state()
    traj = Trajectory()
    observers = [traj]
    if snapshots_dir:
        os.makedirs(snapshots_dir, exist_ok=True)
        counter = [0]

        def dump(t, u):
            write_snapshot(os.path.join(snapshots_dir, f"snap_{counter[0]:06d}.bin"),
                           u.data, u.grid, u.J, t)
            counter[0] += 1
        observers.append(dump)
    final, records = evolve(u0, cfg.stepper, observers,
                            diagnostics=True, morawetz=cfg["diagnostics.morawetz"],
                            morawetz_cutoff=cfg["diagnostics.morawetz_cutoff"],
                            n_fraction=cfg["diagnostics.n_fraction"])
    return final, records, traj


def _trajectory_for(args, cfg: RunConfig) -> Trajectory:
    if getattr(args, "trajectory", None):
        return load_trajectory(args.trajectory)
    _, _, traj = _run_simulation(cfg)
    return traj


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args, cfg: RunConfig, out: str) -> int:
    snapdir = os.path.join(out, "snapshots") if cfg["diagnostics.snapshots"] else None
    _, records, _ = _run_simulation(cfg, snapdir)
    path = os.path.join(out, "diagnostics.csv")
    write_diagnostics_csv(path, records)
    arts = [path] + (_snapshot_paths(snapdir) if snapdir else [])
    _write_manifest(out, "simulate", cfg, arts)
    m0, m1 = records[0].mass, records[-1].mass
    e0, e1 = records[0].energy, records[-1].energy
    md = abs(m1 - m0) / m0 if m0 > 0 else abs(m1 - m0)
    ed = abs(e1 - e0) / e0 if e0 > 0 else abs(e1 - e0)
    print(_verdict("simulate", md <= 1e-10, mass_drift=md, energy_drift=ed, records=len(records)))
    return 0


def cmd_verify_resonance(args, cfg: RunConfig, out: str) -> int:
    jmax = args.jmax
    band = ModeBand(args.band if args.band is not None else jmax)
    if jmax > band.J:
        raise ValueError(f"--jmax {jmax} exceeds --band {band.J}")
    rows = []
    ok = True
    bound = 2.0 * math.fsum((1.0 + k * k) ** -2 for k in range(-10**6, 10**6 + 1))
    sup = 0.0
    for j in range(-jmax, jmax + 1):
        e = enumerate_resonances(j, band)
        match = e == closed_form_resonances(j, band)
        ks = kernel_sum(j, band)
        sup = max(sup, ks)
        ok &= match
        rows.append((j, len(e), _f(ks), "true" if match else "false"))
    ok &= sup <= bound
    path = os.path.join(out, "verify_resonance.csv")
    _write_csv(path, ("j", "count", "kernel_sum", "closed_form_match"), rows)
    _write_manifest(out, "verify-resonance", cfg, [path], {"jmax": jmax, "band": band.J})
    print(_verdict("verify-resonance", ok, rows=len(rows), sup_kernel_sum=sup, bound=bound))
    return 0 if ok else 1


def cmd_measure_bilinear(args, cfg: RunConfig, out: str) -> int:
    p = cfg["bilinear.p"]
    grid = SpatialGrid(cfg["bilinear.L"], cfg["bilinear.N"])
    fit = diag.bilinear_probe(cfg["bilinear.i_high"], cfg["bilinear.i_lows"], p=p, grid=grid,
                              J=cfg["bilinear.J"], window=cfg["bilinear.window"],
                              n_times=cfg["bilinear.n_times"], seed=cfg.seed)
    path = os.path.join(out, "bilinear.csv")
    rows = [(il, _f(r), _f(v)) for il, r, v in zip(cfg["bilinear.i_lows"], fit.ratios, fit.values)]
    _write_csv(path, ("i_low", "M_over_N", "normalized_norm"), rows)
    _write_manifest(out, "measure-bilinear", cfg, [path])
    expected = 0.0 if math.isinf(p) else 1.0 / p
    ok = abs(fit.slope - expected) <= cfg["bilinear.slope_tolerance"] and fit.r2 >= cfg["bilinear.min_r2"]
    print(_verdict("measure-bilinear", ok, slope=fit.slope, expected=expected, r2=fit.r2,
                   slope_stderr=fit.slope_stderr))
    return 0 if ok else 1


def cmd_morawetz(args, cfg: RunConfig, out: str) -> int:
    traj = _trajectory_for(args, cfg)
    cut = cfg["diagnostics.morawetz_cutoff"]
    frac = cfg["diagnostics.n_fraction"]
    rows = []
    ok = True
    acc = kacc = 0.0
    prev = None
    for t, u in zip(traj.times, traj.states):
        M = diag.interaction_morawetz(u, cut)
        ceil = diag.morawetz_ceiling(u, cut)
        lhs = diag.morawetz_lhs_integrand(u, cut)
        n3 = diag.extract_params(u, frac)[2] ** 3 if mass(u) > 0 else 0.0
        if prev is not None:
            acc += 0.5 * (t - prev[0]) * (lhs + prev[1])
            kacc += 0.5 * (t - prev[0]) * (n3 + prev[2])
        prev = (t, lhs, n3)
        ok &= abs(M) <= ceil * (1.0 + 1e-12)
        # lhs / K with K = int N(t)^3 dt, reported over growing horizons
        ratio = acc / kacc if kacc > 0 else 0.0
        rows.append((_f(t), _f(M), _f(ceil), _f(lhs), _f(acc), _f(kacc), _f(ratio)))
    path = os.path.join(out, "morawetz.csv")
    _write_csv(path, ("t", "M", "ceiling", "lhs_integrand", "lhs_accum", "K_accum", "lhs_over_K"), rows)
    _write_manifest(out, "morawetz", cfg, [path])
    maxM = max(abs(float(r[1])) for r in rows)
    print(_verdict("morawetz", ok, snapshots=len(rows), max_abs_M=maxM, lhs=acc, K=kacc))
    return 0 if ok else 1


def cmd_scatter_probe(args, cfg: RunConfig, out: str) -> int:
    traj = _trajectory_for(args, cfg)
    rep = diag.scattering_probe(traj, windows=cfg["scatter.windows"],
                                threshold=cfg["scatter.threshold"])
    path = os.path.join(out, "scatter.csv")
    rows = [(_f(t), _f(l4), _f(g)) for t, l4, g in zip(rep.times, rep.l4_running, rep.gaps)]
    _write_csv(path, ("t", "l4_accum", "gap_to_final"), rows)
    _write_manifest(out, "scatter-probe", cfg, [path])
    print(_verdict("scatter-probe", rep.small_data, tail_fraction=rep.tail_fraction,
                   final_gap=rep.final_gap, l4_total=rep.total, onset=rep.onset))
    return 0 if rep.small_data else 1


def _parse_element(s: str) -> GroupElement:
    parts = [float(p) for p in s.split(",")]
    if len(parts) != 6:
        raise ValueError(f"--element needs theta,xi1,xi2,x1,x2,lam; got {s!r}")
    return GroupElement(parts[0], (parts[1], parts[2]), (parts[3], parts[4]), parts[5])


def cmd_covariance(args, cfg: RunConfig, out: str) -> int:
    elements = [_parse_element(e) for e in (args.element or [])]
    if not elements or any(v is not None for v in (args.theta, args.xi0, args.x0, args.lam)):
        elements.insert(0, GroupElement(args.theta or 0.0,
                                        tuple(args.xi0) if args.xi0 else (0.0, 0.0),
                                        tuple(args.x0) if args.x0 else (0.0, 0.0),
                                        args.lam or 1.0))
    traj = _trajectory_for(args, cfg)
    limit = cfg["covariance.max_ratio"]
    rows = []
    ok_all = True
    for g in elements:
        rep = verify_covariance(g, traj)
        ok = rep.ratio <= limit
        ok_all &= ok
        rows.append((_f(g.theta), _f(g.xi0[0]), _f(g.xi0[1]), _f(g.x0[0]), _f(g.x0[1]), _f(g.lam),
                     _f(rep.baseline), _f(rep.residual), _f(rep.ratio), "PASS" if ok else "FAIL"))
        print(_verdict("covariance", ok, theta=g.theta, xi0=f"{g.xi0[0]:g},{g.xi0[1]:g}",
                       x0=f"{g.x0[0]:g},{g.x0[1]:g}", lam=g.lam, ratio=rep.ratio))
    path = os.path.join(out, "covariance.csv")
    _write_csv(path, ("theta", "xi0_1", "xi0_2", "x0_1", "x0_2", "lam", "baseline_residual",
                      "residual", "ratio", "verdict"), rows)
    _write_manifest(out, "covariance", cfg, [path])
    return 0 if ok_all else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "verify-resonance": cmd_verify_resonance,
    "measure-bilinear": cmd_measure_bilinear,
    "morawetz": cmd_morawetz,
    "scatter-probe": cmd_scatter_probe,
    "covariance": cmd_covariance,
}


def _vec2(s: str):
    parts = [float(p) for p in s.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {s!r}")
    return parts


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration file (key = value lines)")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory (overrides output.dir)")
    common.add_argument("--threads", type=int, help=f"FFT worker threads (fallback: ${THREADS_ENV})")

    p = argparse.ArgumentParser(prog="resonant-nls", description=__doc__.splitlines()[0],
                                parents=[common])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="evolve the configured initial data")
    vr = sub.add_parser("verify-resonance", parents=[common], help="check resonance-set identities")
    vr.add_argument("--jmax", type=int, default=8)
    vr.add_argument("--band", type=int, default=None, help="band radius J (default: jmax)")
    sub.add_parser("measure-bilinear", parents=[common], help="fit bilinear Strichartz scaling")
    for name, text in (("morawetz", "interaction Morawetz series and ceiling check"),
                       ("scatter-probe", "time-norm tail and scattering gaps")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("--trajectory", help="directory of binary snapshots (default: simulate)")
    cv = sub.add_parser("covariance", parents=[common], help="check symmetry covariance")
    cv.add_argument("--trajectory", help="directory of binary snapshots (default: simulate)")
    cv.add_argument("--theta", type=float)
    cv.add_argument("--xi0", type=_vec2)
    cv.add_argument("--x0", type=_vec2)
    cv.add_argument("--lam", type=float)
    cv.add_argument("--element", action="append", help="theta,xi1,xi2,x1,x2,lam (repeatable)")
    return p


def _threads(args) -> int:
    if args.threads:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    return int(env) if env else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    cmd = args.command
    try:
        set_workers(_threads(args))
        cfg = load_config(args.config) if args.config else parse_config("")
        over = {}
        if args.seed is not None:
            over["seed"] = args.seed
        if args.out:
            over["output.dir"] = args.out
        if over:
            cfg = cfg.replace(**over)
        out = cfg["output.dir"]
        os.makedirs(out, exist_ok=True)
        return COMMANDS[cmd](args, cfg, out)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"ERROR {cmd} ConfigError {e}")
        return 2
    except (SimulationAborted, OutOfResolution, ValueError, FileNotFoundError) as exc:
        print(f"ERROR {cmd} {type(exc).__name__} {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
