"""Batch command-line front end.

Every subcommand reads a manifest (``--manifest file.json``) whose keys can be
overridden by flags, writes its outputs into ``--output DIR`` (or prints the
primary output to stdout) and exits with a documented code:

    0  the command's mathematical predicate held
    1  malformed input
    2  no convergence
    3  loop is not rigid (saari-check)
    4  collision
    5  no Kronecker hit within k_max
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import central_config, kronecker, trig_harmonics, variational
from .errors import CollisionAbort, CollisionError, DegeneratePair, NoConvergence, ValidationError
from .mechanics import MassVector, moment_of_inertia, potential

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_NO_CONVERGENCE = 2
EXIT_NOT_RIGID = 3
EXIT_COLLISION = 4
EXIT_NO_HITS = 5

logger = logging.getLogger("saari")


class _Malformed(Exception):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise _Malformed(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise _Malformed(f"{path} must contain a JSON object")
    return obj


def _manifest(args) -> dict:
    """File values first, then every flag that was given explicitly."""
    manifest = _read_json(args.manifest) if args.manifest else {}
    for key, value in vars(args).items():
        if key in ("manifest", "func") or value is None:
            continue
        manifest[key.replace("-", "_")] = value
    manifest["command"] = args.command
    manifest.setdefault("seed", 0)
    return manifest


def _input_object(manifest) -> dict:
    if manifest.get("input"):
        return _read_json(manifest["input"])
    return {}


def _masses(manifest, obj) -> np.ndarray:
    raw = manifest.get("masses", obj.get("masses"))
    if raw is None:
        raise _Malformed("masses are required (--masses or an input file with a 'masses' key)")
    if isinstance(raw, str):
        raw = _floats(raw)
    try:
        return np.asarray(MassVector(raw))
    except ValidationError as exc:
        raise _Malformed(str(exc)) from exc


class _Output:
    """Collects named outputs and writes them to a directory or stdout."""

    def __init__(self, manifest):
        self.dir = Path(manifest["output"]) if manifest.get("output") else None
        self.manifest = manifest
        self.primary = None

    def json(self, name, obj, primary=False):
        text = json.dumps(obj, indent=2, allow_nan=True) + "\n"
        self._emit(name, text, primary)

    def csv(self, name, header, rows, primary=False):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(x) if isinstance(x, float) else x for x in row])
        self._emit(name, buf.getvalue(), primary)

    def _emit(self, name, text, primary):
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / name).write_text(text)
        elif primary:
            sys.stdout.write(text)

    def finish(self):
        if self.dir is not None:
            record = {k: v for k, v in self.manifest.items() if k != "output"}
            self.json("manifest.json", record)


def cmd_central(manifest) -> int:
    obj = _input_object(manifest)
    m = _masses(manifest, obj)
    dim = int(manifest.get("dim", obj.get("dim", 2)))
    opts = {"seed": int(manifest["seed"])}
    if manifest.get("starts") is not None:
        opts["starts"] = int(manifest["starts"])
    if manifest.get("tol") is not None:
        opts["tol_central"] = float(manifest["tol"])
    out = _Output(manifest)
    try:
        result = central_config.minimize_iu2(m, dim, **opts)
    except ValidationError as exc:
        raise _Malformed(str(exc)) from exc
    except NoConvergence as exc:
        out.json("central.json", {"converged": False, "error": str(exc), "seed": opts["seed"]}, primary=True)
        out.finish()
        return EXIT_NO_CONVERGENCE
    out.json("central.json", result.to_dict(), primary=True)
    out.finish()
    return EXIT_OK


def cmd_saari_check(manifest) -> int:
    obj = _input_object(manifest)
    try:
        loop = trig_harmonics.TrigLoop.from_dict(obj)
    except ValidationError as exc:
        raise _Malformed(str(exc)) from exc
    tol = float(manifest.get("tol", trig_harmonics.RIGIDITY_TOL))
    samples = int(manifest.get("samples", trig_harmonics.DEFAULT_SAMPLES))
    n_max = int(manifest.get("n_max", 8))
    out = _Output(manifest)
    try:
        report = trig_harmonics.rigidity_check(loop, tol)
    except DegeneratePair as exc:
        out.json("rigidity.json", {"rigid": False, "collision": True, "error": str(exc),
                                   "seed": manifest["seed"]}, primary=True)
        out.finish()
        return EXIT_COLLISION
    record = {
        "rigid": report.rigid,
        "max_C": report.max_C,
        "tol": tol,
        "pairs": [
            {"j": ph.j, "k": ph.k, "A": ph.A, "B": ph.B, "C": ph.C,
             "theta": ph.theta if ph.theta_defined else None}
            for ph in report.pairs
        ],
        "distances": None if report.distances is None
        else [{"j": j, "k": k, "distance": d} for (j, k), d in report.distances.items()],
        "collision": False,
        "seed": manifest["seed"],
    }
    try:
        t = loop.sample_times(samples)
        q = loop.positions(t)
        U = potential(loop.masses, q)
        I = moment_of_inertia(loop.masses, q)
        rows = trig_harmonics.spectrum_table(loop, n_max, samples)
    except CollisionError as exc:
        record["collision"] = True
        record["error"] = str(exc)
        out.json("rigidity.json", record, primary=True)
        out.finish()
        return EXIT_NOT_RIGID if not report.rigid else EXIT_COLLISION
    except ValidationError as exc:
        raise _Malformed(str(exc)) from exc
    record["U_relative_std"] = float(np.std(U) / np.mean(U))
    record["I_relative_std"] = float(np.std(I) / np.mean(I))
    out.json("rigidity.json", record, primary=True)
    out.csv("spectrum.csv", ["n", "re", "im", "series_value", "quadrature_value"], rows)
    out.csv("timeseries.csv", ["t", "U", "I"], [[float(a), float(b), float(c)] for a, b, c in zip(t, U, I)])
    out.finish()
    return EXIT_OK if report.rigid else EXIT_NOT_RIGID


def cmd_minimize_action(manifest) -> int:
    obj = _input_object(manifest)
    m = _masses(manifest, obj)
    order = int(manifest.get("order", obj.get("order", variational.DEFAULT_ORDER)))
    if order < 1:
        raise _Malformed(f"order must be at least 1, got {order}")
    T = float(manifest.get("period", obj.get("T", 2 * math.pi)))
    if not T > 0:
        raise _Malformed(f"period must be positive, got {T}")
    opts = {"samples": int(manifest.get("samples", variational.DEFAULT_SAMPLES)), "seed": int(manifest["seed"])}
    if manifest.get("tol") is not None:
        opts["tol"] = float(manifest["tol"])
    if manifest.get("starts") is not None:
        opts["starts"] = int(manifest["starts"])
    out = _Output(manifest)
    try:
        loop, report = variational.minimize_action(m, T, order, **opts)
    except ValidationError as exc:
        raise _Malformed(str(exc)) from exc
    except CollisionAbort as exc:
        out.json("report.json", {"converged": False, "error": str(exc), "seed": opts["seed"]}, primary=True)
        out.finish()
        return EXIT_COLLISION
    except NoConvergence as exc:
        out.json("report.json", {"converged": False, "error": str(exc), "seed": opts["seed"]}, primary=True)
        out.finish()
        return EXIT_NO_CONVERGENCE
    record = report.to_dict()
    record["seed"] = opts["seed"]
    out.json("report.json", record, primary=True)
    out.json("loop.json", loop.to_dict())
    header, rows = variational.trajectory_rows(loop, 256)
    out.csv("trajectory.csv", header, rows)
    out.finish()
    return EXIT_OK


def cmd_kronecker(manifest) -> int:
    theta = manifest.get("theta")
    if theta is None:
        raise _Malformed("theta is required")
    if isinstance(theta, str):
        theta = _floats(theta)
    try:
        query = kronecker.KroneckerQuery(
            tuple(theta),
            float(manifest.get("epsilon", 0.01)),
            int(manifest.get("k_max", kronecker.DEFAULT_K_MAX)),
            manifest.get("window", kronecker.Window.NEAR_ZERO_OR_ONE.value),
        )
    except (ValidationError, ValueError) as exc:
        raise _Malformed(str(exc)) from exc
    hits = kronecker.simultaneous_approx(query)
    out = _Output(manifest)
    header = ["k"] + [f"dev_{i + 1}" for i in range(len(query.theta))]
    out.csv("hits.csv", header, [[h.k, *h.deviations] for h in hits], primary=True)
    out.finish()
    return EXIT_OK if hits else EXIT_NO_HITS


def cmd_rel_equilibrium(manifest) -> int:
    obj = _input_object(manifest)
    out = _Output(manifest)
    T = manifest.get("period")
    try:
        if "positions" in obj:
            central = central_config.CentralConfigResult.from_dict(obj)
        else:
            m = _masses(manifest, obj)
            central = central_config.minimize_iu2(m, 2, seed=int(manifest["seed"]))
        loop = variational.build_relative_equilibrium(central, None if T is None else float(T))
    except ValidationError as exc:
        raise _Malformed(str(exc)) from exc
    except NoConvergence as exc:
        out.json("rel_equilibrium.json", {"error": str(exc), "seed": manifest["seed"]}, primary=True)
        out.finish()
        return EXIT_NO_CONVERGENCE
    record = loop.to_dict()
    record["seed"] = manifest["seed"]
    out.json("rel_equilibrium.json", record, primary=True)
    out.finish()
    return EXIT_OK


COMMANDS = {
    "central": cmd_central,
    "saari-check": cmd_saari_check,
    "minimize-action": cmd_minimize_action,
    "kronecker": cmd_kronecker,
    "rel-equilibrium": cmd_rel_equilibrium,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="saari", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--manifest", help="JSON file with default values for every option")
        p.add_argument("--input", help="input JSON file")
        p.add_argument("--output", help="output directory (stdout if omitted)")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--k-max", dest="k_max", type=int)
        p.add_argument("--order", type=int)
        p.add_argument("--period", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--masses", help="comma-separated masses")
        p.add_argument("--dim", type=int)
        p.add_argument("--starts", type=int)
        p.add_argument("--n-max", dest="n_max", type=int)
        p.add_argument("--theta", help="comma-separated reals")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--window", choices=[w.value for w in kronecker.Window])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_MALFORMED if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    del args.verbose
    try:
        manifest = _manifest(args)
        return COMMANDS[args.command](manifest)
    except (_Malformed, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
