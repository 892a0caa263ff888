"""Command-line front end.

    python -m triconsensus validate net.json
    python -m triconsensus synth-tripartite net.json [--ratios V2 V3] [-o gains.json]
    python -m triconsensus synth-sign net.json [--null-vectors 2 1 1 1 2 ';' -0.5 -2] [-o gains.json]
    python -m triconsensus simulate net.json --gains gains.json [--seed N | --x0 FILE] [--out traj.csv]
    python -m triconsensus verify net.json --gains gains.json

Exit codes: 0 success, 1 usage/IO error, 2 validation/certification failure,
3 synthesis infeasible.  Failures print one ``ERROR:<code>:<message>`` line.
"""
from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import signcons, simulate, tripartite
from .network import CLUSTERS, NetworkFormatError, SignedNetwork, load_network, validate

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, code: str, message: str, status: int):
        super().__init__(message)
        self.code, self.status = code, status


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message, EXIT_USAGE)


def default_tol() -> float:
    raw = os.environ.get("CONSENSUS_TOL")
    if raw is None:
        return simulate.DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise CliError("usage", f"CONSENSUS_TOL={raw!r} is not a number", EXIT_USAGE) from None
    if not tol > 0:
        raise CliError("usage", "CONSENSUS_TOL must be positive", EXIT_USAGE)
    return tol


def _positive(kind):
    def conv(text):
        val = kind(text)
        if val <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return val
    return conv


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="triconsensus", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check network hypotheses")
    p.add_argument("network")
    p.add_argument("--json", dest="json_out", help="also write the report as JSON")

    p = sub.add_parser("synth-tripartite", help="gains for tripartite consensus")
    p.add_argument("network")
    p.add_argument("--ratios", nargs=2, type=float, metavar=("V2", "V3"))
    p.add_argument("--labeling", nargs=3, type=int, metavar=("I1", "I2", "I3"))
    p.add_argument("-o", "--output")

    p = sub.add_parser("synth-sign", help="gains for sign consensus")
    p.add_argument("network")
    p.add_argument("--null-vectors", nargs="+", metavar="X",
                   help="v1 entries, a ';' token, then v3 entries")
    p.add_argument("--labeling", nargs=3, type=int, metavar=("I1", "I2", "I3"))
    p.add_argument("--margin0", type=_positive(float), default=1.0)
    p.add_argument("--max-doublings", type=_positive(int), default=40)
    p.add_argument("-o", "--output")

    p = sub.add_parser("simulate", help="integrate the closed loop and classify")
    p.add_argument("network")
    p.add_argument("--gains", required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--x0", help="initial state file (JSON list or whitespace separated)")
    src.add_argument("--seed", type=int, default=0)
    p.add_argument("--dt", type=_positive(float), default=simulate.DEFAULT_DT)
    p.add_argument("--T", type=_positive(float), default=simulate.DEFAULT_T)
    p.add_argument("--stride", type=_positive(int), default=1)
    p.add_argument("--out", help="trajectory CSV")
    p.add_argument("--verdict", help="verdict JSON")

    p = sub.add_parser("verify", help="certify a gains file")
    p.add_argument("network")
    p.add_argument("--gains", required=True)
    return ap


def _load_net(path) -> SignedNetwork:
    if not Path(path).exists():
        raise CliError("io", f"cannot read {path}", EXIT_USAGE)
    try:
        return load_network(Path(path))
    except NetworkFormatError as exc:
        raise CliError("schema", str(exc), EXIT_USAGE) from None


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise CliError("io", f"cannot read {path}: {exc.strerror}", EXIT_USAGE) from None
    except json.JSONDecodeError as exc:
        raise CliError("schema", f"{path}: malformed JSON ({exc})", EXIT_USAGE) from None


def _write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError("io", f"cannot write {path}: {exc.strerror}", EXIT_USAGE) from None


def parse_null_vectors(tokens: list[str]):
    text = " ".join(tokens)
    if text.count(";") != 1:
        raise CliError("usage", "--null-vectors needs exactly one ';' between v1 and v3", EXIT_USAGE)
    try:
        v1, v3 = ([float(x) for x in re.split(r"[\s,]+", part.strip()) if x]
                  for part in text.split(";"))
    except ValueError as exc:
        raise CliError("usage", f"--null-vectors: {exc}", EXIT_USAGE) from None
    return np.array(v1), np.array(v3)


def gains_vector(net: SignedNetwork, doc: dict) -> np.ndarray:
    try:
        per_cluster = doc["d"]
        d = np.empty(net.size)
        for p in CLUSTERS:
            vals = np.asarray(per_cluster[str(p)], dtype=float)
            if vals.shape != (len(net.members(p)),):
                raise ValueError(f"cluster {p} has {vals.size} gains, expected {len(net.members(p))}")
            d[net.members(p)] = vals
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("schema", f"bad gains file: {exc}", EXIT_USAGE) from None
    return d


def _require_assumptions(net):
    report = validate(net)
    if not report.ok:
        failed = "; ".join(f"{c.name}: {c.detail}" for c in report.checks if not c.passed)
        raise CliError("validation", failed, EXIT_INVALID)
    return report


# ------------------------------------------------------------------ commands


def cmd_validate(args) -> int:
    net = _load_net(args.network)
    report = validate(net)
    print(report.to_text())
    if args.json_out:
        _write_json(args.json_out, report.to_dict())
    if not report.ok:
        failed = ",".join(c.name for c in report.checks if not c.passed)
        raise CliError("validation", f"assumption checks failed: {failed}", EXIT_INVALID)
    return EXIT_OK


def cmd_synth_tripartite(args) -> int:
    net = _load_net(args.network)
    _require_assumptions(net)
    if args.ratios and 0.0 in args.ratios:
        raise CliError("usage", "zero kernel ratio", EXIT_USAGE)
    cfg = tripartite.TripartiteConfig(
        ratios=tuple(args.ratios) if args.ratios else None,
        labeling=tuple(args.labeling) if args.labeling else None,
        kernel_tol=default_tol())
    res = tripartite.synthesize_tripartite(net, cfg)
    if not res.success:
        raise CliError("infeasible", " | ".join(res.reasons), EXIT_INFEASIBLE)
    g = res.gains
    print(f"tripartite gains: labeling {tuple(g.labeling)}, v = {g.v}, "
          f"min eigenvalue {res.certificate.min_eigenvalue:.3g}")
    _write_json(args.output, g.to_dict(net))
    return EXIT_OK


def cmd_synth_sign(args) -> int:
    net = _load_net(args.network)
    _require_assumptions(net)
    cfg = signcons.SignConfig(
        margin0=args.margin0, max_doublings=args.max_doublings,
        labeling=tuple(args.labeling) if args.labeling else None,
        null_vectors=parse_null_vectors(args.null_vectors) if args.null_vectors else None,
        kernel_tol=default_tol())
    res = signcons.synthesize_sign(net, cfg)
    if not res.success:
        raise CliError("infeasible", " | ".join(res.reasons), EXIT_INFEASIBLE)
    g = res.gains
    print(f"sign gains: labeling {tuple(g.labeling)}, zero cluster {g.zero_cluster}, "
          f"margin {g.margin:g}")
    _write_json(args.output, g.to_dict(net))
    return EXIT_OK


def _certify(net, doc, tol):
    d = gains_vector(net, doc)
    kind = doc.get("kind", "tripartite")
    try:
        if kind == "tripartite":
            g = tripartite.gains_from_arrays(net, doc["labeling"], doc["v"], d)
            res = tripartite.verify_structured_kernel(net, g, tol)
            extra = {"reduced_rank": res.reduced_rank}
        elif kind == "sign":
            R = net.relabeled(doc["labeling"])
            d_rel = R.to_relabeled(d)
            parts = [d_rel[R.slice(p)] for p in (1, 2, 3)]
            g = signcons.assemble(net, doc["labeling"], doc["v1"], doc["v3"], *parts,
                                  doc.get("margin", float("nan")))
            res = signcons.certify(net, g, tol)
            extra = {"zero_cluster": g.zero_cluster}
        else:
            raise CliError("schema", f"unknown gains kind {kind!r}", EXIT_USAGE)
    except (KeyError, TypeError, ValueError) as exc:
        raise CliError("schema", f"bad gains file: {exc}", EXIT_USAGE) from None
    spec = g.closed_loop.spectrum
    summary = {"kind": kind, "certified": res.success, "reasons": res.reasons,
               "min_eigenvalue": spec.min_eigenvalue,
               "zero_multiplicity": spec.zero_multiplicity, **extra}
    return g, res, summary


def cmd_verify(args) -> int:
    net = _load_net(args.network)
    doc = _read_json(args.gains)
    _, res, summary = _certify(net, doc, default_tol())
    _write_json(None, summary)
    if not res.success:
        raise CliError("certification", " | ".join(res.reasons), EXIT_INVALID)
    return EXIT_OK


def _read_x0(path, n) -> np.ndarray:
    text = Path(path).read_text() if Path(path).exists() else None
    if text is None:
        raise CliError("io", f"cannot read {path}", EXIT_USAGE)
    try:
        x0 = np.asarray(json.loads(text), dtype=float)
    except (json.JSONDecodeError, ValueError, TypeError):
        try:
            x0 = np.array(re.split(r"[\s,]+", text.strip()), dtype=float)
        except ValueError:
            raise CliError("schema", f"{path}: cannot parse initial state", EXIT_USAGE) from None
    if x0.shape != (n,):
        raise CliError("schema", f"initial state has shape {x0.shape}, expected ({n},)", EXIT_USAGE)
    return x0


def cmd_simulate(args) -> int:
    net = _load_net(args.network)
    doc = _read_json(args.gains)
    g, _, _ = _certify(net, doc, default_tol())
    if args.x0:
        x0 = _read_x0(args.x0, net.size)
    else:
        x0 = simulate.random_initial_conditions(np.random.default_rng(args.seed), net.size, 1)[0]
    try:
        traj = simulate.integrate(g.closed_loop, x0, args.dt, args.T)
        verdict = simulate.classify(g.closed_loop, net, x0, default_tol())
    except ValueError as exc:
        raise CliError("numeric", str(exc), EXIT_INVALID) from None
    if args.out:
        try:
            traj.write_csv(args.out, args.stride)
        except OSError as exc:
            raise CliError("io", f"cannot write {args.out}: {exc.strerror}", EXIT_USAGE) from None
    out = verdict.to_dict()
    out["ratios"] = [float(r) for r in verdict.ratios()]
    out["terminal_state"] = [float(v) for v in traj.states[-1]]
    out["T"] = float(traj.times[-1])
    _write_json(args.verdict, out)
    return EXIT_OK


COMMANDS = {"validate": cmd_validate, "synth-tripartite": cmd_synth_tripartite,
            "synth-sign": cmd_synth_sign, "simulate": cmd_simulate, "verify": cmd_verify}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except CliError as exc:
        msg = str(exc).replace("\n", " ")
        print(f"ERROR:{exc.code}:{msg}", file=sys.stderr)
        return exc.status


def main() -> None:
    sys.exit(run())
