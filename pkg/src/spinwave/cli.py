"""Command-line front end.

Exit codes: 0 success, 2 argument or validation error, 3 dense-cap exceeded,
4 internal cross-check failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .ansatz import build_circuit, build_product_state, expand
from .core import ChainConfig, InvariantViolation, ModeIndex, SpinwaveError
from .dispersion import (
    Estimator,
    dispersion_curve,
    points_to_csv,
    points_to_records,
    rms_report,
    rms_vs_reference,
)
from .magnon import build_magnon_state
from .sampling import Mitigation, NoiseModel
from .statevector import CapExceeded, index_to_bitstring

log = logging.getLogger("spinwave")

EXIT_OK, EXIT_USAGE, EXIT_CAP, EXIT_INVARIANT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return sorted(set(values))


def _write(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        Path(output).write_text(text)


def _config(n: int, args) -> ChainConfig:
    return ChainConfig(n, coupling=args.coupling, spacing=args.spacing)


def _csv_table(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return "" if x is None else f"{x:.12g}"


def _emit_curves(curves: dict[int, list], args, metadata: dict | None = None) -> None:
    """Write per-N CSVs plus a combined JSON into a directory, or one stream to stdout."""
    combined = {"metadata": metadata or {}, "curves": {str(n): points_to_records(p) for n, p in curves.items()}}
    meta_lines = "".join(f"# {k}={json.dumps(v)}\n" for k, v in (metadata or {}).items())
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        for n, points in curves.items():
            (out / f"{args.command}_N{n}.csv").write_text(meta_lines + points_to_csv(points))
        (out / f"{args.command}.json").write_text(json.dumps(combined, indent=2) + "\n")
        return
    if args.format == "json":
        sys.stdout.write(json.dumps(combined, indent=2) + "\n")
        return
    text = meta_lines
    for n, points in curves.items():
        if len(curves) > 1:
            text += f"# n_sites={n}\n"
        text += points_to_csv(points)
    sys.stdout.write(text)


def _check_n(values: list[int], minimum: int = 2) -> None:
    bad = [n for n in values if n < minimum]
    if bad:
        raise UsageError(f"chain lengths must be >= {minimum}, got {bad}")


def cmd_dispersion(args) -> None:
    _check_n(args.n)
    curves = {}
    for n in args.n:
        curves[n] = dispersion_curve(_config(n, args), args.estimator, sign=args.sign)
        log.info("dispersion N=%d done", n)
    _emit_curves(curves, args, {"command": "dispersion", "estimator": args.estimator})


def cmd_rms(args) -> None:
    odd = [n for n in args.n if n % 2]
    if odd:
        raise UsageError(f"rms needs even chain lengths, got {odd}")
    _check_n(args.n, minimum=4)
    reports = [rms_report(n) for n in args.n]
    fields = ("n_sites", "epsilon_closed", "epsilon_bruteforce")
    if args.format == "json":
        text = json.dumps([{f: getattr(r, f) for f in fields} for r in reports], indent=2) + "\n"
    else:
        text = _csv_table(fields, [[r.n_sites, _fmt(r.epsilon_closed), _fmt(r.epsilon_bruteforce)] for r in reports])
    _write(text, args.output)


def cmd_amplitudes(args) -> None:
    _check_n([args.n])
    config = _config(args.n, args)
    mode = ModeIndex(args.m, args.sign)
    exact = build_magnon_state(config, mode).state.amplitudes
    ansatz = expand(build_product_state(config, mode)).amplitudes
    fields = ("index", "bitstring", "flips", "exact_magnitude", "ansatz_magnitude",
              "exact_probability", "ansatz_probability")
    rows = []
    for k in range(len(exact)):
        rows.append({
            "index": k,
            "bitstring": index_to_bitstring(k, args.n),
            "flips": bin(k).count("1"),
            "exact_magnitude": float(abs(exact[k])),
            "ansatz_magnitude": float(abs(ansatz[k])),
            "exact_probability": float(abs(exact[k]) ** 2),
            "ansatz_probability": float(abs(ansatz[k]) ** 2),
        })
    for key in ("exact_probability", "ansatz_probability"):
        total = sum(r[key] for r in rows)
        if abs(total - 1.0) > 1e-10:
            raise InvariantViolation(f"{key} sums to {total!r}")
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        text = _csv_table(fields, [[r["index"], r["bitstring"], r["flips"]] + [_fmt(r[f]) for f in fields[3:]] for r in rows])
    _write(text, args.output)


def _load_noise(args, n: int) -> NoiseModel | None:
    if args.noise is None:
        return None
    path = Path(args.noise)
    if not path.is_file():
        raise UsageError(f"noise file not found: {path}")
    try:
        return NoiseModel.from_json(path, n)
    except json.JSONDecodeError as exc:
        raise UsageError(f"noise file is not valid JSON: {exc}") from None


def cmd_sample(args) -> None:
    _check_n(args.n)
    if args.shots < 100:
        raise UsageError("--shots must be >= 100")
    curves = {}
    summary = {}
    noises = {}
    for n in args.n:
        noise = _load_noise(args, n)
        noises[n] = noise
        points = dispersion_curve(
            _config(n, args), Estimator.SAMPLED, shots=args.shots, noise=noise,
            mitigation=args.mitigation, seed=args.seed, sign=args.sign,
        )
        curves[n] = points
        log.info("sampled N=%d (%d modes)", n, len(points))
        summary[str(n)] = {
            "rms_vs_theory": rms_vs_reference(points, "theory"),
            "rms_vs_ansatz": rms_vs_reference(points, "ansatz"),
        }
    noisy = any(nm is not None and not nm.is_identity() for nm in noises.values())
    metadata = {
        "command": "sample",
        "label": "simulated-noise" if noisy else "noiseless-simulation",
        "n_sites": args.n,
        "shots_per_basis": args.shots,
        "mitigation": args.mitigation,
        "seed": args.seed,
        "sign": args.sign,
        "coupling": args.coupling,
        "spacing": args.spacing,
        "noise_file": args.noise,
        "noise": {str(n): (None if nm is None else {"p01": nm.p01.tolist(), "p10": nm.p10.tolist()})
                  for n, nm in noises.items()},
        "rms": summary,
    }
    _emit_curves(curves, args, metadata)


def cmd_emit_circuit(args) -> None:
    _check_n([args.n])
    _write(build_circuit(_config(args.n, args), ModeIndex(args.m, args.sign)).to_text(), args.output)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinwave",
        description="Product-state spin-wave ansatz vs. exact magnon on a periodic Heisenberg chain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_list=True, fmt=True):
        if n_list:
            p.add_argument("--n", type=_int_list, required=True, help="chain length(s), comma separated")
        else:
            p.add_argument("--n", type=int, required=True, help="chain length")
        p.add_argument("--coupling", type=float, default=1.0, help="exchange coupling J (default 1)")
        p.add_argument("--spacing", type=float, default=1.0, help="lattice spacing a (default 1)")
        p.add_argument("--sign", choices=("plus", "minus"), default="plus", help="propagation direction tag")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout format")
        p.add_argument("-o", "--output", default=None,
                       help="output path (directory for dispersion/sample, file otherwise); default stdout")

    p = sub.add_parser("dispersion", help="theory vs. ansatz dispersion for m = 0..N/2")
    common(p)
    p.add_argument("--estimator", choices=[e.value for e in Estimator if e is not Estimator.SAMPLED],
                   default="closed_form", help="how the ansatz energy is evaluated")
    p.set_defaults(func=cmd_dispersion)

    p = sub.add_parser("rms", help="closed-form and brute-force RMS error for even N")
    common(p)
    p.set_defaults(func=cmd_rms)

    p = sub.add_parser("amplitudes", help="basis-state magnitudes of the exact magnon and the ansatz")
    common(p, n_list=False)
    p.add_argument("--m", type=int, default=1, help="mode number (default 1)")
    p.set_defaults(func=cmd_amplitudes)

    p = sub.add_parser("sample", help="shot-based dispersion with simulated readout noise")
    common(p)
    p.add_argument("--shots", type=int, default=10_000, help="shots per measurement basis")
    p.add_argument("--noise", default=None, help='JSON file {"p01": ..., "p10": ...}')
    p.add_argument("--mitigation", choices=[m.value for m in Mitigation], default="none")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("emit-circuit", help="gate list preparing the ansatz")
    common(p, n_list=False, fmt=False)
    p.add_argument("--m", type=int, default=1, help="mode number (default 1)")
    p.set_defaults(func=cmd_emit_circuit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (UsageError, SpinwaveError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
