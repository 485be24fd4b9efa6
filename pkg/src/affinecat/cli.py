"""Command line interface: ``affinecat <command> ...``.

Exit codes are 0 on success, 1 when a checked property fails and 2 when
the input is malformed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import cptp, tennent
from .circuit import CircuitError, interpret, parse_circuit, qubit_signature
from .isometry import FunctionMor, InjectionMor, qubit_count
from .linalg import ToleranceConfig, matrix_from_json, matrix_to_json
from .smc import Dilation
from .stinespring import (StinespringDilation, channel_of_dilation, connect_dilations,
                          connection_residual, dilate, pad_to_power_of_two)
from .verify import SUITES, run_all

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Malformed or unreadable input; maps to exit code 2."""


def _read(path: str) -> str:
    try:
        return sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _parse_params(items) -> dict:
    params = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--param expects NAME=MATRIX, got {item!r}")
        obj = _load_json(value[1:]) if value.startswith("@") else json.loads(value)
        params[name] = matrix_from_json(obj)
    return params


def _load_circuit(path: str, args):
    return parse_circuit(_read(path), params=_parse_params(getattr(args, "param", None)),
                         qubits=getattr(args, "qubits", False))


def _load_channel(path: str, args) -> cptp.CptpMor:
    """A channel from a ``.qc`` circuit, channel JSON or dilation JSON."""
    if path.endswith(".qc"):
        return interpret(_load_circuit(path, args))
    obj = _load_json(path)
    if isinstance(obj, dict) and "isometry" in obj:
        return channel_of_dilation(StinespringDilation.from_json(obj))
    return cptp.CptpMor.from_json(obj)


def _load_dilation(path: str) -> StinespringDilation:
    return StinespringDilation.from_json(_load_json(path))


def _emit(obj) -> None:
    print(json.dumps(obj))


def cmd_dilate(args, tol):
    d = dilate(_load_channel(args.channel, args), tol)
    _emit(d.to_json())
    return EXIT_OK


def cmd_choi(args, tol):
    circuit = _load_circuit(args.circuit, args)
    channel = interpret(circuit)
    out = channel.to_json()
    if args.qubits:
        n_in, n_out = qubit_signature(circuit)
        out["qubits"] = {"dom": n_in, "cod": n_out}
    _emit(out)
    return EXIT_OK if cptp.is_cptp(channel.choi, channel.dom, channel.cod, tol).ok else EXIT_FAIL


def cmd_eq(args, tol):
    f, g = _load_channel(args.a, args), _load_channel(args.b, args)
    if (f.dom, f.cod) != (g.dom, g.cod):
        equal, dist = False, float("inf")
    else:
        dist = cptp.channel_distance(f, g)
        equal = dist <= tol.atol
    if args.json:
        _emit({"equal": equal, "distance": dist})
    else:
        print(f"{'equal' if equal else 'different'} (Choi distance {dist:.3e})")
    return EXIT_OK if equal else EXIT_FAIL


def cmd_connect(args, tol):
    d1, d2 = _load_dilation(args.d1), _load_dilation(args.d2)
    try:
        conn = connect_dilations(d1, d2, tol)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    residual = connection_residual(d1, d2, conn)
    _emit({"ancilla": conn.ancilla, "left": conn.left.to_json(), "right": conn.right.to_json(),
           "residual": residual})
    return EXIT_OK if residual <= tol.atol else EXIT_FAIL


def cmd_pad2(args, tol):
    d = _load_dilation(args.dilation)
    padded = pad_to_power_of_two(d)
    dist = cptp.channel_distance(channel_of_dilation(padded), channel_of_dilation(d))
    out = padded.to_json()
    if args.qubits:
        out["qubits"] = {"dom": qubit_count(d.dom), "cod": qubit_count(d.cod),
                         "ancilla": qubit_count(padded.ancilla)}
    _emit(out)
    return EXIT_OK if dist <= tol.atol else EXIT_FAIL


def cmd_tennent_embed(args, tol):
    obj = _load_json(args.source)
    if isinstance(obj, dict) and "ancilla" in obj:
        try:
            a = int(obj["ancilla"])
            h = InjectionMor(int(obj["dom"]), int(obj["cod"]) * a, tuple(obj["map"]))
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed dilation JSON: {exc}") from None
        t = tennent.normalize_dilation(Dilation(h.dom, int(obj["cod"]), a, h))
    else:
        t = tennent.from_injection(FunctionMor.from_json(obj))
    out = t.to_json()
    if args.choi:
        out["choi"] = matrix_to_json(tennent.to_cptp(t).choi)
    _emit(out)
    return EXIT_OK


def cmd_tennent_check(args, tol):
    t = tennent.TennentMor.from_json(_load_json(args.morphism))
    channel = tennent.to_cptp(t)
    f, q = tennent.recover_map(channel), tennent.recover_relation(channel)
    ok = f == t.map and q == t.relation and t.relation.num_classes <= t.dom
    if args.json:
        _emit({"passed": ok, "map": list(f), "classes": list(q.classes),
               "ancilla": t.relation.num_classes})
    else:
        print(f"{'ok' if ok else 'FAILED'}: map {list(f)}, classes {list(q.classes)}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args, tol):
    unknown = set(args.suite or []) - set(SUITES)
    if unknown:
        raise InputError(f"unknown suite(s): {', '.join(sorted(unknown))}")
    results = run_all(seed=args.seed, dims=args.dims, names=args.suite, workers=args.workers)
    if args.json:
        _emit([r.to_json() for r in results])
    else:
        for r in results:
            status = "PASS" if r.passed else "FAIL"
            print(f"{status} {r.suite:26s} max_deviation={r.max_deviation:.3e} "
                  f"seed={r.seed} ({r.elapsed:.2f}s)")
            for note in r.notes:
                print(f"     {note}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--atol", type=float, default=1e-9, help="absolute tolerance (default 1e-9)")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    circuit_opts = argparse.ArgumentParser(add_help=False)
    circuit_opts.add_argument("--qubits", action="store_true", help="require two-dimensional wires")
    circuit_opts.add_argument("--param", action="append", metavar="NAME=MATRIX",
                              help="bind a circuit parameter to matrix JSON, or @file.json")

    parser = argparse.ArgumentParser(prog="affinecat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dilate", parents=[common, circuit_opts], help="minimal Stinespring dilation")
    p.add_argument("channel", help="channel JSON, dilation JSON or .qc circuit")
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("choi", parents=[common, circuit_opts], help="interpret a circuit as a channel")
    p.add_argument("circuit")
    p.set_defaults(func=cmd_choi)

    p = sub.add_parser("eq", parents=[common, circuit_opts], help="compare two channels")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_eq)

    p = sub.add_parser("connect", parents=[common], help="connect two dilations of one channel")
    p.add_argument("d1")
    p.add_argument("d2")
    p.set_defaults(func=cmd_connect)

    p = sub.add_parser("pad2", parents=[common], help="pad a dilation ancilla to a power of two")
    p.add_argument("dilation")
    p.add_argument("--qubits", action="store_true", help="also report sizes as qubit counts")
    p.set_defaults(func=cmd_pad2)

    p = sub.add_parser("tennent", help="Tennent morphisms")
    tsub = p.add_subparsers(dest="tennent_command", required=True)
    q = tsub.add_parser("embed", parents=[common],
                        help="Tennent morphism of an injection or normal form of an injective dilation")
    q.add_argument("source")
    q.add_argument("--choi", action="store_true", help="include the Choi matrix of the image channel")
    q.set_defaults(func=cmd_tennent_embed)
    q = tsub.add_parser("check", parents=[common], help="recover a Tennent morphism from its channel")
    q.add_argument("morphism")
    q.set_defaults(func=cmd_tennent_check)

    p = sub.add_parser("verify", parents=[common], help="run the property suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=int, default=4, help="largest object size drawn (default 4)")
    p.add_argument("--suite", action="append", choices=sorted(SUITES), help="run only this suite")
    p.add_argument("--workers", type=int, default=1, help="suites run in parallel threads")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INPUT
    try:
        tol = ToleranceConfig(atol=args.atol)
        return args.func(args, tol)
    except (InputError, CircuitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, json.JSONDecodeError) as exc:
        # includes dimension, isometry and CPTP validation failures of the input
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
