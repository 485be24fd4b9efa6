"""A line-oriented circuit language and its interpretation as channels.

Grammar, one statement per line, ``#`` starts a comment::

    wire <name> <dim>                      input wire
    ancilla <name> <dim> <basis-index>     fresh wire prepared in |basis-index>
    param <name> <matrix-json>             default value for a $name gate
    gate <GATE> <wire> [<wire> ...]        apply a gate to the listed wires
    discard <name>                         trace out a wire

``<GATE>`` is a library name (``X``, ``Z``, ``H``, ``CNOT``, ``SWAP``,
``I``), ``inline:<matrix-json>``, a parameter ``$name``, or ``ctrl:<GATE>``
for the gate controlled by the first listed qubit wire.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import cptp
from .cptp import CptpMor
from .isometry import (IsometryMor, iso_compose, iso_identity, iso_tensor, ket, random_isometry,
                       symmetry)
from .linalg import DEFAULT_TOL, ToleranceConfig, as_matrix, is_isometry, matrix_from_json, matrix_to_json
from .stinespring import StinespringDilation, channel_of_dilation, dilate


class CircuitError(ValueError):
    """A circuit that parses but violates a wiring or dimension rule."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


class CircuitSyntaxError(CircuitError):
    pass


_SQ2 = 1 / math.sqrt(2)
GATES: dict[str, np.ndarray] = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "H": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=np.complex128),
}


def controlled(u) -> np.ndarray:
    """``|0><0| (x) I + |1><1| (x) U`` with the control qubit first."""
    u = np.asarray(u, dtype=np.complex128)
    d = u.shape[0]
    out = np.eye(2 * d, dtype=np.complex128)
    out[d:, d:] = u
    return out


GATES["CNOT"] = controlled(GATES["X"])
GATES["SWAP"] = np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]]


@dataclass(frozen=True)
class Wire:
    name: str
    dim: int


@dataclass(frozen=True, eq=False)
class Gate:
    """Gate application.  ``spec`` is the source token, ``matrix`` the resolved unitary."""

    spec: str
    targets: tuple[str, ...]
    matrix: np.ndarray = field(repr=False)
    line: int = 0

    def __eq__(self, other):
        return (isinstance(other, Gate) and self.spec == other.spec and self.targets == other.targets
                and np.array_equal(self.matrix, other.matrix))

    __hash__ = None


@dataclass(frozen=True)
class Ancilla:
    name: str
    dim: int
    index: int
    line: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Discard:
    name: str
    line: int = field(default=0, compare=False)


Instruction = Union[Gate, Ancilla, Discard]


@dataclass(frozen=True, eq=False)
class Param:
    name: str
    matrix: np.ndarray


@dataclass(frozen=True)
class Circuit:
    wires: tuple[Wire, ...]
    instructions: tuple[Instruction, ...] = ()
    params: tuple[Param, ...] = field(default=(), compare=False)

    @property
    def input_dim(self) -> int:
        return math.prod(w.dim for w in self.wires)

    def live_wires(self) -> list[Wire]:
        live = list(self.wires)
        for ins in self.instructions:
            if isinstance(ins, Ancilla):
                live.append(Wire(ins.name, ins.dim))
            elif isinstance(ins, Discard):
                live = [w for w in live if w.name != ins.name]
        return live

    @property
    def output_dim(self) -> int:
        return math.prod(w.dim for w in self.live_wires())

    def has_discards(self) -> bool:
        return any(isinstance(i, Discard) for i in self.instructions)

    def pure_prefix(self) -> "Circuit":
        """Instructions up to the first discard."""
        out = []
        for ins in self.instructions:
            if isinstance(ins, Discard):
                break
            out.append(ins)
        return Circuit(self.wires, tuple(out), self.params)


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


def _resolve_gate(token: str, params: dict, lineno: int, col: int) -> tuple[np.ndarray, int | None]:
    """Matrix of a gate token and its wire count (``None`` when it depends on wire dims)."""
    if token.startswith("ctrl:"):
        inner, arity = _resolve_gate(token[5:], params, lineno, col + 5)
        return controlled(inner), None if arity is None else arity + 1
    if token.startswith("$"):
        if token[1:] not in params:
            raise CircuitSyntaxError(f"unbound parameter {token}", lineno, col)
        return params[token[1:]], None
    if token in GATES:
        return GATES[token], GATES[token].shape[0].bit_length() - 1
    raise CircuitSyntaxError(f"unknown gate {token!r}", lineno, col)


def _parse_matrix(text: str, lineno: int, col: int) -> tuple[np.ndarray, int]:
    try:
        obj, end = json.JSONDecoder().raw_decode(text)
        m = matrix_from_json(obj)
    except ValueError as exc:
        raise CircuitSyntaxError(f"bad inline matrix: {exc}", lineno, col) from None
    return m, end


def parse_circuit(text: str, params: dict | None = None, qubits: bool = False) -> Circuit:
    """Parse circuit source into a validated :class:`Circuit`.

    ``params`` override ``param`` declarations.  With ``qubits=True`` every
    wire must be two-dimensional.
    """
    wires: list[Wire] = []
    instructions: list[Instruction] = []
    declared: dict[str, np.ndarray] = {}
    overrides = {k: as_matrix(v) for k, v in (params or {}).items()}
    live: dict[str, int] = {}
    dead: set[str] = set()

    def col_of(line, token, start=0):
        """1-based column of ``token`` as a whole word at or after ``start``."""
        m = re.compile(r"(?<!\S)" + re.escape(token) + r"(?!\S)").search(line, start)
        return m.start() + 1 if m else start + 1

    def col_at(line, k):
        """1-based column of the ``k``-th whitespace-separated token."""
        return [m.start() + 1 for m in re.finditer(r"\S+", line)][k]

    def new_wire(name, dim, lineno, line):
        if not _NAME.match(name):
            raise CircuitSyntaxError(f"invalid wire name {name!r}", lineno, col_at(line, 1))
        if name in live or name in dead:
            raise CircuitError(f"wire {name!r} already declared", lineno, col_at(line, 1))
        if qubits and dim != 2:
            raise CircuitError(f"qubit mode needs dimension 2, got {dim}", lineno, 1)
        live[name] = dim

    def int_arg(k, lineno, line, what, minimum):
        tok = line.split()[k]
        try:
            value = int(tok)
        except ValueError:
            raise CircuitSyntaxError(f"{what} must be an integer, got {tok!r}", lineno, col_at(line, k)) from None
        if value < minimum:
            raise CircuitSyntaxError(f"{what} must be >= {minimum}", lineno, col_at(line, k))
        return value

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        tokens = line.split()
        kw = tokens[0]
        if kw == "wire":
            if len(tokens) != 3:
                raise CircuitSyntaxError("usage: wire <name> <dim>", lineno, 1)
            if instructions:
                raise CircuitError("input wires must be declared before instructions", lineno, 1)
            dim = int_arg(2, lineno, line, "dimension", 1)
            new_wire(tokens[1], dim, lineno, line)
            wires.append(Wire(tokens[1], dim))
        elif kw == "ancilla":
            if len(tokens) != 4:
                raise CircuitSyntaxError("usage: ancilla <name> <dim> <basis-index>", lineno, 1)
            dim = int_arg(2, lineno, line, "dimension", 1)
            index = int_arg(3, lineno, line, "basis index", 0)
            if index >= dim:
                raise CircuitError(f"basis index {index} out of range for dimension {dim}", lineno, col_at(line, 3))
            new_wire(tokens[1], dim, lineno, line)
            instructions.append(Ancilla(tokens[1], dim, index, lineno))
        elif kw == "param":
            if len(tokens) < 3:
                raise CircuitSyntaxError("usage: param <name> <matrix-json>", lineno, 1)
            start = line.index(tokens[1]) + len(tokens[1])
            rest = line[start:].lstrip()
            m, end = _parse_matrix(rest, lineno, start + 1)
            if rest[end:].strip():
                raise CircuitSyntaxError("trailing text after parameter matrix", lineno, start + end + 1)
            declared[tokens[1]] = overrides.get(tokens[1], m)
        elif kw == "gate":
            if len(tokens) < 2:
                raise CircuitSyntaxError("usage: gate <GATE> <wires...>", lineno, 1)
            spec_col = line.index(tokens[1], len("gate")) + 1
            arity = None
            if tokens[1].startswith("inline:"):
                body = line[spec_col - 1 + len("inline:"):]
                m, end = _parse_matrix(body, lineno, spec_col + len("inline:"))
                spec = "inline:" + json.dumps(matrix_to_json(m))
                targets = body[end:].split()
            else:
                spec = tokens[1]
                m, arity = _resolve_gate(spec, {**declared, **overrides}, lineno, spec_col)
                targets = tokens[2:]
            if not targets:
                raise CircuitSyntaxError("gate needs at least one target wire", lineno, len(line) + 1)
            if arity is not None and len(targets) != arity:
                raise CircuitSyntaxError(f"gate {spec} takes {arity} wires, got {len(targets)}",
                                         lineno, spec_col)
            if len(set(targets)) != len(targets):
                raise CircuitError("gate targets must be distinct", lineno, spec_col)
            for t in targets:
                if t in dead:
                    raise CircuitError(f"wire {t!r} used after discard", lineno, col_of(line, t, spec_col))
                if t not in live:
                    raise CircuitError(f"unknown wire {t!r}", lineno, col_of(line, t, spec_col))
            d = math.prod(live[t] for t in targets)
            if m.shape != (d, d):
                raise CircuitError(
                    f"gate {tokens[1][:20]} is {m.shape[0]}x{m.shape[1]} but targets have dimension {d}",
                    lineno, spec_col)
            if not is_isometry(m, DEFAULT_TOL):
                raise CircuitError("gate matrix is not unitary", lineno, spec_col)
            instructions.append(Gate(spec, tuple(targets), as_matrix(m), lineno))
        elif kw == "discard":
            if len(tokens) != 2:
                raise CircuitSyntaxError("usage: discard <name>", lineno, 1)
            name = tokens[1]
            if name in dead:
                raise CircuitError(f"wire {name!r} discarded twice", lineno, col_at(line, 1))
            if name not in live:
                raise CircuitError(f"unknown wire {name!r}", lineno, col_at(line, 1))
            del live[name]
            dead.add(name)
            instructions.append(Discard(name, lineno))
        else:
            raise CircuitSyntaxError(f"unknown statement {kw!r}", lineno, 1)

    params_out = tuple(Param(k, v) for k, v in {**declared, **overrides}.items())
    return Circuit(tuple(wires), tuple(instructions), params_out)


def format_circuit(circuit: Circuit) -> str:
    """Source text that parses back to ``circuit``."""
    lines = [f"wire {w.name} {w.dim}" for w in circuit.wires]
    for p in circuit.params:
        lines.append(f"param {p.name} {json.dumps(matrix_to_json(p.matrix))}")
    for ins in circuit.instructions:
        if isinstance(ins, Ancilla):
            lines.append(f"ancilla {ins.name} {ins.dim} {ins.index}")
        elif isinstance(ins, Discard):
            lines.append(f"discard {ins.name}")
        else:
            lines.append(f"gate {ins.spec} {' '.join(ins.targets)}")
    return "\n".join(lines) + "\n"


def routing(dims: list[int], order: list[int]) -> IsometryMor:
    """Permutation isometry taking wires in ``dims`` order to ``order``.

    Built from adjacent symmetries ``id (x) sigma (x) id`` (bubble sort), so
    wire routing is expressed entirely with the braiding.
    """
    current = list(range(len(dims)))
    cur_dims = list(dims)
    total = math.prod(dims)
    out = iso_identity(total)
    target_pos = {w: k for k, w in enumerate(order)}
    changed = True
    while changed:
        changed = False
        for k in range(len(current) - 1):
            if target_pos[current[k]] > target_pos[current[k + 1]]:
                left = math.prod(cur_dims[:k])
                right = math.prod(cur_dims[k + 2:])
                step = iso_tensor(iso_tensor(iso_identity(left), symmetry(cur_dims[k], cur_dims[k + 1])),
                                  iso_identity(right))
                out = iso_compose(step, out)
                current[k], current[k + 1] = current[k + 1], current[k]
                cur_dims[k], cur_dims[k + 1] = cur_dims[k + 1], cur_dims[k]
                changed = True
    return out


def _gate_on(live: list[Wire], gate: Gate) -> IsometryMor:
    """``gate`` acting on its targets inside the product of ``live`` wires."""
    names = [w.name for w in live]
    dims = [w.dim for w in live]
    idx = [names.index(t) for t in gate.targets]
    rest = [k for k in range(len(live)) if k not in idx]
    order = idx + rest
    to_front = routing(dims, order)
    rest_dim = math.prod(dims[k] for k in rest)
    core = iso_tensor(IsometryMor.from_matrix(gate.matrix), iso_identity(rest_dim))
    back = IsometryMor(to_front.cod, to_front.dom, to_front.matrix.conj().T)
    return iso_compose(back, iso_compose(core, to_front))


def _pure_run(circuit: Circuit, allow_discards: bool):
    """Run the circuit keeping discarded wires alive; return isometry, wires, discarded names."""
    live = list(circuit.wires)
    v = iso_identity(circuit.input_dim)
    discarded: list[str] = []
    for ins in circuit.instructions:
        if isinstance(ins, Ancilla):
            v = iso_tensor(v, ket(ins.index, ins.dim))
            live.append(Wire(ins.name, ins.dim))
        elif isinstance(ins, Gate):
            v = iso_compose(_gate_on(live, ins), v)
        elif allow_discards:
            discarded.append(ins.name)
        else:
            raise CircuitError("interpret_pure needs a circuit without discards", ins.line)
    return v, live, discarded


def interpret_pure(circuit: Circuit) -> IsometryMor:
    """The isometry (input wires) -> (live wires) of a discard-free circuit."""
    v, _, _ = _pure_run(circuit, allow_discards=False)
    return v


def interpret_dilation(circuit: Circuit) -> StinespringDilation:
    """The whole circuit as one dilation: every discarded wire becomes ancilla."""
    v, live, discarded = _pure_run(circuit, allow_discards=True)
    kept = [k for k, w in enumerate(live) if w.name not in discarded]
    gone = [k for k, w in enumerate(live) if w.name in discarded]
    route = routing([w.dim for w in live], kept + gone)
    n = math.prod(live[k].dim for k in kept)
    a = math.prod(live[k].dim for k in gone)
    return StinespringDilation(circuit.input_dim, n, a, iso_compose(route, v))


def interpret(circuit: Circuit) -> CptpMor:
    """Channel of the circuit, discarding each wire where the program says so."""
    live = list(circuit.wires)
    channel = cptp.identity_channel(circuit.input_dim)
    for ins in circuit.instructions:
        dims = [w.dim for w in live]
        total = math.prod(dims)
        if isinstance(ins, Ancilla):
            prep = iso_tensor(iso_identity(total), ket(ins.index, ins.dim))
            channel = cptp.compose(cptp.from_isometry(prep), channel)
            live.append(Wire(ins.name, ins.dim))
        elif isinstance(ins, Gate):
            channel = cptp.compose(cptp.from_isometry(_gate_on(live, ins)), channel)
        else:
            k = next(i for i, w in enumerate(live) if w.name == ins.name)
            order = [i for i in range(len(live)) if i != k] + [k]
            to_back = routing(dims, order)
            discard = cptp.partial_trace_channel(total // live[k].dim, live[k].dim)
            channel = cptp.compose(discard, cptp.compose(cptp.from_isometry(to_back), channel))
            del live[k]
    return channel


def interpret_via_dilation(circuit: Circuit) -> CptpMor:
    return channel_of_dilation(interpret_dilation(circuit))


@dataclass
class DiscardReport:
    total_deviation: float
    partial_deviation: float
    trials: int

    @property
    def max_deviation(self) -> float:
        return max(self.total_deviation, self.partial_deviation)

    def passed(self, atol: float = 1e-9) -> bool:
        return self.max_deviation <= atol


def check_discard_equations(f, trials: int = 10, seed: int = 0,
                            tol: ToleranceConfig = DEFAULT_TOL) -> DiscardReport:
    """Numerical check of the discard equations for an isometry or a circuit.

    Discarding every output of ``E(f)`` must equal discarding every input,
    both as channels and on ``trials`` random density matrices.  Discarding
    a subset of outputs must agree with the channel rebuilt from its
    minimal dilation.
    """
    rng = np.random.default_rng(seed)
    if isinstance(f, Circuit):
        splits = _wire_splits(f)
        v = interpret_dilation(f).morphism if f.has_discards() else interpret_pure(f)
        if f.has_discards():
            splits = [(v.cod, 1)]
    else:
        v = f
        splits = [(d, v.cod // d) for d in range(1, v.cod + 1) if v.cod % d == 0]
    ev = cptp.from_isometry(v)
    total = cptp.channel_distance(cptp.compose(cptp.trace_channel(v.cod), ev), cptp.trace_channel(v.dom))
    for _ in range(trials):
        rho = cptp.random_density(v.dom, rng)
        total = max(total, abs(np.trace(v.matrix @ rho @ v.matrix.conj().T) - np.trace(rho)))
    partial = 0.0
    for keep, drop in splits:
        channel = cptp.compose(cptp.partial_trace_channel(keep, drop), ev)
        partial = max(partial, cptp.channel_distance(channel, channel_of_dilation(dilate(channel, tol))))
    return DiscardReport(float(total), float(partial), trials)


def _wire_splits(circuit: Circuit):
    dims = [w.dim for w in circuit.live_wires()]
    return [(math.prod(dims[:k]), math.prod(dims[k:])) for k in range(len(dims) + 1)]


def random_circuit(rng, max_wires: int = 3, max_gates: int = 6, max_discards: int = 2,
                   dims=(2, 3)) -> Circuit:
    """Random well-formed circuit; discards may occur between gates."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    n_in = int(rng.integers(1, max_wires + 1))
    wires = [Wire(f"w{k}", int(rng.choice(dims))) for k in range(n_in)]
    live = list(wires)
    instructions: list[Instruction] = []
    if n_in < max_wires and rng.random() < 0.7:
        d = int(rng.choice(dims))
        instructions.append(Ancilla("anc", d, int(rng.integers(0, d))))
        live.append(Wire("anc", d))
    n_gates = int(rng.integers(0, max_gates + 1))
    n_discards = int(rng.integers(0, min(max_discards, len(live)) + 1))
    steps = ["gate"] * n_gates + ["discard"] * n_discards
    rng.shuffle(steps)
    for step in steps:
        if step == "discard" or not live:
            if live:
                instructions.append(Discard(live.pop(int(rng.integers(len(live)))).name))
            continue
        k = int(rng.integers(1, min(2, len(live)) + 1))
        picked = [live[i] for i in rng.choice(len(live), size=k, replace=False)]
        d = math.prod(w.dim for w in picked)
        u = random_isometry(d, d, rng).matrix
        instructions.append(Gate("inline:" + json.dumps(matrix_to_json(u)),
                                 tuple(w.name for w in picked), as_matrix(u)))
    return Circuit(tuple(wires), tuple(instructions))


def qubit_signature(circuit: Circuit) -> tuple[int, int]:
    """``(input qubits, output qubits)`` of a qubit-only circuit."""
    wires = list(circuit.wires) + [Wire(i.name, i.dim) for i in circuit.instructions if isinstance(i, Ancilla)]
    if any(w.dim != 2 for w in wires):
        raise CircuitError("circuit has non-qubit wires")
    return len(circuit.wires), len(circuit.live_wires())
