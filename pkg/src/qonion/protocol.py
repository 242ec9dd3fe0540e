"""Multi-actor onion-routing engine over a fixture-backed group action.

A chain is ordered sender-first: chain[0] is the sender, chain[-1] the
receiver, everything between an intermediary.  The j-register travels
receiver -> ... -> sender picking up one forward shift per actor, then back,
shedding the intermediaries' shifts; hop h is the h-th hand-off of in-transit
registers, so a length-L chain has hops 0..2(L-1)-1 and hop 0 is
receiver -> last intermediary.

Per-shot randomness is one SplitMix64 stream seeded from the master stream,
with a fixed draw order: main measurement, key-uncompute measurement, then
(when a message rides along) the message measurement.  Identical
(config, seed) therefore reproduce transcripts byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .qsim import PermutationGate, RegisterLayout, StateVector
from .rng import SplitMix64
from .scheme import ActionTable, CycleAction, act, bundled_action_table, load_action_table
from .sobol import MAX_DIMENSION, scramble_masks, sobol_point

SENDER = "sender"
INTERMEDIARY = "intermediary"
RECEIVER = "receiver"

DEFAULT_MESSAGE_WIDTH = 4


# ---------------------------------------------------------------------------
# actors and session keys
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SessionKey:
    """Shared j-invariant between two neighbors, symmetric by construction."""

    pair: tuple[str, str]
    j: int


def dh_session_key(table: ActionTable, x: str, y: str) -> SessionKey:
    """Diffie-Hellman key act_x(act_y(j0)), asserted equal in both orders."""
    ax = CycleAction(table, x)
    ay = CycleAction(table, y)
    j_xy = act(ax, act(ay, table.j0, 1), 1)
    j_yx = act(ay, act(ax, table.j0, 1), 1)
    if j_xy != j_yx:
        raise RuntimeError(f"session key asymmetry for ({x}, {y}): {j_xy} != {j_yx}")
    return SessionKey(pair=(x, y), j=j_xy)


@dataclass(frozen=True)
class Actor:
    """A chain participant: its secret cycle action, role, and neighbor keys."""

    name: str
    action: CycleAction
    role: str
    session_keys: dict[str, SessionKey] = field(default_factory=dict)
    omega: int | None = None
    big_omega: int | None = None


def build_chain(
    table: ActionTable, names: list[str], omega: int | None = None, big_omega: int | None = None,
) -> list[Actor]:
    """Actors for a chain, sender first; the receiver holds omega and Omega."""
    if len(names) < 3:
        raise ConfigError(f"chain: need at least 3 actors, got {len(names)}")
    if len(set(names)) != len(names):
        raise ConfigError("chain: actor names must be distinct")
    for name in names:
        table.cycle(name)  # raises FixtureError on unknown actors
    actors = []
    for i, name in enumerate(names):
        role = SENDER if i == 0 else RECEIVER if i == len(names) - 1 else INTERMEDIARY
        keys = {}
        for neighbor_idx in (i - 1, i + 1):
            if 0 <= neighbor_idx < len(names):
                neighbor = names[neighbor_idx]
                keys[neighbor] = dh_session_key(table, name, neighbor)
        actors.append(
            Actor(
                name=name,
                action=CycleAction(table, name),
                role=role,
                session_keys=keys,
                omega=omega if role == RECEIVER else None,
                big_omega=big_omega if role == RECEIVER else None,
            )
        )
    return actors


# ---------------------------------------------------------------------------
# message circuits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MessageCircuit:
    """Product of RX rotations keyed by a j-invariant.

    Angle k is 2*pi times coordinate k of the Sobol' point at index 2^K + j,
    K = ceil(log2 p).
    """

    key_j: int
    width: int
    angles: tuple[float, ...]

    @classmethod
    def for_key(
        cls, table: ActionTable, j: int, width: int, scramble_seed: int | None = None,
    ) -> "MessageCircuit":
        if not 1 <= width <= MAX_DIMENSION:
            raise ConfigError(f"message width {width} outside 1..{MAX_DIMENSION}")
        k_bits = max(1, math.ceil(math.log2(table.p)))
        shift = scramble_masks(width, scramble_seed) if scramble_seed is not None else None
        point = sobol_point((1 << k_bits) + j, width, shift)
        return cls(key_j=j, width=width, angles=tuple(2.0 * math.pi * x for x in point))


def message_encrypt(circuit: MessageCircuit, state: StateVector, register: str = "message") -> None:
    reg = state.layout.register(register)
    if reg.width != circuit.width:
        raise ValueError(f"circuit width {circuit.width} != register width {reg.width}")
    for k in range(circuit.width):
        state.apply_rx(circuit.angles[k], reg.offset + k)


def message_decrypt(circuit: MessageCircuit, state: StateVector, register: str = "message") -> None:
    reg = state.layout.register(register)
    if reg.width != circuit.width:
        raise ValueError(f"circuit width {circuit.width} != register width {reg.width}")
    for k in reversed(range(circuit.width)):
        state.apply_rx(-circuit.angles[k], reg.offset + k)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def shift_gate(table: ActionTable, actor: str, width: int, direction: int = 1) -> PermutationGate:
    """Permutation |j> -> |g*j> over 2^width basis states, identity off the j-set."""
    if (1 << width) < table.p:
        raise ValueError(f"width {width} cannot hold residues mod {table.p}")
    cycle = table.cycle(actor)
    perm = np.arange(1 << width, dtype=np.int64)
    r = len(cycle)
    for i, j in enumerate(cycle):
        perm[j] = cycle[(i + direction) % r]
    return PermutationGate(perm)


def uncompute_key(i: int, omega: int, measured_j: int, receiver: CycleAction) -> int:
    """Strip the receiver's i+omega shifts from a measured j-invariant."""
    return act(receiver, measured_j, -(i + omega))


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RunConfig:
    procedure: int = 3
    chain: tuple[str, ...] = ("a", "b", "c", "d", "e")
    omega: int = 0
    big_omega: int = 1
    message_bits: tuple[int, ...] | None = None
    seed: int = 0
    shots: int = 1
    fixture: str | None = None
    transmit_index: bool = False
    scrambled_sobol: bool = False

    _FIELDS = {
        "procedure", "chain", "omega", "Omega", "message_bits", "seed", "shots",
        "fixture", "transmit_index", "scrambled_sobol",
    }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config: expected a JSON object")
        unknown = set(data) - cls._FIELDS
        if unknown:
            raise ConfigError(f"config.{sorted(unknown)[0]}: unknown field")

        def _int(name, value, minimum=None):
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"config.{name}: expected an integer, got {value!r}")
            if minimum is not None and value < minimum:
                raise ConfigError(f"config.{name}: must be >= {minimum}, got {value}")
            return value

        procedure = _int("procedure", data.get("procedure", 3))
        if procedure not in (1, 3, 4):
            raise ConfigError(f"config.procedure: must be 1, 3 or 4, got {procedure}")
        chain = data.get("chain", ["a", "b", "c", "d", "e"])
        if (not isinstance(chain, (list, tuple)) or len(chain) < 3
                or any(not isinstance(n, str) for n in chain)):
            raise ConfigError("config.chain: expected a list of at least 3 actor names")
        message_bits = data.get("message_bits")
        if message_bits is not None:
            if (not isinstance(message_bits, (list, tuple)) or not message_bits
                    or any(b not in (0, 1) for b in message_bits)):
                raise ConfigError("config.message_bits: expected a non-empty list of 0/1")
            message_bits = tuple(int(b) for b in message_bits)
        fixture = data.get("fixture")
        if fixture is not None and not isinstance(fixture, str):
            raise ConfigError("config.fixture: expected a path string")
        for flag in ("transmit_index", "scrambled_sobol"):
            if not isinstance(data.get(flag, False), bool):
                raise ConfigError(f"config.{flag}: expected a boolean")
        return cls(
            procedure=procedure,
            chain=tuple(chain),
            omega=_int("omega", data.get("omega", 0), minimum=0),
            big_omega=_int("Omega", data.get("Omega", 1), minimum=1),
            message_bits=message_bits,
            seed=_int("seed", data.get("seed", 0)),
            shots=_int("shots", data.get("shots", 1), minimum=1),
            fixture=fixture,
            transmit_index=data.get("transmit_index", False),
            scrambled_sobol=data.get("scrambled_sobol", False),
        )

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: invalid JSON: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "procedure": self.procedure,
            "chain": list(self.chain),
            "omega": self.omega,
            "Omega": self.big_omega,
            "message_bits": list(self.message_bits) if self.message_bits is not None else None,
            "seed": self.seed,
            "shots": self.shots,
            "fixture": self.fixture,
            "transmit_index": self.transmit_index,
            "scrambled_sobol": self.scrambled_sobol,
        }

    def load_table(self) -> ActionTable:
        if self.fixture is None:
            return bundled_action_table()
        return load_action_table(self.fixture)


@dataclass
class Transcript:
    """Ordered record of one configured run: events, per-shot outcomes, statistics."""

    procedure: int
    config: dict
    events: list[dict]
    shots: list[dict]
    stats: dict

    def to_dict(self) -> dict:
        return {
            "procedure": self.procedure,
            "config": self.config,
            "events": self.events,
            "shots": self.shots,
            "stats": self.stats,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    def validate(self) -> None:
        seqs = [event["seq"] for event in self.events]
        if seqs != sorted(seqs) or len(set(seqs)) != len(seqs):
            raise ValueError("transcript events are not strictly ordered")
        for event in self.events:
            if event["kind"] == "handoff" and not (event.get("from") and event.get("to")):
                raise ValueError("hand-off event without matching endpoints")


class _EventLog:
    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self.events: list[dict] = []

    def add(self, kind: str, **payload) -> None:
        if self.enabled:
            self.events.append({"seq": len(self.events), "kind": kind, **payload})


# ---------------------------------------------------------------------------
# Procedure 1: classical walkthrough
# ---------------------------------------------------------------------------

def run_procedure1(table: ActionTable, chain: list[str]) -> Transcript:
    """Classical key pass: forward shifts receiver->sender, inverse on return."""
    actors = build_chain(table, list(chain))
    log = _EventLog()
    sender, receiver = actors[0], actors[-1]
    route = list(reversed(actors))  # receiver first

    value = table.j0
    log.add("publish", value=value, note="public base point")
    hop = 0
    for position, actor in enumerate(route):
        before = value
        value = act(actor.action, value, 1)
        log.add("oracle", actor=actor.name, oracle="act", direction="forward",
                value_in=before, value_out=value)
        if position + 1 < len(route):
            log.add("handoff", hop=hop, to=route[position + 1].name, value=value,
                    **{"from": route[position].name})
            hop += 1
    for position in range(1, len(route)):
        current = route[len(route) - position]
        nxt = route[len(route) - position - 1]
        log.add("handoff", hop=hop, to=nxt.name, value=value, **{"from": current.name})
        hop += 1
        before = value
        value = act(nxt.action.inverse(), value, 1)
        log.add("oracle", actor=nxt.name, oracle="act", direction="inverse",
                value_in=before, value_out=value)
    expected = act(sender.action, table.j0, 1)
    log.add("recovered_key", actor=receiver.name, value=value)
    return Transcript(
        procedure=1,
        config={"procedure": 1, "chain": list(chain)},
        events=log.events,
        shots=[],
        stats={"recovered_key": value, "expected_key": expected,
               "key_matches": value == expected},
    )


# ---------------------------------------------------------------------------
# Procedures 3 and 4: quantum runs
# ---------------------------------------------------------------------------

def _index_width(values: int) -> int:
    return max(1, math.ceil(math.log2(values)))


def _prepare_index(state: StateVector, count: int, log: _EventLog, actor: str) -> None:
    """Uniform superposition over {0..count-1} on the index register."""
    q = state.layout.register("index").width
    if count == (1 << q):
        state.apply_h_register("index")
        log.add("prepare", actor=actor, registers="index", method="hadamard", states=count)
    elif 2 * count > (1 << q):
        state.apply_h_register("index")
        theta = state.grover_filter(count, "index", "ancilla")
        log.add("prepare", actor=actor, registers="index", method="hadamard+grover",
                states=count, theta=theta)
    else:
        # unreachable when q = ceil(log2(count)) except for count = 1
        state.prepare_uniform_prefix(count, "index")
        log.add("prepare", actor=actor, registers="index", method="direct", states=count)


def _run_shots_procedure3(table, actors, config, evolve):
    """Shot loop shared by the clean and intercepted Procedure-3 paths."""
    sender, receiver = actors[0], actors[-1]
    n_bits = _index_width(table.p)
    expected_key = act(sender.action, table.j0, 1)
    inverse_shift = shift_gate(table, receiver.name, n_bits, direction=-1)
    scramble_seed = config.seed if config.scrambled_sobol else None

    master = SplitMix64(config.seed)
    shot_seeds = master.spawn_seeds(config.shots)

    events: list[dict] = []
    state = None
    measured_registers = ["index", "ancilla", "j"]
    shots = []
    histogram: dict[str, int] = {}
    key_counts: dict[int, int] = {}

    cached_probs = None
    cached_cum = None
    for shot in range(config.shots):
        rng = SplitMix64(shot_seeds[shot])
        if state is None or evolve.per_shot:
            state, shot_events = evolve(shot)
            if shot == 0:
                events = shot_events
        if evolve.per_shot:
            outcome, _ = state.measure(measured_registers, rng)
        else:
            if cached_probs is None:
                cached_probs = state.marginal_probs(measured_registers)
                cached_cum = np.cumsum(cached_probs)
            pick = int(np.searchsorted(cached_cum, rng.random() * cached_cum[-1], side="right"))
            pick = min(pick, cached_probs.size - 1)
            # decode with the same first-register-most-significant packing as measure()
            outcome = {}
            shift = sum(state.layout.register(n).width for n in measured_registers)
            for name in measured_registers:
                reg = state.layout.register(name)
                shift -= reg.width
                outcome[name] = (pick >> shift) & ((1 << reg.width) - 1)

        i_val, anc_val, j_val = outcome["index"], outcome["ancilla"], outcome["j"]
        bitstring = _key_bitstring(state.layout, outcome)
        steps = i_val + config.omega

        # quantum uncompute on a fresh j-only state, as the receiver would run it
        j_layout = RegisterLayout([("j", n_bits)])
        j_state = StateVector(j_layout)
        j_state.load_value("j", j_val)
        for _ in range(steps):
            j_state.apply_permutation(inverse_shift, "j")
        key_outcome, _ = j_state.measure(["j"], rng)
        recovered = key_outcome["j"]
        classical = uncompute_key(i_val, config.omega, j_val, receiver.action)
        if recovered != classical:
            raise RuntimeError(
                f"uncompute mismatch: quantum {recovered} vs classical {classical}"
            )

        record = {
            "shot": shot,
            "seed": shot_seeds[shot],
            "index": i_val,
            "ancilla": anc_val,
            "j": j_val,
            "bitstring": bitstring,
            "uncompute_steps": steps,
            "recovered_key": recovered,
        }
        if config.message_bits is not None:
            record["message"] = _decrypt_message(
                table, state, outcome, recovered, config, scramble_seed, rng,
            )
        shots.append(record)
        histogram[bitstring] = histogram.get(bitstring, 0) + 1
        key_counts[recovered] = key_counts.get(recovered, 0) + 1

    stats = {
        "shots": config.shots,
        "expected_key": expected_key,
        "recovered_keys": {str(k): v for k, v in sorted(key_counts.items())},
        "all_keys_expected": set(key_counts) == {expected_key},
        "histogram": dict(sorted(histogram.items())),
    }
    return events, shots, stats


def _key_bitstring(layout: RegisterLayout, outcome: dict[str, int]) -> str:
    """Key-register bitstring (j, ancilla, index) regardless of a message register."""
    parts = []
    for name in ("j", "ancilla", "index"):
        reg = layout.register(name)
        parts.append(format(outcome[name], f"0{reg.width}b"))
    return " ".join(parts)


def _decrypt_message(table, state, outcome, recovered_key, config, scramble_seed, rng):
    """Split off the message register at the measured key outcome and decrypt it."""
    width = len(config.message_bits)
    reg = state.layout.register("message")
    rest_width = reg.offset
    rest_index = state.layout.pack(dict(outcome))
    vec = state.amps.reshape(1 << width, 1 << rest_width)[:, rest_index]
    norm = np.linalg.norm(vec)
    if norm < 1e-12:
        raise RuntimeError("message register has no support at the measured outcome")
    msg_layout = RegisterLayout([("message", width)])
    msg_state = StateVector(msg_layout)
    msg_state.amps = (vec / norm).astype(np.complex128)
    circuit = MessageCircuit.for_key(table, recovered_key, width, scramble_seed)
    message_decrypt(circuit, msg_state, "message")
    sent_value = _bits_to_int(config.message_bits)
    fidelity = float(abs(msg_state.amps[sent_value]) ** 2)
    measured, _ = msg_state.measure(["message"], rng)
    bits = [(measured["message"] >> k) & 1 for k in range(width)]
    return {"bits": bits, "fidelity": fidelity, "matches_sent": bits == list(config.message_bits)}


def _bits_to_int(bits) -> int:
    value = 0
    for k, b in enumerate(bits):
        value |= int(b) << k
    return value


def run_procedure3(
    table: ActionTable,
    chain: list[str],
    omega: int,
    big_omega: int,
    message_bits=None,
    seed: int = 0,
    shots: int = 1,
    transmit_index: bool = False,
    scrambled_sobol: bool = False,
    interceptor=None,
) -> Transcript:
    """Windowed-superposition run: the receiver spreads the index over
    {0..Omega-1}, pre-shifts by omega, and recovers the sender's key from a
    single measurement plus i+omega inverse shifts."""
    config = RunConfig(
        procedure=3, chain=tuple(chain), omega=omega, big_omega=big_omega,
        message_bits=tuple(message_bits) if message_bits is not None else None,
        seed=seed, shots=shots, transmit_index=transmit_index,
        scrambled_sobol=scrambled_sobol,
    )
    actors = build_chain(table, list(chain), omega=omega, big_omega=big_omega)
    if not 0 <= omega < table.r:
        raise ConfigError(f"config.omega: must be in 0..{table.r - 1}, got {omega}")
    if not 1 <= big_omega <= table.r - omega:
        raise ConfigError(
            f"config.Omega: must be in 1..r-omega = 1..{table.r - omega}, got {big_omega}"
        )
    if message_bits is not None and len(message_bits) > MAX_DIMENSION:
        raise ConfigError(f"config.message_bits: at most {MAX_DIMENSION} bits supported")

    sender, receiver = actors[0], actors[-1]
    intermediaries = actors[1:-1]
    q_bits = _index_width(big_omega)
    n_bits = _index_width(table.p)
    registers = [("index", q_bits), ("ancilla", 1), ("j", n_bits)]
    if message_bits is not None:
        registers.append(("message", len(message_bits)))
    layout = RegisterLayout(registers)
    scramble_seed = seed if scrambled_sobol else None

    forward_reg = ["index", "j"] if transmit_index else ["j"]
    return_reg = forward_reg + (["message"] if message_bits is not None else [])

    def evolve(shot: int):
        log = _EventLog()
        state = StateVector(layout)
        _prepare_index(state, big_omega, log, receiver.name)
        state.load_value("j", table.j0)
        log.add("load", actor=receiver.name, register="j", value=table.j0)
        gate = shift_gate(table, receiver.name, n_bits)
        for _ in range(omega):
            state.apply_permutation(gate, "j")
        log.add("oracle", actor=receiver.name, oracle="shift", direction="forward", times=omega)
        state.apply_controlled_permutation(gate, "index", "j")
        log.add("oracle", actor=receiver.name, oracle="mapper", direction="forward")

        hop = 0
        route = [receiver] + list(reversed(intermediaries)) + [sender]
        for position in range(len(route) - 1):
            src, dst = route[position], route[position + 1]
            log.add("handoff", hop=hop, to=dst.name, registers=forward_reg,
                    **{"from": src.name})
            if interceptor is not None and interceptor(hop, forward_reg, state, shot):
                log.add("intercept", hop=hop)
            hop += 1
            state.apply_permutation(shift_gate(table, dst.name, n_bits), "j")
            log.add("oracle", actor=dst.name, oracle="shift", direction="forward", times=1)

        key_j = act(sender.action, table.j0, 1)
        if message_bits is not None:
            state.load_value("message", _bits_to_int(message_bits))
            log.add("message", actor=sender.name, op="load", bits=list(message_bits))
            message_encrypt(
                MessageCircuit.for_key(table, key_j, len(message_bits), scramble_seed),
                state, "message")
            log.add("message", actor=sender.name, op="encrypt", layer="sender-key")
            transport = sender.session_keys[intermediaries[0].name
                                            if intermediaries else receiver.name]
            message_encrypt(
                MessageCircuit.for_key(table, transport.j, len(message_bits), scramble_seed),
                state, "message")
            log.add("message", actor=sender.name, op="encrypt", layer="transport",
                    with_neighbor=transport.pair[1])

        back_route = [sender] + list(intermediaries) + [receiver]
        for position in range(len(back_route) - 1):
            src, dst = back_route[position], back_route[position + 1]
            log.add("handoff", hop=hop, to=dst.name, registers=return_reg,
                    **{"from": src.name})
            if interceptor is not None and interceptor(hop, return_reg, state, shot):
                log.add("intercept", hop=hop)
            hop += 1
            if dst.role == INTERMEDIARY:
                state.apply_permutation(shift_gate(table, dst.name, n_bits, direction=-1), "j")
                log.add("oracle", actor=dst.name, oracle="shift", direction="inverse", times=1)
                if message_bits is not None:
                    nxt = back_route[position + 2]
                    message_decrypt(
                        MessageCircuit.for_key(
                            table, dst.session_keys[src.name].j, len(message_bits),
                            scramble_seed),
                        state, "message")
                    message_encrypt(
                        MessageCircuit.for_key(
                            table, dst.session_keys[nxt.name].j, len(message_bits),
                            scramble_seed),
                        state, "message")
                    log.add("message", actor=dst.name, op="rewrap",
                            remove=src.name, add=nxt.name)
        if message_bits is not None:
            message_decrypt(
                MessageCircuit.for_key(
                    table, receiver.session_keys[back_route[-2].name].j,
                    len(message_bits), scramble_seed),
                state, "message")
            log.add("message", actor=receiver.name, op="unwrap", layer="transport")
            log.add("split", actor=receiver.name, register="message")
        log.add("measure", actor=receiver.name, registers=["index", "ancilla", "j"],
                note="per-shot outcomes recorded in shots")
        log.add("uncompute", actor=receiver.name, oracle="shift", direction="inverse",
                times="index+omega")
        return state, log.events

    evolve.per_shot = interceptor is not None
    events, shot_records, stats = _run_shots_procedure3(table, actors, config, evolve)
    transcript = Transcript(
        procedure=3, config=config.to_dict(), events=events, shots=shot_records, stats=stats,
    )
    transcript.validate()
    return transcript


def run_procedure4(
    table: ActionTable,
    chain: list[str],
    seed: int = 0,
    shots: int = 1,
    interceptor=None,
) -> Transcript:
    """Entire-cycle run: all r branches in superposition via the
    repeated-squaring mapper; the receiver's inverse mapper leaves the
    j-register holding the sender's key in every branch."""
    config = RunConfig(procedure=4, chain=tuple(chain), omega=0, big_omega=table.r,
                       seed=seed, shots=shots)
    actors = build_chain(table, list(chain))
    sender, receiver = actors[0], actors[-1]
    intermediaries = actors[1:-1]
    q_bits = _index_width(table.r)
    n_bits = _index_width(table.p)
    layout = RegisterLayout([("index", q_bits), ("ancilla", 1), ("j", n_bits)])
    expected_key = act(sender.action, table.j0, 1)

    def evolve(shot: int):
        log = _EventLog()
        state = StateVector(layout)
        _prepare_index(state, table.r, log, receiver.name)
        state.load_value("j", table.j0)
        log.add("load", actor=receiver.name, register="j", value=table.j0)
        gate = shift_gate(table, receiver.name, n_bits)
        state.apply_controlled_permutation(gate, "index", "j")
        log.add("oracle", actor=receiver.name, oracle="mapper", direction="forward",
                schedule="repeated-squaring")

        hop = 0
        route = [receiver] + list(reversed(intermediaries)) + [sender]
        for position in range(len(route) - 1):
            src, dst = route[position], route[position + 1]
            log.add("handoff", hop=hop, to=dst.name, registers=["j"], **{"from": src.name})
            if interceptor is not None and interceptor(hop, ["j"], state, shot):
                log.add("intercept", hop=hop)
            hop += 1
            state.apply_permutation(shift_gate(table, dst.name, n_bits), "j")
            log.add("oracle", actor=dst.name, oracle="shift", direction="forward", times=1)

        back_route = [sender] + list(intermediaries) + [receiver]
        for position in range(len(back_route) - 1):
            src, dst = back_route[position], back_route[position + 1]
            log.add("handoff", hop=hop, to=dst.name, registers=["j"], **{"from": src.name})
            if interceptor is not None and interceptor(hop, ["j"], state, shot):
                log.add("intercept", hop=hop)
            hop += 1
            if dst.role == INTERMEDIARY:
                state.apply_permutation(shift_gate(table, dst.name, n_bits, direction=-1), "j")
                log.add("oracle", actor=dst.name, oracle="shift", direction="inverse", times=1)
        state.apply_controlled_permutation(gate, "index", "j", inverse=True)
        log.add("oracle", actor=receiver.name, oracle="mapper", direction="inverse",
                schedule="repeated-squaring")
        log.add("measure", actor=receiver.name, registers=["j"],
                note="per-shot outcomes recorded in shots")
        return state, log.events

    master = SplitMix64(seed)
    shot_seeds = master.spawn_seeds(shots)
    per_shot = interceptor is not None
    state = None
    events: list[dict] = []
    shot_records = []
    key_counts: dict[int, int] = {}
    cached_probs = None
    cached_cum = None
    for shot in range(shots):
        rng = SplitMix64(shot_seeds[shot])
        if state is None or per_shot:
            state, shot_events = evolve(shot)
            if shot == 0:
                events = shot_events
        if per_shot:
            outcome, _ = state.measure(["j"], rng)
            j_val = outcome["j"]
        else:
            if cached_probs is None:
                cached_probs = state.marginal_probs(["j"])
                cached_cum = np.cumsum(cached_probs)
            pick = int(np.searchsorted(cached_cum, rng.random() * cached_cum[-1], side="right"))
            j_val = min(pick, cached_probs.size - 1)
        shot_records.append({"shot": shot, "seed": shot_seeds[shot], "j": j_val,
                             "recovered_key": j_val})
        key_counts[j_val] = key_counts.get(j_val, 0) + 1

    stats = {
        "shots": shots,
        "expected_key": expected_key,
        "recovered_keys": {str(k): v for k, v in sorted(key_counts.items())},
        "all_keys_expected": set(key_counts) == {expected_key},
        "deterministic": len(key_counts) == 1,
    }
    transcript = Transcript(
        procedure=4, config=config.to_dict(), events=events, shots=shot_records, stats=stats,
    )
    transcript.validate()
    return transcript


def run(config: RunConfig, interceptor=None) -> Transcript:
    """Dispatch a validated run configuration."""
    table = config.load_table()
    if config.procedure == 1:
        return run_procedure1(table, list(config.chain))
    if config.procedure == 3:
        return run_procedure3(
            table, list(config.chain), config.omega, config.big_omega,
            message_bits=config.message_bits, seed=config.seed, shots=config.shots,
            transmit_index=config.transmit_index, scrambled_sobol=config.scrambled_sobol,
            interceptor=interceptor,
        )
    if config.procedure == 4:
        return run_procedure4(
            table, list(config.chain), seed=config.seed, shots=config.shots,
            interceptor=interceptor,
        )
    raise ConfigError(f"config.procedure: must be 1, 3 or 4, got {config.procedure}")
