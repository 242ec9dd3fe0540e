"""Isogeny-graph model: fixture-backed cycle actions and the cyclic scheme.

The group action on j-invariants is realized as precomputed cycle
permutations loaded from a JSON fixture (computing cycles from CM theory is
out of scope).  Residues outside the j-invariant set are fixed points of
every action.

The spectral side models the cyclic association scheme of order n: adjacency
classes A_s with (A_s)_{j,k} = 1 iff j-k = +-s (mod n), their intersection
numbers, common eigenprojectors, and the commuting walk unitaries e^{-itA}.

Boundary conventions (s = 0 and, for even n, s = n/2): writing C for the
directed-cycle matrix, the generic class is A_s = C^s + C^-s while the
boundary classes are A_s = C^s alone.  The literal "omega^{st} + omega^{-st}"
eigenvalue formula and the "p_{i,j}(k) = 1 iff i+-j = +-k" intersection rule
both double-count there; everything below is derived from the C-power
representation, which the brute-force oracles in the test suite confirm.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import FixtureError

SPECTRAL_TOL = 1e-9


# ---------------------------------------------------------------------------
# fixture-backed group action
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActionTable:
    """Validated fixture: prime p, j-invariant set, base point, named cycles."""

    discriminant: int
    p: int
    r: int
    j_set: tuple[int, ...]
    j0: int
    cycles: dict[str, tuple[int, ...]]
    _positions: dict[str, dict[int, int]] = field(repr=False)

    @property
    def actors(self) -> tuple[str, ...]:
        return tuple(self.cycles)

    def cycle(self, actor: str) -> tuple[int, ...]:
        try:
            return self.cycles[actor]
        except KeyError:
            raise FixtureError(f"unknown actor {actor!r}; fixture has {sorted(self.cycles)}") from None

    def position(self, actor: str, j: int) -> int | None:
        return self._positions[actor].get(j)


def action_table_from_dict(data: dict) -> ActionTable:
    """Build and validate an ActionTable from decoded fixture JSON."""
    for field in ("discriminant", "p", "j0", "cycles"):
        if field not in data:
            raise FixtureError(f"fixture missing field {field!r}")
    p = data["p"]
    j0 = data["j0"]
    cycles = data["cycles"]
    if not isinstance(p, int) or p <= 2:
        raise FixtureError(f"p must be an integer > 2, got {p!r}")
    if not isinstance(cycles, dict) or not cycles:
        raise FixtureError("cycles must be a non-empty mapping")
    j_set: frozenset[int] | None = None
    positions: dict[str, dict[int, int]] = {}
    r = None
    for name, cycle in sorted(cycles.items()):
        if not isinstance(cycle, (list, tuple)) or not cycle:
            raise FixtureError(f"cycle {name!r} must be a non-empty list")
        if any(not isinstance(j, int) or not 0 <= j < p for j in cycle):
            raise FixtureError(f"cycle {name!r} has residues outside 0..{p - 1}")
        if len(set(cycle)) != len(cycle):
            raise FixtureError(f"cycle {name!r} repeats a j-invariant (not a permutation)")
        if cycle[0] != j0:
            raise FixtureError(f"cycle {name!r} starts at {cycle[0]}, expected base point {j0}")
        if j_set is None:
            j_set = frozenset(cycle)
            r = len(cycle)
        elif frozenset(cycle) != j_set:
            raise FixtureError(f"cycle {name!r} does not visit the same j-invariant set")
        positions[name] = {j: i for i, j in enumerate(cycle)}
    return ActionTable(
        discriminant=data["discriminant"],
        p=p,
        r=r,
        j_set=tuple(sorted(j_set)),
        j0=j0,
        cycles={name: tuple(cycle) for name, cycle in cycles.items()},
        _positions=positions,
    )


def load_action_table(path: str | os.PathLike) -> ActionTable:
    """Load and validate a fixture file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise FixtureError(f"cannot read fixture {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(f"fixture {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FixtureError(f"fixture {path} must be a JSON object")
    return action_table_from_dict(data)


def bundled_action_table() -> ActionTable:
    """The packaged discriminant -167 / F_311 fixture."""
    resource = importlib.resources.files("qonion.data").joinpath("fixture_167.json")
    return action_table_from_dict(json.loads(resource.read_text()))


@dataclass(frozen=True)
class CycleAction:
    """One actor's walk along its cycle, forward or inverse."""

    table: ActionTable
    actor: str
    direction: int = 1  # +1 forward, -1 inverse

    def __post_init__(self):
        self.table.cycle(self.actor)
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")

    def inverse(self) -> "CycleAction":
        return CycleAction(self.table, self.actor, -self.direction)


def act(action: CycleAction, j: int, steps: int = 1) -> int:
    """Residue `steps` positions along the actor's cycle; identity off the j-set."""
    table = action.table
    if not 0 <= j < table.p:
        raise ValueError(f"residue {j} outside 0..{table.p - 1}")
    pos = table.position(action.actor, j)
    if pos is None:
        return j
    cycle = table.cycles[action.actor]
    return cycle[(pos + action.direction * steps) % table.r]


def compose_actions(x: CycleAction, y: CycleAction, j: int) -> int:
    """Apply y one step, then x one step (equal to the swapped order on any fixture)."""
    if x.table != y.table:
        raise ValueError("cannot compose actions from different tables")
    return act(x, act(y, j, 1), 1)


# ---------------------------------------------------------------------------
# cyclic association scheme
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SchemeMatrix:
    """Adjacency class A_s of the cyclic scheme of order n."""

    n: int
    s: int
    entries: np.ndarray

    @property
    def degree(self) -> int:
        return int(self.entries[0].sum())


def _check_class_index(n: int, s: int) -> None:
    if n < 3:
        raise ValueError(f"scheme order must be >= 3, got {n}")
    if not 0 <= s <= n // 2:
        raise ValueError(f"class index {s} outside 0..{n // 2} for order {n}")


def adjacency(n: int, s: int) -> SchemeMatrix:
    """A_s with (A_s)_{j,k} = 1 iff j-k in {s, -s} (mod n)."""
    _check_class_index(n, s)
    diff = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    entries = ((diff == s % n) | (diff == (-s) % n)).astype(int)
    return SchemeMatrix(n=n, s=s, entries=entries)


def _class_c_powers(n: int, s: int) -> dict[int, int]:
    """A_s as a polynomial in the directed-cycle matrix C: exponent -> coefficient."""
    if s == 0 or 2 * s == n:
        return {s % n: 1}
    return {s % n: 1, (-s) % n: 1}


def intersection_numbers(n: int) -> np.ndarray:
    """Closed-form table P[i, j, k] with A_i A_j = sum_k P[i, j, k] A_k.

    Computed exactly by expanding the product in powers of the directed cycle;
    the coefficient of C^k (0 <= k <= n/2) is the coefficient of A_k.
    """
    _check_class_index(n, 0)
    d = n // 2
    table = np.zeros((d + 1, d + 1, d + 1), dtype=int)
    for i in range(d + 1):
        pi = _class_c_powers(n, i)
        for j in range(d + 1):
            pj = _class_c_powers(n, j)
            product: dict[int, int] = {}
            for ei, ci in pi.items():
                for ej, cj in pj.items():
                    e = (ei + ej) % n
                    product[e] = product.get(e, 0) + ci * cj
            for k in range(d + 1):
                table[i, j, k] = product.get(k, 0)
    return table


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Common eigenstructure of the order-n cyclic scheme.

    eigenvalues[s, t] is the eigenvalue of A_s on the eigenspace of the
    idempotent E_t; multiplicity(t) gives that eigenspace's dimension.
    """

    n: int
    omega: complex
    eigenvalues: np.ndarray  # shape (d+1, d+1), real
    idempotents: np.ndarray  # shape (d+1, n, n), complex

    def multiplicity(self, t: int) -> int:
        return 1 if (t == 0 or 2 * t == self.n) else 2


def spectral(n: int) -> SpectralData:
    """Closed-form eigenvalues and spectral idempotents of the order-n scheme."""
    _check_class_index(n, 0)
    d = n // 2
    omega = np.exp(2j * np.pi / n)
    k = np.arange(n)
    # powers of the directed cycle as index shifts: (C^m)_{i,j} = 1 iff j - i = m
    eigenvalues = np.zeros((d + 1, d + 1))
    for s in range(d + 1):
        halved = s == 0 or 2 * s == n
        for t in range(d + 1):
            val = omega ** (s * t) if halved else omega ** (s * t) + omega ** (-s * t)
            eigenvalues[s, t] = val.real
    idempotents = np.zeros((d + 1, n, n), dtype=complex)
    diff = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n  # (C^m)_{i,j}: m = j - i
    for t in range(d + 1):
        if t == 0 or 2 * t == n:
            weights = omega ** (k * t)
        else:
            weights = omega ** (k * t) + omega ** (-k * t)
        idempotents[t] = weights[diff] / n
    return SpectralData(n=n, omega=omega, eigenvalues=eigenvalues, idempotents=idempotents)


def walk_unitary(matrix: SchemeMatrix, t: float) -> np.ndarray:
    """Continuous-time walk unitary e^{-itA}, via the spectral decomposition."""
    if not math.isfinite(t):
        raise ValueError("walk time must be finite")
    data = spectral(matrix.n)
    d = matrix.n // 2
    unitary = np.zeros((matrix.n, matrix.n), dtype=complex)
    for idx in range(d + 1):
        unitary += np.exp(-1j * t * data.eigenvalues[matrix.s, idx]) * data.idempotents[idx]
    return unitary


def product_walk(n: int, word: list[tuple[int, float]]) -> np.ndarray:
    """Ordered product of walk unitaries over one scheme (order-independent)."""
    unitary = np.eye(n, dtype=complex)
    for s, t in word:
        unitary = walk_unitary(adjacency(n, s), t) @ unitary
    return unitary


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def export_graph(subject, fmt: str = "dot", cycle: str | None = None, union: bool = False) -> str:
    """Render a fixture cycle (or all cycles) or a scheme matrix as DOT or CSV.

    ActionTable subjects emit directed successor edges over the j-invariant
    set, in cycle order; SchemeMatrix subjects emit the undirected class graph
    (DOT) or the full 0/1 adjacency rows (CSV).
    """
    if fmt not in ("dot", "csv"):
        raise ValueError(f"unknown export format {fmt!r} (expected 'dot' or 'csv')")
    if isinstance(subject, ActionTable):
        if union:
            names = list(subject.actors)
        else:
            if cycle is None:
                raise ValueError("cycle name required unless union=True")
            names = [cycle]
        edge_lists = {name: subject.cycle(name) for name in names}
        if fmt == "dot":
            lines = ["digraph cycles {"]
            for j in sorted(subject.j_set):
                lines.append(f"  {j};")
            for name in names:
                cyc = edge_lists[name]
                for i, j in enumerate(cyc):
                    lines.append(f'  {j} -> {cyc[(i + 1) % len(cyc)]} [label="{name}"];')
            lines.append("}")
            return "\n".join(lines) + "\n"
        # CSV: successor adjacency per cycle, vertices in cycle order
        lines = []
        for name in names:
            cyc = edge_lists[name]
            lines.append("cycle," + name)
            lines.append("vertex,successor")
            for i, j in enumerate(cyc):
                lines.append(f"{j},{cyc[(i + 1) % len(cyc)]}")
        return "\n".join(lines) + "\n"
    if isinstance(subject, SchemeMatrix):
        if fmt == "dot":
            lines = [f"graph class_{subject.s} {{"]
            for v in range(subject.n):
                lines.append(f"  {v};")
            for i in range(subject.n):
                for j in range(i + 1, subject.n):
                    if subject.entries[i, j]:
                        lines.append(f"  {i} -- {j};")
            lines.append("}")
            return "\n".join(lines) + "\n"
        return "\n".join(",".join(str(v) for v in row) for row in subject.entries) + "\n"
    raise TypeError(f"cannot export object of type {type(subject).__name__}")


def suggested_walk_length(class_number: int, q: int, c: float = 1.0) -> float:
    """Diagnostic walk-length bound c * log(h) / log(log(q)); not asserted anywhere."""
    if class_number < 2 or q < 3:
        raise ValueError("need class_number >= 2 and q >= 3")
    return c * math.log(class_number) / math.log(math.log(q))
