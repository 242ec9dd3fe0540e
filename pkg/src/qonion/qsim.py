"""Minimal statevector engine with exactly the gates the protocol needs.

Bit conventions, frozen for cross-run transcript stability:

* registers occupy contiguous qubit ranges in declaration order, the first
  declared register at the least-significant bits;
* within a register, bit 0 is least significant;
* a basis index is the sum of register values shifted to their offsets;
* printed bitstrings list registers in reverse declaration order, each in
  MSB-first binary, space-separated (so an (index, ancilla, j) layout prints
  as "<j bits> <ancilla bit> <index bits>").

Permutation oracles are applied as index remaps, never as dense matrices;
controlled permutation cascades apply the square-and-multiply schedule (index
bit k controls the 2^k-th power).  Global phase is not normalized away;
comparisons go through `fidelity`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceLimitError
from .rng import SplitMix64

DEFAULT_MAX_QUBITS = 26

_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class Register:
    name: str
    width: int
    offset: int

    @property
    def mask(self) -> int:
        return ((1 << self.width) - 1) << self.offset


class RegisterLayout:
    """Named qubit registers with fixed packing order."""

    def __init__(self, registers: list[tuple[str, int]], max_qubits: int = DEFAULT_MAX_QUBITS):
        if not registers:
            raise ValueError("layout needs at least one register")
        names = [name for name, _ in registers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        offset = 0
        regs = []
        for name, width in registers:
            if width < 1:
                raise ValueError(f"register {name!r} must have width >= 1")
            regs.append(Register(name, width, offset))
            offset += width
        if offset > max_qubits:
            raise ResourceLimitError(f"{offset} qubits exceed the {max_qubits}-qubit guard")
        self.registers = tuple(regs)
        self.total_qubits = offset
        self._by_name = {reg.name: reg for reg in regs}

    def register(self, name: str) -> Register:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValueError(f"no register named {name!r}") from None

    def names(self) -> tuple[str, ...]:
        return tuple(reg.name for reg in self.registers)

    def value(self, name: str, basis_index: int) -> int:
        reg = self.register(name)
        return (basis_index >> reg.offset) & ((1 << reg.width) - 1)

    def pack(self, values: dict[str, int]) -> int:
        index = 0
        for name, value in values.items():
            reg = self.register(name)
            if not 0 <= value < (1 << reg.width):
                raise ValueError(f"value {value} does not fit register {name!r}")
            index |= value << reg.offset
        return index

    def bitstring(self, values: dict[str, int]) -> str:
        parts = []
        for reg in reversed(self.registers):
            parts.append(format(values[reg.name], f"0{reg.width}b"))
        return " ".join(parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, RegisterLayout) and self.registers == other.registers

    def __repr__(self) -> str:
        inner = ", ".join(f"{r.name}[{r.width}]" for r in self.registers)
        return f"RegisterLayout({inner})"


class PermutationGate:
    """A bijection of register basis states |x> -> |perm[x]>."""

    def __init__(self, perm):
        perm = np.asarray(perm, dtype=np.int64)
        size = perm.shape[0]
        if size < 1 or (size & (size - 1)):
            raise ValueError("permutation length must be a power of two")
        sorted_vals = np.sort(perm)
        if not np.array_equal(sorted_vals, np.arange(size)):
            raise ValueError("not a permutation of 0..2^w-1")
        self.perm = perm
        self.inv = np.argsort(perm)
        self.width = size.bit_length() - 1

    @classmethod
    def identity(cls, width: int) -> "PermutationGate":
        return cls(np.arange(1 << width))

    @classmethod
    def from_mapping(cls, width: int, func) -> "PermutationGate":
        return cls(np.array([func(x) for x in range(1 << width)], dtype=np.int64))

    def inverse(self) -> "PermutationGate":
        return PermutationGate(self.inv)

    def power(self, n: int) -> "PermutationGate":
        """n-fold composition (negative n uses the inverse)."""
        base = self.perm if n >= 0 else self.inv
        n = abs(n)
        result = np.arange(1 << self.width)
        while n:
            if n & 1:
                result = base[result]
            base = base[base]
            n >>= 1
        return PermutationGate(result)


class StateVector:
    """Complex amplitudes over a register layout, |0...0> at creation."""

    def __init__(self, layout: RegisterLayout):
        self.layout = layout
        self.amps = np.zeros(1 << layout.total_qubits, dtype=np.complex128)
        self.amps[0] = 1.0
        self._indices = None

    # -- internals ---------------------------------------------------------

    def _idx(self) -> np.ndarray:
        if self._indices is None:
            self._indices = np.arange(self.amps.size, dtype=np.int64)
        return self._indices

    def _check_qubit(self, q: int) -> None:
        if not 0 <= q < self.layout.total_qubits:
            raise ValueError(f"qubit index {q} outside 0..{self.layout.total_qubits - 1}")

    def _axis_view(self, q: int) -> np.ndarray:
        return self.amps.reshape(-1, 2, 1 << q)

    # -- elementary gates ----------------------------------------------------

    def apply_h(self, q: int) -> None:
        self._check_qubit(q)
        view = self._axis_view(q)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = (lo + hi) * _INV_SQRT2
        view[:, 1, :] = (lo - hi) * _INV_SQRT2

    def apply_x(self, q: int) -> None:
        self._check_qubit(q)
        view = self._axis_view(q)
        lo = view[:, 0, :].copy()
        view[:, 0, :] = view[:, 1, :]
        view[:, 1, :] = lo

    def apply_rx(self, theta: float, q: int) -> None:
        self._check_qubit(q)
        view = self._axis_view(q)
        cos, msin = math.cos(theta / 2.0), -1j * math.sin(theta / 2.0)
        lo = view[:, 0, :].copy()
        hi = view[:, 1, :]
        view[:, 0, :] = cos * lo + msin * hi
        view[:, 1, :] = msin * lo + cos * hi

    def apply_phase(self, theta: float, q: int) -> None:
        self._check_qubit(q)
        self._axis_view(q)[:, 1, :] *= np.exp(1j * theta)

    def apply_cx(self, control: int, target: int) -> None:
        self._check_qubit(control)
        self._check_qubit(target)
        if control == target:
            raise ValueError("control and target must differ")
        idx = self._idx()
        sel = ((idx >> control) & 1).astype(bool) & (((idx >> target) & 1) == 0)
        i0 = idx[sel]
        i1 = i0 | (1 << target)
        tmp = self.amps[i0].copy()
        self.amps[i0] = self.amps[i1]
        self.amps[i1] = tmp

    def apply_mcp(self, theta: float, controls: list[int], target: int) -> None:
        for q in list(controls) + [target]:
            self._check_qubit(q)
        mask = 1 << target
        for q in controls:
            mask |= 1 << q
        idx = self._idx()
        sel = (idx & mask) == mask
        self.amps[sel] *= np.exp(1j * theta)

    # -- register-level operations -------------------------------------------

    def load_value(self, register: str, value: int) -> None:
        """X-flip the register's set bits (|0...0> -> |value> on a fresh register)."""
        reg = self.layout.register(register)
        if not 0 <= value < (1 << reg.width):
            raise ValueError(f"value {value} does not fit register {register!r}")
        for bit in range(reg.width):
            if (value >> bit) & 1:
                self.apply_x(reg.offset + bit)

    def apply_h_register(self, register: str) -> None:
        reg = self.layout.register(register)
        for bit in range(reg.width):
            self.apply_h(reg.offset + bit)

    def apply_permutation(self, gate: PermutationGate, register: str) -> None:
        """Basis relabeling |x> -> |perm(x)> on the register, identity elsewhere."""
        reg = self.layout.register(register)
        if gate.width != reg.width:
            raise ValueError(
                f"gate width {gate.width} does not match register {register!r} width {reg.width}"
            )
        idx = self._idx()
        x = (idx >> reg.offset) & ((1 << reg.width) - 1)
        src = (idx & ~reg.mask) | (gate.inv[x] << reg.offset)
        self.amps = self.amps[src]

    def apply_controlled_permutation(
        self, gate: PermutationGate, control_register: str, target_register: str,
        inverse: bool = False,
    ) -> None:
        """Mapper cascade |i>|x> -> |i>|perm^i(x)| (perm^-i when inverse).

        Control bit k applies the 2^k-th power of the permutation, computed by
        repeated squaring.
        """
        ctrl = self.layout.register(control_register)
        reg = self.layout.register(target_register)
        if gate.width != reg.width:
            raise ValueError(
                f"gate width {gate.width} does not match register {target_register!r} "
                f"width {reg.width}"
            )
        step = gate.inverse() if inverse else gate
        idx = self._idx()
        x = (idx >> reg.offset) & ((1 << reg.width) - 1)
        base = idx & ~reg.mask
        power = step
        for bit in range(ctrl.width):
            sel = ((idx >> (ctrl.offset + bit)) & 1).astype(bool)
            src = idx.copy()
            src[sel] = base[sel] | (power.inv[x[sel]] << reg.offset)
            self.amps = self.amps[src]
            if bit + 1 < ctrl.width:
                power = power.power(2)

    def comparator_mark(self, bound: int, index_register: str, ancilla_register: str) -> None:
        """Flip the ancilla on basis states whose index value is < bound (self-inverse)."""
        reg = self.layout.register(index_register)
        anc = self.layout.register(ancilla_register)
        if anc.width != 1:
            raise ValueError("ancilla register must be a single qubit")
        if not 0 < bound <= (1 << reg.width):
            raise ValueError(f"bound {bound} outside 1..{1 << reg.width}")
        idx = self._idx()
        ival = (idx >> reg.offset) & ((1 << reg.width) - 1)
        src = np.where(ival < bound, idx ^ (1 << anc.offset), idx)
        self.amps = self.amps[src]

    def prepare_uniform_prefix(self, bound: int, index_register: str) -> None:
        """Directly initialize (1/sqrt(bound)) sum_{i<bound} |i> on a fresh state."""
        reg = self.layout.register(index_register)
        if not 0 < bound <= (1 << reg.width):
            raise ValueError(f"bound {bound} outside 1..{1 << reg.width}")
        if abs(self.amps[0] - 1.0) > 1e-12:
            raise ValueError("direct preparation requires the |0...0> state")
        self.amps[0] = 0.0
        self.amps[np.arange(bound) << reg.offset] = 1.0 / math.sqrt(bound)

    def grover_filter(self, bound: int, index_register: str, ancilla_register: str) -> float | None:
        """One exact partial-phase Grover iteration removing index values >= bound.

        Assumes the index register is in the uniform superposition over all
        2^Q values; afterwards it is uniform over {0..bound-1} with the
        ancilla disentangled at |0>.  No-op when bound = 2^Q.  Returns the
        rotation angle used, or None when skipped.
        """
        reg = self.layout.register(index_register)
        anc = self.layout.register(ancilla_register)
        q = reg.width
        if not 0 < bound <= (1 << q):
            raise ValueError(f"bound {bound} outside 1..{1 << q}")
        if bound == (1 << q):
            return None
        if 2 * bound <= (1 << q):
            raise ValueError(
                f"exact filter needs bound > 2^(Q-1) = {1 << (q - 1)}, got {bound}"
            )
        marginal = self.marginal_probs([index_register])
        if np.abs(marginal - 1.0 / (1 << q)).max() > 1e-6:
            raise ValueError("exact filter requires a uniform index superposition")
        theta = math.acos(1.0 - (1 << q) / (2.0 * bound))
        self.comparator_mark(bound, index_register, ancilla_register)
        self.apply_phase(theta, anc.offset)
        self.comparator_mark(bound, index_register, ancilla_register)
        index_bits = [reg.offset + b for b in range(q)]
        for b in index_bits:
            self.apply_h(b)
        for b in index_bits:
            self.apply_x(b)
        self.apply_mcp(theta, index_bits[:-1], index_bits[-1])
        for b in index_bits:
            self.apply_x(b)
        for b in index_bits:
            self.apply_h(b)
        if self.marginal_probs([ancilla_register])[1] > 1e-12:
            raise AssertionError("filter left the ancilla entangled")
        return theta

    # -- measurement and comparison -------------------------------------------

    def _outcome_keys(self, registers: list[str]) -> tuple[np.ndarray, int]:
        idx = self._idx()
        keys = np.zeros_like(idx)
        width = 0
        for name in registers:
            reg = self.layout.register(name)
            keys = (keys << reg.width) | ((idx >> reg.offset) & ((1 << reg.width) - 1))
            width += reg.width
        return keys, width

    def marginal_probs(self, registers: list[str]) -> np.ndarray:
        """Joint Born probabilities of the named registers, packed first-name-first."""
        keys, width = self._outcome_keys(registers)
        return np.bincount(keys, weights=np.abs(self.amps) ** 2, minlength=1 << width)

    def measure(self, registers: list[str], rng: SplitMix64) -> tuple[dict[str, int], "StateVector"]:
        """Born-rule sample of the named registers; collapses and renormalizes."""
        keys, width = self._outcome_keys(registers)
        probs = np.bincount(keys, weights=np.abs(self.amps) ** 2, minlength=1 << width)
        cum = np.cumsum(probs)
        pick = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        pick = min(pick, (1 << width) - 1)
        outcome = {}
        shift = width
        for name in registers:
            reg = self.layout.register(name)
            shift -= reg.width
            outcome[name] = (pick >> shift) & ((1 << reg.width) - 1)
        keep = keys == pick
        self.amps = np.where(keep, self.amps, 0.0)
        self.amps /= math.sqrt(probs[pick])
        return outcome, self

    def fidelity(self, other: "StateVector") -> float:
        if self.layout != other.layout:
            raise ValueError("fidelity requires identical layouts")
        return float(abs(np.vdot(self.amps, other.amps)) ** 2)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        dup = StateVector.__new__(StateVector)
        dup.layout = self.layout
        dup.amps = self.amps.copy()
        dup._indices = self._indices
        return dup


def new_state(layout: RegisterLayout) -> StateVector:
    """|0...0> over the layout."""
    return StateVector(layout)
