"""Dense statevector simulator over named registers.

Qubit ``0`` is the least-significant bit of the basis index.  Registers are
packed in the order they are listed, so the first register occupies the
lowest qubits.  Every oracle here is a permutation of basis states; gates
act in place on a ``complex128`` array.
"""

from __future__ import annotations

from typing import Callable, Iterable, Sequence

import numpy as np

MAX_QUBITS = 24
NORM_TOL = 1e-10

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


class RegisterLayout:
    def __init__(self, registers: Sequence[tuple[str, int]]):
        names = [name for name, _ in registers]
        if len(set(names)) != len(names):
            raise ValueError("register names must be unique")
        self.registers = [(name, int(w)) for name, w in registers]
        self.offsets: dict[str, int] = {}
        self.widths: dict[str, int] = {}
        off = 0
        for name, w in self.registers:
            if w < 0:
                raise ValueError(f"negative width for {name}")
            self.offsets[name] = off
            self.widths[name] = w
            off += w
        if off > MAX_QUBITS:
            raise ValueError(f"{off} qubits exceeds the cap of {MAX_QUBITS}")
        self.num_qubits = off

    def __contains__(self, name):
        return name in self.offsets

    def __repr__(self):
        return f"RegisterLayout({self.registers})"

    def qubits(self, name: str) -> list[int]:
        if name not in self.offsets:
            raise KeyError(f"no register named {name!r}")
        off = self.offsets[name]
        return list(range(off, off + self.widths[name]))

    def mask(self, name: str) -> int:
        return ((1 << self.widths[name]) - 1) << self.offsets[name]

    def pack(self, **values: int) -> int:
        idx = 0
        for name, v in values.items():
            w = self.widths[name]
            if not 0 <= v < (1 << w):
                raise ValueError(f"value {v} does not fit register {name}")
            idx |= v << self.offsets[name]
        return idx

    def unpack(self, index: int) -> dict[str, int]:
        return {name: (index >> self.offsets[name]) & ((1 << w) - 1) for name, w in self.registers}

    def values(self, name: str, index: np.ndarray) -> np.ndarray:
        """Vectorised register extraction over an array of basis indices."""
        return (index >> self.offsets[name]) & ((1 << self.widths[name]) - 1)


class StateVector:
    def __init__(self, layout: RegisterLayout, amplitudes: np.ndarray | None = None):
        self.layout = layout
        size = 1 << layout.num_qubits
        if amplitudes is None:
            self.amps = np.zeros(size, dtype=np.complex128)
            self.amps[0] = 1.0
        else:
            amps = np.asarray(amplitudes, dtype=np.complex128)
            if amps.shape != (size,):
                raise ValueError(f"expected {size} amplitudes, got {amps.shape}")
            self.amps = amps.copy()

    @classmethod
    def basis(cls, layout: RegisterLayout, **values: int) -> "StateVector":
        st = cls(layout)
        st.amps[0] = 0.0
        st.amps[layout.pack(**values)] = 1.0
        return st

    @property
    def num_qubits(self) -> int:
        return self.layout.num_qubits

    def copy(self) -> "StateVector":
        return StateVector(self.layout, self.amps)

    def norm(self) -> float:
        return float(np.vdot(self.amps, self.amps).real)

    def check_norm(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise AssertionError(f"state norm drifted to {self.norm()!r}")

    def indices(self) -> np.ndarray:
        return _arange(self.num_qubits)


_ARANGE_CACHE: dict[int, np.ndarray] = {}


def _arange(nq: int) -> np.ndarray:
    a = _ARANGE_CACHE.get(nq)
    if a is None:
        a = np.arange(1 << nq, dtype=np.int64)
        a.setflags(write=False)
        _ARANGE_CACHE[nq] = a
    return a


def _resolve(state: StateVector, target) -> list[int]:
    """A register name, a qubit index, or an iterable of either."""
    if isinstance(target, str):
        qs = state.layout.qubits(target)
    elif isinstance(target, (int, np.integer)):
        qs = [int(target)]
    else:
        qs = []
        for t in target:
            qs.extend(_resolve(state, t))
    for q in qs:
        if not 0 <= q < state.num_qubits:
            raise ValueError(f"qubit {q} out of range for {state.num_qubits} qubits")
    return qs


def _apply_1q(state: StateVector, q: int, mat: np.ndarray) -> None:
    view = state.amps.reshape(-1, 2, 1 << q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    view[:, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1


def apply_hadamard(state: StateVector, target) -> StateVector:
    for q in _resolve(state, target):
        _apply_1q(state, q, _H)
    return state


def apply_x(state: StateVector, target) -> StateVector:
    for q in _resolve(state, target):
        view = state.amps.reshape(-1, 2, 1 << q)
        view[:, [0, 1], :] = view[:, [1, 0], :]
    return state


def _control_mask(state, controls) -> np.ndarray:
    idx = state.indices()
    m = 0
    for c in _resolve(state, controls):
        m |= 1 << c
    return (idx & m) == m


def apply_controlled_x(state: StateVector, controls, target: int) -> StateVector:
    """Multi-controlled NOT (CNOT / Toffoli)."""
    (t,) = _resolve(state, target)
    cs = _resolve(state, controls)
    if t in cs:
        raise ValueError("target qubit is also a control")
    idx = state.indices()
    sel = _control_mask(state, cs)
    perm = np.where(sel, idx ^ (1 << t), idx)
    return apply_basis_map(state, perm)


def apply_cnot(state, control, target):
    return apply_controlled_x(state, [control], target)


def apply_toffoli(state, c1, c2, target):
    return apply_controlled_x(state, [c1, c2], target)


def apply_cphase(state: StateVector, qubits, angle: float = np.pi) -> StateVector:
    """Multiply by e^{i*angle} every basis state with all listed qubits set."""
    sel = _control_mask(state, qubits)
    state.amps[sel] *= np.exp(1j * angle)
    return state


def apply_phase_flip(state: StateVector, marked: np.ndarray) -> StateVector:
    """Negate the amplitude of every basis index where ``marked`` is true."""
    state.amps[np.asarray(marked, dtype=bool)] *= -1
    return state


def apply_basis_map(state: StateVector, perm: np.ndarray) -> StateVector:
    """|i> -> |perm[i]> for a bijection ``perm`` on basis indices."""
    perm = np.asarray(perm)
    if perm.shape != state.amps.shape:
        raise ValueError("basis map has the wrong size")
    out = np.empty_like(state.amps)
    out[perm] = state.amps
    state.amps = out
    return state


def apply_perm_oracle(state: StateVector, P, register: str) -> StateVector:
    """In-place relabelling |x> -> |P(x)> on one register."""
    table = np.asarray(P.table if hasattr(P, "table") else P, dtype=np.int64)
    w = state.layout.widths[register]
    if len(table) != 1 << w:
        raise ValueError(f"permutation of width {len(table).bit_length() - 1} on register of width {w}")
    idx = state.indices()
    off = state.layout.offsets[register]
    x = state.layout.values(register, idx)
    perm = (idx & ~state.layout.mask(register)) | (table[x] << off)
    return apply_basis_map(state, perm)


def apply_xor_oracle(state: StateVector, f, x_reg: str, y_reg: str) -> StateVector:
    """|x, y> -> |x, f(x) ^ y> for a function given as a table."""
    table = np.asarray(f, dtype=np.int64)
    lay = state.layout
    if len(table) != 1 << lay.widths[x_reg]:
        raise ValueError("function table does not match the input register width")
    if table.size and (table.min() < 0 or table.max() >= 1 << lay.widths[y_reg]):
        raise ValueError("function values do not fit the output register")
    idx = state.indices()
    x = lay.values(x_reg, idx)
    perm = idx ^ (table[x] << lay.offsets[y_reg])
    return apply_basis_map(state, perm)


def register_distribution(state: StateVector, registers) -> np.ndarray:
    """Exact marginal over one register (1-d) or several (joint, C-order)."""
    if isinstance(registers, str):
        registers = [registers]
    probs = np.abs(state.amps) ** 2
    idx = state.indices()
    lay = state.layout
    flat = np.zeros_like(idx)
    shape = []
    for name in registers:
        w = lay.widths[name]
        flat = (flat << w) | lay.values(name, idx)
        shape.append(1 << w)
    out = np.bincount(flat, weights=probs, minlength=int(np.prod(shape)))
    return out.reshape(shape) if len(shape) > 1 else out


def prob_of(state: StateVector, registers, predicate: Callable[..., bool]) -> float:
    """Exact probability that measuring ``registers`` satisfies ``predicate``."""
    dist = register_distribution(state, registers)
    total = 0.0
    for outcome in zip(*np.nonzero(dist)):
        vals = tuple(int(v) for v in outcome)
        if predicate(*vals):
            total += float(dist[outcome])
    return min(total, 1.0)


def measure(state: StateVector, register: str, rng) -> tuple[int, StateVector]:
    """Sample a computational-basis outcome and return it with the collapsed state."""
    dist = register_distribution(state, register)
    u = rng.random() * dist.sum()
    cdf = np.cumsum(dist)
    outcome = int(np.searchsorted(cdf, u, side="right"))
    outcome = min(outcome, len(dist) - 1)
    while dist[outcome] == 0:
        outcome -= 1
    post = state.copy()
    keep = state.layout.values(register, state.indices()) == outcome
    post.amps[~keep] = 0.0
    post.amps /= np.sqrt(dist[outcome])
    return outcome, post


def dense_unitary(nq: int, build: Callable[[StateVector], object], layout: RegisterLayout | None = None) -> np.ndarray:
    """Matrix of a basis-linear operation, one basis column at a time (small nq only)."""
    layout = layout or RegisterLayout([("q", nq)])
    cols = []
    for i in range(1 << nq):
        st = StateVector(layout)
        st.amps[0] = 0.0
        st.amps[i] = 1.0
        build(st)
        cols.append(st.amps)
    return np.stack(cols, axis=1)


def run_gates(state: StateVector, gates: Iterable[tuple]) -> StateVector:
    """Apply a list of ``(kind, qubits..)`` tuples; used by random-circuit tests."""
    for g in gates:
        kind, args = g[0], g[1:]
        if kind == "h":
            apply_hadamard(state, args[0])
        elif kind == "x":
            apply_x(state, args[0])
        elif kind == "cnot":
            apply_cnot(state, args[0], args[1])
        elif kind == "toffoli":
            apply_toffoli(state, args[0], args[1], args[2])
        elif kind == "cphase":
            apply_cphase(state, args[0], *(args[1:] or ()))
        else:
            raise ValueError(f"unknown gate {kind!r}")
    return state
