"""Dense exact simulation of small qubit registers.

Three backends share one gate kernel:

* ``statevector``  -- a pure state, ``2**n`` complex amplitudes.
* ``density``      -- a density matrix, ``2**n x 2**n``.
* ``trajectory``   -- a batch of pure states (one row per shot) that samples
  every mid-circuit measurement with a seeded generator.

Qubit 0 is the least-significant bit of the basis index.  Bitstrings are
rendered with the highest qubit of a register first.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import expm

BACKENDS = ("statevector", "density", "trajectory")
_ALIASES = {"density-matrix": "density", "density_matrix": "density", "dm": "density", "sv": "statevector"}

GATE_KINDS = ("H", "X", "RX", "RZ", "Phase", "CNOT", "CPhase", "SWAP", "MeasureReset")
_ANGLED = {"RX", "RZ", "Phase", "CPhase"}
_TWO_QUBIT = {"CNOT", "CPhase", "SWAP"}


class SimulationError(Exception):
    pass


class UnsupportedChannelError(SimulationError):
    """A non-unitary channel was requested on a backend that cannot hold it."""


def normalize_backend(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {', '.join(BACKENDS)}")
    return name


@dataclass(frozen=True)
class GateOp:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(set(self.targets)) != len(self.targets):
            raise ValueError(f"duplicate targets in {self.kind}{self.targets}")
        arity = 2 if self.kind in _TWO_QUBIT else 1
        if len(self.targets) != arity:
            raise ValueError(f"{self.kind} takes {arity} target(s), got {len(self.targets)}")
        if (self.kind in _ANGLED) != (self.angle is not None):
            raise ValueError(f"{self.kind}: angle {'required' if self.kind in _ANGLED else 'not allowed'}")
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))

    @property
    def is_two_qubit(self) -> bool:
        return self.kind in _TWO_QUBIT

    def inverse(self) -> "GateOp":
        if self.kind == "MeasureReset":
            raise ValueError("MeasureReset is not invertible")
        if self.angle is None:
            return self
        return GateOp(self.kind, self.targets, -self.angle)

    def __str__(self):
        angle = "" if self.angle is None else f" {self.angle!r}"
        return f"{self.kind} {','.join(map(str, self.targets))}{angle}"


def gate_matrix(gate: GateOp) -> np.ndarray:
    """Unitary of ``gate`` in the basis ``|t0 t1>`` with ``t0`` the high bit."""
    k, a = gate.kind, gate.angle
    if k == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if k == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k == "RX":
        c, s = np.cos(a / 2), np.sin(a / 2)
        return np.array([[c, -1j * s], [-1j * s, c]])
    if k == "RZ":
        return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
    if k == "Phase":
        return np.diag([1, np.exp(1j * a)])
    if k == "CNOT":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if k == "CPhase":
        return np.diag([1, 1, 1, np.exp(1j * a)])
    if k == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise UnsupportedChannelError(f"{k} has no unitary matrix")


@dataclass(frozen=True)
class QuantumState:
    """Simulator state.  Treat as a value: operations return new states.

    ``data`` has shape ``(2**n,)`` for statevectors, ``(2**n, 2**n)`` for
    density matrices and ``(shots, 2**n)`` for trajectory ensembles.
    """

    backend: str
    n_qubits: int
    data: np.ndarray
    rng: np.random.Generator | None = field(default=None, compare=False, repr=False)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def shots(self) -> int:
        return self.data.shape[0] if self.backend == "trajectory" else 1

    def check_index(self, q: int) -> None:
        if not 0 <= q < self.n_qubits:
            raise IndexError(f"qubit {q} out of range for {self.n_qubits}-qubit state")

    def diagonal(self) -> np.ndarray:
        """Born probabilities over the full basis."""
        if self.backend == "statevector":
            return np.abs(self.data) ** 2
        if self.backend == "density":
            return np.real(np.diagonal(self.data)).copy()
        return np.mean(np.abs(self.data) ** 2, axis=0)

    def trace(self) -> float:
        if self.backend == "density":
            return float(np.real(np.trace(self.data)))
        return float(np.sum(self.diagonal()))

    def to_density(self) -> np.ndarray:
        if self.backend == "density":
            return self.data
        if self.backend == "statevector":
            return np.outer(self.data, self.data.conj())
        return np.einsum("si,sj->ij", self.data, self.data.conj()) / self.shots


def init_state(
    n_qubits: int,
    hadamard_on: Iterable[int] = (),
    backend: str = "statevector",
    *,
    shots: int = 1000,
    seed: int | None = 0,
) -> QuantumState:
    """``|0...0>`` with a Hadamard on each listed qubit."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    backend = normalize_backend(backend)
    hadamard_on = sorted(set(hadamard_on))
    for q in hadamard_on:
        if not 0 <= q < n_qubits:
            raise IndexError(f"qubit {q} out of range for {n_qubits}-qubit state")
    psi = np.zeros(1 << n_qubits, dtype=complex)
    idx = np.arange(1 << n_qubits)
    mask = sum(1 << q for q in hadamard_on)
    # amplitude is uniform on indices whose set bits lie inside the Hadamard mask
    psi[(idx & ~mask) == 0] = 2.0 ** (-len(hadamard_on) / 2)
    if backend == "statevector":
        return QuantumState(backend, n_qubits, psi)
    if backend == "density":
        return QuantumState(backend, n_qubits, np.outer(psi, psi.conj()))
    if shots < 1:
        raise ValueError("trajectory backend needs shots >= 1")
    return QuantumState(backend, n_qubits, np.tile(psi, (shots, 1)), np.random.default_rng(seed))


def from_statevector(psi: Sequence[complex], backend: str = "statevector", *, shots: int = 1000,
                     seed: int | None = 0) -> QuantumState:
    psi = np.asarray(psi, dtype=complex)
    n = int(round(np.log2(psi.size)))
    if 1 << n != psi.size:
        raise ValueError("statevector length must be a power of two")
    backend = normalize_backend(backend)
    if backend == "statevector":
        return QuantumState(backend, n, psi.copy())
    if backend == "density":
        return QuantumState(backend, n, np.outer(psi, psi.conj()))
    return QuantumState(backend, n, np.tile(psi, (shots, 1)), np.random.default_rng(seed))


def from_density(rho: np.ndarray) -> QuantumState:
    rho = np.asarray(rho, dtype=complex)
    n = int(round(np.log2(rho.shape[0])))
    return QuantumState("density", n, rho.copy())


def basis_state(n_qubits: int, index: int, backend: str = "statevector", **kw) -> QuantumState:
    psi = np.zeros(1 << n_qubits, dtype=complex)
    psi[index] = 1.0
    return from_statevector(psi, backend, **kw)


# -- tensor kernel ----------------------------------------------------------

def _apply_to_axes(tensor: np.ndarray, mat: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    k = len(axes)
    m = mat.reshape((2,) * (2 * k))
    out = np.tensordot(m, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _axis(n: int, q: int) -> int:
    return n - 1 - q


def apply_matrix(state: QuantumState, mat: np.ndarray, targets: Sequence[int]) -> QuantumState:
    """Apply a ``2**k`` unitary to ``targets`` (first target = high bit)."""
    n = state.n_qubits
    for q in targets:
        state.check_index(q)
    if state.backend == "statevector":
        t = state.data.reshape((2,) * n)
        t = _apply_to_axes(t, mat, [_axis(n, q) for q in targets])
        return replace(state, data=t.reshape(-1))
    if state.backend == "density":
        t = state.data.reshape((2,) * (2 * n))
        t = _apply_to_axes(t, mat, [_axis(n, q) for q in targets])
        t = _apply_to_axes(t, mat.conj(), [n + _axis(n, q) for q in targets])
        return replace(state, data=t.reshape(state.dim, state.dim))
    s = state.shots
    t = state.data.reshape((s,) + (2,) * n)
    t = _apply_to_axes(t, mat, [1 + _axis(n, q) for q in targets])
    return replace(state, data=t.reshape(s, -1))


def _apply_diagonal(state: QuantumState, diag: np.ndarray) -> QuantumState:
    if state.backend == "statevector":
        return replace(state, data=state.data * diag)
    if state.backend == "density":
        return replace(state, data=state.data * np.outer(diag, diag.conj()))
    return replace(state, data=state.data * diag[None, :])


def _phase_diagonal(n: int, gate: GateOp) -> np.ndarray:
    idx = np.arange(1 << n)
    if gate.kind == "Phase":
        bit = (idx >> gate.targets[0]) & 1
        return np.where(bit == 1, np.exp(1j * gate.angle), 1.0)
    if gate.kind == "RZ":
        bit = (idx >> gate.targets[0]) & 1
        return np.where(bit == 1, np.exp(0.5j * gate.angle), np.exp(-0.5j * gate.angle))
    a, b = gate.targets
    both = ((idx >> a) & 1) & ((idx >> b) & 1)
    return np.where(both == 1, np.exp(1j * gate.angle), 1.0)


def apply_gate(state: QuantumState, gate: GateOp) -> QuantumState:
    if gate.kind == "MeasureReset":
        raise SimulationError("MeasureReset is a channel; use measure_and_reset")
    for q in gate.targets:
        state.check_index(q)
    if gate.kind in ("Phase", "RZ", "CPhase"):
        return _apply_diagonal(state, _phase_diagonal(state.n_qubits, gate))
    return apply_matrix(state, gate_matrix(gate), gate.targets)


def measure_and_reset(state: QuantumState, q: int) -> QuantumState:
    """Non-selective Z measurement of qubit ``q`` followed by reset to ``|0>``.

    On the density backend the channel ``rho -> P0 rho P0 + X P1 rho P1 X``
    is applied exactly.  The trajectory backend samples one branch per shot.
    """
    state.check_index(q)
    n = state.n_qubits
    if state.backend == "statevector":
        raise UnsupportedChannelError(
            "measure-and-reset needs the density or trajectory backend, not statevector")
    if state.backend == "density":
        r, c = _axis(n, q), n + _axis(n, q)
        t = state.data.reshape((2,) * (2 * n))
        out = np.zeros_like(t)
        sel = [slice(None)] * (2 * n)

        def at(i, j):
            s = list(sel)
            s[r], s[c] = i, j
            return tuple(s)

        out[at(0, 0)] = t[at(0, 0)] + t[at(1, 1)]
        return replace(state, data=out.reshape(state.dim, state.dim))
    s = state.shots
    t = state.data.reshape((s, 1 << (n - 1 - q), 2, 1 << q))
    p1 = np.sum(np.abs(t[:, :, 1, :]) ** 2, axis=(1, 2))
    p0 = np.sum(np.abs(t[:, :, 0, :]) ** 2, axis=(1, 2))
    take1 = state.rng.random(s) < p1 / (p0 + p1)
    out = np.zeros_like(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, :, 0, :] = np.where(
            take1[:, None, None],
            t[:, :, 1, :] / np.sqrt(p1)[:, None, None],
            t[:, :, 0, :] / np.sqrt(p0)[:, None, None],
        )
    return replace(state, data=out.reshape(s, -1))


def marginal(state: QuantumState, register: Sequence[int]) -> np.ndarray:
    """Marginal distribution as an array; bit ``k`` of the index is ``register[k]``."""
    if not register:
        raise ValueError("register must be non-empty")
    for q in register:
        state.check_index(q)
    probs = state.diagonal()
    idx = np.arange(state.dim)
    key = np.zeros_like(idx)
    for k, q in enumerate(register):
        key |= ((idx >> q) & 1) << k
    return np.bincount(key, weights=probs, minlength=1 << len(register))


def probabilities(state: QuantumState, register: Sequence[int]) -> dict[str, float]:
    """Marginal Born distribution keyed by bitstring (highest register entry first)."""
    dist = marginal(state, register)
    width = len(register)
    return {format(i, f"0{width}b"): float(p) for i, p in enumerate(dist)}


def expectation_diagonal(state: QuantumState, f: Callable[[str], float], register: Sequence[int]) -> float:
    return float(sum(p * f(x) for x, p in probabilities(state, register).items()))


# -- Zeno limit -------------------------------------------------------------

def zeno_limit_check(H: np.ndarray, P: np.ndarray, t: float, N: int) -> float:
    """Operator-norm distance between ``N`` projected steps and the Zeno limit.

    Returns ``|| (P exp(-iHt/N) P)^N - exp(-i PHP t) P ||_2``.  The limit
    propagator is restricted to the projected subspace; on its complement
    the repeated projections give zero while ``exp(-i PHP t)`` is the
    identity.
    """
    H = np.asarray(H, dtype=complex)
    P = np.asarray(P, dtype=complex)
    d = H.shape[0]
    if H.shape != (d, d) or P.shape != (d, d):
        raise ValueError("H and P must be square and of equal size")
    if d > 64:
        raise ValueError("dimension above 2**6 not supported")
    if not np.allclose(H, H.conj().T, atol=1e-10, rtol=0):
        raise ValueError("H is not Hermitian")
    if not np.allclose(P @ P, P, atol=1e-10, rtol=0) or not np.allclose(P, P.conj().T, atol=1e-10, rtol=0):
        raise ValueError("P is not an orthogonal projector")
    if N < 1:
        raise ValueError("N must be >= 1")
    step = P @ expm(-1j * H * t / N) @ P
    VN = np.linalg.matrix_power(step, N)
    limit = expm(-1j * (P @ H @ P) * t) @ P
    return float(np.linalg.norm(VN - limit, ord=2))
