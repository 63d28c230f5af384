"""Exact ansatz simulation on the smallest register that carries the dynamics.

Every ancilla in the dephasing and Zeno layers is a deterministic function
of the data basis state and is returned to ``|0>`` by the end of the layer,
so on the data register

* a dephasing layer is a diagonal phase ``exp(-i (gamma*value(x) + penalty(x)))``
  followed by the mixer, and
* a Zeno layer is the same return phase, the block-dephasing channel
  ``rho -> F rho F + (1-F) rho (1-F)`` (``F`` projects onto feasible
  selections) and the mixer.

A QUBO layer is already diagonal-plus-mixer on all ``m + c`` qubits.  The
gate-level circuits in :mod:`encoders` are the reference; the test-suite
checks that both routes give the same distributions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .encoders import EncodingMethod
from .knapsack import KnapsackInstance, value_vector, weight_vector
from .qubo import AnsatzParams, build_qubo, energy_vector
from .sim import UnsupportedChannelError, normalize_backend


@dataclass(frozen=True)
class ReducedAnsatz:
    n_qubits: int
    m: int
    cost: np.ndarray  # phase per unit gamma
    penalty: np.ndarray | None  # extra phase, times gamma when penalty_scaled
    penalty_scaled: bool
    feasible: np.ndarray | None  # Zeno: bool mask of the measured subspace

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits


def reduce_ansatz(inst: KnapsackInstance, method: EncodingMethod) -> ReducedAnsatz:
    if method.tag == "qubo":
        model = build_qubo(inst, method.P, method.slack_convention)
        return ReducedAnsatz(model.n_vars, inst.m, energy_vector(model) - model.offset, None, True, None)
    value = value_vector(inst).astype(float)
    weight = weight_vector(inst)
    infeasible = weight > inst.capacity
    if method.tag == "dephasing":
        if method.penal_mode == "flat":
            pen = method.alpha * infeasible
        else:
            pen = method.alpha * infeasible * weight
        return ReducedAnsatz(inst.m, inst.m, value, pen.astype(float), method.penal_scaled, None)
    return ReducedAnsatz(inst.m, inst.m, value, None, True, ~infeasible)


def _layer_phase(model: ReducedAnsatz, gamma: float) -> np.ndarray:
    angle = gamma * model.cost
    if model.penalty is not None:
        angle = angle + (gamma * model.penalty if model.penalty_scaled else model.penalty)
    return np.exp(-1j * angle)


def _rx_all(psi: np.ndarray, n: int, beta: float) -> np.ndarray:
    """``RX(2 beta)`` on every qubit; ``psi`` has shape ``(batch, 2**n)``."""
    c, s = np.cos(beta), -1j * np.sin(beta)
    batch = psi.shape[0]
    for q in range(n):
        v = psi.reshape(batch, 1 << (n - 1 - q), 2, 1 << q)
        a0, a1 = v[:, :, 0, :], v[:, :, 1, :]
        out = np.empty_like(v)
        out[:, :, 0, :] = c * a0 + s * a1
        out[:, :, 1, :] = s * a0 + c * a1
        psi = out.reshape(batch, -1)
    return psi


@lru_cache(maxsize=None)
def _hamming(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    x = idx[:, None] ^ idx[None, :]
    return np.array([bin(v).count("1") for v in x.ravel()]).reshape(x.shape)


def _rx_matrix(n: int, beta: float) -> np.ndarray:
    """Matrix of ``RX(2 beta)`` on all ``n`` qubits: ``cos^(n-d) (-i sin)^d``."""
    k = np.arange(n + 1)
    coeff = np.cos(beta) ** (n - k) * (-1j * np.sin(beta)) ** k
    return coeff[_hamming(n)]


def evolve(model: ReducedAnsatz, params: AnsatzParams, backend: str = "statevector", *,
           shots: int = 1000, seed: int = 0) -> np.ndarray:
    """Born distribution over all simulated qubits after the ansatz."""
    backend = normalize_backend(backend)
    n, dim = model.n_qubits, model.dim
    if backend == "statevector":
        if model.feasible is not None:
            raise UnsupportedChannelError("Zeno ansatz needs the density or trajectory backend")
        psi = np.full((1, dim), dim ** -0.5, dtype=complex)
        for g, b in zip(params.gammas, params.betas):
            psi = _rx_all(psi * _layer_phase(model, g), n, b)
        return np.abs(psi[0]) ** 2
    if backend == "density":
        rho = np.full((dim, dim), 1.0 / dim, dtype=complex)
        block = None
        if model.feasible is not None:
            block = model.feasible[:, None] == model.feasible[None, :]
        for g, b in zip(params.gammas, params.betas):
            d = _layer_phase(model, g)
            rho = rho * np.outer(d, d.conj())
            if block is not None:
                rho = np.where(block, rho, 0)
            U = _rx_matrix(n, b)
            rho = U @ rho @ U.conj().T
        return np.real(np.diagonal(rho)).copy()
    rng = np.random.default_rng(seed)
    psi = np.full((shots, dim), dim ** -0.5, dtype=complex)
    for g, b in zip(params.gammas, params.betas):
        psi = psi * _layer_phase(model, g)
        if model.feasible is not None:
            pf = np.sum(np.abs(psi[:, model.feasible]) ** 2, axis=1)
            keep_f = rng.random(shots) < pf
            norm = np.where(keep_f, pf, 1.0 - pf)
            psi = np.where(keep_f[:, None] == model.feasible[None, :], psi, 0)
            psi = psi / np.sqrt(norm)[:, None]
        psi = _rx_all(psi, n, b)
    return np.mean(np.abs(psi) ** 2, axis=0)


def data_marginal(model: ReducedAnsatz, probs: np.ndarray) -> np.ndarray:
    """Sum out non-data qubits; data qubits are the low ``m`` bits."""
    if model.n_qubits == model.m:
        return probs
    return probs.reshape(-1, 1 << model.m).sum(axis=0)
