"""Ansatz objectives and a deterministic derivative-free minimizer.

The minimizer is Nelder-Mead with dimension-adaptive coefficients
(reflection 1, expansion ``1 + 2/n``, contraction ``0.75 - 1/(2n)``,
shrink ``1 - 1/n``; the classic ``1, 2, 1/2, 1/2`` for ``n = 1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .circuit import run
from .encoders import EncodingMethod, build_ansatz
from .knapsack import KnapsackInstance, value_vector, weight_vector
from .qubo import AnsatzParams, build_qubo, energy_vector
from .reduced import data_marginal, evolve, reduce_ansatz
from .sim import init_state, marginal, normalize_backend

ENGINES = ("reduced", "circuit")


class ConfigurationError(ValueError):
    pass


class OptimizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerOptions:
    max_iterations: int = 500
    initial_step: float = 0.5
    tolerance: float = 1e-4
    seed: int = 0
    ftol: float = 1e-12

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


@dataclass
class OptimizationTrace:
    best_x: np.ndarray
    best_value: float
    nfev: int
    history: list[tuple[int, float]] = field(default_factory=list)
    n_iterations: int = 0
    converged: bool = False
    restart_values: list[float] = field(default_factory=list)

    @property
    def best_params(self) -> AnsatzParams:
        return AnsatzParams.from_vector(self.best_x)


class _Counted:
    def __init__(self, fn: Callable[[np.ndarray], float]):
        self.fn = fn
        self.calls = 0

    def __call__(self, x: np.ndarray) -> float:
        self.calls += 1
        y = float(self.fn(x))
        if not math.isfinite(y):
            raise OptimizationError(f"objective returned {y} at x={np.array2string(x, precision=6)}")
        return y


def minimize(objective: Callable[[np.ndarray], float], x0: Sequence[float],
             opts: OptimizerOptions = OptimizerOptions()) -> OptimizationTrace:
    f = _Counted(objective)
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    if n >= 2:
        rho, chi, psi, sigma = 1.0, 1 + 2 / n, 0.75 - 1 / (2 * n), 1 - 1 / n
    else:
        rho, chi, psi, sigma = 1.0, 2.0, 0.5, 0.5

    sim = np.vstack([x0] + [x0 + opts.initial_step * e for e in np.eye(n)])
    fs = np.array([f(x) for x in sim])
    history = [(0, float(fs.min()))]
    converged = False
    it = 0
    while it < opts.max_iterations:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if np.max(np.abs(sim[1:] - sim[0])) <= opts.tolerance or fs[-1] - fs[0] <= opts.ftol:
            converged = True
            break
        it += 1
        xbar = sim[:-1].mean(axis=0)
        xr = (1 + rho) * xbar - rho * sim[-1]
        fr = f(xr)
        shrink = False
        if fr < fs[0]:
            xe = (1 + rho * chi) * xbar - rho * chi * sim[-1]
            fe = f(xe)
            sim[-1], fs[-1] = (xe, fe) if fe < fr else (xr, fr)
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        elif fr < fs[-1]:
            xc = (1 + psi * rho) * xbar - psi * rho * sim[-1]
            fc = f(xc)
            if fc <= fr:
                sim[-1], fs[-1] = xc, fc
            else:
                shrink = True
        else:
            xcc = (1 - psi) * xbar + psi * sim[-1]
            fcc = f(xcc)
            if fcc < fs[-1]:
                sim[-1], fs[-1] = xcc, fcc
            else:
                shrink = True
        if shrink:
            for j in range(1, n + 1):
                sim[j] = sim[0] + sigma * (sim[j] - sim[0])
                fs[j] = f(sim[j])
        history.append((it, float(fs.min())))

    k = int(np.argmin(fs))
    return OptimizationTrace(sim[k].copy(), float(fs[k]), f.calls, history, it, converged)


def multistart(objective: Callable[[np.ndarray], float], restarts: int, opts: OptimizerOptions,
               dim: int) -> OptimizationTrace:
    """Best of ``restarts`` runs from seeded uniform points in ``[0, 2 pi)**dim``."""
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(opts.seed)
    best, nfev, values = None, 0, []
    for _ in range(restarts):
        trace = minimize(objective, rng.uniform(0, 2 * np.pi, dim), opts)
        nfev += trace.nfev
        values.append(trace.best_value)
        if best is None or trace.best_value < best.best_value:
            best = trace
    best.nfev = nfev
    best.restart_values = values
    return best


# -- objectives -------------------------------------------------------------

def classical_penalty_weight(inst: KnapsackInstance) -> int:
    return inst.total_value + 1


def classical_cost(inst: KnapsackInstance) -> np.ndarray:
    """``-value(x) + (sum v + 1) * max(0, weight(x) - W)`` per data index."""
    excess = np.maximum(0, weight_vector(inst) - inst.capacity)
    return (-value_vector(inst) + classical_penalty_weight(inst) * excess).astype(float)


def resolve_backend(method: EncodingMethod, backend: str) -> str:
    if backend == "auto":
        return "density" if method.tag == "zeno" else "statevector"
    backend = normalize_backend(backend)
    if method.tag == "zeno" and backend == "statevector":
        raise ConfigurationError("zeno uses mid-circuit measurement; choose the density or trajectory backend")
    return backend


class AnsatzSimulator:
    """Maps parameter vectors to output distributions for one instance and method."""

    def __init__(self, inst: KnapsackInstance, method: EncodingMethod, backend: str = "auto",
                 engine: str = "reduced", trajectories: int = 1000, seed: int = 0):
        if engine not in ENGINES:
            raise ConfigurationError(f"unknown engine {engine!r}")
        self.inst, self.method, self.engine = inst, method, engine
        self.backend = resolve_backend(method, backend)
        self.trajectories, self.seed = trajectories, seed
        self.reduced = reduce_ansatz(inst, method)

    @property
    def n_register(self) -> int:
        return self.reduced.n_qubits

    def register_distribution(self, params: AnsatzParams) -> np.ndarray:
        """Distribution over data (+ slack for QUBO) qubits; qubit ``i`` is bit ``i``."""
        if self.engine == "reduced":
            return evolve(self.reduced, params, self.backend, shots=self.trajectories, seed=self.seed)
        circ = build_ansatz(self.inst, self.method, params)
        state = init_state(circ.n_qubits, [], self.backend, shots=self.trajectories, seed=self.seed)
        return marginal(run(circ, state), list(range(self.n_register)))

    def data_distribution(self, params: AnsatzParams) -> np.ndarray:
        return data_marginal(self.reduced, self.register_distribution(params))


def sample_distribution(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    p = np.clip(probs, 0, None)
    return rng.multinomial(shots, p / p.sum()) / shots


def make_objective(inst: KnapsackInstance, method: EncodingMethod, backend: str = "auto",
                   shots: int | None = None, *, engine: str = "reduced", trajectories: int = 1000,
                   seed: int = 0) -> Callable[[np.ndarray], float]:
    """Expected cost of the ansatz output as a function of ``theta = gammas ++ betas``.

    QUBO: expectation of the Ising energy over all ``m + c`` qubits.
    Dephasing / Zeno: expectation of :func:`classical_cost` over the data register.
    ``shots`` switches from exact probabilities to a seeded finite-shot estimate.
    """
    simulator = AnsatzSimulator(inst, method, backend, engine, trajectories, seed)
    if method.tag == "qubo":
        costs = energy_vector(build_qubo(inst, method.P, method.slack_convention))
        dist = simulator.register_distribution
    else:
        costs = classical_cost(inst)
        dist = simulator.data_distribution

    def objective(theta: np.ndarray) -> float:
        probs = dist(AnsatzParams.from_vector(theta))
        if shots is not None:
            probs = sample_distribution(probs, shots, np.random.default_rng(seed))
        return float(probs @ costs)

    objective.simulator = simulator
    return objective
