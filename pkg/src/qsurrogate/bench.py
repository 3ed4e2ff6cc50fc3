"""Experiment harnesses: VQE and Grover over pluggable backends, plus
per-sample fidelity reports for trained surrogates.

The VQE optimizer is a derivative-free simplex descent restarted from a few
fixed points; every energy evaluation is recorded so runs can be replayed
and plotted from the CSV trace alone.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import codec, extend3q, qcore
from .extend3q import CircuitLayer, SurrogateBackend
from .qcore import CircuitSpec, DensityMatrix, Observable

# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def heisenberg_2q() -> Observable:
    """Two-site exchange interaction XX + YY + ZZ (ground energy -3)."""
    m = (
        qcore.tensor(qcore.PAULI_X, qcore.PAULI_X)
        + qcore.tensor(qcore.PAULI_Y, qcore.PAULI_Y)
        + qcore.tensor(qcore.PAULI_Z, qcore.PAULI_Z)
    )
    return Observable(m)


def heisenberg_3q() -> Observable:
    """Three-body interaction XXX + YYY + ZZZ."""
    m = (
        qcore.tensor(qcore.PAULI_X, qcore.PAULI_X, qcore.PAULI_X)
        + qcore.tensor(qcore.PAULI_Y, qcore.PAULI_Y, qcore.PAULI_Y)
        + qcore.tensor(qcore.PAULI_Z, qcore.PAULI_Z, qcore.PAULI_Z)
    )
    return Observable(m)


def ground_energy(observable: Observable) -> float:
    """Reference minimum eigenvalue by dense diagonalization."""
    return float(np.linalg.eigvalsh(observable.matrix)[0])


# ---------------------------------------------------------------------------
# VQE problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VqeProblem:
    name: str
    hamiltonian: Observable
    n_params: int
    circuit_builder: Callable  # params -> CircuitSpec, exact path
    halfblock_builder: Optional[Callable] = None  # params -> list[CircuitLayer]


def _vqe_2q_circuit(params) -> CircuitSpec:
    t1, t2 = params
    return CircuitSpec(2, [("RY", (0,), (t1,)), ("CNOT", (0, 1)), ("RX", (1,), (t2,))])


def _vqe_2q_halfblocks(params) -> list:
    # RX on the CNOT target commutes with the CNOT, so the whole ansatz is a
    # single half-block layer: q0 carries RY(t1) in Rx-Rz-Rx form
    # (Rx(pi/2) Rz(t1) Rx(-pi/2)), q1 carries RX(t2) directly.
    t1, t2 = params
    q0 = qcore.xzx_angles(qcore.standard_gate("RY", (t1,)))
    return [CircuitLayer(pair=(0, 1), angles=(*q0, t2, 0.0, 0.0), cnot_direction=0)]


def make_vqe_2q() -> VqeProblem:
    return VqeProblem(
        name="heisenberg-2q",
        hamiltonian=heisenberg_2q(),
        n_params=2,
        circuit_builder=_vqe_2q_circuit,
        halfblock_builder=_vqe_2q_halfblocks,
    )


def _vqe_3q_layers(params) -> list:
    p = tuple(float(t) for t in params)
    return [
        CircuitLayer(pair=(0, 1), angles=p[0:6], cnot_direction=0),
        CircuitLayer(pair=(1, 2), angles=p[6:12], cnot_direction=0),
    ]


def make_vqe_3q() -> VqeProblem:
    return VqeProblem(
        name="heisenberg-3q",
        hamiltonian=heisenberg_3q(),
        n_params=12,
        circuit_builder=lambda params: extend3q.layers_to_circuit(_vqe_3q_layers(params)),
        halfblock_builder=_vqe_3q_layers,
    )


# ---------------------------------------------------------------------------
# backends
# ---------------------------------------------------------------------------

class ExactVqeBackend:
    """Direct simulation of the ansatz circuit, optionally with noise."""

    def __init__(self, noise=None):
        self.noise = noise

    def energy(self, problem: VqeProblem, params) -> float:
        circ = problem.circuit_builder(params)
        if self.noise is None:
            state = qcore.apply_circuit_state(qcore.basis_state(circ.n_qubits), circ)
        else:
            state = qcore.apply_circuit_density(
                qcore.basis_state(circ.n_qubits).density(), circ, self.noise
            )
        return qcore.expectation(state, problem.hamiltonian)


class SurrogateVqeBackend:
    """Evaluates the ansatz by chaining universal half-block predictions."""

    def __init__(self, model):
        self.backend = SurrogateBackend(model)

    def energy(self, problem: VqeProblem, params) -> float:
        if problem.halfblock_builder is None:
            raise ValueError(f"problem {problem.name} has no half-block form")
        layers = problem.halfblock_builder(params)
        n_qubits = max(max(l.pair) for l in layers) + 1
        if n_qubits <= 2:
            rho = qcore.basis_state(2).density()
            for layer in layers:
                rho = self.backend(rho, layer)
        else:
            rho = extend3q.simulate_3q(layers, self.backend)
        return qcore.expectation(rho, problem.hamiltonian)


class Extend3qVqeBackend:
    """Runs a 3-qubit ansatz through the block-decomposition pipeline."""

    def __init__(self, backend, naive_inversion: bool = False):
        self.backend = backend
        self.naive_inversion = naive_inversion

    def energy(self, problem: VqeProblem, params) -> float:
        if problem.halfblock_builder is None:
            raise ValueError(f"problem {problem.name} has no half-block form")
        rho = extend3q.simulate_3q(
            problem.halfblock_builder(params), self.backend, self.naive_inversion
        )
        return qcore.expectation(rho, problem.hamiltonian)


# ---------------------------------------------------------------------------
# simplex descent
# ---------------------------------------------------------------------------

@dataclass
class VqeTrace:
    evaluations: list = field(default_factory=list)  # (params, energy) in order
    best_energy_trace: list = field(default_factory=list)  # best vertex per iteration
    best_params: Optional[np.ndarray] = None
    final_energy: float = math.nan
    iterations: int = 0
    converged: bool = False


def nelder_mead(
    f: Callable,
    x0: np.ndarray,
    step: float = 0.5,
    tol: float = 1e-6,
    max_iter: int = 4000,
):
    """Plain downhill simplex with standard reflect/expand/contract/shrink.

    Converges when the energy spread across the simplex after a full cycle
    falls below `tol`.  Returns (best_x, best_f, best_per_iteration, n_iter,
    converged).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    simplex = [x0.copy()]
    for i in range(n):
        v = x0.copy()
        v[i] += step
        simplex.append(v)
    values = [f(v) for v in simplex]
    best_trace = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]
        best_trace.append(values[0])
        if abs(values[-1] - values[0]) < tol:
            converged = True
            break
        centroid = np.mean(simplex[:-1], axis=0)
        reflected = centroid + (centroid - simplex[-1])
        fr = f(reflected)
        if fr < values[0]:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(expanded)
            if fe < fr:
                simplex[-1], values[-1] = expanded, fe
            else:
                simplex[-1], values[-1] = reflected, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = reflected, fr
        else:
            contracted = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(contracted)
            if fc < values[-1]:
                simplex[-1], values[-1] = contracted, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = f(simplex[i])
        if not math.isfinite(values[-1]):
            raise FloatingPointError("simplex descent hit a non-finite energy")
    order = np.argsort(values, kind="stable")
    best = order[0]
    return simplex[best], values[best], best_trace, it, converged


def fixed_starts(n_params: int, count: int = 4) -> list:
    """Deterministic restart points for the simplex descent."""
    starts = [
        np.full(n_params, 0.25),
        np.full(n_params, 1.0),
        np.full(n_params, 2.0),
        0.5 * np.arange(1, n_params + 1, dtype=float),
    ]
    return starts[:count]


def vqe_run(
    problem: VqeProblem,
    backend,
    tol: float = 1e-6,
    max_iter: int = 4000,
    starts: Optional[Sequence[np.ndarray]] = None,
    n_workers: Optional[int] = None,
) -> VqeTrace:
    """Minimize the Hamiltonian expectation over the ansatz parameters.

    Restarts from a fixed set of initial simplices (parallel across worker
    threads), keeps every evaluation, and reports the best restart.
    """
    from .surrogate.training import worker_count

    if starts is None:
        starts = fixed_starts(problem.n_params)

    def run_one(x0):
        evals = []

        def record_f(x):
            e = backend.energy(problem, x)
            evals.append((np.array(x, dtype=float), float(e)))
            return e

        best_x, best_f, best_trace, n_iter, conv = nelder_mead(
            record_f, x0, tol=tol, max_iter=max_iter
        )
        return evals, best_trace, best_x, best_f, n_iter, conv

    workers = min(len(starts), n_workers or worker_count())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, starts))
    else:
        results = [run_one(x0) for x0 in starts]

    trace = VqeTrace()
    best_idx = 0
    for i, (evals, best_trace, best_x, best_f, n_iter, conv) in enumerate(results):
        trace.evaluations.extend(evals)
        trace.iterations += n_iter
        if best_f < results[best_idx][3]:
            best_idx = i
    _, best_trace, best_x, best_f, _, conv = results[best_idx]
    trace.best_energy_trace = best_trace
    trace.best_params = best_x
    trace.final_energy = best_f
    trace.converged = conv
    return trace


def vqe_trace_csv(trace: VqeTrace) -> str:
    lines = ["evaluation,energy," + ",".join(f"param{i}" for i in range(trace.best_params.size))]
    for i, (params, energy) in enumerate(trace.evaluations):
        lines.append(f"{i},{energy:.12g}," + ",".join(f"{p:.12g}" for p in params))
    lines.append(f"# final_energy,{trace.final_energy:.12g}")
    lines.append(f"# iterations,{trace.iterations}")
    lines.append(f"# converged,{trace.converged}")
    lines.append("# best_params," + ",".join(f"{p:.12g}" for p in trace.best_params))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Grover search
# ---------------------------------------------------------------------------

def grover_circuit() -> CircuitSpec:
    """Two-qubit search for |11>: superpose, mark with CZ, diffuse."""
    h_all = [("H", (0,)), ("H", (1,))]
    x_all = [("X", (0,)), ("X", (1,))]
    gates = h_all + [("CZ", (0, 1))] + h_all + x_all + [("CZ", (0, 1))] + x_all + h_all
    return CircuitSpec(2, gates)


def compile_to_halfblocks(circuit: CircuitSpec) -> list:
    """Rewrite a two-qubit circuit as a chain of half-block layers.

    Single-qubit gates accumulate into each wire's pending rotation (emitted
    in Rx-Rz-Rx form); each CNOT closes a layer and a CZ becomes a CNOT
    conjugated by H on its target.  A trailing rotation-only segment is
    emitted as one layer plus an all-zero layer whose CNOT cancels it.
    """
    if circuit.n_qubits != 2:
        raise ValueError("half-block compilation is defined for 2-qubit circuits")
    pending = [np.eye(2, dtype=complex), np.eye(2, dtype=complex)]
    layers = []

    def emit(direction: int):
        a0 = qcore.xzx_angles(pending[0])
        a1 = qcore.xzx_angles(pending[1])
        layers.append(CircuitLayer(pair=(0, 1), angles=(*a0, *a1), cnot_direction=direction))
        pending[0] = np.eye(2, dtype=complex)
        pending[1] = np.eye(2, dtype=complex)

    for gate in circuit.gates:
        if gate.kind in ("U3", "RX", "RY", "RZ", "H", "X"):
            q = gate.qubits[0]
            pending[q] = qcore.standard_gate(gate.kind, gate.angles) @ pending[q]
        elif gate.kind == "CNOT":
            emit(0 if gate.qubits == (0, 1) else 1)
        elif gate.kind == "CZ":
            control, target = gate.qubits
            pending[target] = qcore.HADAMARD @ pending[target]
            emit(0 if control == 0 else 1)
            pending[target] = qcore.HADAMARD @ pending[target]
        else:
            raise ValueError(f"cannot compile gate {gate.kind}")

    leftover = any(abs(abs(np.trace(p)) - 2.0) > 1e-12 for p in pending)
    if leftover:
        emit(0)
        layers.append(CircuitLayer(pair=(0, 1), angles=(0.0,) * 6, cnot_direction=0))
    return layers


class Exact2qBackend:
    """Runs a 2-qubit circuit directly on the density simulator."""

    def __init__(self, noise=None):
        self.noise = noise

    def final_density(self, circuit: CircuitSpec) -> DensityMatrix:
        return qcore.apply_circuit_density(qcore.basis_state(2).density(), circuit, self.noise)


class Surrogate2qBackend:
    """Runs a 2-qubit circuit by chaining half-block surrogate predictions."""

    def __init__(self, model):
        self.backend = SurrogateBackend(model)

    def final_density(self, circuit: CircuitSpec) -> DensityMatrix:
        rho = qcore.basis_state(2).density()
        for layer in compile_to_halfblocks(circuit):
            rho = self.backend(rho, layer)
        return rho


def grover_run(backend) -> np.ndarray:
    """Probabilities of the four basis states after the search circuit."""
    rho = backend.final_density(grover_circuit())
    probs = rho.diagonal_probabilities()
    return probs / probs.sum()


# ---------------------------------------------------------------------------
# fidelity reports
# ---------------------------------------------------------------------------

@dataclass
class FidelityReport:
    fidelities: np.ndarray
    mean: float
    minimum: float
    reference_min: Optional[float] = None

    @property
    def meets_reference(self) -> Optional[bool]:
        if self.reference_min is None:
            return None
        return bool(self.minimum >= self.reference_min)

    def to_csv(self) -> str:
        lines = ["index,fidelity"]
        for i, f in enumerate(self.fidelities):
            lines.append(f"{i},{f:.12g}")
        lines.append(f"# mean,{self.mean:.12g}")
        lines.append(f"# min,{self.minimum:.12g}")
        if self.reference_min is not None:
            lines.append(f"# reference_min,{self.reference_min:.12g}")
            lines.append(f"# meets_reference,{self.meets_reference}")
        return "\n".join(lines) + "\n"


def fidelity_report(model, records, reference_min: Optional[float] = None) -> FidelityReport:
    """Fidelity between each record's decoded prediction and its target.

    A prediction too broken to decode (state norm far from 1) scores 0.
    """
    from .surrogate.training import predict_batch

    if not records:
        raise ValueError("empty evaluation dataset")
    if records[0].family != model.family:
        raise ValueError(f"model family {model.family} != dataset family {records[0].family}")
    inputs = np.stack([r.input for r in records])
    outputs = predict_batch(model, inputs)
    kind = model.target_kind
    fids = np.empty(len(records))
    for i, rec in enumerate(records):
        truth = codec.decode(codec.FeatureVector(rec.target, kind))
        try:
            pred = codec.decode(codec.FeatureVector(outputs[i], kind))
        except ValueError:
            fids[i] = 0.0
            continue
        fids[i] = qcore.fidelity(pred, truth)
    return FidelityReport(
        fidelities=fids,
        mean=float(fids.mean()),
        minimum=float(fids.min()),
        reference_min=reference_min,
    )
