"""Exact dense simulation core for 1-3 qubit circuits.

States, density matrices, gate construction, Kraus noise channels, fidelity
metrics, and projection back onto the set of valid density matrices.

Conventions
-----------
* Qubit 0 is the leftmost tensor factor, i.e. the most significant bit of a
  basis-state index: |q0 q1 q2> has index 4*q0 + 2*q1 + q2.
* All matrices are dense complex128, row-major.  For <= 3 qubits this is
  exact and fast; nothing here is meant to scale past that.
* Every wrapper type validates its invariants on construction and freezes
  its array, so instances are safe to share across threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-10
PSD_TOL = 1e-8

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=complex)
    a.setflags(write=False)
    return a


def _require_finite(a: np.ndarray, what: str) -> None:
    if not (np.all(np.isfinite(a.real)) and np.all(np.isfinite(a.imag))):
        raise ValueError(f"{what} contains NaN or Inf")


def _qubit_count(dim: int, what: str) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"{what} dimension {dim} is not a power of two >= 2")
    return n


# ---------------------------------------------------------------------------
# wrapper types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StateVector:
    """Unit-norm complex amplitude vector for a pure n-qubit state."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        _require_finite(amp, "state vector")
        _qubit_count(amp.size, "state vector")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm!r} is not 1 within {NORM_TOL}")
        object.__setattr__(self, "amplitudes", _freeze(amp))

    @property
    def n_qubits(self) -> int:
        return self.amplitudes.size.bit_length() - 1

    def density(self) -> "DensityMatrix":
        """Outer product |psi><psi| as a DensityMatrix."""
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, trace-1, positive-semidefinite matrix for a mixed state."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        _require_finite(m, "density matrix")
        _qubit_count(m.shape[0], "density matrix")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("density matrix is not Hermitian within tolerance")
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr!r} is not 1 within {TRACE_TOL}")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -PSD_TOL:
            raise ValueError(f"density matrix has eigenvalue {lo} < -{PSD_TOL}")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def diagonal_probabilities(self) -> np.ndarray:
        return np.clip(self.matrix.diagonal().real, 0.0, None)


@dataclass(frozen=True)
class HermitianMatrix:
    """Hermitian matrix with no trace or positivity requirement.

    Holds intermediates (block sums/differences, raw tomography
    reconstructions) that are Hermitian but not yet physical states.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("Hermitian matrix must be square")
        _require_finite(m, "Hermitian matrix")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class KrausSet:
    """Trace-preserving channel given by operators {K_i}, sum K_i^† K_i = I."""

    operators: tuple

    def __post_init__(self):
        ops = tuple(_freeze(np.asarray(k, dtype=complex)) for k in self.operators)
        if not ops:
            raise ValueError("Kraus set needs at least one operator")
        d = ops[0].shape[0]
        for k in ops:
            if k.shape != (d, d):
                raise ValueError("Kraus operators must share a square shape")
            _require_finite(k, "Kraus operator")
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(d))) > HERMITIAN_TOL:
            raise ValueError("Kraus set is not trace preserving")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].shape[0]

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = np.zeros_like(rho)
        for k in self.operators:
            out += k @ rho @ k.conj().T
        return out


@dataclass(frozen=True)
class Observable:
    """Hermitian operator whose expectation value we measure."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("observable must be square")
        _require_finite(m, "observable")
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL:
            raise ValueError("observable is not Hermitian within tolerance")
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# circuits
# ---------------------------------------------------------------------------

GATE_KINDS: Mapping[str, tuple] = {
    # kind: (qubit arity, angle count)
    "U3": (1, 3),
    "RX": (1, 1),
    "RY": (1, 1),
    "RZ": (1, 1),
    "H": (1, 0),
    "X": (1, 0),
    "CNOT": (2, 0),
    "CZ": (2, 0),
}


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple
    angles: tuple = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        arity, n_angles = GATE_KINDS[self.kind]
        qubits = tuple(int(q) for q in self.qubits)
        angles = tuple(float(a) for a in self.angles)
        if len(qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {qubits}")
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"duplicate qubits in {self.kind}: {qubits}")
        if len(angles) != n_angles:
            raise ValueError(f"{self.kind} takes {n_angles} angle(s), got {len(angles)}")
        if not all(math.isfinite(a) for a in angles):
            raise ValueError("gate angles must be finite")
        object.__setattr__(self, "qubits", qubits)
        object.__setattr__(self, "angles", angles)


@dataclass(frozen=True)
class CircuitSpec:
    """Ordered list of gate applications on n_qubits wires."""

    n_qubits: int
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        gates = tuple(g if isinstance(g, GateOp) else GateOp(*g) for g in self.gates)
        for g in gates:
            if any(q >= self.n_qubits or q < 0 for q in g.qubits):
                raise ValueError(f"gate {g.kind} on {g.qubits} out of range for {self.n_qubits} qubits")
        object.__setattr__(self, "gates", gates)


# ---------------------------------------------------------------------------
# gate matrices
# ---------------------------------------------------------------------------

def u_gate(theta1: float, theta2: float, theta3: float) -> np.ndarray:
    """General single-qubit rotation used by the random circuit families.

    U = [[ e^{i(t1-t2)/2} cos(t3/2),  -e^{i(t1+t2)/2} sin(t3/2)],
         [ e^{i(t1-t2)/2} sin(t3/2),   e^{i(t1+t2)/2} cos(t3/2)]]
    """
    pm = cmath.exp(0.5j * (theta1 - theta2))
    pp = cmath.exp(0.5j * (theta1 + theta2))
    c = math.cos(theta3 / 2)
    s = math.sin(theta3 / 2)
    return np.array([[pm * c, -pp * s], [pm * s, pp * c]], dtype=complex)


def standard_gate(kind: str, angles: Sequence[float] = ()) -> np.ndarray:
    """Matrix for a named gate: 2x2 for single-qubit kinds, 4x4 for CNOT/CZ.

    Two-qubit matrices take the first qubit as control in this module's
    big-endian ordering.
    """
    if kind not in GATE_KINDS:
        raise ValueError(f"unknown gate kind {kind!r}")
    _, n_angles = GATE_KINDS[kind]
    if len(angles) != n_angles:
        raise ValueError(f"{kind} takes {n_angles} angle(s), got {len(angles)}")
    if kind == "U3":
        return u_gate(*angles)
    if kind == "RX":
        t = angles[0]
        return math.cos(t / 2) * PAULI_I - 1j * math.sin(t / 2) * PAULI_X
    if kind == "RY":
        t = angles[0]
        return math.cos(t / 2) * PAULI_I - 1j * math.sin(t / 2) * PAULI_Y
    if kind == "RZ":
        t = angles[0]
        return np.array([[cmath.exp(-0.5j * t), 0], [0, cmath.exp(0.5j * t)]], dtype=complex)
    if kind == "H":
        return HADAMARD.copy()
    if kind == "X":
        return PAULI_X.copy()
    if kind == "CNOT":
        return np.kron(_P0, PAULI_I) + np.kron(_P1, PAULI_X)
    if kind == "CZ":
        return np.kron(_P0, PAULI_I) + np.kron(_P1, PAULI_Z)
    raise AssertionError(kind)


def tensor(a: np.ndarray, b: np.ndarray, *rest: np.ndarray) -> np.ndarray:
    """Kronecker product of two or more matrices, leftmost factor first."""
    out = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    for m in rest:
        out = np.kron(out, np.asarray(m, dtype=complex))
    return out


def embed_single(u: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    """Lift a 2x2 operator on `qubit` to the full 2^n space."""
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    left = np.eye(2**qubit, dtype=complex)
    right = np.eye(2 ** (n_qubits - qubit - 1), dtype=complex)
    return tensor(left, np.asarray(u, dtype=complex), right)


def controlled_gate(target_op: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    """Full-space controlled single-qubit operation for any wire pair."""
    return embed_single(_P0, control, n_qubits) + embed_single(_P1, control, n_qubits) @ embed_single(
        target_op, target, n_qubits
    )


def gate_operator(gate: GateOp, n_qubits: int) -> np.ndarray:
    """Full 2^n x 2^n unitary for one gate application."""
    if gate.kind == "CNOT":
        return controlled_gate(PAULI_X, gate.qubits[0], gate.qubits[1], n_qubits)
    if gate.kind == "CZ":
        return controlled_gate(PAULI_Z, gate.qubits[0], gate.qubits[1], n_qubits)
    return embed_single(standard_gate(gate.kind, gate.angles), gate.qubits[0], n_qubits)


def circuit_unitary(circuit: CircuitSpec) -> np.ndarray:
    """Product of all gate unitaries in application order."""
    u = np.eye(2**circuit.n_qubits, dtype=complex)
    for g in circuit.gates:
        u = gate_operator(g, circuit.n_qubits) @ u
    return u


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

def basis_state(n_qubits: int, index: int = 0) -> StateVector:
    amp = np.zeros(2**n_qubits, dtype=complex)
    amp[index] = 1.0
    return StateVector(amp)


def apply_circuit_state(psi: StateVector, circuit: CircuitSpec) -> StateVector:
    """Evolve a pure state through a noiseless circuit."""
    if psi.n_qubits != circuit.n_qubits:
        raise ValueError(f"state has {psi.n_qubits} qubits, circuit has {circuit.n_qubits}")
    amp = psi.amplitudes.copy()
    for g in circuit.gates:
        amp = gate_operator(g, circuit.n_qubits) @ amp
    return StateVector(amp)


def _noise_for_qubit(noise, qubit: int):
    if noise is None:
        return None
    if isinstance(noise, KrausSet):
        return noise
    ks = noise.get(qubit)
    if ks is not None and not isinstance(ks, KrausSet):
        raise ValueError("per-qubit noise map must hold KrausSet values")
    return ks


def apply_circuit_density(rho: DensityMatrix, circuit: CircuitSpec, noise=None) -> DensityMatrix:
    """Evolve a density matrix; after each gate, apply single-qubit noise to
    every qubit the gate touched.

    `noise` is None, one single-qubit KrausSet shared by all qubits, or a
    mapping qubit -> KrausSet.
    """
    if rho.n_qubits != circuit.n_qubits:
        raise ValueError(f"state has {rho.n_qubits} qubits, circuit has {circuit.n_qubits}")
    if isinstance(noise, KrausSet) and noise.dim != 2:
        raise ValueError("gate noise must be a single-qubit channel")
    n = circuit.n_qubits
    m = rho.matrix.copy()
    for g in circuit.gates:
        u = gate_operator(g, n)
        m = u @ m @ u.conj().T
        for q in g.qubits:
            ks = _noise_for_qubit(noise, q)
            if ks is None:
                continue
            acc = np.zeros_like(m)
            for k in ks.operators:
                kf = embed_single(k, q, n)
                acc += kf @ m @ kf.conj().T
            m = acc
        m = 0.5 * (m + m.conj().T)
    return DensityMatrix(m)


# ---------------------------------------------------------------------------
# noise construction
# ---------------------------------------------------------------------------

def amplitude_damping_kraus(gamma: float) -> KrausSet:
    """Relaxation channel: |1> decays to |0> with probability gamma."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)
    return KrausSet((k0, k1) if gamma > 0 else (k0,))


def phase_damping_kraus(lam: float) -> KrausSet:
    """Dephasing channel: off-diagonal terms shrink by sqrt(1 - lam)."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    k0 = np.array([[1, 0], [0, math.sqrt(1 - lam)]], dtype=complex)
    k1 = np.array([[0, 0], [0, math.sqrt(lam)]], dtype=complex)
    return KrausSet((k0, k1) if lam > 0 else (k0,))


def depolarizing_kraus(p: float) -> KrausSet:
    if not 0.0 <= p <= 1.0:
        raise ValueError("depolarizing probability must lie in [0, 1]")
    if p == 0.0:
        return KrausSet((PAULI_I.copy(),))
    return KrausSet(
        (
            math.sqrt(1 - 3 * p / 4) * PAULI_I,
            math.sqrt(p / 4) * PAULI_X,
            math.sqrt(p / 4) * PAULI_Y,
            math.sqrt(p / 4) * PAULI_Z,
        )
    )


def compose_kraus(first: KrausSet, second: KrausSet) -> KrausSet:
    """Channel running `first` then `second`; operators are all products."""
    ops = []
    for a in first.operators:
        for b in second.operators:
            k = b @ a
            if np.max(np.abs(k)) > 1e-15:
                ops.append(k)
    return KrausSet(tuple(ops))


def make_noise(gamma: float, lam: float, depol: float = 0.0) -> KrausSet:
    """Per-gate single-qubit noise: amplitude damping, then phase damping,
    then an optional depolarizing term."""
    ks = compose_kraus(amplitude_damping_kraus(gamma), phase_damping_kraus(lam))
    if depol > 0.0:
        ks = compose_kraus(ks, depolarizing_kraus(depol))
    return ks


def realistic_noise(
    n_qubits: int,
    rng: np.random.Generator,
    gamma_range=(0.01, 0.05),
    lambda_range=(0.01, 0.05),
    depol: float = 0.01,
):
    """Device-like noise map: each qubit gets its own gamma and lambda drawn
    from the configured ranges, plus a shared depolarizing term.

    Returns (mapping qubit -> KrausSet, drawn gammas, drawn lambdas).
    """
    gammas = rng.uniform(gamma_range[0], gamma_range[1], size=n_qubits)
    lams = rng.uniform(lambda_range[0], lambda_range[1], size=n_qubits)
    chan = {q: make_noise(gammas[q], lams[q], depol) for q in range(n_qubits)}
    return chan, gammas, lams


# ---------------------------------------------------------------------------
# metrics and projection
# ---------------------------------------------------------------------------

def state_fidelity(phi: StateVector, psi: StateVector) -> float:
    """|<phi|psi>|^2 for pure states."""
    if phi.amplitudes.size != psi.amplitudes.size:
        raise ValueError("state dimensions differ")
    return float(min(1.0, abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2))


_EIG_FLOOR = 1e-13  # spectra of unit-trace states: anything below this is eigh noise


def _clamped_sqrt_eigh(m: np.ndarray):
    w, v = np.linalg.eigh(m)
    if w[0] < -PSD_TOL:
        raise ValueError(f"matrix eigenvalue {w[0]} below -{PSD_TOL}; not a valid state")
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    return np.sqrt(w), v


def mixed_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via eigendecomposition.

    Eigenvalues below the noise floor are zeroed before the square roots;
    sqrt amplifies the eigensolver's 1e-16 jitter to 1e-8 otherwise.
    """
    if rho.dim != sigma.dim:
        raise ValueError("density matrix dimensions differ")
    sw, v = _clamped_sqrt_eigh(rho.matrix)
    sqrt_rho = (v * sw) @ v.conj().T
    inner = sqrt_rho @ sigma.matrix @ sqrt_rho
    inner = 0.5 * (inner + inner.conj().T)
    w = np.linalg.eigvalsh(inner)
    if w[0] < -PSD_TOL:
        raise ValueError(f"inner eigenvalue {w[0]} below -{PSD_TOL}")
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    f = float(np.sum(np.sqrt(w))) ** 2
    return float(min(1.0, max(0.0, f)))


def fidelity(a, b) -> float:
    """Fidelity between any mix of StateVector / DensityMatrix arguments."""
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return state_fidelity(a, b)
    ra = a.density() if isinstance(a, StateVector) else a
    rb = b.density() if isinstance(b, StateVector) else b
    return mixed_fidelity(ra, rb)


def project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {w : w >= 0, sum w = 1}, sort-and-threshold."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot project non-finite vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, v.size + 1)
    mask = u + (1.0 - css) / idx > 0
    rho = int(np.nonzero(mask)[0][-1])
    tau = (1.0 - css[rho]) / (rho + 1)
    return np.maximum(v + tau, 0.0)


def nearest_density_matrix(m) -> DensityMatrix:
    """Closest valid density matrix in Frobenius norm.

    Unique minimizer of ||X - M||^2 subject to tr X = 1, X >= 0: symmetrize,
    eigendecompose, project the spectrum onto the probability simplex, and
    reassemble in the same eigenbasis.
    """
    if isinstance(m, (DensityMatrix, HermitianMatrix, Observable)):
        m = m.matrix
    m = np.asarray(m, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    w = project_to_simplex(w)
    out = (v * w) @ v.conj().T
    return DensityMatrix(0.5 * (out + out.conj().T))


def expectation(state, observable: Observable) -> float:
    """<psi|O|psi> or tr(rho O); the tiny imaginary residue is discarded."""
    if isinstance(state, StateVector):
        if state.amplitudes.size != observable.dim:
            raise ValueError("state and observable dimensions differ")
        val = np.vdot(state.amplitudes, observable.matrix @ state.amplitudes)
    elif isinstance(state, DensityMatrix):
        if state.dim != observable.dim:
            raise ValueError("state and observable dimensions differ")
        val = np.trace(state.matrix @ observable.matrix)
    else:
        raise TypeError("expectation takes a StateVector or DensityMatrix")
    return float(val.real)


# ---------------------------------------------------------------------------
# single-qubit Euler decomposition (Rx-Rz-Rx circuit order)
# ---------------------------------------------------------------------------

def xzx_angles(u: np.ndarray) -> tuple:
    """Angles (a, b, c) so that applying Rx(a), Rz(b), Rx(c) in circuit order
    reproduces `u` up to a global phase.

    Used to express arbitrary single-qubit gates in the fixed Rx-Rz-Rx
    template of the two-qubit half-block circuits.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 unitary")
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    v = u / cmath.sqrt(det)
    # conjugating by H swaps the x and z axes: solve Rz(c) Rx(b) Rz(a) for HVH
    w = HADAMARD @ v @ HADAMARD
    b = 2.0 * math.atan2(abs(w[1, 0]), abs(w[0, 0]))
    if abs(w[0, 0]) < 1e-12:  # b = pi, only a - c is determined
        a = -math.pi - 2.0 * cmath.phase(w[1, 0])
        c = 0.0
    elif abs(w[1, 0]) < 1e-12:  # b = 0, only a + c is determined
        a = -2.0 * cmath.phase(w[0, 0])
        c = 0.0
    else:
        apc = -2.0 * cmath.phase(w[0, 0])
        amc = -math.pi - 2.0 * cmath.phase(w[1, 0])
        a = 0.5 * (apc + amc)
        c = 0.5 * (apc - amc)
    return (a, b, c)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def matrix_to_pairs(m: np.ndarray) -> list:
    """Flatten a complex matrix to [[re, im], ...] in row-major order."""
    flat = np.asarray(m, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def pairs_to_matrix(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    flat = np.array([complex(re, im) for re, im in pairs], dtype=complex)
    dim = math.isqrt(flat.size)
    if dim * dim != flat.size:
        raise ValueError(f"{flat.size} entries do not form a square matrix")
    return flat.reshape(dim, dim)


def vector_to_pairs(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex).reshape(-1)]


def pairs_to_vector(pairs: Sequence[Sequence[float]]) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)
