"""State tomography from diagonal-only readouts.

A readout can only see the diagonal of the density matrix, so the state is
rotated by every tensor product of {identity, 90-degree x rotation,
90-degree y rotation} first; each rotated diagonal is a real-linear
combination of the state's free parameters.  Stacking all of them gives an
overdetermined linear system (36 equations for 16 unknowns on two qubits)
solved by least squares, and the reconstructed matrix is projected back
onto the set of valid density matrices to absorb shot noise.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import codec, qcore
from .qcore import DensityMatrix, HermitianMatrix

EXACT_SUM_TOL = 1e-10
SHOT_SUM_TOL = 0.02

_LETTER_OPS = {
    "I": qcore.PAULI_I,
    "X": qcore.standard_gate("RX", (math.pi / 2,)),
    "Y": qcore.standard_gate("RY", (math.pi / 2,)),
}


@dataclass(frozen=True)
class ReadoutOperation:
    label: str
    unitary: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        d = 2 ** len(self.label)
        if u.shape != (d, d):
            raise ValueError(f"label {self.label!r} implies a {d}x{d} unitary")
        if np.max(np.abs(u.conj().T @ u - np.eye(d))) > 1e-12:
            raise ValueError("readout operation is not unitary")
        object.__setattr__(self, "unitary", qcore._freeze(u))


@dataclass(frozen=True)
class ProbabilityRecord:
    label: str
    probs: np.ndarray
    shots: Optional[int] = None

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).reshape(-1)
        if p.size != 2 ** len(self.label):
            raise ValueError(f"label {self.label!r} implies {2 ** len(self.label)} probabilities")
        if np.min(p) < -1e-9:
            raise ValueError(f"probability {np.min(p)} below -1e-9")
        tol = SHOT_SUM_TOL if self.shots else EXACT_SUM_TOL
        if abs(p.sum() - 1.0) > tol:
            raise ValueError(f"probabilities sum to {p.sum()}, outside 1 +/- {tol}")
        p = p.copy()
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)


def readout_ops(n_qubits: int) -> list:
    """All 3^n rotation prefixes, first qubit's letter first."""
    if n_qubits not in (1, 2):
        raise ValueError("readout operations are defined for 1 or 2 qubits")
    ops = []
    for letters in itertools.product("IXY", repeat=n_qubits):
        label = "".join(letters)
        u = _LETTER_OPS[letters[0]]
        for letter in letters[1:]:
            u = qcore.tensor(u, _LETTER_OPS[letter])
        ops.append(ReadoutOperation(label=label, unitary=u))
    return ops


def measure_diagonals(
    rho: DensityMatrix,
    op: ReadoutOperation,
    shots: Optional[int] = None,
    rng=None,
) -> ProbabilityRecord:
    """Diagonal of U rho U^dagger, exactly or as multinomial frequencies."""
    if rho.dim != op.unitary.shape[0]:
        raise ValueError("state and readout dimensions differ")
    rotated = op.unitary @ rho.matrix @ op.unitary.conj().T
    probs = rotated.diagonal().real
    if shots is None:
        return ProbabilityRecord(label=op.label, probs=probs, shots=None)
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if rng is None or isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(rng)
    clean = np.clip(probs, 0.0, None)
    counts = rng.multinomial(shots, clean / clean.sum())
    return ProbabilityRecord(label=op.label, probs=counts / shots, shots=int(shots))


def measure_all(
    rho: DensityMatrix,
    shots: Optional[int] = None,
    master_seed: int = 0,
) -> list:
    """One ProbabilityRecord per readout operation; each record gets its own
    seed derived from (master_seed, operation index)."""
    records = []
    for i, op in enumerate(readout_ops(rho.n_qubits)):
        rng = np.random.default_rng([master_seed, i]) if shots else None
        records.append(measure_diagonals(rho, op, shots=shots, rng=rng))
    return records


# ---------------------------------------------------------------------------
# linear system
# ---------------------------------------------------------------------------

def _sorted_full_set(records: Sequence[ProbabilityRecord]):
    if not records:
        raise ValueError("no probability records given")
    n = len(records[0].label)
    ops = readout_ops(n)
    by_label = {}
    for r in records:
        if r.label in by_label:
            raise ValueError(f"duplicate record for label {r.label!r}")
        by_label[r.label] = r
    missing = [op.label for op in ops if op.label not in by_label]
    if missing:
        raise ValueError(f"missing readout labels: {missing}")
    return n, ops, [by_label[op.label] for op in ops]


def build_system(records: Sequence[ProbabilityRecord]):
    """Stack every rotated diagonal into A x = b over the state's free
    parameters.  Coefficients come from conjugating the Hermitian basis
    matrices with the actual readout unitaries, never from a table."""
    n, ops, ordered = _sorted_full_set(records)
    dim = 2**n
    basis = codec.hermitian_basis(dim)
    n_params = len(basis)
    a = np.zeros((len(ops) * dim, n_params))
    b = np.zeros(len(ops) * dim)
    for oi, (op, rec) in enumerate(zip(ops, ordered)):
        u = op.unitary
        for pi, bmat in enumerate(basis):
            a[oi * dim : (oi + 1) * dim, pi] = (u @ bmat @ u.conj().T).diagonal().real
        b[oi * dim : (oi + 1) * dim] = rec.probs
    return a, b


def reconstruct(records: Sequence[ProbabilityRecord]) -> HermitianMatrix:
    """Least-squares solution of the readout system, assembled as a
    Hermitian matrix (possibly unphysical under shot noise)."""
    a, b = build_system(records)
    if np.linalg.matrix_rank(a) < a.shape[1]:
        raise ValueError("readout system is rank deficient")
    params, *_ = np.linalg.lstsq(a, b, rcond=None)
    dim = int(math.isqrt(a.shape[1]))
    return HermitianMatrix(codec.hermitian_from_features(params, dim))


def simplex_projection(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-and-threshold);
    applied to eigenvalue vectors it solves the nearest-density-matrix
    program in closed form."""
    return qcore.project_to_simplex(v)


def tomo_pipeline(records: Sequence[ProbabilityRecord]) -> DensityMatrix:
    """Reconstruct, then project onto the nearest valid density matrix."""
    return qcore.nearest_density_matrix(reconstruct(records))


# ---------------------------------------------------------------------------
# probability files
# ---------------------------------------------------------------------------

def save_records(path, records: Sequence[ProbabilityRecord]) -> None:
    payload = [
        {"label": r.label, "probs": [float(p) for p in r.probs], "shots": r.shots}
        for r in records
    ]
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_records(path) -> list:
    with open(path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    return [
        ProbabilityRecord(
            label=o["label"],
            probs=np.asarray(o["probs"], dtype=float),
            shots=o.get("shots"),
        )
        for o in payload
    ]
