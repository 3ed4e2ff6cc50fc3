"""Encodings between quantum objects and flat real feature vectors.

Pure states are stored as interleaved (re, im) amplitude pairs.  Density
matrices are stored as their free real parameters: walking the rows of the
upper triangle, each diagonal contributes one real value and each
off-diagonal entry contributes its real part immediately followed by its
imaginary part.  The conjugate lower triangle is redundant and dropped.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import qcore
from .qcore import DensityMatrix, StateVector


class FeatureKind(enum.Enum):
    STATE_1Q = "STATE_1Q"
    RHO_1Q = "RHO_1Q"
    STATE_2Q = "STATE_2Q"
    RHO_2Q = "RHO_2Q"

    @property
    def n_qubits(self) -> int:
        return 1 if self in (FeatureKind.STATE_1Q, FeatureKind.RHO_1Q) else 2

    @property
    def is_density(self) -> bool:
        return self in (FeatureKind.RHO_1Q, FeatureKind.RHO_2Q)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def length(self) -> int:
        d = self.dim
        return d * d if self.is_density else 2 * d


def state_kind(n_qubits: int) -> FeatureKind:
    return {1: FeatureKind.STATE_1Q, 2: FeatureKind.STATE_2Q}[n_qubits]


def density_kind(n_qubits: int) -> FeatureKind:
    return {1: FeatureKind.RHO_1Q, 2: FeatureKind.RHO_2Q}[n_qubits]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    kind: FeatureKind

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size != self.kind.length:
            raise ValueError(f"{self.kind.value} expects {self.kind.length} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature vector contains NaN or Inf")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# Hermitian parameterization shared with tomography
# ---------------------------------------------------------------------------

def features_from_hermitian(m: np.ndarray) -> np.ndarray:
    """Free real parameters of a Hermitian matrix, row-major upper triangle."""
    m = np.asarray(m, dtype=complex)
    d = m.shape[0]
    out = []
    for r in range(d):
        out.append(m[r, r].real)
        for c in range(r + 1, d):
            out.append(m[r, c].real)
            out.append(m[r, c].imag)
    return np.array(out, dtype=float)


def hermitian_from_features(values: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of features_from_hermitian; output is Hermitian by construction."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size != dim * dim:
        raise ValueError(f"need {dim * dim} values for a {dim}x{dim} Hermitian matrix")
    m = np.zeros((dim, dim), dtype=complex)
    i = 0
    for r in range(dim):
        m[r, r] = values[i]
        i += 1
        for c in range(r + 1, dim):
            m[r, c] = complex(values[i], values[i + 1])
            m[c, r] = complex(values[i], -values[i + 1])
            i += 2
    return m


def hermitian_basis(dim: int) -> list:
    """Hermitian matrices B_p with M = sum_p features(M)[p] * B_p."""
    basis = []
    for r in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[r, r] = 1.0
        basis.append(e)
        for c in range(r + 1, dim):
            re = np.zeros((dim, dim), dtype=complex)
            re[r, c] = re[c, r] = 1.0
            basis.append(re)
            im = np.zeros((dim, dim), dtype=complex)
            im[r, c] = 1j
            im[c, r] = -1j
            basis.append(im)
    return basis


# ---------------------------------------------------------------------------
# encode / decode
# ---------------------------------------------------------------------------

def encode(obj, canonical_phase: bool = False) -> FeatureVector:
    """Feature vector for a StateVector or DensityMatrix.

    `canonical_phase` multiplies a pure state by the phase that makes its
    largest-magnitude amplitude real and positive before encoding; off by
    default because fidelity is phase-invariant anyway.
    """
    if isinstance(obj, StateVector):
        amp = obj.amplitudes
        if canonical_phase:
            pivot = amp[np.argmax(np.abs(amp))]
            amp = amp * np.exp(-1j * np.angle(pivot))
        values = np.empty(2 * amp.size, dtype=float)
        values[0::2] = amp.real
        values[1::2] = amp.imag
        return FeatureVector(values, state_kind(obj.n_qubits))
    if isinstance(obj, DensityMatrix):
        return FeatureVector(features_from_hermitian(obj.matrix), density_kind(obj.n_qubits))
    raise TypeError("encode takes a StateVector or DensityMatrix")


def decode(fv: FeatureVector):
    """Quantum object for a feature vector.

    Pure-state kinds renormalize when the decoded norm lies in [0.9, 1.1]
    and reject anything further off.  Density kinds are rebuilt as Hermitian
    matrices and repaired through nearest_density_matrix whenever they
    violate the density-matrix invariants (trained-model outputs drift).
    """
    kind = fv.kind
    if not kind.is_density:
        amp = fv.values[0::2] + 1j * fv.values[1::2]
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) <= qcore.NORM_TOL:
            return StateVector(amp)
        if not 0.9 <= norm <= 1.1:
            raise ValueError(f"decoded state norm {norm} outside [0.9, 1.1]")
        return StateVector(amp / norm)
    m = hermitian_from_features(fv.values, kind.dim)
    try:
        return DensityMatrix(m)
    except ValueError:
        return qcore.nearest_density_matrix(m)
