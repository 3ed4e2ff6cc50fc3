"""Three-qubit simulation through a two-qubit backend.

An 8x8 density matrix is split along the idle qubit into four 4x4 blocks.
The diagonal blocks are Hermitian already; the off-diagonal pair is repacked
into the Hermitian sum S = r01 + r10 and difference D = (r01 - r10) i.  Each
of the four Hermitian matrices is conditioned into a valid density matrix
(scaled by alpha, shifted by beta*I to unit trace), pushed through any
backend that maps two-qubit density matrices to two-qubit density matrices,
un-conditioned, and recombined into the evolved 8x8 matrix.

Because every step is affine, the pipeline is exact for an exact linear
backend; surrogate backends inherit a per-layer repair onto the nearest
valid density matrix to stop error accumulation.

The beta*I subtraction inverts the shift only when the backend maps the
identity to itself.  For non-unital channels (amplitude damping) the
pipeline instead measures the backend's identity image once per layer as
4 * backend(I/4); `naive_inversion=True` forces the plain beta*I rule.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import codec, datagen, qcore
from .datagen import CircuitFamily
from .qcore import CircuitSpec, DensityMatrix, HermitianMatrix

CONJUGACY_TOL = 1e-6

_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


class QubitPairCase(enum.Enum):
    """Which qubit is factored out, i.e. which pair the layer acts on."""

    FACTOR_Q0 = "FACTOR_Q0"  # layer acts on (q1, q2)
    FACTOR_Q2 = "FACTOR_Q2"  # layer acts on (q0, q1)
    FACTOR_Q1 = "FACTOR_Q1"  # layer acts on (q0, q2)


PAIR_TO_CASE = {
    (1, 2): QubitPairCase.FACTOR_Q0,
    (0, 1): QubitPairCase.FACTOR_Q2,
    (0, 2): QubitPairCase.FACTOR_Q1,
}


def _case_indices(case: QubitPairCase):
    """index[i][r] = full 8-dim index for factored-qubit value i and block row r.

    Block rows order the acting pair as (lower qubit, higher qubit) with the
    lower qubit as the more significant bit.
    """
    if case is QubitPairCase.FACTOR_Q0:
        return [[4 * i + r for r in range(4)] for i in (0, 1)]
    if case is QubitPairCase.FACTOR_Q2:
        return [[2 * r + i for r in range(4)] for i in (0, 1)]
    return [[4 * (r >> 1) + 2 * i + (r & 1) for r in range(4)] for i in (0, 1)]


@dataclass(frozen=True)
class BlockSet:
    rho00: np.ndarray
    rho01: np.ndarray
    rho10: np.ndarray
    rho11: np.ndarray
    case: QubitPairCase

    def __post_init__(self):
        for name in ("rho00", "rho01", "rho10", "rho11"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.shape != (4, 4):
                raise ValueError(f"{name} must be 4x4")
            object.__setattr__(self, name, m)
        if np.max(np.abs(self.rho10 - self.rho01.conj().T)) > qcore.HERMITIAN_TOL:
            raise ValueError("rho10 is not the conjugate transpose of rho01")
        for name in ("rho00", "rho11"):
            m = getattr(self, name)
            if np.max(np.abs(m - m.conj().T)) > qcore.HERMITIAN_TOL:
                raise ValueError(f"{name} is not Hermitian")


def decompose(rho: DensityMatrix, case: QubitPairCase) -> BlockSet:
    """Split an 8x8 density matrix into the four 4x4 blocks of `case`."""
    if rho.dim != 8:
        raise ValueError("decompose expects a 3-qubit density matrix")
    idx = _case_indices(case)
    m = rho.matrix
    b = [[m[np.ix_(idx[i], idx[j])] for j in (0, 1)] for i in (0, 1)]
    return BlockSet(rho00=b[0][0], rho01=b[0][1], rho10=b[1][0], rho11=b[1][1], case=case)


def recompose(blocks: BlockSet) -> np.ndarray:
    """Scatter four 4x4 blocks back to the full 8x8 matrix; exact inverse of
    decompose for every case."""
    idx = _case_indices(blocks.case)
    out = np.zeros((8, 8), dtype=complex)
    pairs = {(0, 0): blocks.rho00, (0, 1): blocks.rho01, (1, 0): blocks.rho10, (1, 1): blocks.rho11}
    for (i, j), b in pairs.items():
        out[np.ix_(idx[i], idx[j])] = b
    return out


def hermitize(rho01: np.ndarray, rho10: np.ndarray):
    """Repack the conjugate off-diagonal pair as two Hermitian matrices:
    S = r01 + r10 and D = (r01 - r10) i."""
    rho01 = np.asarray(rho01, dtype=complex)
    rho10 = np.asarray(rho10, dtype=complex)
    gap = float(np.max(np.abs(rho10 - rho01.conj().T)))
    if gap > CONJUGACY_TOL:
        raise ValueError(f"blocks are not conjugate transposes (violation {gap})")
    s = rho01 + rho10
    d = (rho01 - rho10) * 1j
    return HermitianMatrix(0.5 * (s + s.conj().T)), HermitianMatrix(0.5 * (d + d.conj().T))


def reblocks(s: HermitianMatrix, d: HermitianMatrix):
    """Inverse of hermitize: r01 = (S - D i)/2, r10 = (S + D i)/2."""
    sm, dm = s.matrix, d.matrix
    rho01 = 0.5 * (sm - 1j * dm)
    rho10 = 0.5 * (sm + 1j * dm)
    return rho01, rho10


@dataclass(frozen=True)
class Conditioning:
    """Recorded scale/shift that turned a Hermitian block into a state."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")


def condition(m) -> tuple:
    """Scale and shift a Hermitian matrix into a valid density matrix.

    Output is alpha*M + beta*I with beta = (1 - alpha*tr M)/d.  alpha is
    min(0.5, 0.9/(tr M - d*lambda_min)) when that denominator is positive
    (the 0.9 leaves a positive-definiteness margin), else 0.5.
    """
    if isinstance(m, (HermitianMatrix, DensityMatrix)):
        m = m.matrix
    m = np.asarray(m, dtype=complex)
    m = 0.5 * (m + m.conj().T)
    d = m.shape[0]
    tr = float(np.trace(m).real)
    lam_min = float(np.linalg.eigvalsh(m)[0])
    denom = tr - d * lam_min
    alpha = min(0.5, 0.9 / denom) if denom > 0 else 0.5
    beta = (1.0 - alpha * tr) / d
    out = alpha * m + beta * np.eye(d)
    return DensityMatrix(0.5 * (out + out.conj().T)), Conditioning(alpha=alpha, beta=beta)


def uncondition(evolved, cond: Conditioning, identity_image: Optional[np.ndarray] = None) -> np.ndarray:
    """Invert the conditioning after the backend ran: (M' - beta*E_I)/alpha,
    where E_I is the backend's image of the identity (I for the naive rule).
    Exact inverse of condition∘backend whenever the backend is linear."""
    if isinstance(evolved, DensityMatrix):
        evolved = evolved.matrix
    evolved = np.asarray(evolved, dtype=complex)
    if cond.alpha == 0:
        raise ValueError("cannot invert conditioning with alpha = 0")
    e_i = np.eye(evolved.shape[0], dtype=complex) if identity_image is None else identity_image
    return (evolved - cond.beta * e_i) / cond.alpha


# ---------------------------------------------------------------------------
# layers and backends
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircuitLayer:
    """One half-block layer: Rx-Rz-Rx on each qubit of `pair`, then a CNOT.

    `cnot_direction` 0 means the lower-numbered qubit controls, 1 the higher.
    """

    pair: tuple
    angles: tuple
    cnot_direction: int = 0

    def __post_init__(self):
        pair = tuple(int(q) for q in self.pair)
        if pair not in PAIR_TO_CASE:
            raise ValueError(f"pair must be one of {sorted(PAIR_TO_CASE)}, got {pair}")
        angles = tuple(float(a) for a in self.angles)
        if len(angles) != 6:
            raise ValueError("a layer takes exactly 6 rotation angles")
        if self.cnot_direction not in (0, 1):
            raise ValueError("cnot_direction must be 0 or 1")
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "angles", angles)

    @property
    def case(self) -> QubitPairCase:
        return PAIR_TO_CASE[self.pair]

    @property
    def family(self) -> CircuitFamily:
        return CircuitFamily.TWO_Q_HALFBLOCK_A if self.cnot_direction == 0 else CircuitFamily.TWO_Q_HALFBLOCK_B


def layer_circuit(layer: CircuitLayer) -> CircuitSpec:
    """Two-qubit circuit of the layer in its local (pair) frame."""
    return datagen.family_circuit(layer.family, layer.angles)


class ExactBackend:
    """Runs each layer with the exact density-matrix simulator."""

    def __init__(self, noise=None):
        self.noise = noise

    def __call__(self, rho: DensityMatrix, layer: CircuitLayer) -> DensityMatrix:
        return qcore.apply_circuit_density(rho, layer_circuit(layer), self.noise)


class SurrogateBackend:
    """Runs each layer with a trained universal half-block surrogate.

    The model covers one CNOT orientation; the other orientation is served
    exactly through the swap symmetry U_B(a, b) = SWAP U_A(b, a) SWAP.
    """

    def __init__(self, model):
        if model.target_kind is not codec.FeatureKind.RHO_2Q:
            raise ValueError("surrogate backend needs a density-matrix (RHO_2Q) model")
        expected = codec.FeatureKind.RHO_2Q.length + 6
        if model.config.input_len != expected:
            raise ValueError(f"universal model must take {expected} inputs")
        if model.family not in (CircuitFamily.TWO_Q_HALFBLOCK_A.value, CircuitFamily.TWO_Q_HALFBLOCK_B.value):
            raise ValueError(f"not a half-block model: family {model.family}")
        self.model = model
        self._model_direction = 0 if model.family == CircuitFamily.TWO_Q_HALFBLOCK_A.value else 1

    def __call__(self, rho: DensityMatrix, layer: CircuitLayer) -> DensityMatrix:
        from . import surrogate as _surrogate

        mat = rho.matrix
        angles = layer.angles
        swapped = layer.cnot_direction != self._model_direction
        if swapped:
            mat = _SWAP @ mat @ _SWAP
            angles = angles[3:6] + angles[0:3]
        features = codec.features_from_hermitian(mat)
        predicted = _surrogate.predict(self.model, np.concatenate([features, angles]))
        out = codec.decode(predicted)
        if swapped:
            out = DensityMatrix(_SWAP @ out.matrix @ _SWAP)
        return out


# ---------------------------------------------------------------------------
# the layer pipeline
# ---------------------------------------------------------------------------

def backend_identity_image(backend, layer: CircuitLayer) -> np.ndarray:
    """The backend's image of the identity, measured as 4 * backend(I/4)."""
    quarter = DensityMatrix(np.eye(4, dtype=complex) / 4.0)
    return 4.0 * backend(quarter, layer).matrix


def apply_layer(
    rho: DensityMatrix,
    layer: CircuitLayer,
    backend,
    naive_inversion: bool = False,
) -> DensityMatrix:
    """Advance a 3-qubit density matrix through one two-qubit layer using
    only two-qubit backend evaluations."""
    if rho.dim != 8:
        raise ValueError("apply_layer expects a 3-qubit density matrix")
    blocks = decompose(rho, layer.case)
    s, d = hermitize(blocks.rho01, blocks.rho10)

    pieces = {"rho00": blocks.rho00, "rho11": blocks.rho11, "s": s, "d": d}
    conditioned = {k: condition(v) for k, v in pieces.items()}
    evolved = {k: backend(dm, layer) for k, (dm, _) in conditioned.items()}
    e_i = None if naive_inversion else backend_identity_image(backend, layer)
    restored = {
        k: uncondition(evolved[k], conditioned[k][1], e_i) for k in pieces
    }
    restored = {k: 0.5 * (m + m.conj().T) for k, m in restored.items()}

    rho01, rho10 = reblocks(HermitianMatrix(restored["s"]), HermitianMatrix(restored["d"]))
    raw = recompose(
        BlockSet(rho00=restored["rho00"], rho01=rho01, rho10=rho10, rho11=restored["rho11"], case=layer.case)
    )
    return qcore.nearest_density_matrix(raw)


def simulate_3q(
    layers: Sequence[CircuitLayer],
    backend,
    naive_inversion: bool = False,
    initial: Optional[DensityMatrix] = None,
) -> DensityMatrix:
    """Fold apply_layer over the layer list, starting from |000><000|."""
    rho = initial if initial is not None else qcore.basis_state(3).density()
    for layer in layers:
        rho = apply_layer(rho, layer, backend, naive_inversion)
    return rho


def layers_to_circuit(layers: Sequence[CircuitLayer]) -> CircuitSpec:
    """Flatten layers into one 3-qubit circuit for direct simulation."""
    gates = []
    for layer in layers:
        lo, hi = layer.pair
        a = layer.angles
        gates += [
            ("RX", (lo,), (a[0],)),
            ("RZ", (lo,), (a[1],)),
            ("RX", (lo,), (a[2],)),
            ("RX", (hi,), (a[3],)),
            ("RZ", (hi,), (a[4],)),
            ("RX", (hi,), (a[5],)),
        ]
        control, target = (lo, hi) if layer.cnot_direction == 0 else (hi, lo)
        gates.append(("CNOT", (control, target)))
    return CircuitSpec(3, gates)


def direct_simulate_3q(layers: Sequence[CircuitLayer], noise=None) -> DensityMatrix:
    """Reference: evolve the full 8x8 matrix gate by gate."""
    return qcore.apply_circuit_density(
        qcore.basis_state(3).density(), layers_to_circuit(layers), noise
    )


def random_layers(rng: np.random.Generator, n_layers: int = 3) -> list:
    """Random layer stack over all three qubit pairs and both orientations."""
    pairs = sorted(PAIR_TO_CASE)
    return [
        CircuitLayer(
            pair=pairs[rng.integers(len(pairs))],
            angles=tuple(rng.uniform(0.0, 2.0 * np.pi, size=6)),
            cnot_direction=int(rng.integers(2)),
        )
        for _ in range(n_layers)
    ]


# ---------------------------------------------------------------------------
# circuit files
# ---------------------------------------------------------------------------

def save_layers(path, layers: Sequence[CircuitLayer]) -> None:
    payload = [
        {"pair": list(l.pair), "angles": list(l.angles), "cnot_direction": l.cnot_direction}
        for l in layers
    ]
    with open(path, "w", encoding="ascii") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_layers(path) -> list:
    with open(path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    return [
        CircuitLayer(pair=tuple(o["pair"]), angles=tuple(o["angles"]), cnot_direction=int(o.get("cnot_direction", 0)))
        for o in payload
    ]
