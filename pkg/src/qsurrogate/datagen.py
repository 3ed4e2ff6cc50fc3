"""Random circuit families and reproducible training-set generation.

Datasets are JSON-lines files: one header object, then one record per line
with fields {family, seed, input, target}.  Floats are written with 17
significant digits and every record derives its own RNG from
sha256(master_seed, index), so output is byte-identical across runs and
machines and records can be generated in any order.
"""

from __future__ import annotations

import enum
import hashlib
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import codec, qcore
from .codec import FeatureKind
from .qcore import CircuitSpec, DensityMatrix, StateVector

TWO_PI = 2.0 * math.pi


class CircuitFamily(enum.Enum):
    ONE_Q = "ONE_Q"
    TWO_Q_SPECIAL = "TWO_Q_SPECIAL"
    TWO_Q_HALFBLOCK_A = "TWO_Q_HALFBLOCK_A"
    TWO_Q_HALFBLOCK_B = "TWO_Q_HALFBLOCK_B"

    @property
    def n_qubits(self) -> int:
        return 1 if self is CircuitFamily.ONE_Q else 2

    @property
    def n_angles(self) -> int:
        return {"ONE_Q": 3, "TWO_Q_SPECIAL": 12, "TWO_Q_HALFBLOCK_A": 6, "TWO_Q_HALFBLOCK_B": 6}[self.name]

    @property
    def takes_initial_state(self) -> bool:
        """Half-block (universal) families consume the initial state as input."""
        return self in (CircuitFamily.TWO_Q_HALFBLOCK_A, CircuitFamily.TWO_Q_HALFBLOCK_B)


def sample_angles(family: CircuitFamily, rng: np.random.Generator) -> np.ndarray:
    """Rotation angles i.i.d. uniform on [0, 2*pi)."""
    return rng.uniform(0.0, TWO_PI, size=family.n_angles)


def family_circuit(family: CircuitFamily, angles: Sequence[float]) -> CircuitSpec:
    """Instantiate the fixed gate template of a family with concrete angles."""
    a = [float(x) for x in angles]
    if len(a) != family.n_angles:
        raise ValueError(f"{family.value} takes {family.n_angles} angles, got {len(a)}")
    if family is CircuitFamily.ONE_Q:
        return CircuitSpec(1, [("U3", (0,), tuple(a))])
    if family is CircuitFamily.TWO_Q_SPECIAL:
        return CircuitSpec(
            2,
            [
                ("U3", (0,), tuple(a[0:3])),
                ("U3", (1,), tuple(a[3:6])),
                ("CNOT", (0, 1)),
                ("U3", (0,), tuple(a[6:9])),
                ("U3", (1,), tuple(a[9:12])),
            ],
        )
    control, target = (0, 1) if family is CircuitFamily.TWO_Q_HALFBLOCK_A else (1, 0)
    return CircuitSpec(
        2,
        [
            ("RX", (0,), (a[0],)),
            ("RZ", (0,), (a[1],)),
            ("RX", (0,), (a[2],)),
            ("RX", (1,), (a[3],)),
            ("RZ", (1,), (a[4],)),
            ("RX", (1,), (a[5],)),
            ("CNOT", (control, target)),
        ],
    )


# ---------------------------------------------------------------------------
# noise configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoiseConfig:
    """Uniform per-gate noise: same gamma/lambda/depol on every qubit."""

    gamma: float = 0.02
    lam: float = 0.02
    depol: float = 0.0

    def realize(self, n_qubits: int, rng: np.random.Generator):
        channel = qcore.make_noise(self.gamma, self.lam, self.depol)
        return channel, {"gamma": self.gamma, "lambda": self.lam, "depol": self.depol}


@dataclass(frozen=True)
class RealisticNoiseConfig:
    """Device-flavored preset: per-qubit gamma/lambda drawn from ranges once
    per dataset, plus a depolarizing term.  The drawn values land in the
    dataset header so a file fully describes its own noise."""

    gamma_range: tuple = (0.01, 0.05)
    lambda_range: tuple = (0.01, 0.05)
    depol: float = 0.01

    def realize(self, n_qubits: int, rng: np.random.Generator):
        chan, gammas, lams = qcore.realistic_noise(
            n_qubits, rng, self.gamma_range, self.lambda_range, self.depol
        )
        header = {
            "gamma": [float(g) for g in gammas],
            "lambda": [float(l) for l in lams],
            "depol": self.depol,
        }
        return chan, header


def noise_from_header(entry) -> Optional[object]:
    if entry is None:
        return None
    g, l, d = entry["gamma"], entry["lambda"], entry.get("depol", 0.0)
    if isinstance(g, list):
        return {q: qcore.make_noise(g[q], l[q], d) for q in range(len(g))}
    return qcore.make_noise(g, l, d)


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DatasetRecord:
    family: str
    seed: int
    input: np.ndarray
    target: np.ndarray


def record_seed(master_seed: int, index: int) -> int:
    """Stable 63-bit per-record seed; independent of platform and run order."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def input_length(family: CircuitFamily, noisy: bool) -> int:
    n = family.n_angles
    if family.takes_initial_state:
        n += codec.density_kind(2).length if noisy else codec.state_kind(2).length
    return n


def target_kind(family: CircuitFamily, noisy: bool) -> FeatureKind:
    nq = family.n_qubits
    return codec.density_kind(nq) if noisy else codec.state_kind(nq)


def _haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def _random_pure_density(rng: np.random.Generator, noise) -> DensityMatrix:
    """State reached by a random special circuit from |00>, with noise if any."""
    circ = family_circuit(CircuitFamily.TWO_Q_SPECIAL, sample_angles(CircuitFamily.TWO_Q_SPECIAL, rng))
    if noise is None:
        return qcore.apply_circuit_state(qcore.basis_state(2), circ).density()
    return qcore.apply_circuit_density(qcore.basis_state(2).density(), circ, noise)


def _random_mixed_density(rng: np.random.Generator, noise) -> DensityMatrix:
    """Broad mixed-state sampler: random eigenbasis with a Dirichlet spectrum
    spanning near-pure to near-maximally-mixed, plus a share of
    circuit-prepared pure states."""
    if rng.random() < 0.3:
        return _random_pure_density(rng, noise)
    alpha = math.exp(rng.uniform(math.log(0.3), math.log(10.0)))
    spectrum = rng.dirichlet(np.full(4, alpha))
    v = _haar_unitary(4, rng)
    m = (v * spectrum) @ v.conj().T
    return DensityMatrix(0.5 * (m + m.conj().T))


def _random_block_density(rng: np.random.Generator, noise) -> DensityMatrix:
    """Deployment-matched sampler for the 3-qubit block pipeline.

    Draws the conditioned 4x4 blocks (diagonal blocks, S, D) of a 3-qubit
    state reached by a short random layer prefix, exactly the inputs a
    two-qubit backend sees inside the pipeline, mixed with the pure chain
    states and maximally-mixed probes the other callers feed it.
    """
    from . import extend3q  # runtime import; extend3q imports this module

    u = rng.random()
    if u < 0.20:
        return _random_pure_density(rng, noise)
    if u < 0.30:
        return _random_mixed_density(rng, noise)
    if u < 0.35:
        return DensityMatrix(np.eye(4, dtype=complex) / 4.0)
    prefix = extend3q.random_layers(rng, int(rng.integers(0, 4)))
    rho8 = extend3q.direct_simulate_3q(prefix, noise=None)
    case = list(extend3q.QubitPairCase)[rng.integers(3)]
    blocks = extend3q.decompose(rho8, case)
    pick = rng.integers(4)
    if pick == 0:
        m = blocks.rho00
    elif pick == 1:
        m = blocks.rho11
    else:
        s, d = extend3q.hermitize(blocks.rho01, blocks.rho10)
        m = s.matrix if pick == 2 else d.matrix
    conditioned, _ = extend3q.condition(m)
    return conditioned


def _initial_state(family, mode: str, noisy: bool, rng, noise):
    if not family.takes_initial_state:
        return None
    nq = family.n_qubits
    if mode == "fixed":
        psi = qcore.basis_state(nq)
        return psi.density() if noisy else psi
    if mode == "random":
        if noisy:
            return _random_pure_density(rng, noise)
        circ = family_circuit(CircuitFamily.TWO_Q_SPECIAL, sample_angles(CircuitFamily.TWO_Q_SPECIAL, rng))
        return qcore.apply_circuit_state(qcore.basis_state(nq), circ)
    if mode == "mixed":
        if not noisy:
            raise ValueError("initial_state_mode='mixed' needs density-matrix targets")
        return _random_mixed_density(rng, noise)
    if mode == "blocks":
        if not noisy:
            raise ValueError("initial_state_mode='blocks' needs density-matrix targets")
        return _random_block_density(rng, noise)
    raise ValueError(f"unknown initial_state_mode {mode!r}")


def make_record(
    family: CircuitFamily,
    seed: int,
    noise,
    initial_state_mode: str = "fixed",
    noisy: bool = False,
) -> DatasetRecord:
    rng = np.random.default_rng(seed)
    angles = sample_angles(family, rng)
    initial = _initial_state(family, initial_state_mode, noisy, rng, noise)
    circ = family_circuit(family, angles)

    if noisy:
        start = initial if initial is not None else qcore.basis_state(family.n_qubits).density()
        final = qcore.apply_circuit_density(start, circ, noise)
    else:
        start = initial if initial is not None else qcore.basis_state(family.n_qubits)
        final = qcore.apply_circuit_state(start, circ)

    target = codec.encode(final).values
    if initial is not None:
        inp = np.concatenate([codec.encode(initial).values, angles])
    else:
        inp = angles
    return DatasetRecord(family=family.value, seed=seed, input=inp, target=target)


def generate_records(
    family: CircuitFamily,
    n: int,
    noise=None,
    master_seed: int = 0,
    initial_state_mode: str = "fixed",
):
    """Build `n` records plus the header describing them.

    `noise` is None (pure-state targets) or a NoiseConfig /
    RealisticNoiseConfig (density-matrix targets).
    """
    if n < 1:
        raise ValueError("need at least one record")
    noisy = noise is not None
    if noisy:
        noise_rng = np.random.default_rng(record_seed(master_seed, -1))
        channel, noise_header = noise.realize(family.n_qubits, noise_rng)
    else:
        channel, noise_header = None, None
    header = {
        "version": 1,
        "family": family.value,
        "noise": noise_header,
        "count": n,
        "master_seed": master_seed,
        "initial_state_mode": initial_state_mode if family.takes_initial_state else None,
    }
    records = [
        make_record(family, record_seed(master_seed, i), channel, initial_state_mode, noisy)
        for i in range(n)
    ]
    return header, records


# ---------------------------------------------------------------------------
# file I/O
# ---------------------------------------------------------------------------

def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _fmt_value(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_float(v)
    if isinstance(v, str):
        return '"' + v + '"'
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f'"{k}": {_fmt_value(x)}' for k, x in v.items()) + "}"
    raise TypeError(f"cannot serialize {type(v)}")


def write_dataset(path, header: dict, records) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_fmt_value(header) + "\n")
        for r in records:
            line = (
                '{"family": "%s", "seed": %d, "input": %s, "target": %s}'
                % (r.family, r.seed, _fmt_value(r.input), _fmt_value(r.target))
            )
            fh.write(line + "\n")


def generate_dataset(
    path,
    family: CircuitFamily,
    n: int,
    noise=None,
    master_seed: int = 0,
    initial_state_mode: str = "fixed",
) -> dict:
    header, records = generate_records(family, n, noise, master_seed, initial_state_mode)
    write_dataset(path, header, records)
    return header


def load_dataset(path):
    import json

    with open(path, "r", encoding="ascii") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    header = json.loads(lines[0])
    records = []
    for ln in lines[1:]:
        obj = json.loads(ln)
        records.append(
            DatasetRecord(
                family=obj["family"],
                seed=int(obj["seed"]),
                input=np.asarray(obj["input"], dtype=float),
                target=np.asarray(obj["target"], dtype=float),
            )
        )
    return header, records


def split_records(records, val_fraction: float = 0.1):
    """Deterministic 90/10 split by record index: head is train, tail is val."""
    n_val = max(1, int(round(len(records) * val_fraction)))
    if n_val >= len(records):
        raise ValueError("dataset too small to split")
    return records[:-n_val], records[-n_val:]
