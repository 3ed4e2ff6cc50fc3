"""Reconstructing density matrices from diagonal-only readouts.

Run with: python demos/07_tomography.py
"""

import numpy as np

from qsurrogate import qcore, tomo

# Prepare a Bell state and measure its rotated diagonals: the identity plus
# 90-degree x/y rotations on each qubit give 9 readout settings.
bell = qcore.apply_circuit_state(
    qcore.basis_state(2), qcore.CircuitSpec(2, [("H", (0,)), ("CNOT", (0, 1))])
).density()

records = tomo.measure_all(bell)
print("readout labels:", [r.label for r in records])

a, b = tomo.build_system(records)
print(f"linear system: {a.shape[0]} equations, {a.shape[1]} unknowns, rank {np.linalg.matrix_rank(a)}")

exact = tomo.tomo_pipeline(records)
print("exact-readout reconstruction error:", float(np.max(np.abs(exact.matrix - bell.matrix))))

# With finite shots the raw least-squares solution usually leaves the
# physical set; the eigenvalue simplex projection pulls it back.
noisy_records = tomo.measure_all(bell, shots=2048, master_seed=9)
raw = tomo.reconstruct(noisy_records)
print("raw shot-noise eigenvalues:", np.round(np.linalg.eigvalsh(raw.matrix), 4))
projected = tomo.tomo_pipeline(noisy_records)
print("projected eigenvalues:    ", np.round(np.linalg.eigvalsh(projected.matrix), 4))
print("fidelity vs true state:", round(qcore.mixed_fidelity(projected, bell), 4))

# The simplex projection itself, on a plain vector:
v = np.array([1.2, -0.2])
print(f"simplex projection of {v} ->", tomo.simplex_projection(v))
