"""Tour of the exact simulation core: states, gates, noise, fidelity.

Run with: python demos/01_exact_simulation.py
"""

import numpy as np

from qsurrogate import qcore

# A single-qubit rotation with three angles covers the circuit family used
# throughout the package.  At (0, 0, pi/2) it splits |0> evenly.
circ = qcore.CircuitSpec(1, [("U3", (0,), (0.0, 0.0, np.pi / 2))])
psi = qcore.apply_circuit_state(qcore.basis_state(1), circ)
print("U3(0, 0, pi/2) |0> =", np.round(psi.amplitudes, 5))

# Two-qubit entanglement: a Hadamard plus CNOT makes the usual Bell state.
bell_circ = qcore.CircuitSpec(2, [("H", (0,)), ("CNOT", (0, 1))])
bell = qcore.apply_circuit_state(qcore.basis_state(2), bell_circ)
print("Bell amplitudes:", np.round(bell.amplitudes, 5))

# Mixed states: run the same circuit with relaxation + dephasing noise after
# every gate.  The output is a valid density matrix by construction.
noise = qcore.make_noise(gamma=0.05, lam=0.03)
rho = qcore.apply_circuit_density(qcore.basis_state(2).density(), bell_circ, noise)
print("noisy Bell density diagonal:", np.round(rho.diagonal_probabilities(), 4))
print("purity tr(rho^2):", round(float(np.trace(rho.matrix @ rho.matrix).real), 4))

# Fidelity between the ideal and noisy output.
print("fidelity(ideal, noisy):", round(qcore.fidelity(bell, rho), 4))

# Repairing an unphysical matrix: scale the Bell density out of trace-1 and
# clip a negative eigenvalue, then project back to the nearest valid state.
broken = 1.2 * bell.density().matrix - 0.05 * np.eye(4)
repaired = qcore.nearest_density_matrix(broken)
print("repaired trace:", round(float(np.trace(repaired.matrix).real), 12))
print("repaired min eigenvalue:", float(np.linalg.eigvalsh(repaired.matrix)[0]))
print("fidelity(repaired, bell):", round(qcore.fidelity(repaired, bell.density()), 6))
