"""Two-qubit search: one amplification round finds |11> with certainty.

Run with: python demos/05_grover.py
"""

import numpy as np

from qsurrogate import bench, extend3q, qcore

labels = ["00", "01", "10", "11"]

print("search circuit:", [g.kind for g in bench.grover_circuit().gates])

probs = bench.grover_run(bench.Exact2qBackend())
print("noiseless probabilities:")
for label, p in zip(labels, probs):
    print(f"  p(|{label}>) = {p:.6f}")

# With relaxation and dephasing after every gate the peak softens but the
# marked state still dominates.
for gamma in (0.01, 0.03, 0.08):
    noisy = bench.Exact2qBackend(noise=qcore.make_noise(gamma, gamma))
    p = bench.grover_run(noisy)
    print(f"gamma = lambda = {gamma}: p(|11>) = {p[3]:.4f}, argmax |{labels[int(np.argmax(p))]}>")

# The same circuit expressed as half-block layers (the form the trained
# universal surrogate consumes): each layer is Rx-Rz-Rx per qubit + CNOT.
layers = bench.compile_to_halfblocks(bench.grover_circuit())
print(f"compiles to {len(layers)} half-block layers")
rho = qcore.basis_state(2).density()
backend = extend3q.ExactBackend()
for layer in layers:
    rho = backend(rho, layer)
print("half-block replay p(|11>):", round(float(rho.diagonal_probabilities()[3]), 9))
