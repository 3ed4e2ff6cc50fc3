"""How quantum objects become flat real vectors for model training.

Run with: python demos/02_feature_codec.py
"""

import numpy as np

from qsurrogate import codec, qcore

# Pure states: interleaved (re, im) amplitude pairs.
bell = qcore.apply_circuit_state(
    qcore.basis_state(2), qcore.CircuitSpec(2, [("H", (0,)), ("CNOT", (0, 1))])
)
fv = codec.encode(bell)
print("Bell state ->", fv.kind.value, np.round(fv.values, 5))

# Density matrices: one real value per diagonal, (re, im) per upper-triangle
# entry, walking the rows.  The conjugate half is dropped.
rho = bell.density()
fv = codec.encode(rho)
print("Bell density ->", fv.kind.value)
print(np.round(fv.values, 5))

# Round trips are exact for valid objects.
back = codec.decode(fv)
print("round-trip max error:", float(np.max(np.abs(back.matrix - rho.matrix))))

# Model outputs drift, so decode repairs anything that is not quite a state:
# scaling all features by 1.03 pushes the trace to 1.03, and decode projects
# back to the nearest valid density matrix.
drifted = codec.FeatureVector(fv.values * 1.03, fv.kind)
repaired = codec.decode(drifted)
print("drifted trace before repair:", round(1.03, 3))
print("repaired trace:", round(float(np.trace(repaired.matrix).real), 12))
print("fidelity after repair:", round(qcore.fidelity(repaired, rho), 6))

# Pure-state decodes renormalize mild norm drift and reject junk.
state_fv = codec.encode(bell)
wobbly = codec.FeatureVector(state_fv.values * 1.05, state_fv.kind)
print("renormalized decode norm:", float(np.linalg.norm(codec.decode(wobbly).amplitudes)))
