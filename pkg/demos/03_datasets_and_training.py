"""Generate a dataset, train a small surrogate, and score it.

This is a miniature of the full workflow (the production runs in the test
suite use more data and epochs).  Takes a couple of minutes on a laptop.

Run with: python demos/03_datasets_and_training.py
"""

import numpy as np

from qsurrogate import bench, datagen, surrogate
from qsurrogate.datagen import CircuitFamily

# 2000 random single-qubit circuits: inputs are the three rotation angles,
# targets the four real parameters of the output state vector.
header, records = datagen.generate_records(CircuitFamily.ONE_Q, 2000, master_seed=42)
print(f"dataset: {header['count']} records, family {header['family']}")
print("first input:", np.round(records[0].input, 4))
print("first target:", np.round(records[0].target, 4))

config = surrogate.ModelConfig(
    input_len=3,
    output_len=4,
    d_model=32,
    n_heads=4,
    n_encoder_layers=1,
    n_decoder_layers=1,
    d_ff=64,
    learning_rate=2e-3,
    batch_size=64,
    max_epochs=30,
    seed=7,
)
model, report = surrogate.train((header, records), config)
print(f"trained to epoch {report.final_epoch} (best {report.best_epoch}),"
      f" val mse {min(v for _, v in report.epochs):.2e}, wall {report.wall_time_s:.0f}s")

# Score on a fresh dataset the model never saw.
_, eval_records = datagen.generate_records(CircuitFamily.ONE_Q, 300, master_seed=777)
rep = bench.fidelity_report(model, eval_records)
print(f"held-out fidelity: mean {rep.mean:.4f}, min {rep.minimum:.4f}")

# The gradient check validates the hand-written backward pass directly.
err = surrogate.grad_check(model, (eval_records[0].input, eval_records[0].target))
print(f"analytic-vs-numeric gradient relative error: {err:.2e}")
