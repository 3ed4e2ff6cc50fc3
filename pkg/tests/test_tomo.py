"""Tomography tests: rotation readouts, the linear system, reconstruction,
and the simplex projection that repairs shot-noise damage."""

import math

import numpy as np
import pytest

from qsurrogate import codec, datagen, qcore, tomo
from qsurrogate.qcore import DensityMatrix
from qsurrogate.tomo import (
    ProbabilityRecord,
    build_system,
    measure_all,
    measure_diagonals,
    readout_ops,
    reconstruct,
    simplex_projection,
    tomo_pipeline,
)


def _bell():
    amp = np.zeros(4, dtype=complex)
    amp[0] = amp[3] = 1 / math.sqrt(2)
    return DensityMatrix(np.outer(amp, amp.conj()))


def _random_density(rng, dim):
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = z @ z.conj().T
    return DensityMatrix(m / np.trace(m).real)


def _brute_simplex(v, rounds=12, grid=25):
    """Nested grid search over the simplex for d = 2 or 3."""
    v = np.asarray(v, dtype=float)
    d = v.size
    if d == 2:
        center, half = np.array([0.5]), np.array([0.5])
    else:
        center, half = np.array([1 / 3, 1 / 3]), np.array([1.0, 1.0])
    best = center
    for _ in range(rounds):
        axes = [np.linspace(center[k] - half[k], center[k] + half[k], grid) for k in range(d - 1)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d - 1)
        w = np.concatenate([mesh, 1.0 - mesh.sum(axis=1, keepdims=True)], axis=1)
        feasible = np.all(w >= 0.0, axis=1)
        w = w[feasible]
        dists = np.sum((w - v) ** 2, axis=1)
        best = w[np.argmin(dists)][: d - 1]
        center = best
        half = half * 0.3
    return np.concatenate([best, [1.0 - best.sum()]])


class TestReadoutOps:
    def test_single_qubit_has_three(self):
        ops = readout_ops(1)
        assert [op.label for op in ops] == ["I", "X", "Y"]

    def test_two_qubit_has_nine_in_product_order(self):
        ops = readout_ops(2)
        assert [op.label for op in ops] == ["II", "IX", "IY", "XI", "XX", "XY", "YI", "YX", "YY"]

    def test_identity_label_is_identity_matrix(self):
        ops = {op.label: op for op in readout_ops(2)}
        np.testing.assert_allclose(ops["II"].unitary, np.eye(4), atol=0)

    def test_letters_are_quarter_turns(self):
        ops = {op.label: op for op in readout_ops(1)}
        np.testing.assert_allclose(ops["X"].unitary, qcore.standard_gate("RX", (math.pi / 2,)), atol=0)
        np.testing.assert_allclose(ops["Y"].unitary, qcore.standard_gate("RY", (math.pi / 2,)), atol=0)

    def test_unsupported_size_rejected(self):
        with pytest.raises(ValueError):
            readout_ops(3)


class TestMeasureDiagonals:
    def test_ground_state_identity(self):
        rec = measure_diagonals(qcore.basis_state(1).density(), readout_ops(1)[0])
        np.testing.assert_allclose(rec.probs, [1.0, 0.0], atol=1e-14)

    def test_maximally_mixed_invariant_under_rotations(self):
        rho = DensityMatrix(np.eye(2) / 2)
        for op in readout_ops(1):
            rec = measure_diagonals(rho, op)
            np.testing.assert_allclose(rec.probs, [0.5, 0.5], atol=1e-14)

    def test_bell_diagonal(self):
        # oracle: the outer product's diagonal, read off directly
        bell = _bell()
        np.testing.assert_allclose(bell.matrix.diagonal().real, [0.5, 0, 0, 0.5], atol=1e-15)
        rec = measure_diagonals(bell, readout_ops(2)[0])
        np.testing.assert_allclose(rec.probs, [0.5, 0, 0, 0.5], atol=1e-14)

    def test_shot_sampling_reproducible(self):
        rho = _random_density(np.random.default_rng(0), 4)
        op = readout_ops(2)[4]
        a = measure_diagonals(rho, op, shots=1024, rng=7)
        b = measure_diagonals(rho, op, shots=1024, rng=7)
        np.testing.assert_array_equal(a.probs, b.probs)
        assert a.shots == 1024

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            measure_diagonals(qcore.basis_state(1).density(), readout_ops(2)[0])

    def test_record_validation(self):
        with pytest.raises(ValueError):
            ProbabilityRecord(label="I", probs=np.array([0.9, 0.2]))
        with pytest.raises(ValueError):
            ProbabilityRecord(label="I", probs=np.array([1.1, -0.1]))


class TestBuildSystem:
    def test_two_qubit_dimensions_and_rank(self):
        records = measure_all(_bell())
        a, b = build_system(records)
        assert a.shape == (36, 16)
        assert b.shape == (36,)
        assert np.linalg.matrix_rank(a) == 16

    def test_single_qubit_dimensions(self):
        records = measure_all(qcore.basis_state(1).density())
        a, b = build_system(records)
        assert a.shape == (6, 4)  # 3 readouts x 2 diagonals each
        assert np.linalg.matrix_rank(a) == 4

    def test_coefficients_match_symbolic_expansion(self):
        # A @ features(rho) must equal the concatenated rotated diagonals
        rng = np.random.default_rng(1)
        for dim, n in ((2, 1), (4, 2)):
            rho = _random_density(rng, dim)
            records = measure_all(rho)
            a, b = build_system(records)
            feats = codec.features_from_hermitian(rho.matrix)
            np.testing.assert_allclose(a @ feats, b, atol=1e-12)

    def test_missing_label_rejected(self):
        records = measure_all(_bell())[:-1]
        with pytest.raises(ValueError):
            build_system(records)

    def test_duplicate_label_rejected(self):
        records = measure_all(_bell())
        with pytest.raises(ValueError):
            build_system(records + [records[0]])


class TestReconstruct:
    def test_maximally_mixed(self):
        rho = DensityMatrix(np.eye(4) / 4)
        out = reconstruct(measure_all(rho))
        np.testing.assert_allclose(out.matrix, rho.matrix, atol=1e-10)

    def test_bell_state_end_to_end(self):
        out = reconstruct(measure_all(_bell()))
        np.testing.assert_allclose(out.matrix, _bell().matrix, atol=1e-10)

    def test_exact_reconstruction_random_states(self):
        rng = np.random.default_rng(2)
        for dim in (2, 4):
            for _ in range(50):
                rho = _random_density(rng, dim)
                out = reconstruct(measure_all(rho))
                assert np.max(np.abs(out.matrix - rho.matrix)) < 1e-10

    def test_shot_noise_can_break_positivity(self):
        # documented failure mode that motivates the projection step
        rng_states = np.random.default_rng(3)
        found_negative = False
        for seed in range(40):
            rho = _random_density(rng_states, 4)
            out = reconstruct(measure_all(rho, shots=512, master_seed=seed))
            if np.linalg.eigvalsh(out.matrix)[0] < -1e-6:
                found_negative = True
                break
        assert found_negative


class TestSimplexProjection:
    def test_feasible_point_fixed(self):
        np.testing.assert_allclose(simplex_projection([0.5, 0.5]), [0.5, 0.5], atol=0)

    def test_threshold_shift(self):
        np.testing.assert_allclose(simplex_projection([2.0, 0.0]), [1.0, 0.0], atol=1e-14)
        oracle = _brute_simplex([2.0, 0.0])
        np.testing.assert_allclose(oracle, [1.0, 0.0], atol=1e-5)

    def test_negative_entry_clipped(self):
        np.testing.assert_allclose(simplex_projection([1.2, -0.2]), [1.0, 0.0], atol=1e-14)

    def test_matches_grid_oracle_d2_d3(self):
        rng = np.random.default_rng(4)
        for d in (2, 3):
            for _ in range(12):
                v = rng.normal(scale=1.5, size=d)
                ours = simplex_projection(v)
                brute = _brute_simplex(v)
                assert np.max(np.abs(ours - brute)) < 1e-4

    def test_output_feasible_and_unique_nearest(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            v = rng.normal(scale=2.0, size=rng.integers(2, 8))
            w = simplex_projection(v)
            assert np.all(w >= 0) and abs(w.sum() - 1) < 1e-12
            # any feasible perturbation is farther from v
            for _ in range(10):
                delta = rng.normal(scale=1e-3, size=w.size)
                delta -= delta.mean()  # stay on the trace-1 plane
                cand = w + delta
                if np.any(cand < 0):
                    continue
                assert np.sum((cand - v) ** 2) >= np.sum((w - v) ** 2) - 1e-12


class TestPipeline:
    def test_exact_records_round_trip(self):
        rng = np.random.default_rng(6)
        for dim in (2, 4):
            rho = _random_density(rng, dim)
            out = tomo_pipeline(measure_all(rho))
            assert np.max(np.abs(out.matrix - rho.matrix)) < 1e-9

    def test_projection_makes_output_valid(self):
        rng = np.random.default_rng(7)
        rho = _random_density(rng, 4)
        out = tomo_pipeline(measure_all(rho, shots=256, master_seed=11))
        assert abs(np.trace(out.matrix).real - 1) < 1e-10
        assert np.linalg.eigvalsh(out.matrix)[0] >= -1e-10

    def test_shot_noise_mean_fidelity(self):
        # 4096-shot reconstructions of random two-qubit states
        rng = np.random.default_rng(8)
        fids = []
        for trial in range(100):
            rho = _random_density(rng, 4)
            out = tomo_pipeline(measure_all(rho, shots=4096, master_seed=trial))
            fids.append(qcore.mixed_fidelity(out, rho))
        assert float(np.mean(fids)) >= 0.98

    def test_reprojected_output_is_fixed_point(self):
        rng = np.random.default_rng(9)
        rho = _random_density(rng, 4)
        first = tomo_pipeline(measure_all(rho, shots=512, master_seed=3))
        second = tomo_pipeline(measure_all(first))
        assert np.max(np.abs(second.matrix - first.matrix)) < 1e-9


class TestRecordFiles:
    def test_round_trip(self, tmp_path):
        records = measure_all(_bell(), shots=2048, master_seed=1)
        path = tmp_path / "probs.json"
        tomo.save_records(path, records)
        loaded = tomo.load_records(path)
        assert [r.label for r in loaded] == [r.label for r in records]
        for a, b in zip(loaded, records):
            np.testing.assert_array_equal(a.probs, b.probs)
            assert a.shots == b.shots
