"""Benchmark harness tests: Hamiltonians, simplex descent, VQE, Grover,
half-block compilation, and fidelity reports."""

import math

import numpy as np
import pytest

from qsurrogate import bench, datagen, extend3q, qcore, surrogate
from qsurrogate.bench import (
    Exact2qBackend,
    ExactVqeBackend,
    Extend3qVqeBackend,
    compile_to_halfblocks,
    fidelity_report,
    fixed_starts,
    grover_circuit,
    grover_run,
    ground_energy,
    heisenberg_2q,
    heisenberg_3q,
    make_vqe_2q,
    make_vqe_3q,
    nelder_mead,
    vqe_run,
    vqe_trace_csv,
)
from qsurrogate.datagen import CircuitFamily


class TestHamiltonians:
    def test_two_site_ground_energy_is_minus_three(self):
        w = np.linalg.eigvalsh(heisenberg_2q().matrix)
        assert w[0] == pytest.approx(-3.0, abs=1e-12)

    def test_two_site_singlet_is_ground_state(self):
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
        h = heisenberg_2q().matrix
        np.testing.assert_allclose(h @ singlet, -3.0 * singlet, atol=1e-12)

    def test_three_site_spectrum(self):
        # dense diagonalization oracle: H^2 = 3 I so eigenvalues are +-sqrt(3)
        h = heisenberg_3q().matrix
        np.testing.assert_allclose(h @ h, 3.0 * np.eye(8), atol=1e-12)
        assert ground_energy(heisenberg_3q()) == pytest.approx(-math.sqrt(3.0), abs=1e-12)


class TestNelderMead:
    def test_quadratic_bowl(self):
        f = lambda x: float(np.sum((x - np.array([1.0, -2.0])) ** 2))
        best_x, best_f, trace, n_iter, converged = nelder_mead(f, np.zeros(2), tol=1e-10)
        assert converged
        np.testing.assert_allclose(best_x, [1.0, -2.0], atol=1e-4)
        assert best_f < 1e-8

    def test_best_vertex_trace_non_increasing(self):
        rng = np.random.default_rng(0)
        f = lambda x: float(np.sum(x**2) + math.sin(5 * x[0]))
        _, _, trace, _, _ = nelder_mead(f, rng.normal(size=3), tol=1e-9)
        diffs = np.diff(np.array(trace))
        assert np.all(diffs <= 1e-12)

    def test_iteration_cap_reported(self):
        f = lambda x: float(np.sum(x**2))
        _, _, _, n_iter, converged = nelder_mead(f, np.full(4, 10.0), tol=1e-300, max_iter=30)
        assert n_iter == 30 and not converged


class TestVqe:
    def test_exact_two_qubit_reaches_ground_energy(self):
        trace = vqe_run(make_vqe_2q(), ExactVqeBackend())
        assert trace.final_energy == pytest.approx(-3.0, abs=1e-3)

    def test_exact_two_qubit_deterministic(self):
        t1 = vqe_run(make_vqe_2q(), ExactVqeBackend())
        t2 = vqe_run(make_vqe_2q(), ExactVqeBackend())
        assert t1.final_energy == t2.final_energy
        np.testing.assert_array_equal(t1.best_params, t2.best_params)

    def test_exact_three_qubit_matches_dense_minimum(self):
        problem = make_vqe_3q()
        trace = vqe_run(problem, ExactVqeBackend())
        reference = ground_energy(problem.hamiltonian)
        assert abs(trace.final_energy - reference) < 1e-2

    def test_noisy_backend_energy_above_ideal(self):
        noisy = ExactVqeBackend(noise=qcore.make_noise(0.05, 0.05))
        trace = vqe_run(make_vqe_2q(), noisy, max_iter=600)
        assert trace.final_energy > -3.0

    def test_best_energy_trace_non_increasing(self):
        trace = vqe_run(make_vqe_2q(), ExactVqeBackend())
        assert np.all(np.diff(np.array(trace.best_energy_trace)) <= 1e-12)

    def test_halfblock_wiring_matches_ansatz_circuit(self):
        # the single half-block layer must implement RY(t1) q0, CNOT, RX(t2) q1
        problem = make_vqe_2q()
        rng = np.random.default_rng(1)
        backend = extend3q.ExactBackend()
        for _ in range(10):
            params = rng.uniform(-math.pi, math.pi, 2)
            layers = problem.halfblock_builder(params)
            assert len(layers) == 1
            rho = qcore.basis_state(2).density()
            for layer in layers:
                rho = backend(rho, layer)
            ref = qcore.apply_circuit_state(qcore.basis_state(2), problem.circuit_builder(params))
            assert qcore.mixed_fidelity(rho, ref.density()) > 1 - 1e-10

    def test_extend3q_backend_agrees_with_direct(self):
        problem = make_vqe_3q()
        rng = np.random.default_rng(2)
        params = rng.uniform(0, 2 * math.pi, 12)
        direct = ExactVqeBackend().energy(problem, params)
        blockwise = Extend3qVqeBackend(extend3q.ExactBackend()).energy(problem, params)
        assert blockwise == pytest.approx(direct, abs=1e-9)

    def test_fixed_starts_shapes(self):
        starts = fixed_starts(12)
        assert len(starts) == 4
        assert all(s.size == 12 for s in starts)

    def test_trace_csv_round_trip(self):
        trace = vqe_run(make_vqe_2q(), ExactVqeBackend(), max_iter=50)
        text = vqe_trace_csv(trace)
        lines = text.splitlines()
        assert lines[0].startswith("evaluation,energy,param0,param1")
        data = [ln for ln in lines if not ln.startswith("#")]
        assert len(data) - 1 == len(trace.evaluations)
        assert any(ln.startswith("# final_energy") for ln in lines)


class TestGrover:
    def test_exact_finds_marked_state_with_certainty(self):
        probs = grover_run(Exact2qBackend())
        assert probs[3] == pytest.approx(1.0, abs=1e-10)

    def test_probabilities_normalized(self):
        probs = grover_run(Exact2qBackend(noise=qcore.make_noise(0.05, 0.05)))
        assert np.all(probs >= 0)
        assert probs.sum() == pytest.approx(1.0, abs=1e-8)

    def test_noisy_still_peaks_at_marked_state(self):
        probs = grover_run(Exact2qBackend(noise=qcore.make_noise(0.02, 0.02)))
        assert int(np.argmax(probs)) == 3

    def test_circuit_matches_reference_sequence(self):
        kinds = [g.kind for g in grover_circuit().gates]
        assert kinds == ["H", "H", "CZ", "H", "H", "X", "X", "CZ", "X", "X", "H", "H"]


class TestHalfblockCompilation:
    def test_grover_compiles_and_reproduces(self):
        layers = compile_to_halfblocks(grover_circuit())
        backend = extend3q.ExactBackend()
        rho = qcore.basis_state(2).density()
        for layer in layers:
            rho = backend(rho, layer)
        ref = qcore.apply_circuit_density(qcore.basis_state(2).density(), grover_circuit())
        assert qcore.mixed_fidelity(rho, ref) > 1 - 1e-10

    def test_random_circuits_compile(self):
        rng = np.random.default_rng(3)
        backend = extend3q.ExactBackend()
        for _ in range(10):
            gates = []
            for _ in range(6):
                r = rng.random()
                if r < 0.5:
                    gates.append(("U3", (int(rng.integers(2)),), tuple(rng.uniform(0, 2 * math.pi, 3))))
                elif r < 0.7:
                    gates.append(("H", (int(rng.integers(2)),)))
                elif r < 0.85:
                    gates.append(("CNOT", (0, 1) if rng.random() < 0.5 else (1, 0)))
                else:
                    gates.append(("CZ", (0, 1)))
            circ = qcore.CircuitSpec(2, gates)
            rho = qcore.basis_state(2).density()
            for layer in compile_to_halfblocks(circ):
                rho = backend(rho, layer)
            ref = qcore.apply_circuit_density(qcore.basis_state(2).density(), circ)
            assert qcore.mixed_fidelity(rho, ref) > 1 - 1e-9

    def test_three_qubit_circuit_rejected(self):
        with pytest.raises(ValueError):
            compile_to_halfblocks(qcore.CircuitSpec(3, []))


@pytest.fixture(scope="module")
def tiny_1q_model():
    from qsurrogate.codec import FeatureKind

    _, records = datagen.generate_records(CircuitFamily.ONE_Q, 400, master_seed=21)
    cfg = surrogate.ModelConfig(
        input_len=3, output_len=4, d_model=16, n_heads=2, n_encoder_layers=1,
        n_decoder_layers=1, d_ff=24, max_epochs=15, seed=0,
    )
    model, _ = surrogate.train((None, records), cfg, target_kind=FeatureKind.STATE_1Q)
    return model, records


class TestFidelityReport:
    def test_report_structure(self, tiny_1q_model):
        model, records = tiny_1q_model
        rep = fidelity_report(model, records[:50], reference_min=0.5)
        assert rep.fidelities.shape == (50,)
        assert 0.0 <= rep.minimum <= rep.mean <= 1.0
        assert rep.meets_reference in (True, False)

    def test_csv_contains_summary_comments(self, tiny_1q_model):
        model, records = tiny_1q_model
        rep = fidelity_report(model, records[:10])
        text = rep.to_csv()
        assert text.splitlines()[0] == "index,fidelity"
        assert any(ln.startswith("# mean,") for ln in text.splitlines())
        assert any(ln.startswith("# min,") for ln in text.splitlines())

    def test_family_mismatch_rejected(self, tiny_1q_model):
        model, _ = tiny_1q_model
        _, other = datagen.generate_records(CircuitFamily.TWO_Q_SPECIAL, 5, master_seed=1)
        with pytest.raises(ValueError):
            fidelity_report(model, other)
