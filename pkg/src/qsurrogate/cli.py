"""Command-line entry point: dataset generation, training, evaluation,
VQE/Grover experiments, 3-qubit simulation, and tomography.

Every subcommand prints its resolved configuration (including the master
seed) before running, and identical argv plus identical input files produce
byte-identical output files.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import bench, codec, datagen, extend3q, qcore, surrogate, tomo
from .datagen import CircuitFamily, NoiseConfig, RealisticNoiseConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


FAMILY_FLAGS = {
    "1q": (CircuitFamily.ONE_Q, False),
    "1q-noisy": (CircuitFamily.ONE_Q, True),
    "2q-special": (CircuitFamily.TWO_Q_SPECIAL, False),
    "2q-special-noisy": (CircuitFamily.TWO_Q_SPECIAL, True),
    "2q-universal": (CircuitFamily.TWO_Q_HALFBLOCK_A, False),
    "2q-universal-noisy": (CircuitFamily.TWO_Q_HALFBLOCK_A, True),
}


def _parse_noise(text):
    if text is None:
        return NoiseConfig()
    if text == "realistic":
        return RealisticNoiseConfig()
    values = {}
    for part in text.split(","):
        if not part:
            continue
        key, _, val = part.partition("=")
        if key not in ("gamma", "lambda", "depol"):
            raise UsageError(f"unknown noise parameter {key!r}")
        values[key] = float(val)
    return NoiseConfig(
        gamma=values.get("gamma", 0.02),
        lam=values.get("lambda", 0.02),
        depol=values.get("depol", 0.0),
    )


def _resolve_family(args):
    family, noisy = FAMILY_FLAGS[args.family]
    if family is CircuitFamily.TWO_Q_HALFBLOCK_A and getattr(args, "halfblock", "a") == "b":
        family = CircuitFamily.TWO_Q_HALFBLOCK_B
    if not noisy and args.noise is not None:
        raise UsageError(f"family {args.family} is noiseless; drop --noise or pick the -noisy family")
    noise = _parse_noise(args.noise) if noisy else None
    return family, noisy, noise


def _print_config(name, mapping):
    print(f"{name} config: " + json.dumps(mapping, sort_keys=True, default=str))


def _density_json(rho: qcore.DensityMatrix) -> str:
    payload = {"n_qubits": rho.n_qubits, "elements": qcore.matrix_to_pairs(rho.matrix)}
    return json.dumps(payload) + "\n"


def _load_density(path) -> qcore.DensityMatrix:
    with open(path, "r", encoding="ascii") as fh:
        payload = json.load(fh)
    return qcore.DensityMatrix(qcore.pairs_to_matrix(payload["elements"]))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_gen(args) -> int:
    family, noisy, noise = _resolve_family(args)
    _print_config(
        "gen",
        {
            "family": family.value,
            "noisy": noisy,
            "noise": noise,
            "n": args.n,
            "master_seed": args.seed,
            "initial_state_mode": args.initial_state,
            "out": args.out,
        },
    )
    header = datagen.generate_dataset(
        args.out, family, args.n, noise=noise, master_seed=args.seed, initial_state_mode=args.initial_state
    )
    print(f"wrote {header['count']} records to {args.out}")
    return 0


def _cmd_train(args) -> int:
    header, records = datagen.load_dataset(args.data)
    family = CircuitFamily(header["family"])
    noisy = header.get("noise") is not None
    config = surrogate.ModelConfig(
        input_len=records[0].input.size,
        output_len=records[0].target.size,
        d_model=args.d_model,
        n_heads=args.n_heads,
        n_encoder_layers=args.enc_layers,
        n_decoder_layers=args.dec_layers,
        d_ff=args.d_ff,
        learning_rate=args.lr,
        batch_size=args.batch_size,
        max_epochs=args.epochs,
        seed=args.seed,
    )
    _print_config(
        "train",
        {"data": args.data, "family": family.value, "noisy": noisy, "master_seed": args.seed, **config.to_dict()},
    )
    model, report = surrogate.train(
        (header, records), config, n_workers=args.workers, verbose=args.verbose
    )
    surrogate.save_model(model, args.out)
    print(
        f"trained {config.max_epochs}-epoch budget: stopped at epoch {report.final_epoch}"
        f" (best {report.best_epoch}), train_mse {report.final_train_mse:.3e},"
        f" val_mse {report.final_val_mse:.3e}, wall {report.wall_time_s:.1f}s"
    )
    print(f"saved model to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = surrogate.load_model(args.model)
    header, records = datagen.load_dataset(args.data)
    _print_config(
        "eval",
        {"model": args.model, "data": args.data, "report": args.report, "reference_min": args.reference_min},
    )
    rep = bench.fidelity_report(model, records, reference_min=args.reference_min)
    if args.report:
        with open(args.report, "w", encoding="ascii", newline="\n") as fh:
            fh.write(rep.to_csv())
        print(f"wrote per-sample fidelities to {args.report}")
    print(f"fidelity mean {rep.mean:.6f}  min {rep.minimum:.6f}")
    if args.reference_min is not None:
        verdict = "meets" if rep.meets_reference else "below"
        print(f"minimum {verdict} reference {args.reference_min}")
    return 0


def _make_vqe_backend(args):
    if args.backend == "exact":
        return bench.ExactVqeBackend()
    if args.backend == "exact-noisy":
        noise_cfg = _parse_noise(args.noise)
        if isinstance(noise_cfg, RealisticNoiseConfig):
            raise UsageError("vqe/grover take scalar noise parameters")
        return bench.ExactVqeBackend(noise=qcore.make_noise(noise_cfg.gamma, noise_cfg.lam, noise_cfg.depol))
    if args.backend == "surrogate":
        if not args.model:
            raise UsageError("--backend surrogate needs --model")
        return bench.SurrogateVqeBackend(surrogate.load_model(args.model))
    raise UsageError(f"unknown backend {args.backend}")


def _cmd_vqe(args) -> int:
    problem = bench.make_vqe_2q() if args.qubits == 2 else bench.make_vqe_3q()
    backend = _make_vqe_backend(args)
    _print_config(
        "vqe",
        {"qubits": args.qubits, "backend": args.backend, "model": args.model, "tol": args.tol, "max_iter": args.max_iter},
    )
    trace = bench.vqe_run(problem, backend, tol=args.tol, max_iter=args.max_iter)
    reference = bench.ground_energy(problem.hamiltonian)
    print(f"final energy: {trace.final_energy:.6f} after {trace.iterations} iterations")
    print(f"reference ground energy (dense diagonalization): {reference:.6f}")
    if args.qubits == 3:
        print("external reference values: theoretical -1.4, reported run -1.33")
    if args.out:
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(bench.vqe_trace_csv(trace))
        print(f"wrote evaluation trace to {args.out}")
    return 0


def _cmd_grover(args) -> int:
    if args.backend == "exact":
        backend = bench.Exact2qBackend()
    elif args.backend == "exact-noisy":
        noise_cfg = _parse_noise(args.noise)
        if isinstance(noise_cfg, RealisticNoiseConfig):
            raise UsageError("vqe/grover take scalar noise parameters")
        backend = bench.Exact2qBackend(noise=qcore.make_noise(noise_cfg.gamma, noise_cfg.lam, noise_cfg.depol))
    elif args.backend == "surrogate":
        if not args.model:
            raise UsageError("--backend surrogate needs --model")
        backend = bench.Surrogate2qBackend(surrogate.load_model(args.model))
    else:
        raise UsageError(f"unknown backend {args.backend}")
    _print_config("grover", {"backend": args.backend, "model": args.model})
    probs = bench.grover_run(backend)
    labels = ["00", "01", "10", "11"]
    for label, p in zip(labels, probs):
        print(f"p(|{label}>) = {p:.6f}")
    print(f"argmax: |{labels[int(np.argmax(probs))]}>")
    if args.out:
        lines = ["state,probability"] + [f"{l},{p:.12g}" for l, p in zip(labels, probs)]
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        print(f"wrote probabilities to {args.out}")
    return 0


def _cmd_sim3q(args) -> int:
    layers = extend3q.load_layers(args.infile)
    if args.backend == "exact":
        backend = extend3q.ExactBackend()
    elif args.backend == "exact-noisy":
        noise_cfg = _parse_noise(args.noise)
        if isinstance(noise_cfg, RealisticNoiseConfig):
            raise UsageError("sim3q takes scalar noise parameters")
        backend = extend3q.ExactBackend(noise=qcore.make_noise(noise_cfg.gamma, noise_cfg.lam, noise_cfg.depol))
    elif args.backend == "surrogate":
        if not args.model:
            raise UsageError("--backend surrogate needs --model")
        backend = extend3q.SurrogateBackend(surrogate.load_model(args.model))
    else:
        raise UsageError(f"unknown backend {args.backend}")
    _print_config(
        "sim3q",
        {
            "in": args.infile,
            "backend": args.backend,
            "model": args.model,
            "naive_inversion": args.naive_inversion,
            "layers": len(layers),
        },
    )
    rho = extend3q.simulate_3q(layers, backend, naive_inversion=args.naive_inversion)
    if args.out:
        with open(args.out, "w", encoding="ascii", newline="\n") as fh:
            fh.write(_density_json(rho))
        print(f"wrote density matrix to {args.out}")
    if args.fidelity:
        exact = extend3q.direct_simulate_3q(layers)
        print(f"fidelity vs exact simulation: {qcore.mixed_fidelity(rho, exact):.9f}")
    return 0


def _cmd_tomo(args) -> int:
    records = tomo.load_records(args.infile)
    _print_config("tomo", {"in": args.infile, "out": args.out, "records": len(records)})
    rho = tomo.tomo_pipeline(records)
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_density_json(rho))
    print(f"wrote reconstructed density matrix to {args.out}")
    return 0


def _cmd_plotdata(args) -> int:
    _print_config("plotdata", {"in": args.infile, "out": args.out})
    out_lines = []
    with open(args.infile, "r", encoding="ascii") as fh:
        for line in fh.read().splitlines():
            if not line:
                continue
            if line.startswith("#"):
                out_lines.append("# " + line.lstrip("# "))
            else:
                out_lines.append(" ".join(line.split(",")))
    if out_lines and not out_lines[0].startswith("#"):
        out_lines[0] = "# " + out_lines[0]
    with open(args.out, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(out_lines) + "\n")
    print(f"wrote gnuplot columns to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="qsurrogate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a training dataset")
    p.add_argument("--family", required=True, choices=sorted(FAMILY_FLAGS))
    p.add_argument("--halfblock", choices=["a", "b"], default="a", help="CNOT orientation for universal families")
    p.add_argument("--n", type=int, required=True, help="number of records")
    p.add_argument("--noise", default=None, help="gamma=..,lambda=..,depol=.. or 'realistic'")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--initial-state", choices=["fixed", "random", "mixed", "blocks"], default="fixed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train a surrogate on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--d-model", type=int, default=64)
    p.add_argument("--n-heads", type=int, default=4)
    p.add_argument("--enc-layers", type=int, default=2)
    p.add_argument("--dec-layers", type=int, default=2)
    p.add_argument("--d-ff", type=int, default=128)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="per-sample fidelity report for a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", default=None, help="CSV output path")
    p.add_argument("--reference-min", type=float, default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("vqe", help="variational ground-state search")
    p.add_argument("--qubits", type=int, choices=[2, 3], required=True)
    p.add_argument("--backend", choices=["exact", "exact-noisy", "surrogate"], default="exact")
    p.add_argument("--model", default=None)
    p.add_argument("--noise", default=None)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=4000)
    p.add_argument("--out", default=None, help="CSV trace path")
    p.set_defaults(func=_cmd_vqe)

    p = sub.add_parser("grover", help="two-qubit search experiment")
    p.add_argument("--backend", choices=["exact", "exact-noisy", "surrogate"], default="exact")
    p.add_argument("--model", default=None)
    p.add_argument("--noise", default=None)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(func=_cmd_grover)

    p = sub.add_parser("sim3q", help="simulate a 3-qubit layer circuit")
    p.add_argument("--in", dest="infile", required=True, help="layer-circuit JSON file")
    p.add_argument("--backend", choices=["exact", "exact-noisy", "surrogate"], default="exact")
    p.add_argument("--model", default=None)
    p.add_argument("--noise", default=None)
    p.add_argument("--naive-inversion", action="store_true", help="subtract beta*I instead of the measured identity image")
    p.add_argument("--out", default=None, help="density-matrix JSON path")
    p.add_argument("--fidelity", action="store_true", help="print fidelity vs exact simulation")
    p.set_defaults(func=_cmd_sim3q)

    p = sub.add_parser("tomo", help="reconstruct a state from readout probabilities")
    p.add_argument("--in", dest="infile", required=True, help="probability-record JSON file")
    p.add_argument("--out", required=True, help="density-matrix JSON path")
    p.set_defaults(func=_cmd_tomo)

    p = sub.add_parser("plotdata", help="turn a CSV report into gnuplot columns")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plotdata)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # runtime failure contract: exit code 2
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
