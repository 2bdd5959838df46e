"""Command-line front end: protocol runs, resource comparisons, and a
self-test of the package invariants.

Exit codes: 0 success, 1 property violation, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any, Sequence

import numpy as np

from .accounting import Method, account, crossover_table
from .defection import DiagonalForm, analyze_defection
from .protocol import (
    CORRECTIONS,
    FIDELITY_ATOL,
    run_baseline_ghz,
    run_controlled_teleport,
    run_multi_receiver,
)
from .resources import MessageSpec, NetworkShape, ParityClass, parity_decompose, prepare_ghz
from .states import BellOutcome, PauliOp, apply_hadamard

SCHEMA_VERSION = 1
MAX_TOTAL_QUBITS = 26
FIDELITY_BAR = FIDELITY_ATOL
DEFAULT_MESSAGE_SEED = 2718  # fixed so enumerate-mode reports never depend on --seed

PRESETS = {
    "zero": (1.0, 0.0),
    "one": (0.0, 1.0),
    "plus": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "minus": (1 / np.sqrt(2), -1 / np.sqrt(2)),
    "phase": (1 / np.sqrt(2), 1j / np.sqrt(2)),
}


class ConfigError(Exception):
    pass


def _sig15(x: float) -> float:
    return float(f"{x:.15g}")


def _round_floats(obj: Any) -> Any:
    if isinstance(obj, float):
        return _sig15(obj)
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def _emit_report(report: dict, out_path: str | None) -> None:
    text = json.dumps(_round_floats(report), indent=2, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_spec_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read spec file: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"spec file is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigError("spec file must hold a JSON object")
    return data


def _resolve_shape(args, config: dict) -> NetworkShape:
    ml = args.ml if args.ml is not None else config.get("ml")
    m = args.m if args.m is not None else config.get("m")
    k = args.k if args.k is not None else config.get("k")
    n = args.n if args.n is not None else config.get("n", 1)
    if ml is not None and m is not None:
        raise ConfigError("give either --m or --ml, not both")
    if ml is not None:
        counts = [int(x) for x in ml]
        if k is not None:
            if len(counts) == 1:
                counts = counts * int(k)
            elif len(counts) != int(k):
                raise ConfigError(f"--ml lists {len(counts)} receivers but --k is {k}")
    elif m is not None:
        counts = [int(m)] * int(k or 1)
    else:
        raise ConfigError("message count is required (--m or --ml)")
    try:
        shape = NetworkShape(tuple(counts), int(n))
    except ValueError as exc:
        raise ConfigError(str(exc))
    if shape.total_qubits > MAX_TOTAL_QUBITS:
        raise ConfigError(
            f"shape exceeds simulator capacity: {shape.total_qubits} qubits > {MAX_TOTAL_QUBITS}"
        )
    return shape


def _message_pairs(source: dict, total: int) -> list[tuple[complex, complex]]:
    kind = source.get("kind", "random")
    if kind == "random":
        rng = np.random.default_rng(int(source.get("seed", DEFAULT_MESSAGE_SEED)))
        return list(MessageSpec.random(total, rng).qubits)
    if kind == "preset":
        name = source.get("name", "plus")
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        return [PRESETS[name]] * total
    if kind == "explicit":
        raw = source.get("amplitudes")
        if not isinstance(raw, list) or len(raw) != total:
            raise ConfigError(f"explicit amplitudes must list {total} qubits")
        pairs = []
        for entry in raw:
            try:
                (ar, ai), (br, bi) = entry
                pairs.append((complex(ar, ai), complex(br, bi)))
            except (TypeError, ValueError):
                raise ConfigError("each amplitude entry must be [[re, im], [re, im]]")
        return pairs
    raise ConfigError(f"unknown message source kind {kind!r}")


def _build_specs(args, config: dict, shape: NetworkShape) -> tuple[list[MessageSpec], dict]:
    source = config.get("messages", {"kind": "random", "seed": DEFAULT_MESSAGE_SEED})
    pairs = _message_pairs(source, shape.total_messages)
    try:
        spec, correction = MessageSpec.normalized(pairs)
    except ValueError as exc:
        raise ConfigError(str(exc))
    if correction > 1e-9:
        print(
            f"warning: message amplitudes renormalized (largest correction {correction:.3e})",
            file=sys.stderr,
        )
    specs = []
    start = 0
    for m in shape.message_counts:
        specs.append(MessageSpec(spec.qubits[start:start + m]))
        start += m
    return specs, source


def _transcript_dict(t) -> dict:
    return {
        "receiver": t.receiver,
        "message_index": t.message_index,
        "bell_outcomes": [o.value for o in t.bell_outcomes],
        "agent_bits": list(t.agent_bits),
        "sender_ghz_bit": t.sender_ghz_bit,
        "branch": t.branch.value,
        "corrections": [op.value for op in t.corrections],
        "fidelity": t.fidelity,
        "branch_probability": t.branch_probability,
    }


def _density_dict(d) -> dict:
    mat = d.matrix
    return {
        "diag": [float(mat[i, i].real) for i in range(mat.shape[0])],
        "max_off_diagonal": d.max_off_diagonal(),
    }


def _defection_dict(r) -> dict:
    return {
        "defector": r.defector + 1,
        "bell_outcomes": [o.value for o in r.bell_outcomes],
        "cooperator_bits": list(r.cooperator_bits),
        "probability": r.probability,
        "per_qubit": [
            {
                **_density_dict(d),
                "conforms_to": form.value,
                "max_recovery_fidelity": best,
            }
            for d, form, best in zip(r.per_qubit_density, r.conforms_to, r.max_fidelity)
        ],
        "off_diagonal_norm": r.off_diagonal_norm,
    }


def cmd_run(args) -> int:
    config = _load_spec_file(args.spec) if args.spec else {}
    shape = _resolve_shape(args, config)
    specs, source = _build_specs(args, config, shape)

    defector = args.defector if args.defector is not None else config.get("defector")
    # defection analysis is exhaustive by construction
    enumerate_mode = args.enumerate or config.get("mode") == "enumerate" or defector is not None
    mode = "enumerate" if enumerate_mode else "sampled"
    seed = args.seed if args.seed is not None else config.get("seed")
    if mode == "sampled" and seed is None:
        raise ConfigError("sampled mode needs --seed (or use --enumerate)")
    scenario = {
        "message_counts": list(shape.message_counts),
        "num_agents": shape.num_agents,
        "mode": mode,
        "seed": None if mode == "enumerate" else int(seed),
        "defector": defector,
        "message_source": source,
    }
    report: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "command": "run", "scenario": scenario}

    if defector is not None:
        defector = int(defector)
        if not 1 <= defector <= shape.num_agents:
            raise ConfigError(f"defector must be in 1..{shape.num_agents}")
        flat_spec = MessageSpec(tuple(q for s in specs for q in s.qubits))
        reports = analyze_defection(specs, shape, defector - 1)
        ok = all(
            r.off_diagonal_norm < 1e-12
            and all(_diag_matches(r, q, flat_spec) for q in range(len(flat_spec)))
            for r in reports
        )
        report["kind"] = "defection_analysis"
        report["branches"] = [_defection_dict(r) for r in reports]
        report["summary"] = {
            "num_branches": len(reports),
            "max_off_diagonal": max(r.off_diagonal_norm for r in reports),
            "probability_sum": sum(r.probability for r in reports),
            "all_diagonal": ok,
        }
        _emit_report(report, args.out)
        return 0 if ok else 1

    if mode == "enumerate":
        if shape.num_receivers == 1:
            transcripts = run_controlled_teleport(specs[0], shape, "enumerate")
        else:
            transcripts = [t for branch in run_multi_receiver(specs, shape, "enumerate") for t in branch]
    else:
        if shape.num_receivers == 1:
            transcripts = [run_controlled_teleport(specs[0], shape, "sampled", seed=int(seed))]
        else:
            transcripts = list(run_multi_receiver(specs, shape, "sampled", seed=int(seed)))

    min_fid = min(t.fidelity for t in transcripts)
    ok = min_fid >= 1.0 - FIDELITY_BAR
    prob_sum = sum(t.branch_probability for t in transcripts) / max(shape.num_receivers, 1)
    report["kind"] = "protocol_run"
    report["transcripts"] = [_transcript_dict(t) for t in transcripts]
    report["summary"] = {
        "num_transcripts": len(transcripts),
        "min_fidelity": min_fid,
        "branch_probability_sum": prob_sum if mode == "enumerate" else None,
        "all_fidelities_pass": ok,
    }
    _emit_report(report, args.out)
    return 0 if ok else 1


def _diag_matches(report, qubit: int, spec: MessageSpec) -> bool:
    alpha, beta = spec.qubits[qubit]
    d = report.per_qubit_density[qubit].matrix
    if report.conforms_to[qubit] is DiagonalForm.PRESERVED:
        want = (abs(alpha) ** 2, abs(beta) ** 2)
    else:
        want = (abs(beta) ** 2, abs(alpha) ** 2)
    return abs(d[0, 0].real - want[0]) < 1e-12 and abs(d[1, 1].real - want[1]) < 1e-12


def _parse_m_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def cmd_compare(args) -> int:
    n = args.n if args.n is not None else 1
    if args.m is not None and args.ml is not None:
        raise ConfigError("give either --m or --ml, not both")
    if args.m is not None:
        ms = _parse_m_range(args.m)
        if not ms:
            raise ConfigError("empty m range")
        table = crossover_table(n, ms)
        rows = [
            {
                "m": row.m,
                "aux_entangling": row.aux_entangling,
                "aux_baseline": row.aux_baseline,
                "ops_per_agent_entangling": row.ops_per_agent_entangling,
                "ops_per_agent_baseline": row.ops_per_agent_baseline,
                "aux_equal": row.aux_equal,
                "aux_advantage": row.aux_advantage,
                "ops_advantage": row.ops_advantage,
            }
            for row in table.rows
        ]
        report = {
            "schema_version": SCHEMA_VERSION,
            "command": "compare",
            "num_agents": n,
            "rows": rows,
            "first_dominating_m": table.first_dominating_m,
        }
        print(f"{'m':>3} {'aux(new)':>9} {'aux(base)':>10} {'ops/agent':>10} {'flags':>14}")
        for row in table.rows:
            flags = []
            if row.aux_equal:
                flags.append("aux=")
            if row.aux_advantage:
                flags.append("aux+")
            if row.ops_advantage:
                flags.append("ops+")
            print(
                f"{row.m:>3} {row.aux_entangling:>9} {row.aux_baseline:>10} "
                f"{row.ops_per_agent_entangling:>4} vs {row.ops_per_agent_baseline:<3} {','.join(flags):>14}"
            )
        if args.out:
            _emit_report(report, args.out)
        return 0

    if args.ml is None:
        raise ConfigError("compare needs --m RANGE or --ml COUNTS")
    shape = _resolve_shape(args, {})
    new = account(Method.ENTANGLING, shape)
    old = account(Method.GHZ_BASELINE, shape)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "shape": {"message_counts": list(shape.message_counts), "num_agents": shape.num_agents},
        "entangling": _report_dict(new),
        "ghz_baseline": _report_dict(old),
    }
    print(f"shape m_l={list(shape.message_counts)} n={shape.num_agents}")
    print(f"aux qubits:        {new.aux_qubits} vs {old.aux_qubits}")
    print(f"qubits/agent:      {new.qubits_per_agent} vs {old.qubits_per_agent}")
    print(f"hadamards/agent:   {new.hadamards_per_agent} vs {old.hadamards_per_agent}")
    print(f"measurements/agent:{new.measurements_per_agent} vs {old.measurements_per_agent}")
    print(f"bits/agent->recv:  {list(new.classical_bits_per_agent)} vs {list(old.classical_bits_per_agent)}")
    if args.out:
        _emit_report(report, args.out)
    return 0


def _report_dict(r) -> dict:
    return {
        "aux_qubits": r.aux_qubits,
        "qubits_per_agent": r.qubits_per_agent,
        "hadamards_per_agent": r.hadamards_per_agent,
        "measurements_per_agent": r.measurements_per_agent,
        "classical_bits_per_agent": list(r.classical_bits_per_agent),
        "bell_measurements": r.bell_measurements,
    }


def _selftest_checks():
    rng = np.random.default_rng(99)

    def reconstruction():
        for m in (1, 2):
            for n in (1, 2):
                shape = NetworkShape.single(m, n)
                for _ in range(3):
                    spec = MessageSpec.random(m, rng)
                    trs = run_controlled_teleport(spec, shape)
                    if len(trs) != 4 ** m * 2 ** (n + 1):
                        return f"branch count {len(trs)} wrong for m={m} n={n}"
                    worst = min(t.fidelity for t in trs)
                    if worst < 1.0 - FIDELITY_BAR:
                        return f"fidelity {worst} below bar at m={m} n={n}"
                    if abs(sum(t.branch_probability for t in trs) - 1.0) > 1e-9:
                        return f"branch probabilities do not sum to 1 at m={m} n={n}"
        return None

    def parity_structure():
        for size in range(2, 8):
            for sign, expect_even_marker in ((+1, 0), (-1, 1)):
                state = prepare_ghz(size, sign)
                for q in range(size):
                    state = apply_hadamard(state, q)
                weights = parity_decompose(state, list(range(size)))
                total_parity = ParityClass.EVEN if sign == +1 else ParityClass.ODD
                if abs(weights[total_parity] - 1.0) > 1e-12:
                    return f"parity mass off for size={size} sign={sign}"
        return None

    def defection_diagonality():
        for m in (1, 2):
            for n in (1, 2):
                spec = MessageSpec.random(m, rng)
                for defector in range(n):
                    for rep in analyze_defection(spec, NetworkShape.single(m, n), defector):
                        if rep.off_diagonal_norm >= 1e-12:
                            return f"off-diagonal {rep.off_diagonal_norm} at m={m} n={n}"
                        for q in range(m):
                            if not _diag_matches(rep, q, spec):
                                return f"diagonal mismatch at m={m} n={n} qubit {q}"
        return None

    def baseline_equivalence():
        for m in (1, 2):
            for n in (1, 2):
                spec = MessageSpec.random(m, rng)
                trs = run_baseline_ghz(spec, NetworkShape.single(m, n))
                worst = min(t.fidelity for t in trs)
                if worst < 1.0 - FIDELITY_BAR:
                    return f"baseline fidelity {worst} below bar at m={m} n={n}"
        return None

    def corrupted_table_detected():
        swapped = dict(CORRECTIONS)
        swapped[BellOutcome.PHI_PLUS] = (PauliOp.Z, PauliOp.I)
        swapped[BellOutcome.PHI_MINUS] = (PauliOp.I, PauliOp.Z)
        spec = MessageSpec.random(1, rng)
        trs = run_controlled_teleport(spec, NetworkShape.single(1, 1), correction_table=swapped)
        worst = min(t.fidelity for t in trs)
        if worst >= 1.0 - 1e-6:
            return "reconstruction did not fail under a corrupted correction table"
        return None

    def enumerate_determinism():
        spec = MessageSpec.random(2, rng)
        shape = NetworkShape.single(2, 1)
        a = run_controlled_teleport(spec, shape)
        b = run_controlled_teleport(spec, shape)
        same = all(
            x.bell_outcomes == y.bell_outcomes
            and x.agent_bits == y.agent_bits
            and x.fidelity == y.fidelity
            and x.branch_probability == y.branch_probability
            for x, y in zip(a, b)
        )
        return None if same and len(a) == len(b) else "enumerate mode is not deterministic"

    return [
        ("reconstruction", reconstruction),
        ("ghz_parity_decomposition", parity_structure),
        ("defection_diagonality", defection_diagonality),
        ("baseline_equivalence", baseline_equivalence),
        ("corrupted_table_detected", corrupted_table_detected),
        ("enumerate_determinism", enumerate_determinism),
    ]


def cmd_selftest(args) -> int:
    failures = []
    for name, check in _selftest_checks():
        problem = check()
        if problem is None:
            print(f"[selftest] {name}: ok")
        else:
            print(f"[selftest] {name}: FAIL ({problem})")
            failures.append(name)
    if failures:
        print(f"[selftest] failed: {', '.join(failures)}")
        return 1
    print("[selftest] all checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teleportnet",
        description="Controlled teleportation of multi-qubit messages: runs, comparisons, self-test.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a protocol run or defection analysis")
    run.add_argument("--m", type=int, help="message qubits (single receiver)")
    run.add_argument("--ml", type=int, nargs="+", help="per-receiver message counts")
    run.add_argument("--n", type=int, help="number of agents (default 1)")
    run.add_argument("--k", type=int, help="number of receivers")
    run.add_argument("--seed", type=int, help="RNG seed (sampled mode)")
    run.add_argument("--enumerate", action="store_true", help="enumerate every branch")
    run.add_argument("--defector", type=int, help="1-based agent that withholds cooperation")
    run.add_argument("--spec", help="JSON scenario file")
    run.add_argument("--out", help="report file (default: stdout)")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="resource comparison tables")
    compare.add_argument("--m", help="message count or range, e.g. 3 or 1..5")
    compare.add_argument("--ml", type=int, nargs="+", help="per-receiver message counts")
    compare.add_argument("--n", type=int, help="number of agents (default 1)")
    compare.add_argument("--k", type=int, help="number of receivers")
    compare.add_argument("--out", help="JSON table file")
    compare.set_defaults(func=cmd_compare)

    selftest = sub.add_parser("selftest", help="run the invariant suite at desk scale")
    selftest.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
