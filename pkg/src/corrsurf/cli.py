"""Command-line front end: run sweeps and emit machine-readable tables.

Standard output carries data exclusively; progress goes to standard error.
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import montecarlo, noise
from .montecarlo import RunConfig, RunStats

CSV_HEADER = (
    "model,d,p,shots,T,failures_x,p_shot_x,p_l_x,ci_low_x,ci_high_x,"
    "failures_z,p_shot_z,p_l_z,ci_low_z,ci_high_z,seed,seconds"
)

FIGURES = {
    # name: (model template, default p grid)
    "fig2": ("none", (1e-3, 2e-3, 4e-3, 6e-3, 8e-3, 1.2e-2)),
    "fig4": ("exp:{n}", (2e-4, 5e-4, 1e-3, 2e-3, 4e-3)),
    "fig5": ("poly:{n}", (2e-4, 5e-4, 1e-3, 2e-3, 4e-3)),
    "fig6": ("pair:{A},{n}", (1e-4, 2e-4, 5e-4, 1e-3, 2e-3)),
    "fig7": ("column:{A}", (5e-4, 1e-3, 2e-3, 4e-3, 8e-3)),
}


def parse_model(text: str) -> noise.NoiseModel:
    """Parse the model grammar none | exp:<n> | poly:<n> | pair:<A>,<n> |
    column:<A>.  The physical rate p is attached later from --p."""
    try:
        if text == "none":
            return noise.NoiseModel(p=0.0)
        kind, _, args = text.partition(":")
        if kind == "exp":
            return noise.NoiseModel(p=0.0, kind=noise.EXP_AREA, n=float(args))
        if kind == "poly":
            return noise.NoiseModel(p=0.0, kind=noise.POLY_AREA, n=float(args))
        if kind == "pair":
            a, n = args.split(",")
            return noise.NoiseModel(p=0.0, kind=noise.PAIRWISE, A=float(a), n=float(n))
        if kind == "column":
            return noise.NoiseModel(p=0.0, kind=noise.COLUMN, A=float(args))
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad model string {text!r}: {exc}") from exc
    raise argparse.ArgumentTypeError(f"unknown model kind in {text!r}")


def _parse_p_list(values) -> list[float]:
    out = []
    for chunk in values:
        for tok in chunk.split(","):
            tok = tok.strip()
            if tok:
                out.append(float(tok))
    if not out:
        raise argparse.ArgumentTypeError("at least one --p value is required")
    return out


def _parse_d_list(values) -> list[int]:
    out = []
    for chunk in values:
        for tok in chunk.split(","):
            tok = tok.strip()
            if tok:
                out.append(int(tok))
    return out


def _parse_knn(text: str):
    if text == "off":
        return None
    k = int(text)
    if k < 6:
        raise argparse.ArgumentTypeError("--knn must be >= 6 (or 'off')")
    return k


def _add_common(sub):
    sub.add_argument("--model", type=parse_model, default=parse_model("none"))
    sub.add_argument("--shots", type=int, default=100_000)
    sub.add_argument("--rounds", type=int, default=None, help="rounds T (default d)")
    sub.add_argument("--seed", type=int, default=0)
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", type=Path, default=None)
    sub.add_argument("--target-failures", type=int, default=None)
    sub.add_argument("--knn", type=_parse_knn, default=None, metavar="k|off")
    sub.add_argument(
        "--timing",
        choices=("none", "wall"),
        default="none",
        help="'none' zeroes the seconds column so output is byte-reproducible",
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="corrsurf",
        description="Surface-code Monte Carlo with correlated error models.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="estimate one (d, p, model) cell")
    run.add_argument("--d", type=int, required=True)
    run.add_argument("--p", action="append", required=True)
    _add_common(run)

    sweep = sub.add_parser("sweep", help="cross-product sweep over d and p")
    sweep.add_argument("--d", action="append", required=True)
    sweep.add_argument("--p", action="append", required=True)
    _add_common(sweep)

    fig = sub.add_parser("figure", help="emit plot-ready datasets")
    fig.add_argument("name", choices=sorted(FIGURES))
    fig.add_argument("--dmax", type=int, default=9)
    fig.add_argument("--n", type=float, default=None, help="model parameter n")
    fig.add_argument("--A", type=float, default=None, help="model parameter A")
    fig.add_argument("--p", action="append", default=None)
    _add_common(fig)

    st = sub.add_parser("selftest", help="run built-in consistency checks")
    st.add_argument("--trials", type=int, default=200)
    st.add_argument("--seed", type=int, default=0)
    return ap


def parse(argv) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def _resolve_threads(args) -> int:
    if getattr(args, "threads", None) is not None:
        return max(1, args.threads)
    env = os.environ.get("CORRSURF_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise SystemExit(f"corrsurf: bad CORRSURF_THREADS value {env!r}") from exc
    return 1


def _field_str(v) -> str:
    # repr of a Python float is its shortest round-trip decimal form
    s = repr(v) if isinstance(v, float) else str(v)
    if "," in s or '"' in s:  # RFC 4180: the pair:<A>,<n> label needs quoting
        s = '"' + s.replace('"', '""') + '"'
    return s


def emit_row(row: RunStats) -> str:
    return ",".join(_field_str(v) for v in dataclasses.astuple(row))


def emit(rows, fmt: str, out) -> None:
    if fmt == "csv":
        out.write(CSV_HEADER + "\n")
        for row in rows:
            out.write(emit_row(row) + "\n")
    else:
        json.dump([dataclasses.asdict(r) for r in rows], out, indent=2)
        out.write("\n")


def _configs(args, ds, ps) -> list[RunConfig]:
    workers = _resolve_threads(args)
    cfgs = []
    for d in ds:
        for p in ps:
            cfgs.append(
                RunConfig(
                    d=d,
                    p=p,
                    model=dataclasses.replace(args.model, p=p),
                    shots=args.shots,
                    T=args.rounds,
                    seed=args.seed,
                    workers=workers,
                    target_failures=args.target_failures,
                    knn=args.knn,
                )
            )
    return cfgs


def _zero_timing(row: RunStats, args) -> RunStats:
    if args.timing == "wall":
        return row
    return dataclasses.replace(row, seconds=0.0)


def _run_sweep(args, cfgs, out) -> int:
    """Stream rows as they finish; on interruption flush a resume marker."""
    rows = []
    status = 0
    if args.format == "csv":
        out.write(CSV_HEADER + "\n")
        out.flush()
    try:
        for i, cfg in enumerate(cfgs):
            print(
                f"corrsurf: [{i + 1}/{len(cfgs)}] d={cfg.d} p={cfg.p} "
                f"model={cfg.model.label()}",
                file=sys.stderr,
            )
            row = montecarlo.estimate(cfg)
            print(f"corrsurf:   done in {row.seconds:.2f}s", file=sys.stderr)
            row = _zero_timing(row, args)
            rows.append(row)
            if args.format == "csv":
                out.write(emit_row(row) + "\n")
                out.flush()
    except KeyboardInterrupt:
        out.write(f"# resume --from {len(rows)} of {len(cfgs)} cells\n")
        print("corrsurf: interrupted; partial results flushed", file=sys.stderr)
        status = 1
    if args.format == "json":
        json.dump([dataclasses.asdict(r) for r in rows], out, indent=2)
        out.write("\n")
    out.flush()
    return status


def _cmd_run(args) -> int:
    cfgs = _configs(args, [args.d], _parse_p_list(args.p))
    return _with_out(args, lambda out: _run_sweep(args, cfgs, out))


def _cmd_sweep(args) -> int:
    cfgs = _configs(args, _parse_d_list(args.d), _parse_p_list(args.p))
    return _with_out(args, lambda out: _run_sweep(args, cfgs, out))


def _with_out(args, fn) -> int:
    if args.out is None:
        return fn(sys.stdout)
    with open(args.out, "w") as fh:
        return fn(fh)


def _figure_model(args) -> noise.NoiseModel:
    template, _ = FIGURES[args.name]
    defaults = {"fig4": {"n": 10}, "fig5": {"n": 2}, "fig6": {"A": 1, "n": 2}, "fig7": {"A": 1}}
    params = defaults.get(args.name, {})
    if args.n is not None:
        params["n"] = args.n
    if args.A is not None:
        params["A"] = args.A
    return parse_model(template.format(**params))


def _cmd_figure(args) -> int:
    model = _figure_model(args)
    ps = _parse_p_list(args.p) if args.p else list(FIGURES[args.name][1])
    ds = [d for d in range(3, args.dmax + 1, 2)]
    outdir = args.out if args.out is not None else Path(".")
    outdir.mkdir(parents=True, exist_ok=True)
    workers = _resolve_threads(args)
    manifest = {
        "figure": args.name,
        "model": model.label(),
        "distances": ds,
        "p": ps,
        "shots": args.shots,
        "rounds": args.rounds,
        "seed": args.seed,
        "target_failures": args.target_failures,
        "files": {},
        "warnings": [],
    }
    for d in ds:
        fname = f"{args.name}_{model.label().replace(':', '_').replace(',', '_')}_d{d}.dat"
        manifest["files"][str(d)] = fname
        if args.shots == 0:
            continue  # dry run: manifest only
        lines = []
        for p in ps:
            cfg = RunConfig(
                d=d,
                p=p,
                model=dataclasses.replace(model, p=p),
                shots=args.shots,
                T=args.rounds,
                seed=args.seed,
                workers=workers,
                target_failures=args.target_failures,
                knn=args.knn,
            )
            print(f"corrsurf: {args.name} d={d} p={p}", file=sys.stderr)
            row = montecarlo.estimate(cfg)
            if row.failures_x == 0:
                msg = f"zero failures at d={d} p={p}; point omitted from {fname}"
                manifest["warnings"].append(msg)
                print(f"corrsurf: warning: {msg}", file=sys.stderr)
                continue
            lines.append(f"{_field_str(p)} {_field_str(row.p_l_x)}\n")
        with open(outdir / fname, "w") as fh:
            fh.writelines(lines)
    with open(outdir / f"{args.name}_manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(f"corrsurf: wrote {args.name} datasets to {outdir}", file=sys.stderr)
    return 0


def _cmd_selftest(args) -> int:
    import numpy as np

    from . import decoder, frame
    from .lattice import build_lattice, schedule_round

    rng = np.random.default_rng(args.seed)
    failures = []

    # 1. matcher exactness against brute force on random small graphs
    def brute(graph):
        m = graph.n_real

        def edge_w(a, b):
            if a > b:
                a, b = b, a
            if b < m:
                return int(graph.weights[a, b])
            if a < m:
                return int(graph.bnd[a]) if b == a + m else None
            return 0

        def rec(free):
            if not free:
                return 0
            a = free[0]
            best = None
            for b in free[1:]:
                w = edge_w(a, b)
                if w is None or w >= decoder._INF:
                    continue
                rest = [x for x in free[1:] if x != b]
                sub = rec(rest)
                if sub is not None and (best is None or w + sub < best):
                    best = w + sub
            return best

        return rec(list(range(graph.n_nodes)))

    lat5 = build_lattice(5)
    for trial in range(args.trials):
        k = int(rng.integers(1, 7))
        trips = set()
        while len(trips) < k:
            trips.add((int(rng.integers(6)), int(rng.integers(5)), int(rng.integers(4))))
        g = decoder.build_graph(sorted(trips), lat5, 5, graph="Z")
        got = decoder.mwpm(g).weight
        want = brute(g)
        if got != want:
            failures.append(f"matcher: trial {trial} weight {got} != brute {want}")

    # 2. exhaustive single-error distance check at d=3, perfect measurements
    lat = build_lattice(3)
    circuit = schedule_round(lat)
    for qi in range(lat.n_qubits):
        for basis in ("X", "Z"):
            pf = frame.PauliFrame.zeros(lat.n_qubits)
            pf.inject(qi, basis)
            recs = frame.SyndromeRecords(lat)
            for _ in range(2):
                outcomes = {}
                for layer in circuit.layers:
                    for gate in layer:
                        r = frame.apply_gate(pf, gate, lat.index)
                        if r is not None:
                            outcomes[gate.qubits[0]] = r
                recs.append_round(outcomes)
            recs.append_final(pf)
            events = frame.detection_events(recs)
            fx, fz = frame.logical_flips(lat, pf)
            bad_x, bad_z = decoder.decode_shot(events, lat, 2, (fx, fz))
            if bad_x or bad_z:
                failures.append(f"distance: single {basis} on qubit {qi} misdecoded")

    # 3. noise frequency checks against the analytic rate
    model = noise.NoiseModel(p=1e-2)
    lat = build_lattice(3)
    probe = (2, 2)
    rounds = 50_000
    expect = noise.expected_event_rate(model, lat, probe)
    count = 0
    for _ in range(rounds):
        for _, gate in circuit.gates():
            draw = noise.AreaErrorDraw(x=float(rng.random()), gate=gate)
            for ev in noise.sample_gate_error(gate, model, draw, rng):
                q = ev.qubit if hasattr(ev, "pauli") else ev.qubit
                if q == probe:
                    count += 1
    mean = count / rounds
    sigma = (expect / rounds) ** 0.5
    if abs(mean - expect) > 3 * sigma:
        failures.append(f"noise: frequency {mean:.5f} vs analytic {expect:.5f} (>3 sigma)")

    for msg in failures:
        print(f"selftest FAIL: {msg}", file=sys.stderr)
    print(
        f"selftest: {'FAILED' if failures else 'ok'} "
        f"({args.trials} matcher trials, d=3 exhaustive, frequency check)",
        file=sys.stderr,
    )
    return 1 if failures else 0


def main(argv=None) -> int:
    args = parse(sys.argv[1:] if argv is None else argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "figure":
            return _cmd_figure(args)
        return _cmd_selftest(args)
    except BrokenPipeError:
        return 1
    except (ValueError, OSError) as exc:
        print(f"corrsurf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
