"""Command-line harness: replay, benchmark, synthesize, emit.

Subcommands
-----------
stream   replay a recorded CSV through the pipeline, honoring embedded
         phase-switch directives; writes a trace CSV
bench    wall-clock scaling benchmark over reservoir sizes
synth    generate deterministic multi-regime test data
emit     generate C source/header/manifest from a serialized model

Exit codes: 0 success, 2 input error, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import bench as bench_mod
from . import codegen, kernels, lof, synth
from .dsp import Sample
from .errors import (
    ConfigError,
    InputError,
    InsufficientPointsError,
    InvalidStateError,
    StreamLofError,
)
from .pipeline import EventKind, Phase, Pipeline, PipelineConfig, load_config

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3

TRACE_COLUMNS = ("window_end", "phase", "event", "score", "is_anomaly")
_CONTROLS = ("train", "detect", "retrain", "")


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _load_pipeline_config(path: str | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return load_config(path)


def _parse_header(header: list[str]) -> dict:
    cols = [h.strip() for h in header]
    if not cols or cols[0] != "t":
        raise InputError("header: first column must be 't'")
    n_channels = 0
    for name in cols[1:]:
        if name == f"ch{n_channels + 1}":
            n_channels += 1
        else:
            break
    if n_channels == 0:
        raise InputError("header: expected channel columns ch1..chC after 't'")
    rest = cols[1 + n_channels :]
    layout = {"channels": n_channels, "regime": None, "control": None}
    for offset, name in enumerate(rest):
        if name == "regime":
            layout["regime"] = 1 + n_channels + offset
        elif name == "control":
            layout["control"] = 1 + n_channels + offset
        else:
            raise InputError(f"header: unexpected column {name!r}")
    return layout


def _format_tick(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return f"{value:.10g}"


def _trace_row(event, phase: Phase) -> list[str] | None:
    if event.kind is EventKind.NONE:
        return None
    score = "" if event.score is None else f"{event.score:.9g}"
    anomaly = "" if event.is_anomaly is None else str(int(event.is_anomaly))
    end = "" if event.window_end is None else _format_tick(event.window_end)
    return [end, phase.value, event.kind.value, score, anomaly]


def cmd_stream(args) -> int:
    try:
        cfg = _load_pipeline_config(args.config)
        if args.seed is not None:
            cfg = PipelineConfig(
                dsp=cfg.dsp,
                reservoir_capacity=cfg.reservoir_capacity,
                lof=cfg.lof,
                threshold=cfg.threshold,
                retrain_every=cfg.retrain_every,
                seed=args.seed,
            )
    except (ConfigError, OSError) as exc:
        return _fail(EXIT_CONFIG, str(exc))
    pipe = Pipeline(cfg)
    traces: list[list[str]] = []
    try:
        with open(args.input, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is not None:
                layout = _parse_header(header)
                if layout["channels"] != cfg.dsp.channels:
                    raise InputError(
                        f"header declares {layout['channels']} channels, "
                        f"config expects {cfg.dsp.channels}"
                    )
                _replay_rows(reader, layout, pipe, traces)
    except OSError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except (InputError, InsufficientPointsError, InvalidStateError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        writer.writerows(traces)
    if args.save_model is not None:
        if pipe.model is None:
            return _fail(EXIT_INPUT, "no model was trained; nothing to save")
        lof.save_model(pipe.model, args.save_model)
    return EXIT_OK


def _replay_rows(reader, layout, pipe: Pipeline, traces: list) -> None:
    n_ch = layout["channels"]
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        control = ""
        if layout["control"] is not None and len(row) > layout["control"]:
            control = row[layout["control"]].strip()
        if control not in _CONTROLS:
            raise InputError(f"row {lineno}: unknown control directive {control!r}")
        if control == "train":
            pipe.set_phase(Phase.TRAINING)
        elif control == "retrain":
            event = pipe.train_now()
            traces.append(["", pipe.phase.value, event.kind.value, "", ""])
        elif control == "detect":
            pipe.set_phase(Phase.DETECTING, train_if_needed=True)
        if len(row) < 1 + n_ch:
            raise InputError(
                f"row {lineno}: expected {n_ch} channel values, got {len(row) - 1}"
            )
        try:
            t = float(row[0])
            channels = [float(v) for v in row[1 : 1 + n_ch]]
        except ValueError as exc:
            raise InputError(f"row {lineno}: {exc}") from exc
        try:
            event = pipe.step(Sample(t, tuple(channels)))
        except InputError as exc:
            raise InputError(f"row {lineno}: {exc}") from exc
        trace = _trace_row(event, pipe.phase)
        if trace is not None:
            traces.append(trace)


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        return _fail(EXIT_INPUT, f"bad --sizes value {args.sizes!r}")
    if args.backend == "both":
        backends = kernels.available_backends()
    else:
        backends = [args.backend]
    try:
        report = bench_mod.run_bench(
            sizes,
            reps=args.reps,
            seed=args.seed if args.seed is not None else 0,
            backends=backends,
        )
    except (InputError, ConfigError) as exc:
        return _fail(EXIT_INPUT, str(exc))
    text = json.dumps(report, indent=2)
    if args.out is not None:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    for backend, fits in report["fits"].items():
        print(
            f"# {backend}: train exponent {fits['train_exponent']:.2f}, "
            f"score exponent {fits['score_exponent']:.2f}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        values, regime_ids, regimes = synth.generate_profile(
            args.profile,
            args.duration,
            rate_hz=args.rate,
            seed=args.seed if args.seed is not None else 0,
            channels=args.channels,
        )
    except InputError as exc:
        return _fail(EXIT_INPUT, str(exc))
    controls: dict[int, str] = {}
    if args.enroll:
        # Prepend enrollment segments (control: train ... detect) so the
        # sweep replays as one self-contained experiment file.
        rng_seed = (args.seed if args.seed is not None else 0) + 1
        rng = np.random.default_rng(rng_seed)
        blocks = []
        ids = []
        t0 = 0
        for regime_idx in args.enroll:
            if not 0 <= regime_idx < len(regimes):
                return _fail(EXIT_INPUT, f"--enroll regime {regime_idx} out of range")
            n = int(round(args.enroll_duration * args.rate))
            blocks.append(
                synth.regime_samples(
                    regimes[regime_idx], n, args.rate, rng, args.channels, t0
                )
            )
            ids.append(np.full(n, regime_idx, dtype=np.int64))
            controls[t0] = "train"
            t0 += n
        controls[t0] = "detect"
        values = np.vstack(blocks + [values])
        regime_ids = np.concatenate(ids + [regime_ids])
    synth.write_csv(args.out, values, regime_ids, controls or None)
    return EXIT_OK


def cmd_emit(args) -> int:
    try:
        opts = codegen.EmitOptions(
            symbol_prefix=args.prefix,
            include_dsp=args.include_dsp,
            banner=args.banner,
        )
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    try:
        model = lof.load_model(args.model)
    except OSError as exc:
        return _fail(EXIT_INPUT, str(exc))
    except InputError as exc:
        return _fail(EXIT_INPUT, f"model file {args.model}: {exc}")
    dsp_cfg = None
    if args.include_dsp:
        if args.config is None:
            return _fail(EXIT_CONFIG, "--include-dsp requires --config")
        try:
            dsp_cfg = _load_pipeline_config(args.config).dsp
        except (ConfigError, OSError) as exc:
            return _fail(EXIT_CONFIG, str(exc))
    try:
        sources = codegen.emit_c_model(model, dsp_cfg, opts)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / f"{sources.basename}.c").write_text(sources.source, encoding="utf-8")
    (out_dir / f"{sources.basename}.h").write_text(sources.header, encoding="utf-8")
    manifest = codegen.emit_manifest(model, opts, dsp_cfg)
    (out_dir / f"{opts.symbol_prefix}_manifest.txt").write_text(
        manifest, encoding="utf-8"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamlof",
        description="Streaming anomaly detection toolkit: replay, bench, "
        "synth data, and C code emission.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stream", help="replay a CSV through the pipeline")
    p.add_argument("--input", required=True, help="input CSV (t, ch1..chC, ...)")
    p.add_argument("--config", default=None, help="pipeline config JSON")
    p.add_argument("--out", required=True, help="output trace CSV")
    p.add_argument("--seed", type=int, default=None, help="reservoir RNG seed")
    p.add_argument("--save-model", default=None, help="serialize the final model")
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("bench", help="train/score scaling benchmark")
    p.add_argument("--sizes", default="25,50,100,200", help="reservoir sizes a,b,c")
    p.add_argument("--reps", type=int, default=9, help="repetitions per size")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="write JSON report here")
    p.add_argument(
        "--backend",
        choices=["auto", "numpy", "numba", "both"],
        default="auto",
        help="kernel backend to time ('both' compares all available)",
    )
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("synth", help="generate synthetic multi-regime data")
    p.add_argument("--profile", default="fan", help="generator profile name")
    p.add_argument("--duration", type=float, default=60.0, help="sweep seconds")
    p.add_argument("--rate", type=float, default=100.0, help="sample rate Hz")
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument(
        "--enroll",
        type=int,
        action="append",
        default=None,
        help="prepend an enrollment segment for this regime index "
        "(repeatable; adds train/detect control directives)",
    )
    p.add_argument(
        "--enroll-duration",
        type=float,
        default=12.0,
        help="seconds per enrollment segment",
    )
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("emit", help="generate C code from a model file")
    p.add_argument("--model", required=True, help="serialized model path")
    p.add_argument("--prefix", default="anomaly", help="C symbol prefix")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--include-dsp", action="store_true")
    p.add_argument("--config", default=None, help="config JSON (for --include-dsp)")
    p.add_argument("--banner", default="", help="comment banner for generated files")
    p.set_defaults(func=cmd_emit)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(EXIT_CONFIG, str(exc))
    except StreamLofError as exc:
        return _fail(EXIT_INPUT, str(exc))


if __name__ == "__main__":
    sys.exit(main())
