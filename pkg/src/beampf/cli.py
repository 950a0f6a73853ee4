"""Command-line interface.

Subcommands:
  enhance   process one multichannel WAV into an enhanced mono WAV
  batch     process a YAML manifest of utterances
  simulate  write a synthetic scene (WAV + ground-truth sidecar)

Exit codes: 0 success, 1 any utterance failed, 2 configuration error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import audio_io, pipeline, simulate
from .geometry import ArrayGeometry, DoA
from .pipeline import ConfigError, PipelineConfig


def _add_override_flags(parser):
    parser.add_argument("--config", type=Path, help="YAML pipeline config")
    parser.add_argument("--mu", type=float, help="postfilter overestimation factor (0 disables)")
    parser.add_argument("--g-min", type=float, help="postfilter gain floor")
    parser.add_argument("--forgetting", type=float, help="coherence forgetting factor")
    parser.add_argument("--loading", type=float, help="MVDR diagonal loading")
    parser.add_argument(
        "--doa",
        nargs=2,
        type=float,
        metavar=("AZ_DEG", "EL_DEG"),
        help="fixed look direction instead of SRP-PHAT",
    )
    parser.add_argument(
        "--noise-context",
        nargs="+",
        type=float,
        metavar="SECONDS",
        help="noise-only head duration, or an explicit START END interval",
    )
    parser.add_argument(
        "--mask",
        type=str,
        help="comma-separated 0/1 per channel, 0 = failing microphone",
    )
    parser.add_argument(
        "--no-beamformer",
        action="store_true",
        help="bypass the beamformer (forward the reference channel)",
    )
    parser.add_argument(
        "--export",
        action="append",
        choices=pipeline.EXPORT_KINDS,
        default=None,
        help="write this matrix next to the output (repeatable)",
    )
    parser.add_argument("--export-dir", type=Path, help="directory for exported matrices")
    parser.add_argument("--json", action="store_true", help="print the report as JSON")


def _apply_overrides(config, args):
    if args.mu is not None:
        config.mu = args.mu
        config.postfilter_enabled = args.mu > 0
    if args.g_min is not None:
        config.g_min = args.g_min
    if args.forgetting is not None:
        config.forgetting = args.forgetting
    if args.loading is not None:
        config.diagonal_loading = args.loading
    if args.doa is not None:
        config.doa_mode = "fixed"
        config.doa_azimuth_deg, config.doa_elevation_deg = args.doa
    if args.noise_context is not None:
        if len(args.noise_context) == 1:
            config.noise_context = args.noise_context[0]
        elif len(args.noise_context) == 2:
            config.noise_context = tuple(args.noise_context)
        else:
            raise ConfigError("--noise-context takes one duration or START END")
    if args.mask is not None:
        try:
            config.channel_mask = [int(v) for v in args.mask.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --mask value {args.mask!r}") from exc
    if args.no_beamformer:
        config.beamformer_enabled = False
    if args.export is not None:
        config.exports = tuple(dict.fromkeys(args.export))
    if args.export_dir is not None:
        config.export_dir = str(args.export_dir)
    return config


def _load_config(args):
    if args.config is not None:
        config = PipelineConfig.from_yaml(args.config)
    else:
        config = PipelineConfig()
    return _apply_overrides(config, args)


def cmd_enhance(args):
    config = _load_config(args)
    try:
        report = pipeline.run(config, args.input, args.output)
    except ConfigError:
        raise
    except Exception as exc:
        print(f"FAILED {args.input}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(pipeline.format_report(report, as_json=args.json))
    return 0


def cmd_batch(args):
    config = _load_config(args)
    entries = pipeline.load_manifest(args.manifest)
    reports = pipeline.run_batch(config, entries, jobs=args.jobs)
    print(pipeline.format_report(reports, as_json=args.json))
    failed = any(r.get("status") != "ok" for r in reports)
    return 1 if failed else 0


def cmd_simulate(args):
    positions = None
    if args.config is not None:
        config = PipelineConfig.from_yaml(args.config)
        if config.geometry is not None:
            positions = config.geometry
    if positions is None:
        raise ConfigError("simulate needs a config with an array geometry")

    spec = simulate.SceneSpec(
        geometry=positions,
        doa=DoA.from_degrees(args.doa[0], args.doa[1]),
        duration=args.duration,
        sample_rate=args.sample_rate,
        diffuse_to_direct_db=args.diffuse_db,
        sensor_noise_db=args.sensor_db,
        seed=args.seed,
    )
    signal, truth = simulate.mix_scene(spec)
    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    audio_io.write_wav(out, signal, int(args.sample_rate))
    sidecar = out.with_suffix("").as_posix() + ".cdr_true.csv"
    audio_io.write_text_matrix(sidecar, np.atleast_2d(truth.cdr_true), "cdr_true")
    print(f"{out} ({signal.shape[0]} samples x {signal.shape[1]} ch), ground truth {sidecar}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="beampf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_enh = sub.add_parser("enhance", help="enhance one multichannel WAV")
    p_enh.add_argument("input", type=Path)
    p_enh.add_argument("output", type=Path)
    _add_override_flags(p_enh)
    p_enh.set_defaults(func=cmd_enhance)

    p_batch = sub.add_parser("batch", help="process a YAML manifest")
    p_batch.add_argument("manifest", type=Path)
    p_batch.add_argument("--jobs", type=int, default=1, help="concurrent utterances")
    _add_override_flags(p_batch)
    p_batch.set_defaults(func=cmd_batch)

    p_sim = sub.add_parser("simulate", help="generate a synthetic scene")
    p_sim.add_argument("output", type=Path)
    p_sim.add_argument("--config", type=Path, help="YAML config providing the geometry")
    p_sim.add_argument("--doa", nargs=2, type=float, default=(90.0, 90.0), metavar=("AZ", "EL"))
    p_sim.add_argument("--duration", type=float, default=2.0)
    p_sim.add_argument("--sample-rate", type=float, default=16000.0)
    p_sim.add_argument("--diffuse-db", type=float, default=0.0, help="diffuse-to-direct power in dB")
    p_sim.add_argument("--sensor-db", type=float, default=None, help="sensor noise relative to direct in dB")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
