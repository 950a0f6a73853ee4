"""Batch front-end runner: WAV in -> STFT -> (DoA) -> MVDR -> CDR postfilter -> WAV out.

Configuration lives in a YAML file (see :class:`PipelineConfig`); CLI flags
override file values. Every run is deterministic given its config and inputs.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import audio_io, cdr
from .enhancer import CoherenceEnhancer
from .geometry import ArrayGeometry, DoA
from .localization import DEFAULT_FREQ_RANGE, DoAGrid
from .spectral import DEFAULT_FORGETTING


class ConfigError(ValueError):
    """Bad configuration or manifest; maps to CLI exit code 2."""


EXPORT_KINDS = ("beamformed", "enhanced", "diffuseness", "gain", "srp")
_DB_FLOOR = 1e-15


@dataclass
class PipelineConfig:
    """Resolved pipeline settings.

    doa_mode is "srp-phat" or "fixed"; fixed mode uses doa_azimuth_deg /
    doa_elevation_deg. noise_context is seconds from the file start, or a
    (start_s, end_s) interval.
    """

    geometry: ArrayGeometry = None
    sample_rate: float = 16000.0
    frame_len: int = 1024
    forgetting: float = DEFAULT_FORGETTING
    mu: float = 1.3
    g_min: float = 0.1
    postfilter_enabled: bool = True
    beamformer_enabled: bool = True
    reference_channel: int = 0
    diagonal_loading: float = 1e-3
    cdr_max: float = cdr.CDR_MAX
    noise_context: object = 0.5
    doa_mode: str = "srp-phat"
    doa_azimuth_deg: float = 90.0
    doa_elevation_deg: float = 90.0
    grid_azimuth_step_deg: float = 5.0
    grid_elevation_deg: float = 90.0
    srp_freq_range: tuple = DEFAULT_FREQ_RANGE
    channel_mask: Optional[list] = None
    exports: tuple = ()
    export_dir: Optional[str] = None

    def __post_init__(self):
        if self.geometry is not None and not isinstance(self.geometry, ArrayGeometry):
            try:
                self.geometry = ArrayGeometry(np.asarray(self.geometry, dtype=float))
            except (ValueError, TypeError) as exc:
                raise ConfigError(f"bad geometry: {exc}") from exc
        if self.doa_mode not in ("srp-phat", "fixed"):
            raise ConfigError(f"doa mode must be 'srp-phat' or 'fixed', got {self.doa_mode!r}")
        for kind in self.exports:
            if kind not in EXPORT_KINDS:
                raise ConfigError(f"unknown export {kind!r}; choose from {EXPORT_KINDS}")

    @classmethod
    def from_dict(cls, raw):
        """Build from the nested YAML layout; unknown keys are rejected."""
        raw = dict(raw or {})
        kwargs = {}

        geom = raw.pop("geometry", None)
        if geom is not None:
            if isinstance(geom, dict):
                positions = geom.get("positions")
                if positions is None:
                    raise ConfigError("geometry section needs a 'positions' list")
                try:
                    kwargs["geometry"] = ArrayGeometry(
                        np.asarray(positions, dtype=float),
                        float(geom.get("speed_of_sound", 343.0)),
                    )
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"bad geometry: {exc}") from exc
            else:
                kwargs["geometry"] = geom

        for key in ("sample_rate", "frame_len", "forgetting", "cdr_max", "noise_context", "channel_mask"):
            if key in raw:
                kwargs[key] = raw.pop(key)

        pf = raw.pop("postfilter", {})
        if pf:
            kwargs["mu"] = float(pf.get("mu", 1.3))
            kwargs["g_min"] = float(pf.get("g_min", 0.1))
            kwargs["postfilter_enabled"] = bool(pf.get("enabled", True))
        bf = raw.pop("beamformer", {})
        if bf:
            kwargs["beamformer_enabled"] = bool(bf.get("enabled", True))
            kwargs["diagonal_loading"] = float(bf.get("diagonal_loading", 1e-3))
            kwargs["reference_channel"] = int(bf.get("reference_channel", 0))

        doa = raw.pop("doa", {})
        if doa:
            kwargs["doa_mode"] = doa.get("mode", "srp-phat")
            kwargs["doa_azimuth_deg"] = float(doa.get("azimuth_deg", 90.0))
            kwargs["doa_elevation_deg"] = float(doa.get("elevation_deg", 90.0))
            grid = doa.get("grid", {})
            kwargs["grid_azimuth_step_deg"] = float(grid.get("azimuth_step_deg", 5.0))
            kwargs["grid_elevation_deg"] = float(grid.get("elevation_deg", 90.0))
            if "freq_range" in doa:
                lo, hi = doa["freq_range"]
                kwargs["srp_freq_range"] = (float(lo), float(hi))

        exports = raw.pop("exports", {})
        if exports:
            kwargs["export_dir"] = exports.get("directory")
            kwargs["exports"] = tuple(k for k in EXPORT_KINDS if exports.get(k, False))

        if raw:
            raise ConfigError(f"unknown config keys: {sorted(raw)}")
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_yaml(cls, path):
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def build_enhancer(self, noise_context=None, channel_mask=None):
        """CoherenceEnhancer for one utterance, with optional per-utterance overrides."""
        if self.geometry is None:
            raise ConfigError("config does not define an array geometry")
        doa = None
        if self.doa_mode == "fixed":
            doa = DoA.from_degrees(self.doa_azimuth_deg, self.doa_elevation_deg)
        grid = DoAGrid.planar(self.grid_azimuth_step_deg, self.grid_elevation_deg)
        return CoherenceEnhancer(
            geometry=self.geometry,
            doa=doa,
            noise_context=noise_context if noise_context is not None else self.noise_context,
            frame_len=int(self.frame_len),
            sample_rate=float(self.sample_rate),
            forgetting=float(self.forgetting),
            mu=float(self.mu) if self.postfilter_enabled else 0.0,
            g_min=float(self.g_min),
            diagonal_loading=float(self.diagonal_loading),
            cdr_max=float(self.cdr_max),
            channel_mask=channel_mask if channel_mask is not None else self.channel_mask,
            localization_grid=grid,
            srp_freq_range=self.srp_freq_range,
            beamformer="mvdr" if self.beamformer_enabled else "passthrough",
            reference_channel=int(self.reference_channel),
        )


def _export_path(output_path, kind, export_dir):
    out = Path(output_path)
    directory = Path(export_dir) if export_dir else out.parent
    directory.mkdir(parents=True, exist_ok=True)
    return directory / f"{out.stem}.{kind}.csv"


def _db(spectrum):
    return 20.0 * np.log10(np.maximum(np.abs(spectrum), _DB_FLOOR))


def run(config, input_path, output_path, noise_context=None, channel_mask=None):
    """Enhance one utterance; returns a report dict.

    Raises ValueError on bad audio (wrong rate, too few channels) and
    ConfigError on configuration problems.
    """
    t_start = time.perf_counter()
    signal, rate = audio_io.read_wav(input_path)
    if rate != int(config.sample_rate):
        raise ValueError(
            f"{input_path}: sample rate {rate} does not match configured {int(config.sample_rate)}"
            " (no implicit resampling)"
        )
    if signal.shape[1] < 2:
        raise ValueError(f"{input_path}: need at least 2 channels, got {signal.shape[1]}")

    enhancer = config.build_enhancer(noise_context=noise_context, channel_mask=channel_mask)
    enhancer.fit(signal)
    result = enhancer.enhance(signal)
    Path(output_path).parent.mkdir(parents=True, exist_ok=True)
    audio_io.write_wav(output_path, result.signal, rate)

    for kind in config.exports:
        path = _export_path(output_path, kind, config.export_dir)
        if kind == "beamformed":
            audio_io.write_text_matrix(path, _db(result.beamformed), "beamformed_db")
        elif kind == "enhanced":
            audio_io.write_text_matrix(path, _db(result.enhanced_spectrum), "enhanced_db")
        elif kind == "diffuseness":
            audio_io.write_text_matrix(path, result.diffuseness, "diffuseness")
        elif kind == "gain":
            audio_io.write_text_matrix(path, result.gain, "gain")
        elif kind == "srp" and enhancer.srp_scores_ is not None:
            audio_io.write_text_matrix(path, enhancer.srp_scores_, "srp_pseudo_spectrum")

    a = enhancer.a_gamma_
    doa = enhancer.doa_
    report = {
        "input": str(input_path),
        "output": str(output_path),
        "samples": int(signal.shape[0]),
        "channels": int(signal.shape[1]),
        "frames": int(result.gain.shape[0]),
        "bins": int(result.gain.shape[1]),
        "doa_azimuth_deg": None if doa is None else round(doa.azimuth_deg, 3),
        "doa_elevation_deg": None if doa is None else round(doa.elevation_deg, 3),
        "a_gamma_min": float(np.min(a)),
        "a_gamma_median": float(np.median(a)),
        "a_gamma_max": float(np.max(a)),
        "timings_s": {k: round(v, 6) for k, v in result.timings.items()},
        "total_s": round(time.perf_counter() - t_start, 6),
    }
    return report


def load_manifest(path):
    """Utterance list from a YAML manifest: entries with input/output plus
    optional noise_context and channel_mask overrides."""
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read manifest {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse manifest {path}: {exc}") from exc
    if raw is None:
        return []
    if isinstance(raw, dict):
        raw = raw.get("utterances", [])
    if not isinstance(raw, list):
        raise ConfigError(f"manifest {path} must be a list of utterances")
    entries = []
    for i, entry in enumerate(raw):
        if not isinstance(entry, dict) or "input" not in entry or "output" not in entry:
            raise ConfigError(f"manifest entry {i} needs 'input' and 'output' keys")
        extra = set(entry) - {"input", "output", "noise_context", "channel_mask"}
        if extra:
            raise ConfigError(f"manifest entry {i} has unknown keys: {sorted(extra)}")
        entries.append(entry)
    return entries


def run_batch(config, entries, jobs=1):
    """Process utterances independently; one failure does not abort the rest.

    Returns a list of per-utterance reports in manifest order; failed entries
    carry status "error" and the message.
    """

    def process(entry):
        try:
            report = run(
                config,
                entry["input"],
                entry["output"],
                noise_context=entry.get("noise_context"),
                channel_mask=entry.get("channel_mask"),
            )
            report["status"] = "ok"
            return report
        except Exception as exc:  # per-utterance isolation is the contract
            return {
                "input": str(entry.get("input")),
                "output": str(entry.get("output")),
                "status": "error",
                "error": f"{type(exc).__name__}: {exc}",
            }

    if jobs > 1 and len(entries) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(process, entries))
    return [process(e) for e in entries]


def format_report(reports, as_json=False):
    if isinstance(reports, dict):
        reports = [reports]
    if as_json:
        return json.dumps(reports, indent=2)
    lines = []
    for r in reports:
        if r.get("status", "ok") != "ok":
            lines.append(f"FAILED {r['input']}: {r['error']}")
            continue
        doa = (
            f"az={r['doa_azimuth_deg']} el={r['doa_elevation_deg']}"
            if r.get("doa_azimuth_deg") is not None
            else "passthrough"
        )
        lines.append(
            f"{r['input']} -> {r['output']} | frames={r['frames']} doa: {doa} | "
            f"a_gamma median={r['a_gamma_median']:.4f} | total {r['total_s']:.3f}s"
        )
    return "\n".join(lines)
