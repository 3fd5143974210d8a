"""Command-line experiment runner.

    nfdof eig <config.json> [--out DIR] [--dump-matrix]
    nfdof spectrum <config.json> [--out DIR]
    nfdof sweep <config.json> [--out DIR]
    nfdof validate <config.json>

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import math
import os
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .channel import ChannelModel, build_channel_matrix
from .config import ConfigError, ExperimentConfig, load_config
from .dof import count_dominant, dof_hole_fraction, dof_modular, dof_region, dof_vs_rmin
from .geometry import (
    ApertureRegion,
    DegenerateApertureError,
    Direction,
    ReceiveArray,
    Segment,
    extreme_distances,
    sample_aperture,
    sample_receive_array,
)
from .io import write_csv, write_json
from .spectral import convolve_sinc, g0_spectrum, gram_eigenvalues, measured_bandwidth

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _thread_limits():
    """Cap BLAS pools at NFDOF_NUM_THREADS (the compiled kernels read it themselves).

    Pools are only ever shrunk: OpenBLAS sizes its buffers at load time and
    crashes if asked for more threads than it started with.
    """
    if not os.environ.get("NFDOF_NUM_THREADS"):
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_info, threadpool_limits

    pools = [p["num_threads"] for p in threadpool_info() if p["user_api"] == "blas"]
    if not pools:
        return contextlib.nullcontext()
    return threadpool_limits(min(kernels.num_threads(), min(pools)), user_api="blas")


def _eigenpipeline(cfg: ExperimentConfig, region: ApertureRegion, array: ReceiveArray):
    aperture = sample_aperture(region, cfg.spacing, cfg.wavelength)
    samples = sample_receive_array(array)
    H = build_channel_matrix(aperture, samples, ChannelModel(cfg.model, cfg.wavelength))
    return gram_eigenvalues(H), aperture, samples, H


def _dump_matrix(path: Path, H, cfg: ExperimentConfig):
    K, M = H.shape
    e = H.entries
    rows = ((k, m, e[k, m].real, e[k, m].imag) for k in range(K) for m in range(M))
    write_csv(path, ["row", "col", "real", "imag"], rows, {"config_sha256": cfg.config_hash, "rows": K, "cols": M})


def _meta(cfg: ExperimentConfig) -> dict:
    return {"config_sha256": cfg.config_hash, "nfdof_version": __version__}


def run_eig(cfg: ExperimentConfig, out: Path, dump_matrix: bool = False) -> dict:
    """Sample, build the channel, count dominant eigenvalues, write the bundle."""
    t0 = time.perf_counter()
    spectrum, aperture, samples, H = _eigenpipeline(cfg, cfg.region, cfg.array)
    out.mkdir(parents=True, exist_ok=True)
    if dump_matrix:
        _dump_matrix(out / "channel.csv", H, cfg)
    dominant = count_dominant(spectrum, cfg.epsilon)
    a = cfg.array
    pred = dof_region(cfg.region, a.direction, a.r_min, a.r_max, cfg.wavelength)

    spectrum.to_csv(out / "eigen.csv", _meta(cfg))
    record = dict(pred.to_record(), dominant=dominant.to_record(), config_sha256=cfg.config_hash)
    write_json(out / "prediction.json", record)
    meta = {
        "command": "eig",
        "config_sha256": cfg.config_hash,
        "runtime_s": time.perf_counter() - t0,
        "tx_samples": len(aperture),
        "rx_samples": len(samples),
        "model": cfg.model,
        "backend": kernels.BACKEND,
        "nfdof_version": __version__,
    }
    write_json(out / "run_metadata.json", meta)
    return {"prediction": pred, "dominant": dominant, "spectrum": spectrum}


def run_spectrum(cfg: ExperimentConfig, out: Path) -> dict:
    """Histogram, sinc convolution and half-level bandwidth; per-module superposition check."""
    t0 = time.perf_counter()
    aperture = sample_aperture(cfg.region, cfg.spacing, cfg.wavelength)
    a = cfg.array
    ext = extreme_distances(cfg.region, a.direction)
    profile = g0_spectrum(aperture, a, cfg.wavelength, extremes=ext, dxi=cfg.dxi, margin=cfg.margin)
    profile = convolve_sinc(profile)
    width = measured_bandwidth(profile, cfg.level)
    pred = dof_region(cfg.region, a.direction, a.r_min, a.r_max, cfg.wavelength)

    summary = {
        "config_sha256": cfg.config_hash,
        "omega": list(profile.omega),
        "omega_width": profile.omega_width,
        "measured_bandwidth": width,
        "level": cfg.level,
        "prediction": pred.to_record(),
    }
    if len(cfg.region.modules) > 1:
        total = np.zeros_like(profile.g)
        for n in range(len(cfg.region.modules)):
            part = g0_spectrum(aperture.module(n), a, cfg.wavelength, xi_grid=profile.xi)
            total += convolve_sinc(replace(part, omega=profile.omega)).g
        scale = max(np.abs(profile.g).max(), 1e-300)
        summary["superposition_residual"] = float(np.abs(total - profile.g).max() / scale)

    out.mkdir(parents=True, exist_ok=True)
    profile.to_csv(out / "spectrum.csv", _meta(cfg))
    write_json(out / "spectrum_summary.json", summary)
    write_json(
        out / "run_metadata.json",
        {
            "command": "spectrum",
            "config_sha256": cfg.config_hash,
            "runtime_s": time.perf_counter() - t0,
            "tx_samples": len(aperture),
            "bins": len(profile.xi),
            "backend": kernels.BACKEND,
            "nfdof_version": __version__,
        },
    )
    return {"profile": profile, "bandwidth": width, "summary": summary}


def _symmetric_segments(inner: float, outer: float) -> ApertureRegion:
    if inner == 0:
        return ApertureRegion.single(Segment.along_x(-outer, outer))
    return ApertureRegion.from_modules([Segment.along_x(-outer, -inner)], [Segment.along_x(inner, outer)])


def sweep_points(cfg: ExperimentConfig):
    """Yield ``(value, region, array, prediction)`` for every sweep value."""
    sw, lam, a = cfg.sweep, cfg.wavelength, cfg.array
    name = sw["name"]
    for v in sw["values"]:
        if name == "r_min":
            L = sw.get("array_length", (a.r_max - a.r_min) / lam) * lam
            array = replace(a, r_min=v * lam, r_max=v * lam + L)
            ext = extreme_distances(cfg.region, a.direction)
            yield v, cfg.region, array, dof_vs_rmin(ext.p_min, ext.p_max, L, v * lam, lam)
        elif name == "gap_offset":
            L = sw["module_length"] * lam
            region = _symmetric_segments(v * lam, v * lam + L)
            per = extreme_distances(region, a.direction, per_module=True)
            yield v, region, a, dof_modular(per, a.r_min, a.r_max, lam).value
        elif name == "hole_fraction":
            L = sw["half_length"] * lam
            region = _symmetric_segments(v * L, L)
            yield v, region, a, dof_hole_fraction(L, v, a.r_min, a.r_max, lam).value
        else:
            d = Direction(math.radians(v), a.direction.theta)
            array = replace(a, direction=d)
            yield v, cfg.region, array, dof_region(cfg.region, d, a.r_min, a.r_max, lam).value


def run_sweep(cfg: ExperimentConfig, out: Path) -> dict:
    if not cfg.sweep:
        raise ConfigError("sweep", "the sweep command needs a 'sweep' section")
    rows, runtimes = [], []
    for v, region, array, pred in sweep_points(cfg):
        t0 = time.perf_counter()
        spectrum = _eigenpipeline(cfg, region, array)[0]
        rows.append((v, pred, count_dominant(spectrum, cfg.epsilon).count))
        runtimes.append(time.perf_counter() - t0)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "sweep.csv", [cfg.sweep["name"], "prediction", "dominant_count"], rows, _meta(cfg))
    write_json(
        out / "run_metadata.json",
        {
            "command": "sweep",
            "config_sha256": cfg.config_hash,
            "sweep": cfg.sweep["name"],
            "runtime_s": runtimes,
            "backend": kernels.BACKEND,
            "nfdof_version": __version__,
        },
    )
    return {"rows": rows}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nfdof", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"nfdof {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("eig", "eigenvalue spectrum, dominant count and closed-form prediction"),
        ("spectrum", "g0 histogram, sinc-convolved spectrum and measured bandwidth"),
        ("sweep", "prediction and dominant count over a parameter sweep"),
        ("validate", "check a configuration file and exit"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", type=Path)
        if name != "validate":
            p.add_argument("--out", type=Path, default=None, help="output directory (overrides the config)")
        if name == "eig":
            p.add_argument("--dump-matrix", action="store_true", help="also write the channel matrix as CSV")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        print(f"ok {cfg.config_hash}")
        return EXIT_OK

    out = args.out if args.out is not None else Path(cfg.outputs)
    try:
        with _thread_limits():
            return _dispatch(args, cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateApertureError as exc:
        print(f"config error: aperture: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FloatingPointError, ZeroDivisionError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def _dispatch(args, cfg: ExperimentConfig, out: Path) -> int:
    if args.command == "eig":
        res = run_eig(cfg, out, args.dump_matrix)
        d = res["dominant"]
        print(f"prediction {res['prediction'].value:.4f}  dominant {d.count} (epsilon={d.epsilon:g})")
    elif args.command == "spectrum":
        res = run_spectrum(cfg, out)
        lo, hi = res["profile"].omega
        print(f"omega [{lo:.4f}, {hi:.4f}]  measured bandwidth {res['bandwidth']:.4f}")
    else:
        res = run_sweep(cfg, out)
        for row in res["rows"]:
            print("  ".join(f"{v:g}" for v in row))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
