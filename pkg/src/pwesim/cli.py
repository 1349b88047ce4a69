"""Command-line front end: sweep/route/fit subcommands and flat-file output.

Config files are flat ``key = value`` text with JSON-style list syntax.
Unknown keys are hard errors so typos in experiment definitions fail loudly.
Floats are serialized with repr (shortest round-trip), which makes reruns
byte-identical.
"""

import argparse
import hashlib
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .experiment import ExperimentConfig, SceneParams, build_scene, run_sweep
from .routing import WavefrontSpec, get_routes
from .scene import SceneError, build_graph
from .statfit import (DegenerateDataError, DeviationDataset, fit_gamma_mle,
                      fit_rayleigh_mle, gamma_pdf, kld_empirical,
                      make_histogram, rayleigh_pdf)

EXIT_OK = 0
EXIT_BAD_CONFIG = 1
EXIT_SCENE_FAULT = 2
EXIT_IO = 3

_SCALAR_KEYS = {
    "n_trials": int,
    "seed": int,
    "n_bins": int,
    "room_length": float,
    "room_width": float,
    "room_height": float,
    "door_width": float,
    "door_height": float,
    "rx_spacing": float,
    "ris_margin": float,
}
_LIST_KEYS = {"d_r_values", "m_sides", "tx_position", "rx_position"}
_ALL_KEYS = set(_SCALAR_KEYS) | _LIST_KEYS


class ConfigError(Exception):
    pass


def parse_config_text(text):
    """Parse flat key = value config text into a raw dict."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown key '{key}'")
        if key in raw:
            raise ConfigError(f"duplicate key '{key}'")
        try:
            parsed = json.loads(value.strip())
        except json.JSONDecodeError:
            raise ConfigError(f"key '{key}': unparseable value {value.strip()!r}")
        raw[key] = parsed
    return raw


def config_from_raw(raw, seed_override=None):
    for key, value in raw.items():
        if key in _SCALAR_KEYS and not isinstance(value, (int, float)):
            raise ConfigError(f"key '{key}': expected a number")
        if key in _LIST_KEYS and not (isinstance(value, list)
                                      and all(isinstance(x, (int, float)) for x in value)):
            raise ConfigError(f"key '{key}': expected a list of numbers")
        if key in ("tx_position", "rx_position") and len(value) != 3:
            raise ConfigError(f"key '{key}': expected [x, y, z]")
    scene_kwargs = {}
    for key in ("room_length", "room_width", "room_height", "door_width",
                "door_height", "rx_spacing", "ris_margin"):
        if key in raw:
            scene_kwargs[key] = float(raw[key])
    for key in ("tx_position", "rx_position"):
        if key in raw:
            scene_kwargs[key] = tuple(float(x) for x in raw[key])
    kwargs = {"scene": SceneParams(**scene_kwargs)}
    if "d_r_values" in raw:
        kwargs["d_r_values"] = tuple(float(x) for x in raw["d_r_values"])
    if "m_sides" in raw:
        kwargs["m_sides"] = tuple(int(x) for x in raw["m_sides"])
    for key in ("n_trials", "seed", "n_bins"):
        if key in raw:
            kwargs[key] = int(raw[key])
    if seed_override is not None:
        kwargs["seed"] = int(seed_override)
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc))


def load_config(path, seed_override=None):
    if path is None:
        return config_from_raw({}, seed_override)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}")
    return config_from_raw(parse_config_text(text), seed_override)


def _fmt(x):
    """Shortest round-trip representation for CSV cells."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _sha256(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def cmd_sweep(args):
    try:
        config = load_config(args.config, args.seed)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    started = datetime.now(timezone.utc).isoformat()
    try:
        results = run_sweep(config, threads=args.threads if args.threads else 1)
    except SceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENE_FAULT
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        dev_rows = []
        fit_rows = []
        hist_rows = []
        for res in results:
            rep = res.report
            for trial, ant, phi, last_ris, path_len in res.records:
                dev_rows.append((rep.d_r, rep.m_side, trial, ant, phi, last_ris, path_len))
            fit_rows.append((rep.d_r, rep.m_side, rep.n_samples, rep.n_failures,
                             rep.gamma.k_hat, rep.gamma.theta_hat,
                             rep.rayleigh.sigma_hat, rep.kld_gamma, rep.kld_rayleigh,
                             rep.gamma.log_likelihood, rep.rayleigh.log_likelihood))
            hist = make_histogram(res.dataset, config.n_bins)
            for i in range(len(hist.counts)):
                hist_rows.append((rep.d_r, rep.m_side,
                                  float(hist.bin_edges[i]), float(hist.bin_edges[i + 1]),
                                  int(hist.counts[i]), float(hist.densities[i])))
        _write_csv(out / "deviations.csv",
                   ["d_r", "m_side", "trial", "antenna_index", "phi_deg",
                    "last_ris_id", "path_len"], dev_rows)
        _write_csv(out / "fits.csv",
                   ["d_r", "m_side", "n_samples", "n_failures", "k_hat", "theta_hat",
                    "sigma_hat", "kld_gamma", "kld_rayleigh", "loglik_gamma",
                    "loglik_rayleigh"], fit_rows)
        _write_csv(out / "histograms.csv",
                   ["d_r", "m_side", "bin_left", "bin_right", "count", "density"],
                   hist_rows)
        manifest = {
            "tool": "pwesim",
            "version": __version__,
            "seed": config.seed,
            "config": {
                "d_r_values": list(config.d_r_values),
                "m_sides": list(config.m_sides),
                "n_trials": config.n_trials,
                "n_bins": config.n_bins,
                "scene": vars(config.scene).copy(),
            },
            "started": started,
            "finished": datetime.now(timezone.utc).isoformat(),
            "files": {name: _sha256(out / name)
                      for name in ("deviations.csv", "fits.csv", "histograms.csv")},
        }
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n",
                                           encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_route(args):
    try:
        config = load_config(args.config, args.seed)
        spec_raw = json.loads(Path(args.spec).read_text(encoding="utf-8"))
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    d_r = config.d_r_values[0]
    m_side = config.m_sides[0]
    try:
        scene = build_scene(config.scene, d_r, m_side)
        graph = build_graph(scene)
    except SceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENE_FAULT
    if not isinstance(spec_raw, list) or len(spec_raw) != scene.rx.m:
        print(f"error: spec must list {scene.rx.m} DoA vectors", file=sys.stderr)
        return 1
    doas = [np.asarray(v, dtype=float) for v in spec_raw]
    if any(abs(np.linalg.norm(v) - 1.0) > 1e-6 for v in doas):
        print("error: spec contains non-unit DoA vectors", file=sys.stderr)
        return 2
    routes = get_routes(scene, graph, WavefrontSpec(doas=tuple(doas)))
    payload = {
        "d_r": d_r,
        "m": scene.rx.m,
        "routes": [
            {
                "antenna_index": r.antenna_index,
                "last_ris_id": r.last_ris_id,
                "path": list(r.path),
                "realized_doa": [float(c) for c in r.realized_doa],
                "phi_deg": r.phi_deg,
            }
            for r in routes.routes
        ],
        "failures": [{"antenna_index": i, "reason": why}
                     for i, why in routes.failures],
    }
    try:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n",
                                  encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_fit(args):
    import csv

    try:
        with open(args.data, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "phi_deg" not in reader.fieldnames:
                print("error: data file needs a phi_deg column", file=sys.stderr)
                return 1
            values = [float(row["phi_deg"]) for row in reader]
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if not values or any(v < 0 for v in values):
        print("error: phi_deg data must be nonempty and non-negative", file=sys.stderr)
        return 1
    data = DeviationDataset(samples=np.array(values), d_r=float("nan"), m=0)
    try:
        gamma = fit_gamma_mle(data)
        rayleigh = fit_rayleigh_mle(data)
    except (ValueError, DegenerateDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    payload = {
        "n": data.n,
        "gamma": {"k_hat": gamma.k_hat, "theta_hat": gamma.theta_hat,
                  "log_likelihood": gamma.log_likelihood},
        "rayleigh": {"sigma_hat": rayleigh.sigma_hat,
                     "log_likelihood": rayleigh.log_likelihood},
        "kld_gamma": kld_empirical(
            data, lambda x: gamma_pdf(x, gamma.k_hat, gamma.theta_hat), args.bins),
        "kld_rayleigh": kld_empirical(
            data, lambda x: rayleigh_pdf(x, rayleigh.sigma_hat), args.bins),
    }
    try:
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n",
                                  encoding="utf-8")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pwesim",
        description="Two-room programmable wireless environment wavefront "
                    "replication simulator and deviation statistics toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run the (d_r, M) Monte-Carlo sweep")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=0,
                   help="worker threads (0 = single-threaded)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("route", help="route one wavefront spec")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--spec", required=True, help="JSON file of M unit DoA vectors")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_route)

    p = sub.add_parser("fit", help="fit Gamma/Rayleigh models to phi data")
    p.add_argument("--data", required=True, help="CSV file with a phi_deg column")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--bins", type=int, default=10, help="histogram bins for KLD")
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
