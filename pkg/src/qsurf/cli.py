"""Batch command-line entry points.

Exit codes: 0 success, 1 domain error (bad data, bad level, missing
capability), 2 usage error. Every run echoes its resolved configuration to
stderr; all randomness is seeded (default seed 0), so rerunning a command
with the same flags reproduces its output files byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import QsurfError
from .inference import confidence_band
from .models import model_from_config, sample
from .quantiles import DeltaRange, quantile_surface, tukey_region_2d, psi_hat
from .samples import build_projection_cache, load_dataset
from .service import serve as _serve
from .verify import (
    default_threads,
    emit_report,
    run_study,
    study_config_from_config,
)


def _echo_config(name: str, cfg: dict):
    print(f"qsurf {name}: {json.dumps(cfg, sort_keys=True)}", file=sys.stderr)


def _write_json(path: str | None, doc: dict):
    text = json.dumps(doc, indent=1) + "\n"
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_model_config(spec: str) -> dict:
    if spec.lstrip().startswith("{"):
        return json.loads(spec)
    return json.loads(Path(spec).read_text(encoding="utf-8"))


def _parse_observer(raw: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in raw.split(",")])
    except ValueError:
        raise QsurfError(f"cannot parse observer {raw!r} as comma-separated reals")


def _build_cache(args):
    data = load_dataset(args.data)
    from .geometry import make_direction_grid

    grid = make_direction_grid(data.dims, args.directions)
    return build_projection_cache(data, grid)


def _cmd_surface(args) -> int:
    _echo_config("surface", {"data": args.data, "o": args.o, "alpha": args.alpha,
                             "directions": args.directions, "out": args.out})
    cache = _build_cache(args)
    surf = quantile_surface(cache, _parse_observer(args.o), args.alpha)
    _write_json(args.out, surf.to_document())
    return 0


def _cmd_band(args) -> int:
    _echo_config("band", {"data": args.data, "o": args.o, "alpha": args.alpha,
                          "directions": args.directions, "level": args.level,
                          "draws": args.draws, "seed": args.seed,
                          "bandwidth": args.bandwidth, "studentized": args.studentized,
                          "out": args.out})
    cache = _build_cache(args)
    band = confidence_band(
        cache, _parse_observer(args.o), args.alpha, args.level,
        args.draws, args.seed, args.bandwidth, args.studentized,
    )
    _write_json(args.out, band.to_document())
    return 0


def _cmd_tukey(args) -> int:
    _echo_config("tukey", {"data": args.data, "alpha": args.alpha,
                           "directions": args.directions, "out": args.out})
    cache = _build_cache(args)
    region = tukey_region_2d(cache, args.alpha)
    _write_json(args.out, {"alpha": region.alpha, "empty": region.is_empty,
                           "vertices": region.vertices.tolist()})
    return 0


def _cmd_psi(args) -> int:
    _echo_config("psi", {"data": args.data, "eps": args.eps,
                         "alpha_minus": args.alpha_minus, "alpha_plus": args.alpha_plus,
                         "directions": args.directions, "out": args.out})
    cache = _build_cache(args)
    delta = DeltaRange(args.alpha_minus, args.alpha_plus)
    value = psi_hat(cache, np.zeros(cache.grid.dims), args.eps, delta)
    _write_json(args.out, {"eps": args.eps, "alpha_minus": args.alpha_minus,
                           "alpha_plus": args.alpha_plus, "psi": value})
    return 0


def _cmd_simulate(args) -> int:
    model_cfg = _load_model_config(args.model)
    _echo_config("simulate", {"model": model_cfg, "n": args.n, "seed": args.seed,
                              "out": args.out})
    model = model_from_config(model_cfg)
    data = sample(model, args.n, args.seed)
    lines = [",".join(repr(float(v)) for v in row) for row in data.points]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def _cmd_verify(args) -> int:
    cfg_doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if args.study:
        cfg_doc["study"] = args.study
    if args.threads is not None:
        cfg_doc["threads"] = args.threads
    _echo_config("verify", cfg_doc)
    cfg = study_config_from_config(cfg_doc)
    report = run_study(cfg)
    emit_report(report, args.out, args.format)
    status = "PASS" if report.passed else "FAIL"
    print(f"study {cfg.study}: {status} (report: {args.out})", file=sys.stderr)
    for note in report.notes:
        print(f"  note: {note}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    _echo_config("serve", {"port": args.port, "data": args.data,
                           "directions": args.directions})
    _serve(args.port, args.data, args.directions)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsurf", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add_data_flags(sp, directions_default=360):
        sp.add_argument("--data", required=True, help="csv or jsonl point file")
        sp.add_argument("--directions", type=int, default=directions_default,
                        help="direction grid size")

    sp = sub.add_parser("surface", help="quantile surface seen from an observer")
    add_data_flags(sp)
    sp.add_argument("--o", required=True, help="observer, comma-separated reals")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--out", default=None, help="output json (default stdout)")
    sp.set_defaults(func=_cmd_surface)

    sp = sub.add_parser("band", help="joint confidence band around a surface")
    add_data_flags(sp)
    sp.add_argument("--o", required=True)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--level", type=float, default=0.95)
    sp.add_argument("--draws", type=int, default=500)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--bandwidth", type=float, default=None)
    sp.add_argument("--studentized", action="store_true")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_band)

    sp = sub.add_parser("tukey", help="2-D Tukey region (possibly empty)")
    add_data_flags(sp)
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_tukey)

    sp = sub.add_parser("psi", help="minimal admissible band mass")
    add_data_flags(sp, directions_default=180)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--alpha-minus", type=float, default=0.6)
    sp.add_argument("--alpha-plus", type=float, default=0.9)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_psi)

    sp = sub.add_parser("simulate", help="draw a seeded sample from a model config")
    sp.add_argument("--model", required=True, help="model config json (path or inline)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("verify", help="run a replication study and emit its report")
    sp.add_argument("--study", choices=["consistency", "lil", "clt", "bk", "psi",
                                        "coverage"], default=None)
    sp.add_argument("--config", required=True, help="study config json")
    sp.add_argument("--out", required=True)
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--threads", type=int, default=None,
                    help=f"worker processes (default {default_threads()})")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("serve", help="serve the wire API for one dataset")
    sp.add_argument("--port", type=int, default=8008)
    sp.add_argument("--data", required=True)
    sp.add_argument("--directions", type=int, default=360)
    sp.set_defaults(func=_cmd_serve)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (QsurfError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
