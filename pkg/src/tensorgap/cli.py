"""Command-line front end.

Each command reads a flat ``key = value`` config file (``#`` starts a
comment), applies flag overrides, and writes its outputs plus a
``manifest`` into ``out_dir``.  The manifest is itself a valid config file,
so ``tensorgap <command> --config <out_dir>/manifest`` reproduces a run.

    tensorgap norm --input T.symt --eps 0.01
    tensorgap gen --p 10 --n 2000 --a 1 --q 0.2 --out runs/gen
    tensorgap cumulant --input runs/gen/samples.csv --order 3
    tensorgap detect --config detect.cfg --reps 200
    tensorgap estgap --p 3 --n 20000 --a 3
    tensorgap scaling --n_grid 1000,4000,16000,64000 --reps 50
    tensorgap lowdeg --a 1 --C_d 1 --n 8 --d 3 --p 4 --M 2
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import __version__
from .cumulant import khat, read_samples, write_samples
from .harness import (
    DetectionReport,
    GapReport,
    LowDegreeBoundParams,
    ScalingReport,
    detection_experiment,
    estimate_error_distribution,
    lowdeg_bound_sum,
    scaling_sweep,
)
from .planted import H0, H1, PlantedConfig, sample_dataset, twopoint_from_bernoulli
from .specnorm import PowerIterConfig, distortion_probe, oracle_net, ORACLE_MAX_DIM
from .symtensor import read_symtensor, write_symtensor

__all__ = ["main", "run", "emit_report", "load_config", "ConfigError", "COMMANDS"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


def fmt(x) -> str:
    """17-significant-digit decimal for floats, plain text otherwise."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return str(x)


# ---------------------------------------------------------------------------
# config schema


def _u64(s) -> int:
    v = int(s)
    if not 0 <= v < 1 << 64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return v


def _int_list(s) -> tuple:
    if isinstance(s, (list, tuple)):
        return tuple(int(v) for v in s)
    return tuple(int(v) for v in str(s).split(",") if v.strip())


def _float_list(s) -> tuple:
    if isinstance(s, (list, tuple)):
        return tuple(float(v) for v in s)
    return tuple(float(v) for v in str(s).split(",") if v.strip())


def _hypothesis(s) -> str:
    s = str(s).upper()
    if s not in (H0, H1):
        raise ValueError("must be H0 or H1")
    return s


def _statistic(s) -> str:
    if s not in ("unfold", "power"):
        raise ValueError("must be 'unfold' or 'power'")
    return s


@dataclass(frozen=True)
class Key:
    type: Callable[[Any], Any]
    default: Any
    help: str = ""


_COMMON = {
    "seed": Key(_u64, 0, "64-bit master seed"),
    "out_dir": Key(str, None, "output directory (default runs/<command>)"),
}
_PLANTED = {
    "p": Key(int, 3, "dimension"),
    "n": Key(int, 2000, "sample count"),
    "a": Key(float, 1.0, "spike strength"),
    "d": Key(int, 3, "cumulant order (3 or 4)"),
    "q": Key(float, 0.2, "Bernoulli parameter of the standardised two-point spike law"),
}
_POWER = {
    "starts": Key(int, 0, "power-iteration restarts (0 = 8p)"),
    "max_iters": Key(int, 5000, "power-iteration iteration cap"),
    "tol": Key(float, 1e-10, "power-iteration tolerance"),
}

COMMANDS: dict[str, dict[str, Key]] = {
    "norm": {
        **_COMMON,
        "input": Key(str, None, "SYMTENSOR file"),
        "eps": Key(float, 0.0, "net-oracle spacing (0 disables; needs p <= 4)"),
        **_POWER,
    },
    "gen": {
        **_COMMON,
        **_PLANTED,
        "hypothesis": Key(_hypothesis, H1, "H0 or H1"),
        "rep": Key(int, 0, "rep index selecting the substream"),
    },
    "cumulant": {
        **_COMMON,
        "input": Key(str, None, "SampleSet CSV"),
        "order": Key(int, 3, "cumulant order (3 or 4)"),
    },
    "detect": {
        **_COMMON,
        **_PLANTED,
        "reps": Key(int, 200, "reps per hypothesis"),
        "statistic": Key(_statistic, "unfold", "unfold or power"),
        "tau_grid": Key(_float_list, (), "comma-separated thresholds (empty = 101 pooled points)"),
        **_POWER,
    },
    "estgap": {
        **_COMMON,
        **_PLANTED,
        "reps": Key(int, 100, "reps"),
        "d_est_level": Key(float, 0.9, "quantile used as the estimation error"),
        **_POWER,
    },
    "scaling": {
        **_COMMON,
        **_PLANTED,
        "n_grid": Key(_int_list, (1000, 4000, 16000, 64000), "comma-separated increasing sample sizes"),
        "reps": Key(int, 50, "reps per sample size"),
    },
    "lowdeg": {
        **_COMMON,
        "a": Key(float, 1.0, "spike strength"),
        "n": Key(float, 8.0, "sample count"),
        "p": Key(float, 4.0, "dimension"),
        "d": Key(int, 3, "order"),
        "C_d": Key(float, 1.0, "model constant"),
        "M": Key(int, 2, "degree cap"),
        "c0": Key(float, 9.0, "polylog exponent"),
    },
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {body!r}")
        key, value = (s.strip() for s in body.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, str(path))


def resolve_config(command: str, file_values: dict | None = None, overrides: dict | None = None) -> dict:
    """Defaults, then file values, then overrides; every key typed and validated."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    schema = COMMANDS[command]
    merged = {k: v.default for k, v in schema.items()}
    for source in (file_values or {}, overrides or {}):
        for key, raw in source.items():
            if key not in schema:
                raise ConfigError(f"unknown config key {key!r} for command {command!r}")
            if raw is None:
                continue
            try:
                merged[key] = schema[key].type(raw)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"invalid value for key {key!r}: {raw!r} ({exc})") from None
    if merged["out_dir"] is None:
        merged["out_dir"] = os.path.join("runs", command)
    return merged


# ---------------------------------------------------------------------------
# output


def _write_csv(path: Path, header, rows) -> Path:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_manifest(out_dir, command: str, config: dict) -> Path:
    path = Path(out_dir) / "manifest"
    lines = [f"# tool: tensorgap {__version__}", f"# command: {command}"]
    for key in sorted(config):
        if key == "out_dir":
            continue
        v = config[key]
        if isinstance(v, tuple):
            v = ",".join(fmt(x) for x in v)
        lines.append(f"{key} = {fmt(v)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _summary_rows(report) -> tuple[list, list]:
    header = ["metric", "level", "value"]
    if isinstance(report, GapReport):
        rows = [("est_lower_quantile", lv, report.est_lower_quantiles[lv]) for lv in sorted(report.est_lower_quantiles)]
        rows += [("est_upper_quantile", lv, report.est_upper_quantiles[lv]) for lv in sorted(report.est_upper_quantiles)]
        rows += [
            ("d_est", report.d_est_level, report.d_est),
            ("d_det_proxy", "", report.d_det_proxy),
            ("bound", "", report.bound),
            ("reps", "", report.reps),
        ]
        return header, rows
    if isinstance(report, DetectionReport):
        rows = [("type1", t, e) for t, e in zip(report.tau_grid, report.type1)]
        rows += [("type2", t, e) for t, e in zip(report.tau_grid, report.type2)]
        rows += [("best_sum", "", report.best_sum), ("best_tau", "", report.best_tau)]
        rows += [("statistic", "", report.statistic)]
        return header, rows
    if isinstance(report, ScalingReport):
        rows = [("median_err_upper", int(n), m) for n, m in zip(report.n_values, report.medians)]
        rows += [("slope", "", report.slope), ("intercept", "", report.intercept), ("regime_note", "", report.note)]
        return header, rows
    raise TypeError(f"cannot emit {type(report).__name__}")


def _raw_rows(report) -> tuple[list, list]:
    if isinstance(report, GapReport):
        return ["rep", "err_lower", "err_upper"], [
            (r, lo, up) for r, (lo, up) in enumerate(zip(report.err_lower, report.err_upper))
        ]
    if isinstance(report, DetectionReport):
        rows = []
        for r, (s0, s1) in enumerate(zip(report.stats_h0, report.stats_h1)):
            rows += [(r, H0, s0), (r, H1, s1)]
        return ["rep", "hypothesis", "statistic"], rows
    if isinstance(report, ScalingReport):
        rows = [(int(n), r, e) for n, errs in zip(report.n_values, report.errors) for r, e in enumerate(errs)]
        return ["n", "rep", "err_upper"], rows
    raise TypeError(f"cannot emit {type(report).__name__}")


def emit_report(report, out_dir, config: dict | None = None, command: str | None = None) -> list[Path]:
    """Write ``raw.csv``, ``summary.csv`` and ``manifest`` for a report."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [_write_csv(out / "raw.csv", *_raw_rows(report)), _write_csv(out / "summary.csv", *_summary_rows(report))]
    if config is None:
        config = {}
    if command is None:
        command = {GapReport: "estgap", DetectionReport: "detect", ScalingReport: "scaling"}[type(report)]
    paths.append(write_manifest(out, command, config))
    return paths


# ---------------------------------------------------------------------------
# commands


@dataclass
class RunResult:
    command: str
    paths: list[Path]
    summary: dict = field(default_factory=dict)
    report: Any = None


def _planted(cfg: dict) -> PlantedConfig:
    try:
        w = twopoint_from_bernoulli(cfg["q"])
    except ValueError as exc:
        raise ConfigError(f"invalid value for key 'q': {exc}") from None
    try:
        return PlantedConfig(p=cfg["p"], n=cfg["n"], a=cfg["a"], d=cfg["d"], w=w, seed=cfg["seed"])
    except ValueError as exc:
        raise ConfigError(f"invalid planted configuration: {exc}") from None


def _power(cfg: dict) -> PowerIterConfig:
    try:
        return PowerIterConfig(starts=cfg["starts"] or None, max_iters=cfg["max_iters"], tol=cfg["tol"])
    except ValueError as exc:
        raise ConfigError(f"invalid power-iteration setting: {exc}") from None


def _require(cfg: dict, key: str):
    if cfg.get(key) in (None, ""):
        raise ConfigError(f"missing required key {key!r}")
    return cfg[key]


def _reps(cfg: dict, minimum: int) -> int:
    if cfg["reps"] < minimum:
        raise ConfigError(f"invalid value for key 'reps': must be >= {minimum}")
    return cfg["reps"]


def _cmd_norm(cfg: dict, out: Path) -> RunResult:
    T = read_symtensor(_require(cfg, "input"))
    probe = distortion_probe(T, _power(cfg), cfg["seed"])
    summary = {
        "lower": probe.lower.value,
        "upper": probe.upper.value,
        "ratio": probe.ratio,
        "degenerate": probe.degenerate,
        "lower_converged": probe.lower.converged,
        "lower_iterations": probe.lower.iterations,
    }
    if cfg["eps"] > 0:
        if T.p > ORACLE_MAX_DIM:
            raise ConfigError(f"invalid value for key 'eps': net oracle needs p <= {ORACLE_MAX_DIM}, file has p={T.p}")
        v, b = oracle_net(T, cfg["eps"])
        summary["oracle"] = v
        summary["oracle_error_bound"] = b
    out.mkdir(parents=True, exist_ok=True)
    rows = [(k, "", v) for k, v in summary.items()]
    witness = probe.lower.witness if probe.lower.witness is not None else []
    rows += [("witness", i, float(x)) for i, x in enumerate(witness)]
    paths = [_write_csv(out / "summary.csv", ["metric", "level", "value"], rows), write_manifest(out, "norm", cfg)]
    return RunResult("norm", paths, summary)


def _cmd_gen(cfg: dict, out: Path) -> RunResult:
    pc = _planted(cfg)
    S = sample_dataset(pc, cfg["hypothesis"], cfg["rep"])
    out.mkdir(parents=True, exist_ok=True)
    write_samples(S, out / "samples.csv")
    return RunResult("gen", [out / "samples.csv", write_manifest(out, "gen", cfg)], {"n": S.n, "p": S.p})


def _cmd_cumulant(cfg: dict, out: Path) -> RunResult:
    S = read_samples(_require(cfg, "input"))
    try:
        K = khat(S, cfg["order"])
    except ValueError as exc:
        raise ConfigError(f"invalid value for key 'order': {exc}") from None
    out.mkdir(parents=True, exist_ok=True)
    write_symtensor(K.tensor, out / "cumulant.symt")
    return RunResult("cumulant", [out / "cumulant.symt", write_manifest(out, "cumulant", cfg)], {"order": K.order})


def _cmd_detect(cfg: dict, out: Path) -> RunResult:
    grid = cfg["tau_grid"] or None
    rep = detection_experiment(_planted(cfg), cfg["statistic"], grid, _reps(cfg, 2), power_cfg=_power(cfg))
    paths = emit_report(rep, out, cfg, "detect")
    return RunResult("detect", paths, {"best_sum": rep.best_sum, "best_tau": rep.best_tau}, rep)


def _cmd_estgap(cfg: dict, out: Path) -> RunResult:
    if not 0 < cfg["d_est_level"] < 1:
        raise ConfigError("invalid value for key 'd_est_level': must lie in (0, 1)")
    rep = estimate_error_distribution(
        _planted(cfg), _reps(cfg, 1), d_est_level=cfg["d_est_level"], power_cfg=_power(cfg)
    )
    paths = emit_report(rep, out, cfg, "estgap")
    return RunResult("estgap", paths, {"d_det_proxy": rep.d_det_proxy, "d_est": rep.d_est, "bound": rep.bound}, rep)


def _cmd_scaling(cfg: dict, out: Path) -> RunResult:
    try:
        rep = scaling_sweep(_planted(cfg), cfg["n_grid"], _reps(cfg, 1))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid value for key 'n_grid': {exc}") from None
    paths = emit_report(rep, out, cfg, "scaling")
    return RunResult("scaling", paths, {"slope": rep.slope, "intercept": rep.intercept, "note": rep.note}, rep)


def _cmd_lowdeg(cfg: dict, out: Path) -> RunResult:
    try:
        params = LowDegreeBoundParams(
            a=cfg["a"], n=cfg["n"], p=cfg["p"], d=cfg["d"], M=cfg["M"], C_d=cfg["C_d"], c0=cfg["c0"]
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    res = lowdeg_bound_sum(params)
    summary = {"total": res.total, "max_ratio": res.max_ratio, "overflow_at": res.overflow_at if res.overflow_at is not None else ""}
    out.mkdir(parents=True, exist_ok=True)
    rows = [(k, "", v) for k, v in summary.items()]
    paths = [_write_csv(out / "summary.csv", ["metric", "level", "value"], rows), write_manifest(out, "lowdeg", cfg)]
    return RunResult("lowdeg", paths, summary)


_HANDLERS = {
    "norm": _cmd_norm,
    "gen": _cmd_gen,
    "cumulant": _cmd_cumulant,
    "detect": _cmd_detect,
    "estgap": _cmd_estgap,
    "scaling": _cmd_scaling,
    "lowdeg": _cmd_lowdeg,
}


def run(command: str, config: dict | None = None) -> RunResult:
    """Run ``command`` with a partial config (missing keys take defaults)."""
    cfg = resolve_config(command, overrides=config)
    return _HANDLERS[command](cfg, Path(cfg["out_dir"]))


# ---------------------------------------------------------------------------
# argv


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tensorgap", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"tensorgap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, schema in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key = value config file")
        sp.add_argument("--out", dest="out_dir", default=None, help="output directory")
        for key, spec in schema.items():
            if key == "out_dir":
                continue
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            sp.add_argument(*flags, dest=key, default=None, help=spec.help)
    return parser


def _print_summary(result: RunResult) -> None:
    for key, value in result.summary.items():
        print(f"{key} = {fmt(value)}")
    for path in result.paths:
        print(f"wrote {path}", file=sys.stderr)


def main(argv=None) -> int:
    parser = _build_parser()
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config")
    try:
        file_values = load_config(config_path) if config_path else {}
        cfg = resolve_config(command, file_values, args)
        result = _HANDLERS[command](cfg, Path(cfg["out_dir"]))
    except ConfigError as exc:
        print(f"tensorgap {command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"tensorgap {command}: error: {exc}", file=sys.stderr)
        return 1
    if command == "lowdeg":
        print(fmt(result.summary["total"]))
        for path in result.paths:
            print(f"wrote {path}", file=sys.stderr)
    else:
        _print_summary(result)
    return 0


if __name__ == "__main__":
    sys.exit(main())
