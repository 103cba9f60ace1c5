"""``distill-lab`` command line.

Exit codes: 0 success, 1 verification failure, 2 invalid configuration,
3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Any, Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .memory import ScenarioSpec, TimingParams
from .report import COMMANDS, RunConfig

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _triple(text: str | Sequence[float], name: str) -> tuple[float, float, float]:
    parts = text.split(",") if isinstance(text, str) else list(text)
    try:
        values = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be three numbers start,stop,step, got {text!r}") from None
    if len(values) != 3:
        raise ConfigError(f"{name} must be three numbers start,stop,step, got {text!r}")
    return values  # type: ignore[return-value]


def _scenario(text: str | Sequence[float]) -> ScenarioSpec:
    parts = text.split(",") if isinstance(text, str) else list(text)
    try:
        f_in, f_target = (float(p) for p in parts)
    except (TypeError, ValueError):
        raise ConfigError(f"scenario must be f_in,f_target, got {text!r}") from None
    return ScenarioSpec(f_in, f_target)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distill-lab",
        description="Entanglement distillation analysis: BBPSSW vs the [[4,2,2]] detection protocol.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="TOML file with defaults for any flag below")
    parser.add_argument("--grid", help="input-fidelity grid start,stop,step (curves)")
    parser.add_argument("--scenario", action="append", help="f_in,f_target; repeatable")
    parser.add_argument("--tcc", type=float, help="classical communication time")
    parser.add_argument("--ts", type=float, help="single-qubit gate time")
    parser.add_argument("--td", type=float, help="two-qubit gate time")
    parser.add_argument("--tm", type=float, help="measurement time")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--seed", type=int, help="seed for the random unitaries in verify")
    parser.add_argument("--f0", type=float, action="append", help="initial fidelity for iterate; repeatable")
    parser.add_argument("--rounds", type=int, help="rounds per trace (iterate)")
    parser.add_argument("--tgrid", help="storage-time grid start,stop,step (decay)")
    parser.add_argument("--circuit", help="circuit file checked against the logical state (verify)")
    parser.add_argument("--experimental", action="store_true", default=None,
                        help="also emit model-based deadlines (tables, decay)")
    return parser


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"bad config {path}: {exc}") from None
    known = {"grid", "scenario", "tcc", "ts", "td", "tm", "format", "out", "seed",
             "f0", "rounds", "tgrid", "circuit", "experimental"}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def resolve_config(args: argparse.Namespace) -> RunConfig:
    settings: dict[str, Any] = load_config_file(args.config) if args.config else {}
    for key in ("grid", "scenario", "tcc", "ts", "td", "tm", "format", "out", "seed",
                "f0", "rounds", "tgrid", "circuit", "experimental"):
        value = getattr(args, key)
        if value is not None:
            settings[key] = value

    cfg = RunConfig(command=args.command)
    kwargs: dict[str, Any] = {"command": args.command}
    if "grid" in settings:
        kwargs["grid"] = _triple(settings["grid"], "grid")
    if "tgrid" in settings:
        kwargs["t_grid"] = _triple(settings["tgrid"], "tgrid")
    if "scenario" in settings:
        scen = settings["scenario"]
        if isinstance(scen, str) or (scen and not isinstance(scen[0], (str, list, tuple))):
            scen = [scen]
        kwargs["scenarios"] = tuple(_scenario(s) for s in scen)
    timing = cfg.timing
    kwargs["timing"] = TimingParams(
        t_s=float(settings.get("ts", timing.t_s)),
        t_d=float(settings.get("td", timing.t_d)),
        t_m=float(settings.get("tm", timing.t_m)),
        t_cc=float(settings.get("tcc", timing.t_cc)),
    )
    if "f0" in settings:
        f0 = settings["f0"]
        kwargs["f0s"] = tuple(float(v) for v in (f0 if isinstance(f0, list) else [f0]))
        for v in kwargs["f0s"]:
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"f0 must lie in [0, 1], got {v}")
    for key, attr, cast in (("format", "fmt", str), ("out", "out", str), ("seed", "seed", int),
                            ("rounds", "rounds", int), ("circuit", "circuit", str),
                            ("experimental", "experimental", bool)):
        if key in settings:
            kwargs[attr] = cast(settings[key])
    return RunConfig(**kwargs)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
    except OSError as exc:
        print(f"distill-lab: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"distill-lab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        table = COMMANDS[cfg.command](cfg)
    except OSError as exc:
        print(f"distill-lab: cannot read {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"distill-lab: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    text = table.render(cfg.fmt)
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        try:
            Path(cfg.out).write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            print(f"distill-lab: cannot write {cfg.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_IO
    return EXIT_VERIFY if table.failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
