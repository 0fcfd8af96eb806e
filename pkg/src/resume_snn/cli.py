"""Command-line entry point for training runs, batches and summaries.

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .codec import dump_encoding, generate_encoding
from .errors import ConfigurationError, GenerationError
from .experiment import (
    ExperimentConfig,
    WindowSummary,
    _PARAM_GROUPS,
    config_digest,
    derive_run_rng,
    format_measurement,
    run_batch,
    window_stats,
)
from .io import (
    find_batch_dirs,
    read_batch_dir,
    write_batch_dir,
    write_summary_csv,
)

SEED_ENV_VAR = "RESUME_SNN_SEED"
DEFAULT_WINDOWS = "900:1000,1900:2000"

_ARCH_RE = re.compile(r"^2x(\d+)(?:\+(\d+))?$")

# Group parameters addressable by bare name in --set (unique names only;
# ambiguous ones such as 'dt' need the dotted form).
_FLAT_KEYS: dict[str, str | None] = {}
for _group, _cls in _PARAM_GROUPS.items():
    for _field in dataclasses.fields(_cls):
        _FLAT_KEYS[_field.name] = None if _field.name in _FLAT_KEYS else _group


def parse_arch(text: str) -> tuple[int, int | None]:
    """Parse an architecture label like 2x6+20 (banks of 6, 20 hidden) or 2x10."""
    m = _ARCH_RE.match(text.strip())
    if not m:
        raise ConfigurationError(
            f"bad architecture {text!r}; expected e.g. 2x6+20 or 2x10"
        )
    bank = int(m.group(1))
    hidden = int(m.group(2)) if m.group(2) else None
    return bank, hidden


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _assign(data: dict, key: str, value) -> None:
    if "." in key:
        group, _, sub = key.partition(".")
        if group not in _PARAM_GROUPS:
            raise ConfigurationError(f"unknown config group {group!r} in {key!r}")
        data.setdefault(group, {})[sub] = value
        return
    if key in _FLAT_KEYS:
        group = _FLAT_KEYS[key]
        if group is None:
            options = ", ".join(
                f"{g}.{key}" for g in _PARAM_GROUPS
                if key in {f.name for f in dataclasses.fields(_PARAM_GROUPS[g])}
            )
            raise ConfigurationError(f"ambiguous key {key!r}; use one of {options}")
        data.setdefault(group, {})[key] = value
        return
    data[key] = value


def parse_config(path: str | None, overrides: list[tuple[str, object]]) -> ExperimentConfig:
    """Resolve a config file plus flag overrides into an ExperimentConfig."""
    data: dict = {}
    if path is not None:
        try:
            with open(path) as fp:
                data = json.load(fp)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: not valid JSON ({e})") from None
        if not isinstance(data, dict):
            raise ConfigurationError(f"{path}: config must be a JSON object")
    for key, value in overrides:
        _assign(data, key, value)
    if data.get("seed") is None and os.environ.get(SEED_ENV_VAR):
        try:
            data["seed"] = int(os.environ[SEED_ENV_VAR])
        except ValueError:
            raise ConfigurationError(
                f"{SEED_ENV_VAR} must be an integer, got {os.environ[SEED_ENV_VAR]!r}"
            ) from None
    return ExperimentConfig.from_dict(data)


def _config_overrides(args) -> list[tuple[str, object]]:
    overrides: list[tuple[str, object]] = []
    if getattr(args, "op", None):
        overrides.append(("op", args.op))
    if getattr(args, "arch", None):
        bank, hidden = parse_arch(args.arch)
        overrides.append(("bank_size", bank))
        overrides.append(("hidden_size", hidden))
    if getattr(args, "epochs", None) is not None:
        overrides.append(("epochs", args.epochs))
    if getattr(args, "seed", None) is not None:
        overrides.append(("seed", args.seed))
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        overrides.append((key.strip(), _parse_set_value(value)))
    return overrides


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="JSON config file")
    parser.add_argument("--op", choices=["true", "j0", "and", "xor"],
                        help="logical operation to train")
    parser.add_argument("--arch", metavar="SPEC",
                        help="architecture, e.g. 2x6+20 or 2x10")
    parser.add_argument("--epochs", type=int, metavar="N")
    parser.add_argument("--seed", type=int, metavar="N",
                        help=f"base seed (falls back to ${SEED_ENV_VAR})")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config key (dotted for groups)")


def _parse_windows(text: str) -> list[tuple[int, int]]:
    windows = []
    for part in text.split(","):
        part = part.strip()
        m = re.match(r"^(\d+):(\d+)$", part)
        if not m:
            raise ConfigurationError(
                f"bad window {part!r}; expected start:end, e.g. 1900:2000"
            )
        windows.append((int(m.group(1)), int(m.group(2))))
    if not windows:
        raise ConfigurationError("no epoch windows given")
    return windows


def cmd_batch(args, n_runs: int) -> int:
    cfg = parse_config(args.config, _config_overrides(args))
    jobs = getattr(args, "jobs", None) or 1
    records = run_batch(cfg, n_runs, jobs=jobs)
    out_dir = write_batch_dir(args.out, cfg, records, __version__)
    print(
        f"wrote {n_runs} run(s) x {cfg.epochs} epochs of {cfg.op.value} "
        f"({cfg.arch_label}) to {out_dir}",
        file=sys.stderr,
    )
    return 0


def cmd_summarize(args) -> int:
    windows = _parse_windows(args.windows)
    batch_dirs = find_batch_dirs(args.input)
    if not batch_dirs:
        raise ConfigurationError(f"no batch outputs (manifest + curves) under {args.input}")
    by_op: dict[str, list] = {}
    digests: dict[str, str] = {}
    for batch_dir in batch_dirs:
        cfg, ste, le = read_batch_dir(batch_dir)
        digests[str(batch_dir)] = config_digest(cfg)
        by_op.setdefault(cfg.op.value, []).append((cfg, ste, le))
    if len(set(digests.values())) != 1:
        listing = "\n".join(f"  {d} {path}" for path, d in sorted(digests.items()))
        raise ConfigurationError(
            "batches do not share one protocol config; digests:\n" + listing
        )

    rows: list[WindowSummary] = []
    op_order = [op for op in ("true", "j0", "and", "xor") if op in by_op]
    for op in op_order:
        group = by_op[op]
        cfg = group[0][0]
        ste = np.vstack([g[1] for g in group])
        le = np.vstack([g[2] for g in group])
        for window in windows:
            mean_ste, sem_ste, mean_le, sem_le = window_stats(ste, le, window)
            rows.append(WindowSummary(
                op=op, arch=cfg.arch_label,
                window_start=window[0], window_end=window[1],
                mean_ste=mean_ste, sem_ste=sem_ste,
                mean_le=mean_le, sem_le=sem_le,
            ))

    _print_summary_table(rows, windows)
    out_path = args.out or str(Path(args.input) / "summary.csv")
    write_summary_csv(out_path, rows)
    print(f"wrote {out_path}", file=sys.stderr)
    return 0


def _print_summary_table(rows: list[WindowSummary], windows) -> None:
    labels = [f"{s}-{e - 1}" for s, e in windows]
    header = f"{'op':<6}{'arch':<10}{'error':<7}" + "".join(f"{lab:>16}" for lab in labels)
    print(header)
    print("-" * len(header))
    by_op: dict[tuple[str, str], dict] = {}
    for r in rows:
        cell = by_op.setdefault((r.op, r.arch), {})
        cell[(r.window_start, r.window_end)] = r
    for (op, arch), cells in by_op.items():
        ste_cols = "".join(
            f"{format_measurement(cells[w].mean_ste, cells[w].sem_ste):>16}"
            for w in windows
        )
        le_cols = "".join(
            f"{format_measurement(cells[w].mean_le, cells[w].sem_le):>16}"
            for w in windows
        )
        print(f"{op:<6}{arch:<10}{'STE':<7}" + ste_cols)
        print(f"{'':<6}{'':<10}{'LE':<7}" + le_cols)


def cmd_gen_encoding(args) -> int:
    overrides = _config_overrides(args)
    if not any(key == "op" for key, _ in overrides):
        overrides.insert(0, ("op", "xor"))  # op does not affect the encoding
    cfg = parse_config(args.config, overrides)
    rng = derive_run_rng(cfg.seed, 0)
    encoding = generate_encoding(rng, cfg.bank_size, cfg.traingen)
    if args.out:
        with open(args.out, "w", newline="\n") as fp:
            dump_encoding(encoding, fp)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        dump_encoding(encoding, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resume-snn",
        description="Train layered spiking networks on logical operations "
                    "encoded as spike trains.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run one training run")
    _add_config_flags(p_train)
    p_train.add_argument("--out", required=True, metavar="DIR")

    p_batch = sub.add_parser("batch", help="run many independent runs")
    _add_config_flags(p_batch)
    p_batch.add_argument("--runs", type=int, required=True, metavar="N")
    p_batch.add_argument("--out", required=True, metavar="DIR")
    p_batch.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                         metavar="J", help="parallel runs (default: cores)")

    p_sum = sub.add_parser("summarize", help="aggregate existing batch outputs")
    p_sum.add_argument("--in", dest="input", required=True, metavar="DIR")
    p_sum.add_argument("--windows", default=DEFAULT_WINDOWS, metavar="A:B,C:D")
    p_sum.add_argument("--out", metavar="FILE", help="summary CSV path")

    p_gen = sub.add_parser("gen-encoding", help="dump a logical encoding")
    _add_config_flags(p_gen)
    p_gen.add_argument("--out", metavar="FILE", help="JSONL path (default: stdout)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_batch(args, n_runs=1)
        if args.command == "batch":
            if args.runs < 1:
                raise ConfigurationError(f"--runs must be >= 1, got {args.runs}")
            return cmd_batch(args, n_runs=args.runs)
        if args.command == "summarize":
            return cmd_summarize(args)
        if args.command == "gen-encoding":
            return cmd_gen_encoding(args)
        raise ConfigurationError(f"unknown command {args.command!r}")
    except (ConfigurationError, GenerationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        path = getattr(e, "filename", None)
        print(f"I/O error{f' ({path})' if path else ''}: {e}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
