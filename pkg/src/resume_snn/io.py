"""Persisted artifacts: learning-curve CSV, summary CSV, manifests, encodings.

Curve CSVs are written with LF line endings, '.' decimal separators and STE
at 6 significant digits, so reruns with identical flags produce
byte-identical payloads.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .codec import dump_encoding
from .errors import ConfigurationError
from .experiment import ExperimentConfig, RunRecord, config_digest

CURVES_NAME = "curves.csv"
MANIFEST_NAME = "manifest.json"
ENCODINGS_DIR = "encodings"
CURVES_HEADER = "run_id,epoch,ste,le"
SUMMARY_HEADER = "op,arch,window_start,window_end,mean_ste,sem_ste,mean_le,sem_le"


def write_curves_csv(path, records: list[RunRecord]) -> None:
    path = Path(path)
    with open(path, "w", newline="\n") as fp:
        fp.write(CURVES_HEADER + "\n")
        for record in records:
            for er in record.epochs:
                fp.write(f"{record.run_id},{er.epoch},{er.ste:.6g},{er.le}\n")


def read_curves_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Curve file -> (ste, le) matrices of shape (n_runs, n_epochs).

    Every run must cover the contiguous epoch range 0..n_epochs-1.
    """
    path = Path(path)
    runs: dict[int, list[tuple[int, float, int]]] = {}
    with open(path) as fp:
        header = fp.readline().strip()
        if header != CURVES_HEADER:
            raise ConfigurationError(
                f"{path}: unexpected curve header {header!r}"
            )
        for line in fp:
            line = line.strip()
            if not line:
                continue
            rid, epoch, ste, le = line.split(",")
            runs.setdefault(int(rid), []).append((int(epoch), float(ste), int(le)))
    if not runs:
        raise ConfigurationError(f"{path}: no curve rows")
    n_epochs = len(next(iter(runs.values())))
    ste = np.zeros((len(runs), n_epochs))
    le = np.zeros((len(runs), n_epochs), dtype=np.int64)
    for row, rid in enumerate(sorted(runs)):
        entries = runs[rid]
        if [e for e, _, _ in entries] != list(range(n_epochs)):
            raise ConfigurationError(
                f"{path}: run {rid} epochs are not contiguous 0..{n_epochs - 1}"
            )
        ste[row] = [s for _, s, _ in entries]
        le[row] = [l for _, _, l in entries]
    return ste, le


def write_summary_csv(path, rows) -> None:
    path = Path(path)
    with open(path, "w", newline="\n") as fp:
        fp.write(SUMMARY_HEADER + "\n")
        for r in rows:
            fp.write(
                f"{r.op},{r.arch},{r.window_start},{r.window_end},"
                f"{r.mean_ste:.6g},{r.sem_ste:.6g},{r.mean_le:.6g},{r.sem_le:.6g}\n"
            )


def write_manifest(path, cfg: ExperimentConfig, n_runs: int, version: str) -> None:
    manifest = {
        "format": "resume-snn-batch",
        "version": version,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "seed": cfg.seed,
        "n_runs": n_runs,
        "op": cfg.op.value,
        "arch": cfg.arch_label,
        "config_digest": config_digest(cfg),
        "config": cfg.to_dict(),
    }
    with open(path, "w", newline="\n") as fp:
        json.dump(manifest, fp, indent=2)
        fp.write("\n")


def read_manifest(path) -> tuple[ExperimentConfig, dict]:
    with open(path) as fp:
        manifest = json.load(fp)
    if "config" not in manifest:
        raise ConfigurationError(f"{path}: not a batch manifest")
    return ExperimentConfig.from_dict(manifest["config"]), manifest


def write_batch_dir(out_dir, cfg: ExperimentConfig, records: list[RunRecord],
                    version: str) -> Path:
    """Write manifest, combined curves and per-run encoding dumps."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    enc_dir = out_dir / ENCODINGS_DIR
    enc_dir.mkdir(exist_ok=True)
    write_manifest(out_dir / MANIFEST_NAME, cfg, len(records), version)
    write_curves_csv(out_dir / CURVES_NAME, records)
    for record in records:
        name = f"run_{record.run_id:05d}.jsonl"
        with open(enc_dir / name, "w", newline="\n") as fp:
            dump_encoding(record.encoding, fp)
        record.encoding_path = f"{ENCODINGS_DIR}/{name}"
    return out_dir


def find_batch_dirs(root) -> list[Path]:
    """Directories under root (inclusive) holding a manifest and curves."""
    root = Path(root)
    found = []
    if not root.is_dir():
        raise ConfigurationError(f"{root} is not a directory")
    for manifest in sorted(root.rglob(MANIFEST_NAME)):
        if (manifest.parent / CURVES_NAME).is_file():
            found.append(manifest.parent)
    return found


def read_batch_dir(batch_dir) -> tuple[ExperimentConfig, np.ndarray, np.ndarray]:
    batch_dir = Path(batch_dir)
    cfg, _ = read_manifest(batch_dir / MANIFEST_NAME)
    ste, le = read_curves_csv(batch_dir / CURVES_NAME)
    return cfg, ste, le
