"""Invertible image transforms, generative augmentation and dual
classifiers for imbalanced tabular data."""

from tabaug._core import (
    Config,
    auc,
    derive_seed,
    load_config,
    manifest_content_hash,
    parse_config,
    report_table,
    roc_svg,
    run_augment,
    run_bnlearn,
    run_classify,
    run_pipeline,
    run_transform,
    write_report,
    write_synth_csv,
)

__all__ = [
    "Config",
    "auc",
    "derive_seed",
    "load_config",
    "manifest_content_hash",
    "parse_config",
    "report_table",
    "roc_svg",
    "run_augment",
    "run_bnlearn",
    "run_classify",
    "run_pipeline",
    "run_transform",
    "write_report",
    "write_synth_csv",
]
