#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Script: edwsax_common.py

Main purpose:
- Provide shared utilities used by all edwSAX scripts:
  exception/warning hierarchy, logger setup, JSON IO and config helpers.
- Keep error names and log formatting identical across the library, the
  benchmark harness and the command-line front end.

This module is not intended to be run directly.
It is imported by:
- timeseries.py
- density.py
- symbolizer.py
- distance.py
- bench.py
- cli.py
"""

import json
import logging
import os
import sys
from typing import Optional

DEFAULT_LOG_FILE = ""
DEFAULT_KERNEL = "epanechnikov"
DEFAULT_BANDWIDTH = "isj"
DEFAULT_SEGMENT_SIZE = 2
DEFAULT_ESTIMATE_ON = "raw"
DEFAULT_NORMALIZE = "series"
DEFAULT_SEED = 0
DEFAULT_MAX_PAIRS = 10000
DEFAULT_ALPHABETS = [5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100]

_ACTIVE_LOGGER: Optional[logging.Logger] = None


class EdwsaxError(ValueError):
    """Base class for every error raised by the edwSAX modules."""


class InvalidWordLength(EdwsaxError):
    pass


class InvalidLength(EdwsaxError):
    pass


class InvalidAlphabet(EdwsaxError):
    pass


class InvalidParameter(EdwsaxError):
    pass


class DegenerateSample(EdwsaxError):
    pass


class ISJConvergenceFailure(EdwsaxError):
    pass


class FormatVersionMismatch(EdwsaxError):
    pass


class CorruptModel(EdwsaxError):
    pass


class WordMismatch(EdwsaxError):
    pass


class LengthMismatch(EdwsaxError):
    pass


class TooFewPairs(EdwsaxError):
    pass


class EmptyFile(EdwsaxError):
    pass


class ParseError(EdwsaxError):
    def __init__(self, message: str, path: str = "", line: int = 0, column: int = 0):
        self.path = path
        self.line = line
        self.column = column
        where = f"{path}:" if path else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class DegenerateDensityWarning(UserWarning):
    pass


class BandwidthFallbackWarning(UserWarning):
    pass


class ManifestMismatchWarning(UserWarning):
    pass


def _as_bool(val, default: bool) -> bool:
    if isinstance(val, bool):
        return val
    return default


def _as_str(val, default: str) -> str:
    if isinstance(val, str) and val.strip():
        return val.strip()
    return default


def _as_positive_int(val, default: int) -> int:
    if isinstance(val, bool):
        return default
    try:
        v = int(val)
    except Exception:
        return default
    if v < 1:
        return default
    return v


def _as_nonnegative_int(val, default: int) -> int:
    if isinstance(val, bool):
        return default
    try:
        v = int(val)
    except Exception:
        return default
    if v < 0:
        return default
    return v


def _as_int_list(val, default: list) -> list:
    if not isinstance(val, list):
        return list(default)
    out = []
    for v in val:
        iv = _as_positive_int(v, 0)
        if iv:
            out.append(iv)
    return out or list(default)


def _abs_from_config_path(config_path: Optional[str], path_value: str) -> str:
    if os.path.isabs(path_value):
        return os.path.normpath(path_value)
    if config_path:
        base_dir = os.path.dirname(os.path.abspath(config_path))
    else:
        base_dir = os.getcwd()
    return os.path.normpath(os.path.join(base_dir, path_value))


def resolve_logging_settings(
    config: dict,
    config_path: Optional[str] = None,
    override_file: Optional[str] = None,
    default_file: str = DEFAULT_LOG_FILE,
) -> dict:
    lcfg = config.get("logging") if isinstance(config.get("logging"), dict) else {}

    enabled = _as_bool(lcfg.get("enabled"), True)
    file_path = (
        override_file
        if isinstance(override_file, str) and override_file.strip()
        else lcfg.get("file")
    )
    if not (isinstance(file_path, str) and file_path.strip()):
        file_path = default_file

    append = _as_bool(lcfg.get("append"), True)
    return {
        "enabled": enabled,
        "file": _abs_from_config_path(config_path, file_path) if enabled and file_path else "",
        "append": append,
    }


def resolve_defaults(config: dict) -> dict:
    dcfg = config.get("defaults") if isinstance(config.get("defaults"), dict) else {}
    return {
        "kernel": _as_str(dcfg.get("kernel"), DEFAULT_KERNEL),
        "bandwidth": _as_str(dcfg.get("bandwidth"), DEFAULT_BANDWIDTH),
        "segment_size": _as_positive_int(dcfg.get("segment_size"), DEFAULT_SEGMENT_SIZE),
        "estimate_on": _as_str(dcfg.get("estimate_on"), DEFAULT_ESTIMATE_ON),
        "normalize": _as_str(dcfg.get("normalize"), DEFAULT_NORMALIZE),
        "seed": _as_nonnegative_int(dcfg.get("seed"), DEFAULT_SEED),
        "max_pairs": _as_positive_int(dcfg.get("max_pairs"), DEFAULT_MAX_PAIRS),
        "workers": _as_positive_int(dcfg.get("workers"), 1),
        "alphabets": _as_int_list(dcfg.get("alphabets"), DEFAULT_ALPHABETS),
    }


def build_logger(name: str, log_file: str, append: bool = True, to_stderr: bool = True) -> logging.Logger:
    logger = logging.getLogger(f"edwsax.{name}")
    logger.handlers = []
    logger.setLevel(logging.INFO)
    logger.propagate = False

    if to_stderr:
        sh = logging.StreamHandler(sys.stderr)
        sh.setFormatter(logging.Formatter("%(message)s"))
        logger.addHandler(sh)

    if log_file:
        ensure_parent(log_file)
        fh = logging.FileHandler(log_file, mode="a" if append else "w", encoding="utf-8")
        fh.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(message)s", "%Y-%m-%d %H:%M:%S"))
        logger.addHandler(fh)

    return logger


def set_active_logger(logger: Optional[logging.Logger]) -> None:
    global _ACTIVE_LOGGER
    _ACTIVE_LOGGER = logger


def get_active_logger() -> Optional[logging.Logger]:
    return _ACTIVE_LOGGER


def log_info(msg: str) -> None:
    if _ACTIVE_LOGGER:
        _ACTIVE_LOGGER.info(msg)
    else:
        print(msg, file=sys.stderr)


def log_warning(msg: str) -> None:
    if _ACTIVE_LOGGER:
        _ACTIVE_LOGGER.warning(msg)
    else:
        print(f"WARN: {msg}", file=sys.stderr)


def log_error(msg: str) -> None:
    if _ACTIVE_LOGGER:
        _ACTIVE_LOGGER.error(msg)
    else:
        print(f"ERROR: {msg}", file=sys.stderr)


def setup_script_logging(
    config: dict,
    config_path: Optional[str],
    script_name: str,
    override_file: Optional[str] = None,
) -> dict:
    settings = resolve_logging_settings(config, config_path=config_path, override_file=override_file)
    if not settings["enabled"]:
        set_active_logger(None)
        return settings

    logger = build_logger(script_name, settings["file"], append=settings["append"], to_stderr=True)
    set_active_logger(logger)
    if settings["file"]:
        logger.info(f"[{script_name}] log file: {settings['file']}")
    return settings


def ensure_parent(path: str) -> None:
    parent = os.path.dirname(path) or "."
    os.makedirs(parent, exist_ok=True)


def read_json(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def write_json(path: str, payload: dict) -> None:
    ensure_parent(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)


def write_bytes(path: str, payload: bytes) -> None:
    ensure_parent(path)
    with open(path, "wb") as f:
        f.write(payload)
