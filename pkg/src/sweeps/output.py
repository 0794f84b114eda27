import json
import logging
import os
import subprocess
from functools import lru_cache
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from utils.errors import NumericalError

logger = logging.getLogger(__name__)

VERSION = "0.1.0"

# Units of the columns the scenarios emit; unlisted columns are dimensionless
COLUMN_UNITS = {
    "t": "s",
    "tau": "s",
    "x0": "m",
    "x_total": "m",
    "x": "m",
    "L": "m",
    "L_c": "m",
    "L_c_analytic": "m",
    "L_c_printed": "m",
    "L_min": "m",
    "F_static": "N",
    "F_dynamic": "N",
    "F_total": "N",
    "F_min": "N",
    "force": "N",
    "omega": "rad/s",
    "energy": "hbar pi c / L",
    "x_combined": "m",
}


@lru_cache(maxsize=1)
def git_describe() -> str:
    """git describe of the source tree, "unknown" outside a checkout"""
    here = Path(__file__).resolve().parent
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=here, capture_output=True, text=True, timeout=5, check=True,
        )
    except (OSError, subprocess.SubprocessError):
        return "unknown"
    return result.stdout.strip() or "unknown"


def header_line(config_hash: str) -> str:
    return f"# casimech v{VERSION}+{git_describe()}, config-sha256={config_hash}"


def units_line(columns) -> str:
    units = ", ".join(f"{c}={COLUMN_UNITS[c]}" for c in columns if c in COLUMN_UNITS)
    return f"# units: {units or 'all columns dimensionless'}"


def check_finite(df: pd.DataFrame, name: str) -> None:
    numeric = df.select_dtypes(include=[np.number])
    bad = [c for c in numeric.columns if not np.all(np.isfinite(numeric[c].to_numpy(dtype=float)))]
    if bad:
        raise NumericalError(f"non-finite values in columns {bad}", field=name)


def write_csv(df: pd.DataFrame, path: Union[str, Path], config_hash: str,
              note: Optional[str] = None) -> Path:
    """
    Write a result table with the self-describing two-line header

    A note, when given, follows the header as a third "# note:" line.

    Floats use pandas' default shortest round-trip representation.

    Args:
        df: Result table
        path: Output file
        config_hash: sha256 of the configuration file
        note: One-line remark on how to read the columns

    Returns:
        The written path
    """
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    check_finite(df, path.name)
    with open(path, "w", newline="") as handle:
        handle.write(header_line(config_hash) + "\n")
        handle.write(units_line(df.columns) + "\n")
        if note:
            handle.write(f"# note: {note}\n")
        df.to_csv(handle, index=False, lineterminator="\n")
    logger.info("wrote %d rows to %s", len(df), path)
    return path


def write_json(data: Dict, path: Union[str, Path], config_hash: Optional[str] = None) -> Path:
    path = Path(path)
    os.makedirs(path.parent, exist_ok=True)
    payload = dict(data)
    if config_hash is not None:
        payload["build"] = f"casimech v{VERSION}+{git_describe()}"
        payload["config_sha256"] = config_hash
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info("wrote %s", path)
    return path
