import json
from pathlib import Path
from typing import Any, Iterable, Union

import pandas as pd

from app.core.logger import logger

PathLike = Union[str, Path]


def ensure_dir(path: PathLike) -> Path:
    """
    Create a directory (and parents) if missing and return it.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def save_dataframe(df: pd.DataFrame, file_path: PathLike) -> Path:
    """
    Write a DataFrame as CSV without the index. I/O errors propagate unchanged.
    """
    file_path = Path(file_path)
    ensure_dir(file_path.parent)
    try:
        df.to_csv(file_path, index=False, float_format="%.17g")
    except OSError as e:
        logger.error(f"Failed to write CSV {file_path}: {e}")
        raise
    logger.info(f"Saved CSV: {file_path}", extra={"rows": len(df)})
    return file_path


def load_csv(file_path: PathLike, required_columns: Iterable[str] = ()) -> pd.DataFrame:
    """
    Read a CSV and check that the required columns are present.
    """
    df = pd.read_csv(file_path)
    missing = [c for c in required_columns if c not in df.columns]
    if missing:
        raise ValueError(f"{file_path}: missing columns {missing}")
    return df


def save_json(payload: Any, file_path: PathLike) -> Path:
    """
    Write a JSON document (sorted keys, indented) for stable diffs.
    """
    file_path = Path(file_path)
    ensure_dir(file_path.parent)
    try:
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=True, allow_nan=False)
    except OSError as e:
        logger.error(f"Failed to write JSON {file_path}: {e}")
        raise
    logger.info(f"Saved JSON: {file_path}")
    return file_path

