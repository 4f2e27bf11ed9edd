# app/utils/__init__.py

from app.utils.file_handler import ensure_dir, load_csv, save_dataframe, save_json
from app.utils.helpers import parse_dotted_flags, set_dotted
from app.utils.rng import derive_seed, stream

__all__ = [
    "ensure_dir",
    "load_csv",
    "save_dataframe",
    "save_json",
    "parse_dotted_flags",
    "set_dotted",
    "derive_seed",
    "stream",
]
