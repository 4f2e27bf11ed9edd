from typing import Any, Dict, Iterable, List, Tuple

import yaml

from app.core.exceptions import ConfigurationError


def set_dotted(target: Dict[str, Any], dotted_key: str, value: Any) -> None:
    """
    Set target["a"]["b"]["c"] = value for dotted_key "a.b.c", creating levels as needed.
    """
    parts = [p for p in dotted_key.split(".") if p]
    if not parts:
        raise ConfigurationError(f"Empty config key: {dotted_key!r}")
    node = target
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigurationError(f"Config key {dotted_key!r} descends into a scalar at {part!r}")
        node = child
    node[parts[-1]] = value


def parse_dotted_flags(argv: Iterable[str]) -> List[Tuple[str, Any]]:
    """
    Turn ["--selection.K", "4", "--partition.alpha=infinity"] into
    [("selection.K", 4), ("partition.alpha", "infinity")].

    Values are parsed as YAML scalars so numbers, lists and booleans keep their types.
    """
    args = list(argv)
    overrides: List[Tuple[str, Any]] = []
    i = 0
    while i < len(args):
        token = args[i]
        if not token.startswith("--"):
            raise ConfigurationError(f"Unexpected argument: {token}")
        key = token[2:]
        if "=" in key:
            key, raw = key.split("=", 1)
        else:
            if i + 1 >= len(args):
                raise ConfigurationError(f"Missing value for --{key}")
            i += 1
            raw = args[i]
        overrides.append((key, yaml.safe_load(raw)))
        i += 1
    return overrides
