import os
from typing import List, Optional


def parse_float_list(value: Optional[str]) -> List[float]:
    """'1,1e3,1e6' -> [1.0, 1000.0, 1000000.0]"""
    if not value:
        return []
    try:
        return [float(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"expected a comma separated list of numbers, got {value!r}")


def sibling_path(path: str, extension: str) -> str:
    """conv.csv -> conv.json"""
    root, _ = os.path.splitext(path)
    return f"{root}{extension}"


def output_path(path: Optional[str], output_dir: Optional[str]) -> Optional[str]:
    """Relative paths land in output_dir; None and "-" are left alone."""
    if path is None or path == "-" or os.path.isabs(path) or not output_dir:
        return path
    return os.path.join(output_dir, path)
