"""Flat ``name value`` weight files shared by the SAT and ASP reorderers and the tuner."""
from __future__ import annotations

from pathlib import Path


class WeightFileError(ValueError):
    pass


def parse_weight_text(text: str, allowed: dict[str, type]) -> dict[str, float | int]:
    """Parse ``name value`` lines.  Blank lines and ``#`` comments are skipped.

    Unknown names, repeated names and unparsable values raise ``WeightFileError``;
    absent names are simply missing from the result.
    """
    out: dict[str, float | int] = {}
    for n, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        f = s.split()
        if len(f) != 2:
            raise WeightFileError(f"line {n}: expected 'name value', got {line!r}")
        name, raw = f
        if name not in allowed:
            raise WeightFileError(f"line {n}: unknown parameter {name!r}")
        if name in out:
            raise WeightFileError(f"line {n}: parameter {name!r} repeated")
        try:
            if allowed[name] is int:
                v = float(raw)
                if v != int(v):
                    raise ValueError
                out[name] = int(v)
            else:
                out[name] = float(raw)
        except ValueError:
            raise WeightFileError(f"line {n}: bad value {raw!r} for {name}") from None
    return out


def format_weights(values: dict[str, float | int]) -> str:
    return "".join(f"{k} {v!r}\n" for k, v in values.items())


def read_weight_file(path: str | Path, allowed: dict[str, type]) -> dict[str, float | int]:
    return parse_weight_text(Path(path).read_text(), allowed)
