"""Path JSON I/O, atomic file writes and CSV rendering.

Path files look like ``{"dim": 1, "jumps": [{"t": 0.0, "v": [1.0]}], "xi": null}``
where ``null`` stands for an infinite explosion time.  Floats are written in
shortest round-trip form, so saving a loaded canonical file reproduces it
byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import PathFormatError
from .paths import StepPath

__all__ = [
    "path_to_dict",
    "path_from_dict",
    "dumps_path",
    "loads_path",
    "load_path",
    "save_path",
    "atomic_write_text",
    "render_csv",
]


def path_to_dict(path: StepPath) -> dict[str, Any]:
    jumps = [{"t": float(t), "v": [float(c) for c in v]} for t, v in path.jumps()]
    return {"dim": path.dim, "jumps": jumps, "xi": None if math.isinf(path.xi) else path.xi}


def _number(obj: Any, where: str) -> float:
    if isinstance(obj, bool) or not isinstance(obj, (int, float)):
        raise PathFormatError(f"{where}: expected a number, got {type(obj).__name__}")
    val = float(obj)
    if not math.isfinite(val):
        raise PathFormatError(f"{where}: value must be finite")
    return val


def path_from_dict(obj: Any) -> StepPath:
    """Validate a decoded JSON object and build the path.

    Raises
    ------
    PathFormatError
        With a message naming the offending field, e.g. ``jumps[2].t``.
    """
    if not isinstance(obj, dict):
        raise PathFormatError("top level: expected an object")
    extra = set(obj) - {"dim", "jumps", "xi"}
    if extra:
        raise PathFormatError(f"top level: unknown keys {sorted(extra)}")
    for key in ("dim", "jumps"):
        if key not in obj:
            raise PathFormatError(f"top level: missing key {key!r}")
    dim = obj["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise PathFormatError("dim: expected a positive integer")
    jumps = obj["jumps"]
    if not isinstance(jumps, list) or not jumps:
        raise PathFormatError("jumps: expected a nonempty list")
    xi_raw = obj.get("xi")
    xi = math.inf if xi_raw is None else _number(xi_raw, "xi")
    if xi <= 0.0:
        raise PathFormatError("xi: must be > 0 or null")
    times: list[float] = []
    values: list[list[float]] = []
    for k, jump in enumerate(jumps):
        where = f"jumps[{k}]"
        if not isinstance(jump, dict) or set(jump) != {"t", "v"}:
            raise PathFormatError(f"{where}: expected an object with keys 't' and 'v'")
        t = _number(jump["t"], f"{where}.t")
        if k == 0 and t != 0.0:
            raise PathFormatError(f"{where}.t: the first jump time must be 0")
        if k > 0 and t <= times[-1]:
            raise PathFormatError(f"{where}.t: times must be strictly increasing")
        if t >= xi:
            raise PathFormatError(f"{where}.t: jump time must be < xi")
        v = jump["v"]
        if not isinstance(v, list) or len(v) != dim:
            raise PathFormatError(f"{where}.v: expected a list of {dim} numbers")
        values.append([_number(c, f"{where}.v[{i}]") for i, c in enumerate(v)])
        times.append(t)
    return StepPath(times, values, xi)


def dumps_path(path: StepPath) -> str:
    return json.dumps(path_to_dict(path), indent=1) + "\n"


def loads_path(text: str, source: str = "<string>") -> StepPath:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PathFormatError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return path_from_dict(obj)
    except PathFormatError as exc:
        raise PathFormatError(f"{source}: {exc}") from exc


def load_path(file: str | os.PathLike[str]) -> StepPath:
    p = Path(file)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise PathFormatError(f"{p}: cannot read file ({exc.strerror})") from exc
    return loads_path(text, str(p))


def atomic_write_text(file: str | os.PathLike[str], text: str) -> None:
    """Write through a temporary file in the same directory, then rename."""
    target = Path(file)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_path(path: StepPath, file: str | os.PathLike[str]) -> None:
    atomic_write_text(file, dumps_path(path))


def _cell(v: Any) -> Any:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return v


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
