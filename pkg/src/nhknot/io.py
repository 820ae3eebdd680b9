"""Serialisation helpers: round-trippable CSV, JSON, key=value configs, SVG."""

from __future__ import annotations

import csv
import io
import json
import os
import re
import sys
import tempfile
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .errors import InvalidInputError

STDOUT = "-"


def fmt(value) -> str:
    """17 significant digits for floats, so re-parsing is bit exact."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence], trailer: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if trailer:
        buf.write(f"# {trailer}\n")
    return buf.getvalue()


def read_csv(path) -> tuple[list[str], list[list[str]], list[str]]:
    """Header, data rows (as strings) and ``#`` comment lines."""
    comments, lines = [], []
    with open(path, newline="") as fh:
        for line in fh:
            (comments if line.startswith("#") else lines).append(line)
    rows = list(csv.reader(lines))
    if not rows:
        raise InvalidInputError(f"{path}: empty CSV")
    return rows[0], rows[1:], [c[1:].strip() for c in comments]


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def json_text(obj) -> str:
    # repr-based float output from json already round-trips exactly
    return json.dumps(obj, indent=2, default=_default, allow_nan=False) + "\n"


def atomic_write(path, data: str | bytes) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    if str(path) == STDOUT:
        if isinstance(data, bytes):
            sys.stdout.buffer.write(data)
        else:
            sys.stdout.write(data)
        sys.stdout.flush()
        return
    target = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=target.parent or Path("."), prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment, keys are normalised to snake_case."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for n, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise InvalidInputError(f"{path}:{n}: expected key=value, got {raw.strip()!r}")
            out[key.strip().lower().replace("-", "_")] = value.strip()
    return out


def svg_bytes(panels) -> bytes:
    """Render two panels side by side as an 800x600 SVG with no timestamp or random ids.

    ``panels`` is a pair of ``(title, xlabel, ylabel, series)`` where each
    series is ``(x, y, label, style)`` with style ``"line"`` or ``"dots"``.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "nhknot", "svg.fonttype": "path"}):
        fig, axes = plt.subplots(1, 2, figsize=(8, 6), dpi=100)
        try:
            for ax, (title, xlabel, ylabel, series) in zip(axes, panels):
                for x, y, label, style in series:
                    if style == "dots":
                        ax.plot(x, y, ".", ms=2, label=label)
                    else:
                        ax.plot(x, y, "-", lw=1, label=label)
                ax.set_title(title)
                ax.set_xlabel(xlabel)
                ax.set_ylabel(ylabel)
                if any(s[2] for s in series):
                    ax.legend(fontsize=8)
            fig.tight_layout()
            buf = io.BytesIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    # pin the outer size; the viewBox keeps the drawing scaled
    return re.sub(
        rb'<svg([^>]*?) width="[^"]*" height="[^"]*"',
        rb'<svg\1 width="800" height="600"',
        buf.getvalue(),
        count=1,
    )
