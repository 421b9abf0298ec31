import csv
import io
import logging
import math
import os
import tempfile
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from pydantic import BaseModel  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.hashsalt"] = "pdemscatter"
matplotlib.rcParams["svg.fonttype"] = "path"

SIGNIFICANT_DIGITS = 12
FIGURE_SIZE = (8.0, 5.0)
FIGURE_DPI = 100

Series = Tuple[str, Sequence[float], str]


def format_number(value: Any) -> str:
    """
    Render a CSV cell: 12 significant digits with trailing zeros trimmed, exponent only
    outside [1e-4, 1e6).
    """
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    x = float(value)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0:
        return "0"
    if 1e-4 <= abs(x) < 1e6:
        return np.format_float_positional(
            x, precision=SIGNIFICANT_DIGITS, unique=False, fractional=False, trim="-"
        )
    return np.format_float_scientific(
        x, precision=SIGNIFICANT_DIGITS - 1, unique=False, trim="-", exp_digits=2
    )


def write_atomic(path: Path, data: bytes) -> Path:
    """
    Write through a temporary file in the same directory and rename over the target.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.debug("Wrote %s (%d bytes)", path, len(data))
    return path


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    """
    CSV text with LF line endings and every cell passed through format_number.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_number(cell) for cell in row])
    return buffer.getvalue()


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """
    Render rows to CSV and write them atomically to path.
    """
    return write_atomic(path, render_csv(header, rows).encode("utf-8"))


def write_json(path: Path, model: BaseModel) -> Path:
    """
    Write a model as indented JSON with a trailing newline.
    """
    return write_atomic(path, (model.model_dump_json(indent=2) + "\n").encode("utf-8"))


def render_svg(
    series: List[Series],
    xlabel: str,
    ylabel: str,
    x: Sequence[float],
    title: Optional[str] = None,
    logy: bool = False,
    vlines: Sequence[float] = (),
    marker: Optional[Tuple[float, float]] = None,
) -> bytes:
    """
    Line plot with legend as a self-contained 800x500 SVG.
    """
    figure = Figure(figsize=FIGURE_SIZE, dpi=FIGURE_DPI)
    axes = figure.add_subplot()
    for label, values, style in series:
        axes.plot(x, values, style, label=label, linewidth=1.2)
    for position in vlines:
        axes.axvline(position, color="black", linestyle="--", linewidth=0.8)
    if marker is not None:
        axes.plot([marker[0]], [marker[1]], "kv", markersize=7, label=f"E = {marker[0]:.6g}")
    if logy:
        axes.set_yscale("log")
    axes.set_xlabel(xlabel)
    axes.set_ylabel(ylabel)
    if title:
        axes.set_title(title)
    axes.legend(loc="best")
    axes.grid(True, alpha=0.3)
    figure.tight_layout()

    buffer = io.BytesIO()
    figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def write_svg(path: Path, *args: Any, **kwargs: Any) -> Path:
    """
    Render a plot with render_svg and write it atomically to path.
    """
    return write_atomic(path, render_svg(*args, **kwargs))
