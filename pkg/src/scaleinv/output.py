"""CSV and SVG writers.  Files are written to a temporary sibling and renamed into place."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np


def _atomic_write(path, data: str):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_value(v):
    """Round-trip float formatting (``repr``); other values are stringified."""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (complex, np.complexfloating)):
        return repr(complex(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    """RFC 4180 CSV with a header row; floats at full precision."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return _atomic_write(path, buf.getvalue())


def write_dict_rows(path, rows):
    """CSV from a list of dicts sharing the same keys (order of the first row)."""
    if not rows:
        return write_csv(path, [], [])
    header = list(rows[0])
    return write_csv(path, header, ([r[k] for k in header] for r in rows))


def write_trajectory(path, trajectory):
    cols = trajectory.columns()
    header = [name for name, _ in cols]
    data = np.column_stack([series for _, series in cols])
    return write_csv(path, header, data.tolist())


def write_json(path, obj):
    return _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_svg(path, fig):
    """Save a matplotlib figure as SVG without timestamps (stable output)."""
    import matplotlib.pyplot as plt

    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    return _atomic_write(path, buf.getvalue())


def line_plot(path, series, title="", xlabel="t", ylabel=""):
    """Simple SVG line plot; ``series`` is a list of ``(label, x, y)``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "scaleinv"
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for label, x, y in series:
        ax.plot(x, y, label=label, lw=1.2)
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if any(label for label, _, _ in series):
        ax.legend(fontsize="small")
    fig.tight_layout()
    return write_svg(path, fig)
