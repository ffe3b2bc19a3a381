"""CSV and JSON writers/readers for combs, peak lists and autocorrelation tables."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .comb import WeightedComb
from .spectral import AutocorrelationTable, PeakList


def _g(x) -> str:
    return f"{float(x):.12g}"


def write_comb_csv(comb: WeightedComb, path) -> Path:
    path = Path(path)
    d = comb.d
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow([f"position_{i + 1}" for i in range(d)] + ["weight_re", "weight_im"])
        for p, w in zip(comb.positions, comb.weights):
            out.writerow([_g(v) for v in p] + [_g(w.real), _g(w.imag)])
    return path


def write_peaks_csv(peaks: PeakList, path) -> Path:
    path = Path(path)
    d, n, m = peaks.k.shape[1], peaks.z.shape[1], peaks.eta.shape[1]
    header = ([f"k_{i + 1}" for i in range(d)] + [f"z_{i + 1}" for i in range(n)]
              + [f"eta_{i + 1}" for i in range(m)] + ["c_re", "c_im", "intensity"])
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for k, z, eta, c, inten in zip(peaks.k, peaks.z, peaks.eta, peaks.c, peaks.intensity):
            out.writerow([_g(v) for v in k] + [str(int(v)) for v in z] + [_g(v) for v in eta]
                         + [_g(c.real), _g(c.imag), _g(inten)])
    return path


def read_peaks_csv(path) -> dict[str, np.ndarray]:
    """Parse a peak CSV into column-group arrays (``k``, ``z``, ``eta``, ``c``, ``intensity``)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))

    def cols(prefix):
        return data[:, [i for i, h in enumerate(header) if h.startswith(prefix)]]

    return {
        "k": cols("k_"),
        "z": cols("z_").astype(np.int64),
        "eta": cols("eta_"),
        "c": data[:, header.index("c_re")] + 1j * data[:, header.index("c_im")],
        "intensity": data[:, header.index("intensity")],
    }


def write_autocorr_csv(table: AutocorrelationTable, path) -> Path:
    path = Path(path)
    d, n = table.displacements.shape[1], table.coords.shape[1]
    header = [f"l_{i + 1}" for i in range(d)] + [f"z_{i + 1}" for i in range(n)] + ["eta_re", "eta_im"]
    with path.open("w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for l, z, e in zip(table.displacements, table.coords, table.eta):
            out.writerow([_g(v) for v in l] + [str(int(v)) for v in z] + [_g(e.real), _g(e.imag)])
    return path


def read_autocorr_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {
        "l": data[:, [i for i, h in enumerate(header) if h.startswith("l_")]],
        "z": data[:, [i for i, h in enumerate(header) if h.startswith("z_")]].astype(np.int64),
        "eta": data[:, header.index("eta_re")] + 1j * data[:, header.index("eta_im")],
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


def comparison_entry(closed: complex | float, estimated: complex | float, box_volume: float) -> dict:
    """One row of the comparison report: absolute and relative error."""
    err = abs(complex(estimated) - complex(closed))
    scale = abs(complex(closed))
    return {
        "closed": _jsonable(closed if isinstance(closed, float) else complex(closed)),
        "estimated": _jsonable(estimated if isinstance(estimated, float) else complex(estimated)),
        "abs_err": float(err),
        "rel_err": float(err / scale) if scale > 0 else float("inf"),
        "box_volume": float(box_volume),
    }
