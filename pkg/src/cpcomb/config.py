"""JSON run configuration: strict schema, defaults, conversion to domain objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .comb import Decoration, make_decoration
from .errors import ParseError, ValidationError
from .lattice import Box, LatticeBasis, basis_from_matrix
from .scheme import SchemeSpec
from .spectral import BoxSequence
from .weights import Bump, Gaussian, PolyDecay, Product, SharpWindow, WeightFunction

_number = {"type": "number"}
_complex = {"oneOf": [_number, {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}]}
_vector = {"type": "array", "items": _number, "minItems": 1}
_intervals = {"type": "array", "minItems": 1,
              "items": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2}}


def _obj(props: dict, required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required), "additionalProperties": False}


SCHEMA = _obj(
    {
        "scheme": _obj(
            {
                "d": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "basis": {"type": "array", "minItems": 2, "items": _vector},
                "search_radius": {"type": "integer", "minimum": 10},
                "coverage_eps": {"type": "number", "exclusiveMinimum": 0},
                "allow_nondense": {"type": "boolean"},
            },
            required=("d", "m", "basis"),
        ),
        # kind-specific keys are checked in _build_weight
        "weight": {"type": "object", "required": ["kind"]},
        "decoration": {
            "type": "array", "minItems": 1,
            "items": _obj({"s": _vector, "k": _vector, "w": _complex}, required=("s", "k", "w")),
        },
        "boxes": _obj(
            {"base": _intervals, "growth": {"type": "number"}, "steps": {"type": "integer"}},
            required=("base",),
        ),
        "thresholds": _obj(
            {
                "eps_trunc": _number,
                "intensity_floor": _number,
                "internal_cut": {"type": ["number", "null"]},
                "autocorr_internal_cut": _number,
                "match_tol": _number,
                "almost_period_eps": _number,
            }
        ),
        "analysis": _obj(
            {
                "displacement_range": _intervals,
                "k_range": _intervals,
                "diffraction_box": _intervals,
                "fourier_bohr_k": {"type": "array", "items": _vector},
                "torus_point": _obj({"s": _vector, "k": _vector}, required=("s", "k")),
                "kernel_scale": _number,
                "almost_period_search": _intervals,
                "verify_window": _intervals,
                "dual_search_radius": {"type": "integer", "minimum": 0},
                "top_autocorr": {"type": "integer", "minimum": 1},
                "top_peaks": {"type": "integer", "minimum": 1},
            }
        ),
        "tolerances": _obj({"density": _number, "autocorr": _number, "diffraction": _number}),
        "output": _obj(
            {
                "directory": {"type": "string"},
                "formats": {"type": "array", "items": {"enum": ["csv", "json"]}},
            }
        ),
    },
    required=("scheme", "weight"),
)

_WEIGHT_KEYS = {
    "gaussian": {"width", "amplitude", "center"},
    "bump": {"radius", "amplitude", "center"},
    "polydecay": {"exponent", "scale", "amplitude", "center"},
    "sharp_window": {"lo", "hi", "amplitude"},
    "product": {"factors", "amplitude"},
}


@dataclass(frozen=True)
class Thresholds:
    eps_trunc: float = 1e-12
    intensity_floor: float = 1e-8
    internal_cut: float | None = None
    autocorr_internal_cut: float = 6.0
    match_tol: float = 1e-6
    almost_period_eps: float = 1e-3


@dataclass(frozen=True)
class Analysis:
    displacement_range: Box
    k_range: Box
    diffraction_box: Box
    fourier_bohr_k: list
    torus_s: np.ndarray
    torus_k: np.ndarray
    kernel_scale: float = 8.0
    almost_period_search: Box | None = None
    verify_window: Box | None = None
    dual_search_radius: int = 5
    top_autocorr: int = 15
    top_peaks: int = 10


@dataclass(frozen=True)
class RunConfig:
    scheme: SchemeSpec
    search_radius: int
    coverage_eps: float
    allow_nondense: bool
    weight: WeightFunction
    decoration: Decoration
    boxes: BoxSequence
    thresholds: Thresholds
    analysis: Analysis
    tolerances: dict
    output_dir: Path
    formats: tuple
    raw: dict = field(repr=False, default_factory=dict)


def _cplx(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def _box(intervals, dim: int, path: str) -> Box:
    if len(intervals) != dim:
        raise ValidationError(f"expected {dim} intervals, got {len(intervals)}", path)
    try:
        return Box.from_intervals(intervals)
    except ValueError as exc:
        raise ValidationError(str(exc), path) from None


def _build_weight(spec: dict, m: int, path: str = "weight") -> WeightFunction:
    kind = spec.get("kind")
    if kind not in _WEIGHT_KEYS:
        raise ValidationError(f"unknown weight kind {kind!r}", f"{path}.kind")
    extra = set(spec) - _WEIGHT_KEYS[kind] - {"kind"}
    if extra:
        raise ValidationError(f"unknown field(s) {sorted(extra)}", f"{path}.{sorted(extra)[0]}")
    amp = _cplx(spec.get("amplitude", 1.0))
    try:
        if kind == "gaussian":
            return Gaussian(m=m, width=float(spec.get("width", 1.0)), amplitude=amp, center=spec.get("center"))
        if kind == "bump":
            return Bump(m=m, radius=float(spec.get("radius", 1.0)), amplitude=amp, center=spec.get("center"))
        if kind == "polydecay":
            return PolyDecay(m=m, exponent=float(spec.get("exponent", m + 1.0)), scale=float(spec.get("scale", 1.0)),
                             amplitude=amp, center=spec.get("center"))
        if kind == "sharp_window":
            w = SharpWindow(lo=spec["lo"], hi=spec["hi"], amplitude=amp)
            if w.m != m:
                raise ValidationError(f"window has dimension {w.m}, expected {m}", path)
            return w
        factors = []
        for i, fs in enumerate(spec["factors"]):
            fm = int(fs.get("m", 1))
            sub = {k: v for k, v in fs.items() if k != "m"}
            factors.append(_build_weight(sub, fm, f"{path}.factors[{i}]"))
        prod = Product(factors=tuple(factors), amplitude=amp)
        if prod.m != m:
            raise ValidationError(f"factor dimensions sum to {prod.m}, expected {m}", f"{path}.factors")
        return prod
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(str(exc), path) from None


def load_config(data: dict[str, Any], base_dir: Path | None = None) -> RunConfig:
    """Validate a config dictionary and build the domain objects."""
    try:
        jsonschema.validate(data, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        if exc.validator == "additionalProperties":
            extra = sorted(set(exc.instance) - set(exc.schema.get("properties", {})))
            if extra:
                where = f"{where}.{extra[0]}" if where != "<root>" else extra[0]
        raise ValidationError(exc.message, where) from None

    sch = data["scheme"]
    d, m = sch["d"], sch["m"]
    rows = sch["basis"]
    if len(rows) != d + m or any(len(r) != d + m for r in rows):
        raise ValidationError(f"basis must be {d + m}x{d + m} for d={d}, m={m}", "scheme.basis")
    # a singular basis is a domain error, not a schema error, so it propagates
    basis: LatticeBasis = basis_from_matrix(np.array(rows, dtype=float))
    scheme = SchemeSpec(d, m, basis)

    weight = _build_weight(data["weight"], m)

    atoms = None
    if "decoration" in data:
        atoms = []
        for i, a in enumerate(data["decoration"]):
            if len(a["s"]) != d or len(a["k"]) != m:
                raise ValidationError(f"atom needs s of length {d} and k of length {m}", f"decoration[{i}]")
            atoms.append((a["s"], a["k"], _cplx(a["w"])))
    decoration = make_decoration(scheme, atoms)

    th = Thresholds(**data.get("thresholds", {}))
    for name in ("eps_trunc", "intensity_floor", "match_tol", "almost_period_eps", "autocorr_internal_cut"):
        if getattr(th, name) <= 0:
            raise ValidationError("must be positive", f"thresholds.{name}")
    if th.internal_cut is not None and th.internal_cut <= 0:
        raise ValidationError("must be positive", "thresholds.internal_cut")

    bx = data.get("boxes", {"base": [[0.0, 100.0]] * d})
    try:
        boxes = BoxSequence(_box(bx["base"], d, "boxes.base"), float(bx.get("growth", 10.0)), int(bx.get("steps", 3)))
    except ValueError as exc:
        raise ValidationError(str(exc), "boxes") from None

    an = data.get("analysis", {})
    tp = an.get("torus_point", {"s": [0.0] * d, "k": [0.0] * m})
    if len(tp["s"]) != d or len(tp["k"]) != m:
        raise ValidationError("torus point has wrong dimensions", "analysis.torus_point")
    fb_k = an.get("fourier_bohr_k", [[0.0] * d])
    if any(len(k) != d for k in fb_k):
        raise ValidationError(f"frequencies must have length {d}", "analysis.fourier_bohr_k")
    largest = boxes.largest
    analysis = Analysis(
        displacement_range=_box(an.get("displacement_range", [[-30.0, 30.0]] * d), d, "analysis.displacement_range"),
        k_range=_box(an.get("k_range", [[-5.0, 5.0]] * d), d, "analysis.k_range"),
        diffraction_box=_box(an["diffraction_box"], d, "analysis.diffraction_box") if "diffraction_box" in an
        else largest,
        fourier_bohr_k=[np.asarray(k, float) for k in fb_k],
        torus_s=np.asarray(tp["s"], float),
        torus_k=np.asarray(tp["k"], float),
        kernel_scale=float(an.get("kernel_scale", 8.0)),
        almost_period_search=_box(an.get("almost_period_search", [[0.0, 500.0]] * d), d, "analysis.almost_period_search"),
        verify_window=_box(an.get("verify_window", [[0.0, 200.0]] * d), d, "analysis.verify_window"),
        dual_search_radius=int(an.get("dual_search_radius", 5)),
        top_autocorr=int(an.get("top_autocorr", 15)),
        top_peaks=int(an.get("top_peaks", 10)),
    )
    if analysis.kernel_scale <= 0:
        raise ValidationError("must be positive", "analysis.kernel_scale")

    tol = {"density": 0.01, "autocorr": 0.02, "diffraction": 0.03}
    tol.update(data.get("tolerances", {}))
    for name, v in tol.items():
        if v <= 0:
            raise ValidationError("must be positive", f"tolerances.{name}")

    out = data.get("output", {})
    out_dir = Path(out.get("directory", "out"))
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir

    return RunConfig(
        scheme=scheme,
        search_radius=int(sch.get("search_radius", 100)),
        coverage_eps=float(sch.get("coverage_eps", 0.05)),
        allow_nondense=bool(sch.get("allow_nondense", False)),
        weight=weight,
        decoration=decoration,
        boxes=boxes,
        thresholds=th,
        analysis=analysis,
        tolerances=tol,
        output_dir=out_dir,
        formats=tuple(out.get("formats", ["csv", "json"])),
        raw=data,
    )


def parse_config(path) -> RunConfig:
    """Read and validate a JSON config file.

    Raises
    ------
    ParseError
        Unreadable file or malformed JSON (message carries line/column).
    ValidationError
        Schema or domain violation; ``field`` holds the dotted path.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(exc), str(path)) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from None
    return load_config(data, base_dir=None)
