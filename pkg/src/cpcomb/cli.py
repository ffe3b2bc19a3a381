"""Command-line front end.

Usage::

    cpcomb <command> --config <path> [--out <dir>] [--workers <n>]

Exit codes: 0 success, 2 config error, 3 domain error, 4 tolerance
failure in ``compare``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .comb import generate_comb, hull_element
from .config import RunConfig, parse_config
from .errors import ConfigError, CpcombError
from .scheme import SchemeSpec, torus_point, validate_scheme
from .spectral import (
    almost_periods,
    autocorr_closed,
    autocorr_estimate,
    autocorr_estimate_table,
    density_closed,
    diffraction_peaks,
    fourier_bohr_estimate,
    fourier_bohr_many,
    injectivity_report,
    weyl_average,
)
from .weights import admissibility_certificate, truncation_radius

log = logging.getLogger("cpcomb")

COMMANDS = ("validate", "generate", "density", "autocorr", "diffract", "fourier-bohr",
            "almost-periods", "injectivity", "compare")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_TOLERANCE = 0, 2, 3, 4


def _validated(cfg: RunConfig) -> SchemeSpec:
    b = cfg.scheme
    return validate_scheme(b.d, b.m, b.basis, cfg.search_radius, cfg.coverage_eps, cfg.allow_nondense)


def _xi(cfg: RunConfig, scheme: SchemeSpec):
    return torus_point(scheme, cfg.analysis.torus_s, cfg.analysis.torus_k)


def cmd_validate(cfg, scheme, out, workers):
    result = {"scheme": scheme.validation.to_dict(), "det_abs": scheme.det_abs,
              "weight": cfg.weight.describe()}
    if not cfg.weight.non_smooth:
        cert = admissibility_certificate(cfg.weight, scheme.det_abs)
        result["admissibility"] = cert.to_dict()
        result["truncation_radius"] = truncation_radius(cfg.weight, cfg.thresholds.eps_trunc, scheme.det_abs)
    io.write_json(result, out / "certificate.json")
    return result, EXIT_OK


def cmd_generate(cfg, scheme, out, workers):
    comb = hull_element(scheme, cfg.weight, cfg.decoration, _xi(cfg, scheme), cfg.boxes.largest,
                        cfg.thresholds.eps_trunc)
    io.write_comb_csv(comb, out / "comb.csv")
    summary = {"atoms": len(comb), "internal_radius": comb.internal_radius, "trunc_eps": comb.trunc_eps,
               "box": comb.physical_box.intervals()}
    io.write_json(summary, out / "comb.json")
    return summary, EXIT_OK


def cmd_density(cfg, scheme, out, workers):
    closed = density_closed(scheme, cfg.weight, cfg.decoration)
    seq = weyl_average(scheme, cfg.weight, cfg.decoration, _xi(cfg, scheme), cfg.boxes, cfg.thresholds.eps_trunc)
    result = {"closed": closed, "weyl": seq, "box_volumes": [b.volume for b in cfg.boxes.boxes()]}
    io.write_json(result, out / "density.json")
    return result, EXIT_OK


def cmd_autocorr(cfg, scheme, out, workers):
    table = autocorr_closed(scheme, cfg.weight, cfg.decoration, cfg.analysis.displacement_range,
                            cfg.thresholds.autocorr_internal_cut)
    io.write_autocorr_csv(table, out / "autocorr.csv")
    comb = generate_comb(scheme, cfg.weight, cfg.decoration, cfg.boxes.largest, cfg.thresholds.eps_trunc)
    est = autocorr_estimate_table(comb, table, cfg.thresholds.match_tol, workers)
    io.write_autocorr_csv(est, out / "autocorr_estimate.csv")
    return {"entries": len(table), "box_volume": comb.physical_box.volume}, EXIT_OK


def cmd_diffract(cfg, scheme, out, workers):
    peaks = diffraction_peaks(scheme, cfg.weight, cfg.decoration, cfg.analysis.k_range,
                              cfg.thresholds.internal_cut, cfg.thresholds.intensity_floor)
    io.write_peaks_csv(peaks, out / "peaks.csv")
    return {"peaks": len(peaks), "threshold": peaks.threshold}, EXIT_OK


def cmd_fourier_bohr(cfg, scheme, out, workers):
    comb = hull_element(scheme, cfg.weight, cfg.decoration, _xi(cfg, scheme), cfg.boxes.largest,
                        cfg.thresholds.eps_trunc, allow_nonsmooth=True)
    rows = [{"k": k, "estimates": fourier_bohr_estimate(comb, k, cfg.boxes),
             "box_volumes": [b.volume for b in cfg.boxes.boxes()]} for k in cfg.analysis.fourier_bohr_k]
    io.write_json(rows, out / "fourier_bohr.json")
    return {"frequencies": len(rows)}, EXIT_OK


def cmd_almost_periods(cfg, scheme, out, workers):
    ap = almost_periods(scheme, cfg.weight, cfg.decoration, cfg.thresholds.almost_period_eps,
                        cfg.analysis.kernel_scale, cfg.analysis.almost_period_search, cfg.analysis.verify_window,
                        cfg.thresholds.eps_trunc)
    result = {"eps": cfg.thresholds.almost_period_eps, "delta": ap.delta, "candidates": ap.candidates,
              "max_gap": ap.max_gap,
              "periods": [{"t": t, "z": z, "verified_sup": s} for t, z, s in zip(ap.periods, ap.coords, ap.verified_sup)]}
    io.write_json(result, out / "almost_periods.json")
    return {"count": len(ap), "max_gap": ap.max_gap}, EXIT_OK


def cmd_injectivity(cfg, scheme, out, workers):
    rep = injectivity_report(scheme, cfg.weight, cfg.decoration, cfg.analysis.dual_search_radius)
    io.write_json(rep.to_dict(), out / "injectivity.json")
    return rep.to_dict(), EXIT_OK


def run_compare(cfg: RunConfig, scheme: SchemeSpec, workers: int = 1) -> dict:
    """Closed form against estimator for density, autocorrelation and diffraction."""
    f, dec, th, an = cfg.weight, cfg.decoration, cfg.thresholds, cfg.analysis
    box = cfg.boxes.largest
    report: dict = {"tolerances": cfg.tolerances}

    closed = density_closed(scheme, f, dec)
    est = weyl_average(scheme, f, dec, _xi(cfg, scheme), cfg.boxes, th.eps_trunc)[-1]
    report["density"] = [io.comparison_entry(closed, est, box.volume)]

    table = autocorr_closed(scheme, f, dec, an.displacement_range, th.autocorr_internal_cut).top(an.top_autocorr)
    comb = generate_comb(scheme, f, dec, box, th.eps_trunc)
    ests = autocorr_estimate(comb, table.displacements, th.match_tol, workers)
    report["autocorr"] = [dict(io.comparison_entry(c, e, box.volume), displacement=l)
                          for l, c, e in zip(table.displacements, table.eta, ests)]

    peaks = diffraction_peaks(scheme, f, dec, an.k_range, th.internal_cut, th.intensity_floor).top(an.top_peaks)
    dbox = an.diffraction_box
    dcomb = generate_comb(scheme, f, dec, dbox, th.eps_trunc)
    fb = fourier_bohr_many(dcomb, peaks.k, dbox, workers)
    report["diffraction"] = [dict(io.comparison_entry(float(i), float(abs(e) ** 2), dbox.volume), k=k, z=z)
                             for k, z, i, e in zip(peaks.k, peaks.z, peaks.intensity, fb)]

    ok = True
    for name in ("density", "autocorr", "diffraction"):
        worst = max((r["rel_err"] for r in report[name]), default=0.0)
        report[f"{name}_max_rel_err"] = worst
        report[f"{name}_pass"] = bool(worst <= cfg.tolerances[name])
        ok &= report[f"{name}_pass"]
    report["pass"] = bool(ok)
    return report


def cmd_compare(cfg, scheme, out, workers):
    report = run_compare(cfg, scheme, workers)
    io.write_json(report, out / "comparison.json")
    summary = {k: v for k, v in report.items() if k.endswith("_pass") or k.endswith("_rel_err") or k == "pass"}
    return summary, EXIT_OK if report["pass"] else EXIT_TOLERANCE


HANDLERS = {
    "validate": cmd_validate,
    "generate": cmd_generate,
    "density": cmd_density,
    "autocorr": cmd_autocorr,
    "diffract": cmd_diffract,
    "fourier-bohr": cmd_fourier_bohr,
    "almost-periods": cmd_almost_periods,
    "injectivity": cmd_injectivity,
    "compare": cmd_compare,
}


def _emit(obj, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(io._jsonable(obj), sort_keys=True) + "\n")


def run(command: str, config: RunConfig, out: Path | None = None, workers: int = 1) -> int:
    """Dispatch ``command``; returns the process exit code."""
    out = Path(out) if out is not None else config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    try:
        scheme = _validated(config)
        result, code = HANDLERS[command](config, scheme, out, workers)
    except CpcombError as exc:
        err = exc.to_dict()
        io.write_json(err, out / "error.json")
        _emit(err)
        return EXIT_DOMAIN
    _emit({"command": command, "result": result, "exit": code})
    return code


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cpcomb", description="Weighted cut-and-project combs and their spectra.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides the config)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        _emit(exc.to_dict())
        return EXIT_CONFIG
    except CpcombError as exc:
        _emit(exc.to_dict())
        return EXIT_DOMAIN
    np.seterr(all="ignore")
    return run(args.command, cfg, args.out, max(1, args.workers))


if __name__ == "__main__":
    sys.exit(main())
