"""Command-line interface: ``spinorder analyze | mi-scan | correlate``.

Every command writes a JSON report and/or CSV tables to ``--out-dir``.
Exit codes: 0 success, 2 valid run without an order/mode, 1 error.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .estimator import OrderParameterFinder
from .exceptions import ConvergenceError, InvalidInputError
from .hilbert import StateVector
from .mi import min_block_scan
from .models import (
    dimer_superposition,
    ghz_state,
    lanczos_ground_state,
    load_model,
    neel_ghz_state,
    polarized_state,
)
from .orderparam import OrderOperator, correlation_profile, extract_mode, named_operator

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_ERROR, EXIT_NO_ORDER = 0, 1, 2

log = logging.getLogger("spinorder")

DEFAULTS = {
    "model": None,
    "state": None,
    "sites": None,
    "max_block": 3,
    "mi_threshold": 1e-3,
    "rank_eps": 1e-10,
    "offdiag_eps": 1e-8,
    "seed": 0,
    "tol": 1e-10,
    "out_dir": "spinorder_out",
    "format": "both",
    "operator": None,
    "anchor": 0,
}

STATES = {
    "ghz": ghz_state,
    "neel": neel_ghz_state,
    "dimer": dimer_superposition,
    "up": polarized_state,
}


# ---------------------------------------------------------------- serialization


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _nums(xs):
    return [_num(x) for x in xs]


def _matrix_doc(m):
    m = np.asarray(m, dtype=np.complex128)
    return {"real": [_nums(row) for row in m.real], "imag": [_nums(row) for row in m.imag]}


def matrix_from_doc(doc):
    """Complex matrix from ``{"real": ..., "imag": ...}`` or a plain nested list."""
    if isinstance(doc, dict):
        if "matrix" in doc:
            return matrix_from_doc(doc["matrix"])
        if "real" not in doc:
            raise InvalidInputError("operator document needs 'real' (and optionally 'imag')")
        re_part = np.asarray(doc["real"], dtype=float)
        im_part = np.asarray(doc.get("imag", np.zeros_like(re_part)), dtype=float)
        if re_part.shape != im_part.shape:
            raise InvalidInputError("operator 'real' and 'imag' parts differ in shape")
        return re_part + 1j * im_part
    return np.asarray(doc, dtype=np.complex128)


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return "" if x is None else str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def _profile_doc(p):
    return {
        "label": p.label,
        "block_size": p.block_size,
        "anchor": p.anchor,
        "distances": list(p.distances),
        "connected": _nums(p.connected),
        "full": _nums(p.full),
        "local_anchor": _nums(p.local_i),
        "local_partner": _nums(p.local_j),
        "state_route_full": _nums(p.state_route),
        "route_deviation": _num(p.route_deviation),
        "contraction_q": _nums(p.contraction_q),
        "contraction_p": _nums(p.contraction_p),
    }


def _mode_doc(mode):
    if mode is None:
        return {"found": False, "reason": "fewer than 4 distances"}
    return {
        "found": mode.found,
        "k": mode.k,
        "k_over_pi": None if mode.k is None else mode.k / np.pi,
        "wavelength": mode.wavelength,
        "momenta": _nums(mode.momenta),
        "magnitudes": _nums(mode.magnitudes),
        "distances_used": list(mode.distances),
    }


# ---------------------------------------------------------------- inputs


def resolve_config(args):
    """Merge defaults, the optional ``--config`` file and explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise InvalidInputError("config file must hold a JSON object")
        for key, value in doc.items():
            key = key.replace("-", "_")
            if key not in DEFAULTS:
                raise InvalidInputError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if cfg["format"] not in ("json", "csv", "both"):
        raise InvalidInputError(f"format must be json, csv or both, got {cfg['format']!r}")
    return cfg


def build_state(cfg):
    """State vector plus an input descriptor for the report."""
    if (cfg["model"] is None) == (cfg["state"] is None):
        raise InvalidInputError("give exactly one of --model and --state")
    n = cfg["sites"]
    if cfg["state"] is not None:
        name = str(cfg["state"])
        if name.endswith(".npy"):
            state = StateVector.from_amplitudes(np.load(name))
            if n is not None and state.n_sites != int(n):
                raise InvalidInputError(f"state file has {state.n_sites} sites, --sites says {n}")
            return state, {"kind": "state", "name": os.path.basename(name), "n_sites": state.n_sites}
        key = name.lower()
        if key not in STATES:
            raise InvalidInputError(f"unknown state {name!r}; choose from {sorted(STATES)} or a .npy file")
        if n is None:
            raise InvalidInputError("--sites is required for named states")
        return STATES[key](int(n)), {"kind": "state", "name": key, "n_sites": int(n)}
    model = load_model(cfg["model"], None if n is None else int(n))
    log.info("solving %s on %d sites", model.name, model.n_sites)
    gs = lanczos_ground_state(model, tol=float(cfg["tol"]), seed=int(cfg["seed"]))
    desc = {
        "kind": "model",
        "name": model.name,
        "n_sites": model.n_sites,
        "model": model.to_dict(),
        "ground_state": {
            "energy": _num(gs.energy),
            "energy_per_site": _num(gs.energy / model.n_sites),
            "residual": _num(gs.residual),
            "matvecs": gs.iterations,
            "restarts": gs.restarts,
            "n_down": gs.n_down,
            "sector_dim": gs.sector_dim,
        },
    }
    return gs.state, desc


def load_operator(spec):
    """Operator from a preset name, a JSON file or an inline JSON document."""
    if spec is None:
        raise InvalidInputError("correlate needs --operator")
    text = str(spec)
    if os.path.exists(text):
        with open(text) as fh:
            doc = json.load(fh)
        label = doc.get("label", os.path.splitext(os.path.basename(text))[0]) if isinstance(doc, dict) else "custom"
        return OrderOperator(matrix_from_doc(doc), "custom", label)
    if text.lstrip().startswith(("{", "[")):
        return OrderOperator(matrix_from_doc(json.loads(text)), "custom", "custom")
    return named_operator(text)


def _thresholds(cfg):
    return {
        "max_block": int(cfg["max_block"]),
        "mi_threshold": float(cfg["mi_threshold"]),
        "rank_eps": float(cfg["rank_eps"]),
        "offdiag_eps": float(cfg["offdiag_eps"]),
        "lanczos_tol": float(cfg["tol"]),
        "seed": int(cfg["seed"]),
        "anchor": int(cfg["anchor"]),
    }


def _header(command, cfg, desc):
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "tool": {"name": "spinorder", "version": __version__, "numpy": np.__version__},
        "input": desc,
        "thresholds": _thresholds(cfg),
        "conventions": {
            "hamiltonian": "spin operators S = sigma/2",
            "order_operators": "Pauli matrices",
            "entropy": "bits",
            "block_ordering": "first block site is the most significant local bit; bit 0 = up",
        },
    }


def _prepare_out(cfg):
    out = cfg["out_dir"]
    os.makedirs(out, exist_ok=True)
    return out, cfg["format"] in ("json", "both"), cfg["format"] in ("csv", "both")


# ---------------------------------------------------------------- reports


def _mi_doc(scan):
    return {
        "block_size": scan.block_size,
        "threshold": scan.threshold,
        "long_distance": scan.long_distance,
        "rows": [
            {
                "block_size": p.block_size,
                "distances": list(p.distances),
                "values": _nums(p.values),
                "log10_distances": _nums(np.log10(p.distances)),
                "log10_values": [_log10(v) for v in p.values],
                "verdict": p.verdict,
            }
            for p in scan.profiles
        ],
    }


def _log10(x):
    return float(np.log10(x)) if x > 0 else None


def _mi_rows(scan):
    return [(m, r, v, float(np.log10(r)), _log10(v)) for p in scan.profiles for m, r, v in p.as_rows()]


MI_HEADER = ["m", "r", "mi", "log10_r", "log10_mi"]


def build_analysis_report(finder, cfg, desc):
    """JSON-ready dictionary describing a fitted :class:`OrderParameterFinder`."""
    doc = _header("analyze", cfg, desc)
    doc["mi_scan"] = _mi_doc(finder.block_scan_)
    doc["block_size"] = finder.block_size_
    doc["reference_distance"] = finder.reference_distance_
    if finder.spectrum_ is not None:
        doc["spectrum"] = {
            "eigenvalues": _nums(finder.spectrum_.eigenvalues),
            "groups": [list(g) for g in finder.spectrum_.groups],
            "modes": _matrix_doc(finder.spectrum_.eigenvectors),
        }
    else:
        doc["spectrum"] = None
    d = finder.diagonal_
    if d.found:
        doc["diagonal"] = {
            "found": True,
            "rank": d.rank,
            "groups": [list(g) for g in d.groups],
            "weights": _nums(d.weights),
            "method": d.method,
            "reference_correlation": _num(d.reference_correlation),
            "admits_order": d.admits_order,
            "operator": _matrix_doc(d.operator.matrix),
        }
    else:
        doc["diagonal"] = {"found": False, "reason": d.reason, "rank": d.rank}
    o = finder.offdiagonal_
    if o.found:
        doc["offdiagonal"] = {
            "found": True,
            "pairs": [
                {
                    "mu": p.mu,
                    "nu": p.nu,
                    "exchange": [_num(p.exchange.real), _num(p.exchange.imag)],
                    "pairing": [_num(p.pairing.real), _num(p.pairing.imag)],
                }
                for p in o.pairs
            ],
            "x_operator": _matrix_doc(o.x_operator.matrix),
            "y_operator": _matrix_doc(o.y_operator.matrix),
            "reference_correlations": {k: _num(v) for k, v in finder.cross_correlation_.items()},
        }
    else:
        doc["offdiagonal"] = {"found": False, "reason": o.reason}
    doc["correlations"] = {k: _profile_doc(p) for k, p in finder.profiles_.items()}
    doc["modes"] = {k: _mode_doc(m) for k, m in finder.modes_.items()}
    doc["verdict"] = {
        "order_found": finder.order_found_,
        "classification": finder.verdict_,
        "saturation_ratio": finder.saturation_ratio_value_,
        "saturation_threshold": finder.saturation_ratio,
        "weight_rule": None if not d.found else d.method,
    }
    return doc


def cmd_analyze(cfg):
    state, desc = build_state(cfg)
    finder = OrderParameterFinder(
        max_block=int(cfg["max_block"]),
        mi_threshold=float(cfg["mi_threshold"]),
        rank_eps=float(cfg["rank_eps"]),
        offdiag_eps=float(cfg["offdiag_eps"]),
        anchor=int(cfg["anchor"]),
    ).fit(state)
    doc = build_analysis_report(finder, cfg, desc)
    out, want_json, want_csv = _prepare_out(cfg)
    if want_json:
        write_json(os.path.join(out, "report.json"), doc)
        for label, op in finder.operators_.items():
            write_json(os.path.join(out, f"operator_{label}.json"), {"label": label, **_matrix_doc(op.matrix)})
    if want_csv:
        write_csv(os.path.join(out, "mi_table.csv"), MI_HEADER, _mi_rows(finder.block_scan_))
        if finder.spectrum_ is not None:
            weights = finder.diagonal_.weights if finder.diagonal_.found else [None] * finder.spectrum_.dim
            rows = [(i, float(p), None if w is None else float(w))
                    for i, (p, w) in enumerate(zip(finder.spectrum_.eigenvalues, weights))]
            write_csv(os.path.join(out, "spectrum.csv"), ["mode", "p", "weight"], rows)
        rows = [
            (label, r, c, f)
            for label, p in finder.profiles_.items()
            for r, c, f in zip(p.distances, p.connected, p.full)
        ]
        write_csv(os.path.join(out, "correlations.csv"), ["operator", "r", "connected", "full"], rows)
        rows = [
            (label, j, k, a)
            for label, mode in finder.modes_.items()
            if mode is not None
            for j, (k, a) in enumerate(zip(mode.momenta, mode.magnitudes))
        ]
        write_csv(os.path.join(out, "modes.csv"), ["operator", "index", "k", "magnitude"], rows)
    print(f"block size: {finder.block_size_}")
    for label, mode in finder.modes_.items():
        k = "none" if mode is None or mode.k is None else f"{mode.k / np.pi:.6g}*pi"
        print(f"mode[{label}]: {k}")
    print(f"verdict: {finder.verdict_}")
    return EXIT_OK if finder.order_found_ else EXIT_NO_ORDER


def cmd_mi_scan(cfg):
    state, desc = build_state(cfg)
    scan = min_block_scan(state, int(cfg["max_block"]), float(cfg["mi_threshold"]), int(cfg["anchor"]))
    doc = _header("mi-scan", cfg, desc)
    doc["mi_scan"] = _mi_doc(scan)
    out, want_json, want_csv = _prepare_out(cfg)
    if want_json:
        write_json(os.path.join(out, "mi_scan.json"), doc)
    if want_csv:
        write_csv(os.path.join(out, "mi_table.csv"), MI_HEADER, _mi_rows(scan))
    print(f"block size: {scan.block_size}")
    return EXIT_OK if scan.found else EXIT_NO_ORDER


def cmd_correlate(cfg):
    op = load_operator(cfg["operator"])
    state, desc = build_state(cfg)
    prof = correlation_profile(state, op, int(cfg["anchor"]))
    mode = extract_mode(prof) if len(prof.distances) >= 4 else None
    doc = _header("correlate", cfg, desc)
    doc["operator"] = {"label": op.label, **_matrix_doc(op.matrix)}
    doc["correlation"] = _profile_doc(prof)
    doc["mode"] = _mode_doc(mode)
    out, want_json, want_csv = _prepare_out(cfg)
    if want_json:
        write_json(os.path.join(out, "correlation.json"), doc)
    if want_csv:
        write_csv(
            os.path.join(out, "correlation.csv"),
            ["r", "C(r)", "full"],
            zip(prof.distances, prof.connected, prof.full),
        )
    for r, c in zip(prof.distances, prof.connected):
        print(f"C({r}) = {c:.12g}")
    found = mode is not None and mode.found
    print("mode: " + (f"{mode.k / np.pi:.6g}*pi" if found else "none"))
    return EXIT_OK if found else EXIT_NO_ORDER


# ---------------------------------------------------------------- parser


def _add_common(p):
    src = p.add_argument_group("input")
    src.add_argument("--model", help="preset (heisenberg, xxz(D), majumdar_ghosh) or model JSON path")
    src.add_argument("--state", help="analytic state (ghz, neel, dimer, up) or .npy amplitude file")
    src.add_argument("--sites", type=int, help="number of sites N")
    src.add_argument("--config", help="JSON file with the same keys as the flags; flags win")
    num = p.add_argument_group("numerics")
    num.add_argument("--max-block", dest="max_block", type=int, help="largest block size scanned (default 3)")
    num.add_argument("--mi-threshold", dest="mi_threshold", type=float, help="long-distance MI threshold in bits (default 1e-3)")
    num.add_argument("--rank-eps", dest="rank_eps", type=float, help="rank threshold (default 1e-10)")
    num.add_argument("--offdiag-eps", dest="offdiag_eps", type=float, help="coherence threshold (default 1e-8)")
    num.add_argument("--seed", type=int, help="Lanczos start-vector seed (default 0)")
    num.add_argument("--tol", type=float, help="Lanczos residual tolerance (default 1e-10)")
    num.add_argument("--anchor", type=int, help="first site of the reference block (default 0)")
    out = p.add_argument_group("output")
    out.add_argument("--out-dir", dest="out_dir", help="output directory (default spinorder_out)")
    out.add_argument("--format", choices=["json", "csv", "both"], help="report format (default both)")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")


def build_parser():
    parser = argparse.ArgumentParser(prog="spinorder", description="Order-parameter detection for spin-1/2 chains.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", help="full pipeline: MI scan, operators, correlations, modes")
    _add_common(p)
    p.set_defaults(func=cmd_analyze)
    p = sub.add_parser("mi-scan", help="mutual-information table MI(m, r)")
    _add_common(p)
    p.set_defaults(func=cmd_mi_scan)
    p = sub.add_parser("correlate", help="correlation profile and mode of a given operator")
    _add_common(p)
    p.add_argument("--operator", help="sigma_x, sigma_y, sigma_z, dimer, or JSON {'real', 'imag'} file/string")
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return args.func(cfg)
    except (InvalidInputError, ConvergenceError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
