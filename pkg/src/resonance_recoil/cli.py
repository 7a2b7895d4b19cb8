"""``resonance-recoil`` command-line front end.

Exit codes: 0 success, 1 configuration/validation error, 2 I/O error,
3 verification failure. Errors are reported on stderr as one JSON object.

Floats are written with Python's shortest round-trip ``repr``; runs with the
same configuration produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, dynamics, emission, verification
from .atoms import AtomPair, load_species, make_pair, species_file_digest
from .errors import ValidationError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3

PAIR_AXIS = (1.0, 0.0, 0.0)

DEFAULTS = {
    "species_file": None,
    "excited": "RB87_5P12",
    "ground": "K40_GS",
    "orientation": "fixed",
    "dipole_axis": None,
    "xmin": 0.5,
    "xmax": 20.0,
    "samples": 400,
    "x": 1.28,
    "ntheta": 181,
    "quad_order": emission.DEFAULT_ORDER,
    "format": "csv",
    "out": None,
    "seed": verification.DEFAULT_SEED,
}

COMMAND_KEYS = {
    "scan": ("xmin", "xmax", "samples"),
    "budget": ("x",),
    "emission": ("x", "ntheta", "quad_order"),
}
SHARED_KEYS = ("species_file", "excited", "ground", "orientation", "dipole_axis")


class ConfigError(ValidationError):
    pass


def _fmt(value) -> str:
    return repr(float(value))


def _parse_axis(text: str) -> list[float]:
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y,Z numbers, got {text!r}")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {text!r}")
    return parts


def _add_pair_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--species-file", metavar="PATH", help="species JSON file (default: bundled alkali D1 data)")
    p.add_argument("--excited", metavar="LABEL", help="label of the initially excited atom A")
    p.add_argument("--ground", metavar="LABEL", help="label of the ground-state atom B")
    p.add_argument("--orientation", choices=("fixed", "isotropic"))
    p.add_argument("--dipole-axis", type=_parse_axis, metavar="X,Y,Z",
                   help="dipole direction applied to both atoms (fixed orientation)")
    p.add_argument("--config", metavar="PATH", help="JSON file of option values; flags take precedence")


def _add_output_options(p: argparse.ArgumentParser, formats=("csv", "json")) -> None:
    p.add_argument("--format", choices=formats)
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonance-recoil",
        description="Resonant van der Waals force imbalance and directional emission of an atom pair.",
        argument_default=None,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="force, vacuum momentum and directionality versus k_A R")
    _add_pair_options(p)
    p.add_argument("--xmin", type=float, metavar="F")
    p.add_argument("--xmax", type=float, metavar="F")
    p.add_argument("--samples", type=int, metavar="N")
    _add_output_options(p)

    p = sub.add_parser("budget", help="one-photon emission-channel probabilities at one separation")
    _add_pair_options(p)
    p.add_argument("--x", type=float, metavar="F", help="k_A R")
    _add_output_options(p, formats=("json",))

    p = sub.add_parser("emission", help="angular interference density in the phi = 0 plane")
    _add_pair_options(p)
    p.add_argument("--x", type=float, metavar="F", help="k_A R")
    p.add_argument("--ntheta", type=int, metavar="N")
    p.add_argument("--quad-order", type=int, metavar="N")
    _add_output_options(p)

    p = sub.add_parser("verify", help="run the self-check suites")
    _add_pair_options(p)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--fast", action="store_true", help="closed-form checks only (default)")
    mode.add_argument("--oracle", action="store_true", help="also run the finite-box mode sums")
    p.add_argument("--seed", type=int, metavar="N", help="seed for random pair sampling")

    p = sub.add_parser("species", help="species registry utilities")
    species_sub = p.add_subparsers(dest="species_command", required=True)
    q = species_sub.add_parser("list", help="list species in the registry")
    q.add_argument("--species-file", metavar="PATH")
    q.add_argument("--config", metavar="PATH")
    _add_output_options(q)
    return parser


def effective_config(args: argparse.Namespace) -> dict:
    """Merge defaults, the optional config file and explicit flags (highest precedence)."""
    config = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {args.config}: invalid JSON ({exc.msg})", field="config")
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object", field="config")
        unknown = sorted(set(loaded) - set(DEFAULTS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}", field=unknown[0])
        config.update(loaded)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            config[key] = value
    _check_types(config)
    return config


_FLOAT_KEYS = ("xmin", "xmax", "x")
_INT_KEYS = ("samples", "ntheta", "quad_order", "seed")
_STR_KEYS = ("excited", "ground")
_CHOICES = {"orientation": ("fixed", "isotropic"), "format": ("csv", "json")}


def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _check_types(config: dict) -> None:
    for key in _FLOAT_KEYS:
        if not _is_number(config[key]):
            raise ConfigError(f"{key} must be a number, got {config[key]!r}", field=key)
        config[key] = float(config[key])
    for key in _INT_KEYS:
        v = config[key]
        if not (_is_number(v) and float(v).is_integer()):
            raise ConfigError(f"{key} must be an integer, got {v!r}", field=key)
        config[key] = int(v)
    for key in _STR_KEYS:
        if not isinstance(config[key], str):
            raise ConfigError(f"{key} must be a string, got {config[key]!r}", field=key)
    for key, allowed in _CHOICES.items():
        if config[key] not in allowed:
            raise ConfigError(f"{key} must be one of {', '.join(allowed)}, got {config[key]!r}", field=key)
    for key in ("species_file", "out"):
        if config[key] is not None and not isinstance(config[key], str):
            raise ConfigError(f"{key} must be a path string, got {config[key]!r}", field=key)
    axis = config["dipole_axis"]
    if axis is not None and not (isinstance(axis, list) and len(axis) == 3 and all(map(_is_number, axis))):
        raise ConfigError(f"dipole_axis must be three numbers, got {axis!r}", field="dipole_axis")


def _registry(config: dict):
    return load_species(config["species_file"])


def _species_digest(config: dict) -> str:
    return species_file_digest(config["species_file"])


def _lookup(registry, label: str, role: str):
    if label not in registry:
        known = ", ".join(sorted(registry))
        raise ConfigError(f"unknown species label {label!r} for {role} atom (known: {known})", field=role)
    return registry[label]


def build_pair(config: dict, registry, x: float = 1.0) -> AtomPair:
    A = _lookup(registry, config["excited"], "excited")
    B = _lookup(registry, config["ground"], "ground")
    if config["dipole_axis"] is not None:
        A = A.oriented(config["dipole_axis"])
        B = B.oriented(config["dipole_axis"])
    if not x > 0:
        raise ConfigError(f"x = k_A R must be positive, got {x!r}", field="x")
    return make_pair(A, B, x / A.k, PAIR_AXIS, orientation=config["orientation"])


def _metadata(command: str, config: dict, pair: AtomPair) -> dict:
    keys = SHARED_KEYS + COMMAND_KEYS.get(command, ())
    return {
        "tool": f"resonance-recoil {__version__}",
        "command": command,
        "species_file": config["species_file"] or "<bundled>",
        "species_file_sha256": _species_digest(config),
        "orientation": config["orientation"],
        "dipole_axis_A": pair.excited.dipole_axis.tolist(),
        "dipole_axis_B": pair.ground.dipole_axis.tolist(),
        "pair_axis": list(PAIR_AXIS),
        "config": {k: config[k] for k in keys},
    }


def _render_csv(metadata: dict, header: list[str], rows: list[list], summary: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(f"# metadata: {json.dumps(metadata, sort_keys=True)}\n")
    if summary is not None:
        buf.write(f"# summary: {json.dumps(summary, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def cmd_scan(config: dict) -> int:
    registry = _registry(config)
    pair = build_pair(config, registry)
    rows = dynamics.scan_separation(pair, config["xmin"], config["xmax"],
                                    config["samples"])
    header = ["x", "R_m", "F0_N", "P_inf_kg_m_s", "D_Hz", "D_over_GammaA"]
    table = [[r.x, r.R, r.F0_axial, r.P_axial, r.D, r.D_over_gamma] for r in rows]
    meta = _metadata("scan", config, pair)
    if config["format"] == "json":
        text = _render_json({"metadata": meta, "columns": header,
                             "rows": [[float(v) for v in row] for row in table]})
    else:
        text = _render_csv(meta, header, table)
    _emit(text, config["out"])
    return EXIT_OK


def cmd_budget(config: dict) -> int:
    registry = _registry(config)
    pair = build_pair(config, registry, config["x"])
    values = {k: float(v) for k, v in emission.budget(pair).as_dict().items()}
    values["x"] = pair.x
    payload = {"metadata": _metadata("budget", config, pair), "budget": values}
    _emit(_render_json(payload), config["out"])
    return EXIT_OK


def cmd_emission(config: dict) -> int:
    registry = _registry(config)
    pair = build_pair(config, registry, config["x"])
    ntheta = config["ntheta"]
    if ntheta < 3:
        raise ConfigError(f"ntheta must be an integer >= 3, got {ntheta!r}", field="ntheta")
    axes = emission.emission_frame(pair)
    theta = np.linspace(0.0, np.pi, ntheta)
    khat = np.outer(np.sin(theta), axes[0]) + np.outer(np.cos(theta), axes[2])
    khat /= np.linalg.norm(khat, axis=1, keepdims=True)
    values = emission.dpdomega(pair, khat)
    summary = {
        "sphere_integral": emission.integrate_dpdomega(pair, config["quad_order"]),
        "forward_minus_backward": emission.forward_backward(pair),
        "p_fg": emission.p_interference_fg(pair),
        "x": pair.x,
    }
    meta = _metadata("emission", config, pair)
    header = ["theta_rad", "dpdomega_per_sr"]
    table = [[t, v] for t, v in zip(theta, values)]
    if config["format"] == "json":
        text = _render_json({"metadata": meta, "summary": summary, "columns": header,
                             "rows": [[float(t), float(v)] for t, v in table]})
    else:
        text = _render_csv(meta, header, table, summary)
    _emit(text, config["out"])
    return EXIT_OK


def cmd_verify(config: dict, oracle: bool) -> int:
    registry = _registry(config)
    _lookup(registry, config["excited"], "excited")
    _lookup(registry, config["ground"], "ground")
    seed = int(config["seed"])
    checks = verification.fast_checks(registry, config["excited"], config["ground"], seed=seed)
    if oracle:
        checks += verification.oracle_checks(registry, config["excited"], config["ground"], seed=seed)
    for check in checks:
        print(check.line())
    graded = [c for c in checks if not c.informational]
    failed = [c for c in graded if not c.passed]
    print(f"{len(graded) - len(failed)}/{len(graded)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_species_list(config: dict) -> int:
    registry = _registry(config)
    header = ["label", "omega_rad_s", "wavelength_nm", "gamma_rad_s", "dipole_C_m", "source"]
    rows = []
    for label in sorted(registry):
        s = registry[label]
        rows.append([label, repr(s.omega), repr(2e9 * np.pi / s.k), repr(s.gamma),
                     repr(s.dipole_moment), s.source])
    if config["format"] == "json":
        text = _render_json({"species": [dict(zip(header, r)) for r in rows]})
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        text = buf.getvalue()
    _emit(text, config["out"])
    return EXIT_OK


def _fail(code: int, kind: str, message: str, field: str | None = None) -> int:
    payload = {"error": kind, "message": message}
    if field is not None:
        payload["field"] = field
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = effective_config(args)
        if args.command == "scan":
            return cmd_scan(config)
        if args.command == "budget":
            return cmd_budget(config)
        if args.command == "emission":
            return cmd_emission(config)
        if args.command == "verify":
            return cmd_verify(config, oracle=bool(args.oracle))
        return cmd_species_list(config)
    except ValidationError as exc:
        return _fail(EXIT_CONFIG, type(exc).__name__, str(exc), exc.field)
    except OSError as exc:
        return _fail(EXIT_IO, type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
