"""Configuration-driven command-line front end.

Every run resolves a flat key=value configuration (file keys overridden by
command-line flags), validates it against the command's schema (unknown keys
are rejected with their line number), executes, and writes its artifacts plus
a ``manifest.json`` echoing the resolved configuration and its hash.  Nothing
in any output depends on wall time, so a fixed seed makes reruns
byte-identical.

Commands: derive, fluxonium, polariton, spectrum, splitting-sweep, overlap,
disorder, fit-beta.  The default output directory comes from
``FLUXCHAIN_OUTDIR`` (falling back to ./runs).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asymptotics, circuit, disorder, fluxonium, hopfield, manybody

ENV_OUTDIR = "FLUXCHAIN_OUTDIR"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BetaFit:
    """Least-squares slope of log(delta/omega_F) against g^2."""

    n_atoms: int
    beta: float
    intercept: float
    g2_min: float
    g2_max: float
    residual_rms: float
    point_count: int


def fit_beta(records, floor: float = manybody.NUMERICAL_FLOOR) -> BetaFit:
    """Fit the splitting decay exponent from converged sweep records.

    Only converged records with delta/omega above the numerical floor enter;
    excluded floor points are warned about.  Requires at least four usable
    points whose g^2 values span a factor of two.
    """
    usable = []
    for rec in records:
        if not rec.converged:
            continue
        if rec.delta_over_omega_atom <= 10.0 * floor:
            warnings.warn(
                f"record at g={rec.g} sits at the numerical floor; excluded",
                stacklevel=2,
            )
            continue
        usable.append(rec)
    gs = sorted({rec.g for rec in usable})
    if len(usable) < 4 or len(gs) < 4:
        raise ConfigError("need at least four converged records at distinct g")
    g2 = np.array([rec.g**2 for rec in usable])
    if g2.max() < 2.0 * g2.min():
        raise ConfigError("g^2 range must span at least a factor of two")
    y = np.log(np.array([rec.delta_over_omega_atom for rec in usable]))
    slope, intercept = np.polyfit(g2, y, 1)
    resid = y - (slope * g2 + intercept)
    n = usable[0].n_atoms
    return BetaFit(
        n_atoms=n, beta=float(-slope), intercept=float(intercept),
        g2_min=float(g2.min()), g2_max=float(g2.max()),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        point_count=len(usable),
    )


# --------------------------------------------------------------------------
# configuration handling


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config_file(path: str) -> dict:
    """Parse a `key = value` document; values are JSON scalars or lists."""
    out = {}
    lines = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in out:
                raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
            out[key] = _parse_value(val.strip())
            lines[key] = lineno
    out["__lines__"] = lines
    return out


#: per-command schema: key -> (type converter, default); required when default
#: is the REQUIRED sentinel
_REQUIRED = object()


def _float_list(v):
    if isinstance(v, (int, float)):
        return [float(v)]
    return [float(x) for x in v]


def _int_list(v):
    if isinstance(v, int):
        return [int(v)]
    return [int(x) for x in v]


_COMMON = {
    "seed": (int, 20260810),
    "jobs": (int, 1),
    "out_dir": (str, None),
}

SCHEMAS: dict[str, dict] = {
    "derive": {
        "L1": (float, _REQUIRED), "L2": (float, _REQUIRED),
        "l_r": (float, _REQUIRED), "c_r": (float, _REQUIRED),
        "a": (float, _REQUIRED), "N": (int, _REQUIRED),
        "E_J": (float, _REQUIRED), "E_CJ": (float, _REQUIRED),
    },
    "fluxonium": {
        "E_J": (float, _REQUIRED), "E_CJ": (float, _REQUIRED),
        "E_LJ": (float, _REQUIRED),
        "grid_points": (int, 801),
        "grid_half_width": (float, 6.0 * math.pi),
        "n_levels": (int, 4),
        "wavefunction_csv": (bool, False),
    },
    "polariton": {
        "omega_k": (float, _REQUIRED), "omega_F": (float, _REQUIRED),
        "rabi_min": (float, 0.0), "rabi_max": (float, _REQUIRED),
        "rabi_count": (int, 21),
    },
    "spectrum": {
        "N": (int, _REQUIRED), "N_m": (int, _REQUIRED),
        "g": (float, _REQUIRED),
        "omega_F": (float, 1.0), "count": (int, 10),
        "sector": (str, "full"), "tol": (float, 1e-10),
        "safety": (float, 4.0), "even_floor": (int, 4),
        "cutoffs": (_int_list, None),
    },
    "splitting-sweep": {
        "N": (int, _REQUIRED), "N_m": (int, _REQUIRED),
        "g_grid": (_float_list, _REQUIRED),
        "omega_F": (float, 1.0),
        "safety": (float, 4.0), "even_floor": (int, 4),
        "tol": (float, 1e-3), "refine": (bool, True),
    },
    "overlap": {
        "N": (int, _REQUIRED), "N_m": (int, _REQUIRED),
        "g_grid": (_float_list, _REQUIRED),
        "safety": (float, 3.5), "even_floor": (int, 4),
        "tol": (float, 1e-10),
    },
    "disorder": {
        "N": (int, _REQUIRED), "N_m": (int, _REQUIRED),
        "g": (float, _REQUIRED),
        "amplitude": (float, 0.5), "count": (int, 100),
        "engine": (str, "exact"),
        "omega_F": (float, 1.0),
        "safety": (float, 4.0), "even_floor": (int, 4),
    },
    "fit-beta": {
        "records_csv": (str, _REQUIRED),
    },
}


def resolve_config(command: str, file_cfg: dict | None, overrides: dict) -> dict:
    """Merge file keys and overrides against the command schema."""
    schema = dict(SCHEMAS[command])
    schema.update(_COMMON)
    file_cfg = dict(file_cfg or {})
    lines = file_cfg.pop("__lines__", {})

    for key in file_cfg:
        if key not in schema:
            where = f" (line {lines[key]})" if key in lines else ""
            raise ConfigError(f"unknown key '{key}'{where} for command {command}")
    for key in overrides:
        if key not in schema:
            raise ConfigError(f"unknown key '{key}' for command {command}")

    resolved = {}
    for key, (conv, default) in schema.items():
        if key in overrides and overrides[key] is not None:
            raw = overrides[key]
        elif key in file_cfg:
            raw = file_cfg[key]
        elif default is _REQUIRED:
            raise ConfigError(f"missing required key '{key}' for {command}")
        else:
            resolved[key] = default
            continue
        try:
            resolved[key] = conv(raw) if raw is not None else None
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for '{key}': {raw!r} ({exc})") from exc
    return resolved


def config_hash(command: str, resolved: dict) -> str:
    # output location and worker count never affect results, so they stay
    # out of the hash; reruns of the same science hash identically
    salient = {k: v for k, v in resolved.items() if k not in ("out_dir", "jobs")}
    blob = json.dumps({"command": command, "config": salient},
                      sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# --------------------------------------------------------------------------
# output helpers


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path: str, header: list[str], rows: list[list],
              chash: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if chash:
            fh.write(f"# manifest: {chash}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_csv_rows(path: str) -> list[dict]:
    """Dict rows of a sweep CSV, skipping the manifest comment line."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [l for l in fh if not l.startswith("#")]
    return list(csv.DictReader(lines))


def write_json(path: str, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out_dir: str, command: str, resolved: dict,
                    artifacts: list[str]) -> None:
    write_json(os.path.join(out_dir, "manifest.json"), {
        "command": command,
        "config": {k: v for k, v in sorted(resolved.items())},
        "config_hash": config_hash(command, resolved),
        "artifacts": sorted(artifacts),
    })


# --------------------------------------------------------------------------
# command implementations


def _parallel_map(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _cmd_derive(cfg, out_dir, chash):
    raw = circuit.RawCircuit(
        L1=cfg["L1"], L2=cfg["L2"], l_r=cfg["l_r"], c_r=cfg["c_r"],
        a=cfg["a"], N=cfg["N"], E_J=cfg["E_J"], E_CJ=cfg["E_CJ"],
    )
    consts = circuit.derive_constants(raw)
    path = os.path.join(out_dir, "derive.json")
    write_json(path, consts.as_dict())
    return [path]


def _cmd_fluxonium(cfg, out_dir, chash):
    spec = fluxonium.FluxoniumSpec(
        E_J=cfg["E_J"], E_CJ=cfg["E_CJ"], E_LJ=cfg["E_LJ"],
        grid_half_width=cfg["grid_half_width"], grid_points=cfg["grid_points"],
    )
    levels = fluxonium.solve_levels(spec, n_levels=cfg["n_levels"])
    red = fluxonium.two_level_reduction(levels)
    path = os.path.join(out_dir, "fluxonium.json")
    write_json(path, {
        "config_hash": chash,
        "energies": [float(e) for e in levels.energies],
        "omega_F": levels.omega_F,
        "phi01": levels.phi01,
        "anharmonicity": red.anharmonicity,
        "two_level_ok": red.two_level_ok,
        "grid_shift": levels.grid_shift,
    })
    artifacts = [path]
    if cfg["wavefunction_csv"]:
        wf_path = os.path.join(out_dir, "wavefunctions.csv")
        rows = [
            [phi, psi0, psi1]
            for phi, psi0, psi1 in zip(
                levels.phi_grid, levels.wavefunctions[0], levels.wavefunctions[1]
            )
        ]
        write_csv(wf_path, ["phi", "psi0", "psi1"], rows, chash=chash)
        artifacts.append(wf_path)
    return artifacts


def _cmd_polariton(cfg, out_dir, chash):
    if cfg["rabi_count"] < 0:
        raise ConfigError("rabi_count must be non-negative")
    if cfg["rabi_count"] == 0:
        grid = []
        warnings.warn("empty rabi grid; writing empty table", stacklevel=2)
    else:
        grid = np.linspace(cfg["rabi_min"], cfg["rabi_max"], cfg["rabi_count"])
    rows = hopfield.branch_sweep(cfg["omega_k"], cfg["omega_F"], grid)
    path = os.path.join(out_dir, "polariton.csv")
    write_csv(
        path,
        ["Omega", "lower", "upper", "stable", "determinant"],
        [[r["Omega"], r["lower"], r["upper"], r["stable"], r["determinant"]]
         for r in rows],
        chash=chash,
    )
    return [path]


def _spec_from_cfg(cfg, g):
    kwargs = dict(safety=cfg["safety"], even_floor=cfg["even_floor"])
    if cfg.get("cutoffs"):
        kwargs["cutoffs"] = cfg["cutoffs"]
    return manybody.ManyBodySpec.from_coupling(
        cfg["N"], cfg["N_m"], g,
        omega_atoms=(cfg.get("omega_F", 1.0),) * cfg["N"],
        **kwargs,
    )


def _cmd_spectrum(cfg, out_dir, chash):
    spec = _spec_from_cfg(cfg, cfg["g"])
    res = manybody.lowest_spectrum(
        spec, sector=cfg["sector"], m=cfg["count"], tol=cfg["tol"]
    )
    path = os.path.join(out_dir, "spectrum.csv")
    write_csv(
        path,
        ["N", "N_m", "g", "sector", "level", "energy", "residual"],
        [[cfg["N"], cfg["N_m"], cfg["g"], res.sector, i,
          float(res.eigenvalues[i]), float(res.residual_norms[i])]
         for i in range(len(res.eigenvalues))],
        chash=chash,
    )
    return [path]


def _sweep_header(n_modes: int) -> list[str]:
    return (["N", "N_m", "g"] + [f"n_max_{k}" for k in range(1, n_modes + 1)]
            + ["E_even", "E_odd", "delta", "delta_over_omegaF", "converged"])


def _sweep_row(rec: manybody.SplittingRecord) -> list:
    return ([rec.n_atoms, rec.n_modes, rec.g] + list(rec.cutoffs)
            + [rec.e_even, rec.e_odd, rec.delta, rec.delta_over_omega_atom,
               rec.converged])


def _cmd_splitting_sweep(cfg, out_dir, chash):
    grid = cfg["g_grid"]
    if not grid:
        warnings.warn("empty g grid; writing empty sweep", stacklevel=2)
    def run_one(g):
        return manybody.ground_splitting(
            _spec_from_cfg(cfg, g), tol=cfg["tol"], refine=cfg["refine"]
        )
    records = _parallel_map(run_one, sorted(grid), cfg["jobs"])
    records.sort(key=lambda r: r.g)
    path = os.path.join(out_dir, "splitting_sweep.csv")
    write_csv(path, _sweep_header(cfg["N_m"]), [_sweep_row(r) for r in records],
              chash=chash)
    return [path]


def _cmd_overlap(cfg, out_dir, chash):
    rows = []
    for g in sorted(cfg["g_grid"]):
        spec = _spec_from_cfg(cfg, g)
        se = manybody.lowest_spectrum(spec, "even", 1, tol=cfg["tol"],
                                      with_vectors=True)
        so = manybody.lowest_spectrum(spec, "odd", 1, tol=cfg["tol"],
                                      with_vectors=True)
        full = manybody.BasisIndexer(spec, "full")
        pair = []
        for s in (se, so):
            vec = np.zeros(full.dimension, dtype=complex)
            vec[s.vectors[0].indexer.indices] = s.vectors[0].data
            pair.append(manybody.Wavefunction(full, vec))
        ov = asymptotics.subspace_overlap(
            tuple(pair),
            (asymptotics.asymptotic_vacuum(spec, +1),
             asymptotics.asymptotic_vacuum(spec, -1)),
        )
        amps = asymptotics.coherent_amplitudes(cfg["N"], cfg["N_m"], g)
        rows.append({
            "g": g,
            "fidelity": ov.fidelity,
            "cosines": list(ov.cosines),
            "amplitudes_abs": [float(abs(a)) for a in amps],
            "E_even": float(se.eigenvalues[0]),
            "E_odd": float(so.eigenvalues[0]),
        })
    beta = asymptotics.beta_exponent(cfg["N"], cfg["N_m"])
    n2 = float(cfg["N"] ** 2)
    path = os.path.join(out_dir, "overlap.json")
    write_json(path, {
        "config_hash": chash,
        "points": rows,
        "beta_exponent": beta,
        "beta_bounds_ok": 1.6 * n2 < beta < 2.1 * n2,
    })
    return [path]


def _cmd_disorder(cfg, out_dir, chash):
    base = _spec_from_cfg(cfg, cfg["g"])
    dspec = disorder.DisorderEnsembleSpec(
        base=base, amplitude=cfg["amplitude"], count=cfg["count"],
        seed=cfg["seed"],
    )
    stats = disorder.ensemble_splitting(dspec, engine=cfg["engine"],
                                        jobs=cfg["jobs"])
    csv_path = os.path.join(out_dir, "disorder.csv")
    write_csv(
        csv_path,
        ["realization", "seed", *(f"omega_F_{j}" for j in range(1, cfg["N"] + 1)),
         "delta"],
        [[r.realization, cfg["seed"], *r.omega_atoms, r.delta]
         for r in stats.records],
        chash=chash,
    )
    json_path = os.path.join(out_dir, "disorder_summary.json")
    write_json(json_path, {
        "config_hash": chash,
        "mean": stats.mean_delta, "std": stats.std_delta,
        "engine": stats.engine, "g": cfg["g"], "N": cfg["N"],
        "seed": stats.seed, "count": cfg["count"],
    })
    return [csv_path, json_path]


def _cmd_fit_beta(cfg, out_dir, chash):
    records = []
    for row in read_csv_rows(cfg["records_csv"]):
        n_modes = int(row["N_m"])
        records.append(manybody.SplittingRecord(
            n_atoms=int(row["N"]), n_modes=n_modes, g=float(row["g"]),
            cutoffs=tuple(int(row[f"n_max_{k}"]) for k in range(1, n_modes + 1)),
            e_even=float(row["E_even"]), e_odd=float(row["E_odd"]),
            delta=float(row["delta"]),
            delta_over_omega_atom=float(row["delta_over_omegaF"]),
            converged=row["converged"].strip().lower() == "true",
        ))
    fit = fit_beta(records)
    n2 = float(fit.n_atoms**2)
    path = os.path.join(out_dir, "fit_beta.json")
    write_json(path, {
        "config_hash": chash,
        "N": fit.n_atoms, "beta": fit.beta, "intercept": fit.intercept,
        "g2_min": fit.g2_min, "g2_max": fit.g2_max,
        "residual_rms": fit.residual_rms, "point_count": fit.point_count,
        "bounds": [1.6 * n2, 2.1 * n2],
        "bounds_ok": 1.6 * n2 < fit.beta < 2.1 * n2,
    })
    return [path]


_COMMANDS = {
    "derive": _cmd_derive,
    "fluxonium": _cmd_fluxonium,
    "polariton": _cmd_polariton,
    "spectrum": _cmd_spectrum,
    "splitting-sweep": _cmd_splitting_sweep,
    "overlap": _cmd_overlap,
    "disorder": _cmd_disorder,
    "fit-beta": _cmd_fit_beta,
}


def run(command: str, file_cfg: dict | None = None,
        overrides: dict | None = None) -> int:
    """Resolve, validate, execute and write artifacts plus the manifest."""
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command '{command}'")
    resolved = resolve_config(command, file_cfg, overrides or {})
    out_dir = resolved.get("out_dir") or os.environ.get(ENV_OUTDIR) or "runs"
    out_dir = os.path.join(out_dir, command)
    os.makedirs(out_dir, exist_ok=True)
    resolved["out_dir"] = out_dir
    chash = config_hash(command, resolved)
    artifacts = _COMMANDS[command](resolved, out_dir, chash)
    _write_manifest(out_dir, command, resolved, artifacts)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fluxchain",
        description="chain-of-junction-atoms resonator simulator",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, schema in SCHEMAS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key = value file")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--jobs", type=int, default=None)
        sp.add_argument("--out-dir", dest="out_dir", default=None)
        for key, (conv, _default) in schema.items():
            flag = "--" + key.replace("_", "-").lower()
            if conv is bool:
                sp.add_argument(flag, dest=key, default=None,
                                type=lambda s: s.lower() in ("1", "true", "yes"))
            elif conv in (_float_list, _int_list):
                sp.add_argument(flag, dest=key, default=None,
                                type=lambda s: json.loads(s))
            else:
                sp.add_argument(flag, dest=key, default=None, type=conv)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    command = args.command
    file_cfg = parse_config_file(args.config) if args.config else None
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "config") and v is not None
    }
    try:
        return run(command, file_cfg, overrides)
    except (ConfigError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
