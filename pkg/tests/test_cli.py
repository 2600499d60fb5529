import json
import math
import os

import numpy as np
import pytest

from fluxchain.cli import (
    ConfigError,
    config_hash,
    fit_beta,
    main,
    parse_config_file,
    resolve_config,
    run,
)
from fluxchain.manybody import SplittingRecord


def synthetic_records(beta=8.0, gs=(0.8, 1.0, 1.2, 1.5), n=2, floor_g=None):
    recs = []
    for g in gs:
        d = math.exp(-beta * g * g)
        recs.append(SplittingRecord(
            n_atoms=n, n_modes=1, g=g, cutoffs=(10,),
            e_even=0.0, e_odd=d, delta=d, delta_over_omega_atom=d,
            converged=True,
        ))
    if floor_g is not None:
        recs.append(SplittingRecord(
            n_atoms=n, n_modes=1, g=floor_g, cutoffs=(10,),
            e_even=0.0, e_odd=1e-15, delta=1e-15,
            delta_over_omega_atom=1e-15, converged=True,
        ))
    return recs


class TestFitBeta:
    def test_exact_synthetic_slope(self):
        fit = fit_beta(synthetic_records(beta=8.0))
        assert fit.beta == pytest.approx(8.0, abs=1e-6)
        assert fit.residual_rms < 1e-10
        assert fit.point_count == 4

    def test_floor_points_excluded_with_warning(self):
        with pytest.warns(UserWarning):
            fit = fit_beta(synthetic_records(beta=8.0, floor_g=3.0))
        assert fit.point_count == 4

    def test_unconverged_records_ignored(self):
        recs = synthetic_records()
        recs[0].converged = False
        with pytest.raises(ConfigError):
            fit_beta(recs)  # only three converged left

    def test_needs_g2_span(self):
        recs = synthetic_records(gs=(1.0, 1.05, 1.1, 1.15))
        with pytest.raises(ConfigError):
            fit_beta(recs)


class TestConfigHandling:
    def test_parse_key_value_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# comment\nomega_k = 1.0\nrabi_max = 0.75\nrabi_count = 4\n")
        cfg = parse_config_file(str(p))
        assert cfg["omega_k"] == 1.0
        assert cfg["rabi_count"] == 4

    def test_unknown_key_named_with_line(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("omega_k = 1.0\nbogus = 2\n")
        with pytest.raises(ConfigError) as err:
            resolve_config("polariton", parse_config_file(str(p)), {})
        assert "bogus" in str(err.value)
        assert "line 2" in str(err.value)

    def test_malformed_line_reports_position(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("omega_k 1.0\n")
        with pytest.raises(ConfigError) as err:
            parse_config_file(str(p))
        assert ":1" in str(err.value)

    def test_missing_required_key(self):
        with pytest.raises(ConfigError) as err:
            resolve_config("polariton", {}, {})
        assert "omega_k" in str(err.value)

    def test_flags_override_file(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("omega_k = 1.0\nomega_F = 1.0\nrabi_max = 0.75\n")
        cfg = resolve_config("polariton", parse_config_file(str(p)),
                             {"rabi_max": 0.5})
        assert cfg["rabi_max"] == 0.5

    def test_hash_stable_under_key_order(self):
        a = config_hash("derive", {"x": 1, "y": 2})
        b = config_hash("derive", {"y": 2, "x": 1})
        assert a == b


class TestRun:
    def test_derive_matches_library(self, tmp_path):
        from fluxchain.circuit import RawCircuit, derive_constants

        cfg = dict(L1=1e-9, L2=1e-9, l_r=1e-6, c_r=4e-10, a=1e-3, N=5,
                   E_J=1e-24, E_CJ=3e-25)
        assert run("derive", None, {**cfg, "out_dir": str(tmp_path)}) == 0
        payload = json.loads((tmp_path / "derive" / "derive.json").read_text())
        ref = derive_constants(RawCircuit(**cfg)).as_dict()
        assert set(payload) == {"E_Lr", "E_LJ", "G", "E_Cr", "l_r_renorm", "chi"}
        for key, val in ref.items():
            assert payload[key] == pytest.approx(val, rel=1e-14)
        manifest = json.loads((tmp_path / "derive" / "manifest.json").read_text())
        assert manifest["command"] == "derive"
        assert manifest["config_hash"]

    def test_empty_sweep_grid_warns_and_succeeds(self, tmp_path):
        with pytest.warns(UserWarning):
            code = run("splitting-sweep", None,
                       {"N": 2, "N_m": 1, "g_grid": [], "out_dir": str(tmp_path)})
        assert code == 0
        body = (tmp_path / "splitting-sweep" / "splitting_sweep.csv").read_text()
        lines = body.strip().splitlines()
        assert len(lines) == 2  # manifest reference plus header
        assert lines[0].startswith("# manifest: ")
        assert lines[1].startswith("N,N_m,g,n_max_1,")

    def test_sweep_schema_and_determinism(self, tmp_path):
        args = {"N": 2, "N_m": 1, "g_grid": [0.9, 1.1], "seed": 5,
                "out_dir": str(tmp_path / "a")}
        run("splitting-sweep", None, args)
        args2 = dict(args, out_dir=str(tmp_path / "b"))
        run("splitting-sweep", None, args2)
        a = (tmp_path / "a" / "splitting-sweep" / "splitting_sweep.csv").read_bytes()
        b = (tmp_path / "b" / "splitting-sweep" / "splitting_sweep.csv").read_bytes()
        assert a == b
        header = a.decode().splitlines()[1].split(",")
        assert header == ["N", "N_m", "g", "n_max_1", "E_even", "E_odd",
                          "delta", "delta_over_omegaF", "converged"]

    def test_disorder_outputs_and_determinism(self, tmp_path):
        args = {"N": 2, "N_m": 1, "g": 1.0, "amplitude": 0.3, "count": 5,
                "engine": "analytic", "seed": 17, "out_dir": str(tmp_path / "a")}
        run("disorder", None, args)
        run("disorder", None, dict(args, out_dir=str(tmp_path / "b")))
        for name in ("disorder.csv", "disorder_summary.json"):
            a = (tmp_path / "a" / "disorder" / name).read_bytes()
            b = (tmp_path / "b" / "disorder" / name).read_bytes()
            assert a == b
        lines = (tmp_path / "a" / "disorder" / "disorder.csv").read_text().splitlines()
        assert lines[1] == "realization,seed,omega_F_1,omega_F_2,delta"

    def test_fit_beta_end_to_end(self, tmp_path):
        run("splitting-sweep", None,
            {"N": 2, "N_m": 1, "g_grid": [1.0, 1.2, 1.4, 1.6], "tol": 1e-2,
             "out_dir": str(tmp_path)})
        csv_path = tmp_path / "splitting-sweep" / "splitting_sweep.csv"
        run("fit-beta", None,
            {"records_csv": str(csv_path), "out_dir": str(tmp_path)})
        payload = json.loads((tmp_path / "fit-beta" / "fit_beta.json").read_text())
        assert payload["N"] == 2
        assert payload["bounds_ok"]
        assert 6.4 < payload["beta"] < 8.4

    def test_polariton_csv_schema(self, tmp_path):
        run("polariton", None,
            {"omega_k": 1.0, "omega_F": 1.0, "rabi_max": 0.8, "rabi_count": 5,
             "out_dir": str(tmp_path)})
        lines = (tmp_path / "polariton" / "polariton.csv").read_text().splitlines()
        assert lines[1] == "Omega,lower,upper,stable,determinant"
        assert len(lines) == 7
        assert lines[2].split(",")[3] == "true"
        assert lines[-1].split(",")[3] == "false"
        # the embedded manifest reference matches the manifest itself
        manifest = json.loads((tmp_path / "polariton" / "manifest.json").read_text())
        assert lines[0] == f"# manifest: {manifest['config_hash']}"

    def test_spectrum_command(self, tmp_path):
        run("spectrum", None,
            {"N": 2, "N_m": 1, "g": 0.5, "count": 4, "out_dir": str(tmp_path)})
        lines = (tmp_path / "spectrum" / "spectrum.csv").read_text().splitlines()
        assert lines[1] == "N,N_m,g,sector,level,energy,residual"
        energies = [float(l.split(",")[5]) for l in lines[2:]]
        assert energies == sorted(energies)

    def test_overlap_command(self, tmp_path):
        run("overlap", None,
            {"N": 2, "N_m": 1, "g_grid": [0.6, 1.0], "out_dir": str(tmp_path)})
        payload = json.loads((tmp_path / "overlap" / "overlap.json").read_text())
        assert payload["beta_bounds_ok"]
        fids = [p["fidelity"] for p in payload["points"]]
        assert fids[1] > fids[0]
        assert payload["config_hash"]

    def test_fluxonium_command_with_wavefunctions(self, tmp_path):
        run("fluxonium", None,
            {"E_J": 3.0, "E_CJ": 1.0, "E_LJ": 0.15, "wavefunction_csv": True,
             "out_dir": str(tmp_path)})
        payload = json.loads((tmp_path / "fluxonium" / "fluxonium.json").read_text())
        assert payload["two_level_ok"]
        lines = (tmp_path / "fluxonium" / "wavefunctions.csv").read_text().splitlines()
        assert lines[1] == "phi,psi0,psi1"
        assert len(lines) == 2 + 801

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            run("nonsense", None, {})

    def test_main_error_path_returns_nonzero(self, capsys):
        code = main(["polariton", "--rabi-max", "-1"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_main_happy_path(self, tmp_path):
        code = main([
            "polariton", "--omega-k", "1.0", "--omega-f", "1.0",
            "--rabi-max", "0.6", "--rabi-count", "3",
            "--out-dir", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "polariton" / "polariton.csv").exists()

    def test_outdir_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FLUXCHAIN_OUTDIR", str(tmp_path / "env"))
        run("polariton", None,
            {"omega_k": 1.0, "omega_F": 1.0, "rabi_max": 0.5, "rabi_count": 2})
        assert (tmp_path / "env" / "polariton" / "polariton.csv").exists()
