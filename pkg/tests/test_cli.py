"""Tests for the command-line front end and its result documents."""

import json
import math

import numpy as np
import pytest

from oscphase import cli
from oscphase.cli import main
from oscphase.errors import NoConvergence
from oscphase.model import SymmetricPotential, turning_point
from oscphase.serialize import (
    config_metadata,
    csv_document,
    format_float,
    json_document,
)

QUARTIC_E0 = 0.5301810452420914497
QUARTIC_E0_TEXT = "0.53018104524209145"
OCTIC_E0_TEXT = "0.6129100569019602"

# Frozen regression values for the closed-form quantization commands.
DUNHAM_STIELTJES_K3 = 0.48333398239778708
AIRY_QUARTIC_E0 = 0.48004030099416151


def run_ok(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    assert code == 0, captured.err
    return captured.out


def run_fail(argv, capsys, code):
    got = main(argv)
    captured = capsys.readouterr()
    assert got == code, (got, captured.err)
    record = json.loads(captured.err)
    assert set(record["error"]) == {"type", "message"}
    return record["error"]


def metadata_of(text):
    entries = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        key, _, value = line[2:].partition(" = ")
        entries[key] = value
    return entries


def columns_of(text):
    lines = [l for l in text.splitlines() if l and not l.startswith("#")]
    names = lines[0].split(",")
    data = np.array([[float(v) for v in row.split(",")] for row in lines[1:]])
    return {name: data[:, i] for i, name in enumerate(names)}


@pytest.fixture(scope="module")
def outdir(tmp_path_factory):
    return tmp_path_factory.mktemp("cli_docs")


@pytest.fixture(scope="module")
def harmonic_phase(outdir):
    out = outdir / "harmonic_phase.csv"
    assert main(["phase", "--potential", "2:0.5", "--energy", "0.5",
                 "--with-semiclassical", "--out", str(out)]) == 0
    return out.read_text()


@pytest.fixture(scope="module")
def quartic_phase(outdir):
    out = outdir / "quartic_phase.csv"
    assert main(["phase", "--potential", "4:0.5", "--energy", QUARTIC_E0_TEXT,
                 "--with-semiclassical", "--out", str(out)]) == 0
    return out.read_text()


@pytest.fixture(scope="module")
def octic_phase(outdir):
    out = outdir / "octic_phase.csv"
    assert main(["phase", "--potential", "8:0.5", "--energy", OCTIC_E0_TEXT,
                 "--with-semiclassical", "--out", str(out)]) == 0
    return out.read_text()


@pytest.fixture(scope="module")
def quartic_sweep(outdir):
    out = outdir / "quartic_sweep.csv"
    assert main(["sweep", "--potential", "4:0.5", "--e-min", "0.4",
                 "--e-max", "3.0", "--samples", "6", "--with-semiclassical",
                 "--out", str(out)]) == 0
    return out.read_text()


class TestQuantize:
    def test_qlm_json_document(self, capsys):
        out = run_ok(["quantize", "--potential", "4:0.5", "--levels", "0",
                      "--method", "qlm"], capsys)
        doc = json.loads(out)
        assert doc["artifact"]["name"] == "oscphase"
        assert doc["source"] == "oscphase"
        assert doc["potential"] == "4:0.5"
        assert doc["method"] == "qlm"
        assert doc["config"]["levels"] == "0"
        (entry,) = doc["eigenvalues"]
        assert entry["n"] == 0
        assert entry["E"] == pytest.approx(QUARTIC_E0, abs=1e-9)

    def test_wkb_ladder_csv(self, capsys):
        out = run_ok(["quantize", "--potential", "2:0.5", "--levels", "0-5",
                      "--method", "wkb", "--format", "csv"], capsys)
        cols = columns_of(out)
        assert list(cols["n"]) == [0, 1, 2, 3, 4, 5]
        assert np.allclose(cols["energy"], np.arange(6) + 0.5, atol=1e-9)

    def test_dunham_with_terminant(self, capsys):
        out = run_ok(["quantize", "--potential", "4:0.5", "--levels", "0",
                      "--method", "dunham", "--kmax", "3",
                      "--terminant", "stieltjes"], capsys)
        E = json.loads(out)["eigenvalues"][0]["E"]
        assert E == pytest.approx(DUNHAM_STIELTJES_K3, abs=1e-12)
        assert round(E, 3) == 0.483

    def test_airy_method(self, capsys):
        out = run_ok(["quantize", "--potential", "4:0.5", "--levels", "0",
                      "--method", "airy"], capsys)
        E = json.loads(out)["eigenvalues"][0]["E"]
        assert E == pytest.approx(AIRY_QUARTIC_E0, abs=1e-12)

    def test_oracle_method_sets_source(self, capsys):
        out = run_ok(["quantize", "--potential", "2:0.5", "--levels", "0",
                      "--method", "oracle"], capsys)
        doc = json.loads(out)
        assert doc["source"] == "oracle"
        assert doc["eigenvalues"][0]["E"] == pytest.approx(0.5, abs=1e-9)

    def test_level_selectors(self, capsys):
        out = run_ok(["quantize", "--potential", "2:0.5", "--levels", "0,3-4",
                      "--method", "wkb", "--format", "csv"], capsys)
        assert list(columns_of(out)["n"]) == [0, 3, 4]

    def test_reversed_level_range_rejected(self, capsys):
        err = run_fail(["quantize", "--potential", "2:0.5", "--levels", "3-1",
                        "--method", "wkb"], capsys, 2)
        assert err["type"] == "ConfigError"


class TestPhase:
    def test_harmonic_boundary_derivative(self, harmonic_phase):
        meta = metadata_of(harmonic_phase)
        cols = columns_of(harmonic_phase)
        target = 2.0 / math.sqrt(math.pi)
        assert abs(cols["dsigma"][0] - target) / target < 5e-3
        assert float(meta["bc_value"]) == cols["dsigma"][0]
        assert float(meta["ntilde"]) == pytest.approx(1.0, abs=1e-9)
        # At an eigenvalue the primitive phase agrees with the quantum one
        # at the symmetry point: both equal pi/2 here.
        assert cols["wkb_phase"][0] == pytest.approx(cols["sigma"][0], abs=1e-9)

    def test_base_columns_without_flag(self, capsys):
        out = run_ok(["phase", "--potential", "2:0.5", "--energy", "0.5"],
                     capsys)
        cols = columns_of(out)
        assert list(cols) == ["x", "sigma", "dsigma", "alpha", "re_M", "im_M"]

    def test_semiclassical_columns(self, quartic_phase):
        cols = columns_of(quartic_phase)
        assert list(cols) == [
            "x", "sigma", "dsigma", "alpha", "re_M", "im_M",
            "p", "wkb_phase", "xi0", "sigma_sc", "dsigma_sc",
        ]

    def test_quantum_phase_accumulates_beyond_turning_point(
        self, quartic_phase
    ):
        cols = columns_of(quartic_phase)
        t2 = turning_point(SymmetricPotential({4: 0.5}), QUARTIC_E0).t2
        at_t2 = int(np.searchsorted(cols["x"], t2))
        assert cols["sigma"][-1] == pytest.approx(math.pi, abs=1e-9)
        # Nearly a quarter of the total phase arrives past the turning
        # point, and the final value tops the primitive-phase ceiling
        # S_total + pi/4, which saturates at t2.
        assert cols["sigma"][-1] - cols["sigma"][at_t2] > 0.6
        assert cols["sigma"][-1] - np.nanmax(cols["wkb_phase"]) > 0.4
        beyond = cols["x"] > t2
        assert np.all(np.isnan(cols["p"][beyond]))
        assert np.all(np.isnan(cols["wkb_phase"][beyond]))
        assert not np.any(np.isnan(cols["sigma"]))

    def test_octic_airy_derivative_dips_at_origin(self, octic_phase):
        cols = columns_of(octic_phase)
        t2 = turning_point(
            SymmetricPotential({8: 0.5}), float(OCTIC_E0_TEXT)
        ).t2
        # The boundary series of a pure power well collapses to p(0), so
        # the quantum derivative starts exactly on the classical momentum.
        assert cols["dsigma"][0] == pytest.approx(cols["p"][0], abs=1e-12)
        quarter = int(np.searchsorted(cols["x"], 0.25 * t2))
        half = int(np.searchsorted(cols["x"], 0.5 * t2))
        assert cols["dsigma_sc"][0] < cols["dsigma_sc"][quarter]
        assert cols["dsigma_sc"][0] < cols["dsigma_sc"][half]

    def test_json_format_carries_columns(self, capsys):
        out = run_ok(["phase", "--potential", "2:0.5", "--energy", "0.5",
                      "--format", "json", "--with-semiclassical"], capsys)
        doc = json.loads(out)
        assert doc["energy"] == 0.5
        assert doc["diagnostics"]["iterations"] <= 10
        assert len(doc["columns"]["sigma"]) == len(doc["columns"]["x"])
        # Forbidden-region momenta serialize as null, not NaN.
        assert doc["columns"]["p"][-1] is None


class TestSweep:
    def test_csv_schema(self, quartic_sweep):
        meta = metadata_of(quartic_sweep)
        cols = columns_of(quartic_sweep)
        assert meta["source"] == "oscphase"
        assert meta["potential"] == "4:0.5"
        assert meta["bc_method"] == "asymptotic_series"
        assert meta["config_samples"] == "6"
        assert list(cols) == [
            "energy", "ntilde", "iterations", "milne_residual", "nsc",
        ]
        assert np.all(np.diff(cols["ntilde"]) > 0.0)
        assert float(meta["eigenvalue_0"]) == pytest.approx(
            QUARTIC_E0, abs=1e-8
        )

    def test_first_order_overcounts_for_stiff_wells(self, quartic_sweep):
        # The first-order level ladder of the quartic sits too low, so at
        # fixed energy the first-order oscillation number sits too high.
        cols = columns_of(quartic_sweep)
        assert np.all(cols["nsc"] > cols["ntilde"])

    def test_json_schema(self, capsys):
        out = run_ok(["sweep", "--potential", "2:0.5", "--e-min", "0.4",
                      "--e-max", "2.0", "--samples", "4",
                      "--format", "json"], capsys)
        doc = json.loads(out)
        for key in ("potential", "bc_method", "grid", "ntilde",
                    "eigenvalues", "diagnostics"):
            assert key in doc
        assert len(doc["grid"]) == 4
        assert len(doc["ntilde"]) == 4
        assert len(doc["diagnostics"]["iterations"]) == 4
        assert len(doc["diagnostics"]["residuals"]) == 4
        assert doc["eigenvalues"][0]["n"] == 0
        assert doc["eigenvalues"][0]["E"] == pytest.approx(0.5, abs=1e-8)

    def test_lambda_family_documents(self, outdir, capsys):
        fam = outdir / "family"
        run_ok(["sweep", "--lambdas", "0.1,5", "--e-min", "0.5",
                "--e-max", "2.0", "--samples", "4", "--out", str(fam)],
               capsys)
        names = sorted(p.name for p in fam.iterdir())
        assert names == ["sweep_lambda_0.1.csv", "sweep_lambda_5.csv"]
        meta = metadata_of((fam / "sweep_lambda_0.1.csv").read_text())
        assert meta["potential"] == "2:0.5,10:0.05"
        assert float(meta["coupling"]) == 0.1

    def test_lambda_family_requires_out_directory(self, capsys):
        err = run_fail(["sweep", "--lambdas", "0.1", "--e-min", "0.5",
                        "--e-max", "2.0", "--samples", "4"], capsys, 2)
        assert "--out" in err["message"]

    def test_parallel_matches_sequential(self, quartic_sweep, outdir):
        out = outdir / "parallel_sweep.csv"
        assert main(["sweep", "--potential", "4:0.5", "--e-min", "0.4",
                     "--e-max", "3.0", "--samples", "6",
                     "--with-semiclassical", "--jobs", "2",
                     "--out", str(out)]) == 0
        seq = columns_of(quartic_sweep)
        par = columns_of(out.read_text())
        assert np.max(np.abs(seq["ntilde"] - par["ntilde"])) < 1e-10


class TestOracleAndCompare:
    def test_oracle_document(self, capsys):
        out = run_ok(["oracle", "--potential", "2:0.5", "--levels", "0-1",
                      "--format", "csv"], capsys)
        assert metadata_of(out)["source"] == "oracle"
        cols = columns_of(out)
        assert np.allclose(cols["energy"], [0.5, 1.5], atol=1e-9)

    def test_compare_table(self, capsys):
        out = run_ok(["compare", "--potential", "4:0.5", "--levels", "0",
                      "--methods", "qlm,oracle"], capsys)
        cols = columns_of(out)
        assert list(cols) == ["n", "qlm", "oracle"]
        assert abs(cols["qlm"][0] - cols["oracle"][0]) < 1e-9

    def test_compare_default_methods(self, capsys):
        out = run_ok(["compare", "--potential", "2:0.5", "--levels", "1",
                      "--methods", "wkb,dunham,airy"], capsys)
        assert list(columns_of(out)) == ["n", "wkb", "dunham", "airy"]


class TestConfigResolution:
    def test_config_file_supplies_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# comment\npotential = 2:0.5\nlevels = 0\n"
            "method = wkb\nformat = csv\n"
        )
        out = run_ok(["quantize", "--config", str(cfg)], capsys)
        assert columns_of(out)["energy"][0] == pytest.approx(0.5, abs=1e-9)

    def test_flags_override_config_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("potential = 2:0.5\nlevels = 0\nmethod = wkb\n")
        out = run_ok(["quantize", "--config", str(cfg),
                      "--method", "airy", "--potential", "4:0.5"], capsys)
        doc = json.loads(out)
        assert doc["method"] == "airy"
        assert doc["eigenvalues"][0]["E"] == pytest.approx(
            AIRY_QUARTIC_E0, abs=1e-12
        )

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("potentail = 2:0.5\n")
        err = run_fail(["quantize", "--config", str(cfg), "--levels", "0"],
                       capsys, 2)
        assert "potentail" in err["message"]

    def test_malformed_config_line_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("just words\n")
        err = run_fail(["quantize", "--config", str(cfg), "--levels", "0",
                        "--potential", "2:0.5"], capsys, 2)
        assert "key = value" in err["message"]

    @pytest.mark.parametrize("argv", [
        ["quantize", "--potential", "4:abc", "--levels", "0"],
        ["quantize", "--potential", "2:0.5"],
        ["phase", "--potential", "2:0.5"],
        ["phase", "--potential", "2:0.5", "--energy", "-1"],
        ["sweep", "--potential", "2:0.5", "--e-min", "1.0",
         "--e-max", "2.0", "--samples", "3"],
        ["sweep", "--e-min", "1.0", "--e-max", "2.0", "--samples", "4"],
        ["sweep", "--potential", "2:0.5", "--lambdas", "1",
         "--e-min", "1.0", "--e-max", "2.0", "--samples", "4"],
        ["quantize", "--potential", "2:0.5", "--levels", "0",
         "--hbar", "-1"],
        ["quantize", "--potential", "2:0.5", "--levels", "0", "--tol", "0"],
        ["quantize", "--potential", "2:0.5", "--levels", "0",
         "--jobs", "0"],
        ["phase", "--potential", "2:0.5", "--energy", "0.5",
         "--grid-points", "8"],
        ["phase", "--potential", "2:0.5", "--energy", "0.5",
         "--xmax-factor", "0.9"],
    ])
    def test_config_errors_exit_2(self, argv, capsys):
        run_fail(argv, capsys, 2)

    def test_bad_flag_choice_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["quantize", "--potential", "2:0.5", "--levels", "0",
                  "--bc", "bogus"])
        assert exc.value.code == 2


class TestFailureReporting:
    def test_unsupported_correction_order_exits_3(self, capsys):
        err = run_fail(["quantize", "--potential", "2:0.5,10:500",
                        "--levels", "0", "--method", "dunham",
                        "--kmax", "8"], capsys, 3)
        assert "order" in err["message"]

    def test_solver_failure_exits_3(self, capsys, monkeypatch):
        def explode(*args, **kwargs):
            raise NoConvergence("5 of 5 sweep nodes failed")

        monkeypatch.setattr(cli, "oscillation_number_sweep", explode)
        err = run_fail(["sweep", "--potential", "2:0.5", "--e-min", "0.5",
                        "--e-max", "2.0", "--samples", "5"], capsys, 3)
        assert err["type"] == "NoConvergence"

    def test_identical_runs_are_byte_identical(self, tmp_path):
        argv = ["quantize", "--potential", "2:0.5", "--levels", "0-3",
                "--method", "wkb", "--format", "csv"]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestSerialize:
    def test_format_float_round_trips(self):
        for x in (1 / 3, math.pi, 0.1, 2.0 / math.sqrt(math.pi), 1e-300):
            assert float(format_float(x)) == x

    def test_csv_document_validates_columns(self):
        with pytest.raises(ValueError, match="common length"):
            csv_document({}, {"a": np.arange(3), "b": np.arange(2)})
        with pytest.raises(ValueError, match="at least one column"):
            csv_document({}, {})

    def test_json_document_is_strict(self):
        text = json_document({
            "x": np.array([1.0, math.nan]),
            "flag": np.bool_(True),
            "n": np.int64(3),
        })
        doc = json.loads(text)
        assert doc == {"x": [1.0, None], "flag": True, "n": 3}

    def test_config_metadata_canonical_forms(self):
        meta = config_metadata(
            {"methods": ["qlm", "wkb"], "flag": True, "hbar": 1.0}
        )
        assert meta == {
            "config_methods": "qlm,wkb",
            "config_flag": "true",
            "config_hbar": "1",
        }
