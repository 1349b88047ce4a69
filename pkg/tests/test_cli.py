import csv
import json

import numpy as np
import pytest

from pwesim.cli import (ConfigError, config_from_raw, main, parse_config_text)
from pwesim.experiment import build_scene
from pwesim.geometry import unit
from pwesim.routing import WavefrontSpec, get_routes
from pwesim.scene import build_graph

SMALL_CONFIG = """\
# quick smoke sweep
d_r_values = [0.5]
m_sides = [2]
n_trials = 4
seed = 11
"""


def write_config(tmp_path, text=SMALL_CONFIG, name="cfg.txt"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestConfigParsing:
    def test_round_trip(self):
        raw = parse_config_text(SMALL_CONFIG)
        cfg = config_from_raw(raw)
        assert cfg.d_r_values == (0.5,)
        assert cfg.m_sides == (2,)
        assert cfg.n_trials == 4
        assert cfg.seed == 11

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key 'dr_values'"):
            parse_config_text("dr_values = [0.5]")

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate key 'seed'"):
            parse_config_text("seed = 1\nseed = 2")

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="'seed'"):
            parse_config_text("seed = one")

    def test_missing_equals(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config_text("just some words")

    def test_comments_and_blanks(self):
        raw = parse_config_text("\n# comment only\nseed = 3  # trailing\n")
        assert raw == {"seed": 3}

    def test_position_length(self):
        with pytest.raises(ConfigError, match="tx_position"):
            config_from_raw({"tx_position": [1.0, 2.0]})

    def test_seed_override(self):
        cfg = config_from_raw({"seed": 4}, seed_override=9)
        assert cfg.seed == 9

    def test_invalid_values_name_key(self):
        with pytest.raises(ConfigError, match="d_r_values"):
            config_from_raw({"d_r_values": [-1.0]})


class TestSweepCommand:
    def test_writes_all_outputs(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        for name in ("deviations.csv", "fits.csv", "histograms.csv",
                     "manifest.json"):
            assert (out / name).exists()
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 11
        import hashlib
        for name, digest in manifest["files"].items():
            assert digest == hashlib.sha256((out / name).read_bytes()).hexdigest()

    def test_bad_config_exit_1(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "d_r_values = [-1.0]\n")
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 1
        assert "d_r_values" in capsys.readouterr().err

    def test_scene_fault_exit_2(self, tmp_path):
        cfg = write_config(tmp_path, "d_r_values = [50.0]\nm_sides = [2]\n"
                                     "n_trials = 2\n")
        assert main(["sweep", "--config", str(cfg),
                     "--out", str(tmp_path / "out")]) == 2

    def test_rerun_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["sweep", "--config", str(cfg), "--out", str(out1)])
        main(["sweep", "--config", str(cfg), "--out", str(out2),
              "--threads", "3"])
        for name in ("deviations.csv", "fits.csv", "histograms.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_csv_well_formed(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        main(["sweep", "--config", str(cfg), "--out", str(out)])
        text = (out / "deviations.csv").read_text(encoding="utf-8")
        assert "\r" not in text
        with open(out / "deviations.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["d_r", "m_side", "trial", "antenna_index",
                           "phi_deg", "last_ris_id", "path_len"]
        assert all(len(r) == 7 for r in rows)
        # every float cell round-trips
        for r in rows[1:]:
            assert repr(float(r[4])) == r[4]

    def test_seed_flag_overrides(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        main(["sweep", "--config", str(cfg), "--out", str(out1), "--seed", "77"])
        main(["sweep", "--config", str(cfg), "--out", str(out2)])
        assert (out1 / "deviations.csv").read_bytes() != \
               (out2 / "deviations.csv").read_bytes()
        assert json.loads((out1 / "manifest.json").read_text())["seed"] == 77


class TestRouteCommand:
    def _spec_path(self, tmp_path, doas):
        path = tmp_path / "spec.json"
        path.write_text(json.dumps([[float(c) for c in d] for d in doas]))
        return path

    def test_matches_library(self, tmp_path):
        cfg = write_config(tmp_path)
        from pwesim.cli import load_config
        config = load_config(str(cfg))
        scene = build_scene(config.scene, 0.5, 2)
        graph = build_graph(scene)
        rng = np.random.default_rng(6)
        doas = []
        for _ in range(scene.rx.m):
            v = unit(rng.normal(size=3))
            if v[0] > 0:
                v = -v
            doas.append(v)
        spec = self._spec_path(tmp_path, doas)
        out = tmp_path / "routes.json"
        assert main(["route", "--config", str(cfg), "--spec", str(spec),
                     "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        lib = get_routes(scene, graph, WavefrontSpec(doas=tuple(doas)))
        assert len(payload["routes"]) == len(lib.routes)
        for got, want in zip(payload["routes"], lib.routes):
            assert got["antenna_index"] == want.antenna_index
            assert got["last_ris_id"] == want.last_ris_id
            assert got["path"] == list(want.path)
            assert got["phi_deg"] == pytest.approx(want.phi_deg)

    def test_size_mismatch_exit_1(self, tmp_path):
        cfg = write_config(tmp_path)
        spec = self._spec_path(tmp_path, [(-1.0, 0.0, 0.0)])  # M is 4
        assert main(["route", "--config", str(cfg), "--spec", str(spec),
                     "--out", str(tmp_path / "r.json")]) == 1

    def test_non_unit_exit_2(self, tmp_path):
        cfg = write_config(tmp_path)
        doas = [(-1.0, 0.0, 0.0)] * 3 + [(-2.0, 0.0, 0.0)]
        spec = self._spec_path(tmp_path, doas)
        assert main(["route", "--config", str(cfg), "--spec", str(spec),
                     "--out", str(tmp_path / "r.json")]) == 2


class TestFitCommand:
    def _data_path(self, tmp_path, values):
        path = tmp_path / "data.csv"
        lines = ["phi_deg"] + [repr(float(v)) for v in values]
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_known_rayleigh(self, tmp_path):
        rng = np.random.default_rng(8)
        values = list(rng.gamma(2.0, 2.0, size=400)) + [3.0, 4.0]
        data = self._data_path(tmp_path, values)
        out = tmp_path / "fit.json"
        assert main(["fit", "--data", str(data), "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert payload["n"] == 402
        expect_sigma = float(np.sqrt(np.sum(np.square(values)) / (2 * 402)))
        assert payload["rayleigh"]["sigma_hat"] == pytest.approx(expect_sigma,
                                                                 abs=1e-12)
        assert payload["kld_gamma"] >= 0.0
        assert payload["kld_rayleigh"] >= 0.0

    def test_two_point_sigma(self, tmp_path):
        # {3, 4} has spread, so both fits run; sigma is exactly 2.5
        data = self._data_path(tmp_path, [3.0, 4.0])
        out = tmp_path / "fit.json"
        assert main(["fit", "--data", str(data), "--out", str(out)]) == 0
        assert json.loads(out.read_text())["rayleigh"]["sigma_hat"] == \
               pytest.approx(2.5, abs=1e-12)

    def test_negative_exit_1(self, tmp_path):
        data = self._data_path(tmp_path, [1.0, -2.0])
        assert main(["fit", "--data", str(data),
                     "--out", str(tmp_path / "f.json")]) == 1

    def test_empty_exit_1(self, tmp_path):
        data = self._data_path(tmp_path, [])
        assert main(["fit", "--data", str(data),
                     "--out", str(tmp_path / "f.json")]) == 1

    def test_missing_column_exit_1(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("angle\n1.0\n")
        assert main(["fit", "--data", str(path),
                     "--out", str(tmp_path / "f.json")]) == 1

    def test_round_trip_with_sweep_output(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        main(["sweep", "--config", str(cfg), "--out", str(out)])
        fit_out = tmp_path / "fit.json"
        assert main(["fit", "--data", str(out / "deviations.csv"),
                     "--out", str(fit_out)]) == 0
        payload = json.loads(fit_out.read_text())
        with open(out / "fits.csv", newline="") as fh:
            row = next(csv.DictReader(fh))
        # single-cell sweep: the standalone fit sees the same samples
        assert payload["gamma"]["k_hat"] == pytest.approx(float(row["k_hat"]),
                                                          rel=1e-9)
        assert payload["rayleigh"]["sigma_hat"] == \
               pytest.approx(float(row["sigma_hat"]), rel=1e-9)
