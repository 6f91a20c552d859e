# Copyright (C) 2026 The spikelab authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
import math
import os
import pathlib
import subprocess

import numpy as np
import pytest

spikelab = pytest.importorskip("spikelab")

ROOT = pathlib.Path(__file__).resolve().parents[2]
PRESET = ROOT / "presets" / "single-equality_d5_N500_y1.json"


def small_config():
    cfg = json.loads(PRESET.read_text())
    cfg["reps"] = 20
    cfg["model"]["N"] = 100
    return cfg


def test_mp_law():
    lo, hi = spikelab.spectral_edges(1.0)
    assert lo == 0.0 and hi == pytest.approx(4.0)
    assert spikelab.theta(2.0, 0.1) == pytest.approx(1 + 2 + 0.1 + 0.05)
    assert spikelab.gamma_shrink(spikelab.theta(7.0, 0.5), 0.5) == pytest.approx(7.0, rel=1e-12)
    assert spikelab.aux_funcs(2.0, 0.1)["h"] == pytest.approx(3 / 2.1)
    z, y = 1j, 0.5
    m1, m2 = spikelab.stieltjes_m1(z, y), spikelab.stieltjes_m2(z, y)
    assert abs(m1 + 1 / (z * (1 + m2))) < 1e-12
    with pytest.raises(ArithmeticError):
        spikelab.theta(0.5, 1.0)


def test_run_null_and_threads():
    cfg = small_config()
    a = spikelab.run_null(cfg, threads=1)
    b = spikelab.run_null(json.dumps(cfg), threads=3)
    assert a["valid"] + a["invalid"] == 20
    assert a["statistics"] == b["statistics"]
    assert 0.0 <= a["rate"] <= 1.0


def test_bad_config():
    cfg = small_config()
    del cfg["seed"]
    with pytest.raises(ValueError, match="seed"):
        spikelab.run_null(cfg)


def test_power_reuses_null():
    cfg = small_config()
    rows = spikelab.run_power(cfg, [0.0, math.pi / 2])
    assert rows[0]["statistics"] == spikelab.run_null(cfg)["statistics"]


@pytest.mark.skipif(not os.environ.get("SPIKELAB_CLI"), reason="CLI path not set")
def test_cli_round_trip(tmp_path):
    cfg = small_config()
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    cli = os.environ["SPIKELAB_CLI"]
    subprocess.run([cli, "simulate-null", str(tmp_path / "cfg.json"), "--reps", "3", "--out-dir",
                    str(tmp_path / "out"), "--dump-first"], check=True)
    Y = np.loadtxt(tmp_path / "out" / "data_rep0.csv", delimiter=",")
    hyp = json.loads((tmp_path / "out" / "hypothesis_rep0.json").read_text())
    report = spikelab.test_data(Y, hyp)
    assert report["statistic"] == pytest.approx(spikelab.run_null(cfg)["statistics"][0], rel=1e-9)
