# Copyright 2026 The petbench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

import json
import os
import pathlib

import pytest

import petbench

FIXTURES = pathlib.Path(
    os.environ.get("PETBENCH_TEST_FIXTURES", pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures")
)
DATA = FIXTURES / "data"


def test_sha256():
    assert petbench.sha256_hex(b"abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"


def test_wraparound():
    assert petbench.consumed_microjoules(90, 5, 100) == 15
    assert petbench.consumed_microjoules(5, 90, 100) == 85


def test_mann_whitney_exact_example():
    r = petbench.mann_whitney([1, 2, 3], [4, 5, 6], alternative="less", method="exact")
    assert r["p_value"] == pytest.approx(0.05, abs=1e-15)
    with pytest.raises(ValueError):
        petbench.mann_whitney([1], [2], alternative="sideways")


def test_pareto_and_ranking():
    pts = [
        {"treatment": "good", "model": "m", "joules": 1.0, "accuracy": 0.9, "privacy": 2},
        {"treatment": "bad", "model": "m", "joules": 2.0, "accuracy": 0.8, "privacy": 1},
    ]
    assert petbench.pareto_mask(pts) == [True, False]
    ranked = petbench.scenario_rank(pts, 2)
    assert ranked[0]["treatment"] == "good"
    assert ranked[0]["rank"] == 1 and ranked[0]["on_front"]


def test_prepare_and_anonymize_fixture():
    info = petbench.prepare("census_income", data_dir=DATA)
    assert info["raw_rows"] == 600
    rep = petbench.anonymize("census_income", 5, data_dir=DATA)
    assert rep["achieved_min_class_size"] >= 5
    assert 0.0 <= rep["suppressed_cell_fraction"] <= 1.0


def test_errors_map_to_petbench_error(tmp_path):
    with pytest.raises(petbench.PetbenchError, match="petbench fetch"):
        petbench.prepare("census_income", data_dir=tmp_path)


def test_small_run_and_report(tmp_path):
    config = {
        "datasets": ["census_income"],
        "treatments": ["benchmark", "kanon:3"],
        "models": ["knn"],
        "repetitions": 2,
        "meter": "simulated",
        "clock": "virtual",
        "data_dir": str(DATA),
        "output_dir": str(tmp_path / "run"),
    }
    log = petbench.run_experiment(config)
    assert pathlib.Path(log).exists()
    tables = json.loads(petbench.report(log, format="json"))
    assert {row["treatment"] for row in tables["accuracy"]} == {"benchmark", "kanon:3"}
    assert "k=3" in petbench.report(log)
