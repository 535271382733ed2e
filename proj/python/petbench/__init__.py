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

"""Python access to the petbench privacy / energy / accuracy benchmark."""

import json

from . import _core
from ._core import PetbenchError, consumed_microjoules, default_data_dir, fetch, sha256_hex

__all__ = [
    "PetbenchError",
    "anonymize",
    "consumed_microjoules",
    "default_data_dir",
    "fetch",
    "mann_whitney",
    "pareto_mask",
    "prepare",
    "report",
    "run_experiment",
    "scenario_rank",
    "sha256_hex",
    "synth_utility",
]

__version__ = "0.1.0"


def _path(p):
    return "" if p is None else str(p)


def prepare(dataset, data_dir=None, seed=42):
    """Row and column counts of the cleaned train/test split."""
    return json.loads(_core.prepare_json(dataset, _path(data_dir), seed))


def anonymize(dataset, k, data_dir=None, max_suppression=1.0):
    """Anonymization report for the training split at the given k."""
    return json.loads(_core.anonymize_json(dataset, k, _path(data_dir), max_suppression))


def synth_utility(dataset, seed, data_dir=None):
    """Fit a copula on the training split, sample it, compare utility."""
    return json.loads(_core.synth_utility_json(dataset, seed, _path(data_dir)))


def mann_whitney(a, b, alternative="two-sided", method="auto"):
    return json.loads(_core.mann_whitney_json(list(a), list(b), alternative, method))


def pareto_mask(points):
    """points: dicts with joules, accuracy and privacy."""
    return _core.pareto_mask_json(json.dumps(list(points)))


def scenario_rank(points, scenario):
    return json.loads(_core.scenario_rank_json(json.dumps(list(points)), scenario))


def run_experiment(config):
    """Run a grid described by a config dict; returns the run log path.

    An existing log in the output directory is replaced.
    """
    return _core.run_experiment_json(json.dumps(config))


def report(log, format="md", alpha=0.05):
    return _core.report(str(log), format, alpha)
