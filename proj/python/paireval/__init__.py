# Copyright 2026 The Paireval Authors.
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

"""Pairwise image-quality evaluation: Elo fitting, simulation, analysis."""

import json as _json

from ._paireval import (
    Error,
    FitterSettings,
    Judgment,
    Priors,
    observed_choice_probability,
    win_probability,
)
from . import _paireval

__all__ = [
    "Error",
    "FitterSettings",
    "Judgment",
    "Priors",
    "Service",
    "equivalent_quality",
    "fit",
    "observed_choice_probability",
    "simulate",
    "validate_config",
    "win_probability",
]


def fit(methods, judgments, settings=None, intervals=True, fixed_noise=None):
    """MAP fit of Elo scores and rater noise. Returns the fit as a dict."""
    if settings is None:
        settings = FitterSettings()
    return _json.loads(
        _paireval._fit(list(methods), list(judgments), settings, intervals,
                       fixed_noise))


def simulate(spec):
    """Runs a synthetic study and returns the recovery report."""
    return _json.loads(_paireval._simulate(_json.dumps(spec)))


def equivalent_quality(table_path, ladders=None):
    """Equivalent-quality rows for an Elo table with a bpp column."""
    ladders_json = "" if ladders is None else _json.dumps(ladders)
    return _json.loads(
        _paireval._equivalent_quality(str(table_path), ladders_json))


def validate_config(config):
    """Validated study configuration with defaults filled in."""
    return _json.loads(_paireval._normalize_config(_json.dumps(config)))


class Service:
    """In-process study service; requests skip the network."""

    def __init__(self, config, synchronous_refit=True):
        self._impl = _paireval._Service(_json.dumps(config), synchronous_refit)

    def request(self, method, path, query=None, body=None):
        """Returns (status, payload); JSON payloads are decoded."""
        if body is not None and not isinstance(body, (str, bytes)):
            body = _json.dumps(body)
        if isinstance(body, bytes):
            body = body.decode()
        status, content_type, payload = self._impl.handle(
            method, path, dict(query or {}), body or "")
        if content_type.startswith("application/json"):
            return status, _json.loads(payload)
        return status, payload

    def wait_for_refits(self):
        self._impl.wait_for_refits()
