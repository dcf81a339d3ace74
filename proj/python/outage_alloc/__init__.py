# Copyright 2026 The outage-alloc Authors.
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

"""Outage-aware resource allocation: channel simulation, LSTM outage
predictor, outage-probability loss and greedy allocation."""

from ._core import (
    Predictor,
    SimConfig,
    capacity,
    confusion,
    custom_loss,
    greedy_select,
    label,
    monte_carlo,
    simulate_episode,
    theorem1_outage,
)

__all__ = [
    "Predictor",
    "SimConfig",
    "capacity",
    "confusion",
    "custom_loss",
    "greedy_select",
    "label",
    "monte_carlo",
    "simulate_episode",
    "theorem1_outage",
]
