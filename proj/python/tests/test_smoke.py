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

import math

import numpy as np
import pytest

import outage_alloc as oa


def small_config(resources=4):
    cfg = oa.SimConfig()
    cfg.n_taps = 64
    cfg.k = 10
    cfg.l = 5
    cfg.resource_count = resources
    cfg.seed = 3
    return cfg


def test_capacity_and_label():
    assert oa.capacity([1 + 0j, 0j], "sum") == pytest.approx(1.0)
    assert oa.capacity([1 + 0j, 0j]) == pytest.approx(0.5)
    assert oa.label([1 + 0j, 0j], 0.6) == 1
    assert oa.label([1 + 0j, 0j], 0.4) == 0


def test_theorem1():
    assert oa.theorem1_outage(0.3, 0.5, 0.1, 2) == pytest.approx(0.2)
    assert oa.theorem1_outage(0.3, 0.5, 0.1, 1) == pytest.approx(0.3)


def test_confusion_and_loss():
    q = [0.1, 0.5, 0.9, 0.2]
    b = [1, 0, 1, 0]
    t = oa.confusion(q, b, 0.5)
    assert (t["tn"], t["fn"], t["tp"], t["fp"]) == (2.0, 1.0, 1.0, 0.0)
    s = oa.confusion(q, b, 0.5, alpha=10.0)
    assert sum(s.values()) == pytest.approx(4.0, abs=1e-12)
    value, grad = oa.custom_loss(q, b, 0.5, 10.0, 3)
    assert math.isfinite(value)
    assert grad.shape == (4,)
    with pytest.raises(ValueError):
        oa.custom_loss(q, [0, 2, 1, 0])


def test_greedy_select():
    assert oa.greedy_select([0.9, 0.3, 0.8], 0.5) == (2, False)
    assert oa.greedy_select([0.9, 0.8], 0.5) == (2, True)


def test_simulate_episode():
    cfg = small_config()
    ep = oa.simulate_episode(cfg, 0)
    assert ep.shape == (4, 15)
    assert ep.dtype == np.complex128
    np.testing.assert_array_equal(ep, oa.simulate_episode(cfg, 0))
    assert not np.array_equal(ep, oa.simulate_episode(cfg, 1))


def test_bad_config_raises():
    cfg = small_config(resources=0)
    with pytest.raises(ValueError, match="resource_count"):
        cfg.validate()


def test_predictor(tmp_path):
    p = oa.Predictor(seed=1)
    assert p.parameter_count == 4897
    window = oa.simulate_episode(small_config(), 0)[0, :10]
    q = p.predict(list(window))
    assert 0.0 < q < 1.0
    path = tmp_path / "p.bin"
    p.save(path)
    again = oa.Predictor.load(path)
    np.testing.assert_array_equal(again.values, p.values)
    assert again.predict(list(window)) == q


def test_monte_carlo_endpoints():
    cfg = small_config()
    r = oa.monte_carlo(cfg, lambda w: 1.0, 0.5, 400, seed=2)
    assert r["selection_counts"][-1] == 400
    assert r["fallback_count"] == 400
    r = oa.monte_carlo(cfg, oa.Predictor(seed=2), 1.0, 400, seed=2)
    assert r["outage"] == r["p1"]["value"]
    assert sum(r["selection_counts"]) == 400
