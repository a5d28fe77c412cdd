# Copyright 2026 The photonstat Authors
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


import json
import math
import os
import subprocess

import numpy as np
import pytest

import photonstat as ps


def test_physics_functions():
    assert ps.transition_frequency(39.03, 0.4, 0.0) == pytest.approx(10.775687898, abs=1e-8)
    assert ps.efficiency(2.65, 1.85) == pytest.approx(0.716216, abs=1e-6)
    r = ps.reflection(0.0, 2.65, 1.85)
    assert r == pytest.approx(1 - 2.65 / 1.85)
    with pytest.raises(ps.RegimeError):
        ps.transition_frequency(39.03, 0.4, 0.49)
    with pytest.raises(ps.PhotonstatError):
        ps.efficiency(2.65, 0.0)


def test_heterodyne_moments():
    s = ps.sample_heterodyne("qubit", theta=math.pi, n=200000, seed=3)
    assert s.shape == (200000, 2)
    assert s.dtype == np.complex128
    p = np.abs(s) ** 2
    se = p.std(axis=0) / math.sqrt(len(s))
    assert np.all(np.abs(p.mean(axis=0) - 1.5) < 5 * se)
    cross = np.conj(s[:, 0]) * s[:, 1]
    assert abs(cross.mean().real - 0.5) < 5 * cross.real.std() / math.sqrt(len(s))
    again = ps.sample_heterodyne("qubit", theta=math.pi, n=1000, seed=3)
    assert np.array_equal(again, s[:1000])
    with pytest.raises(ps.ValidationError):
        ps.sample_heterodyne("squeezed")


def test_lag_values_match_numpy():
    rng = np.random.default_rng(1)
    a = rng.normal(size=48) + 1j * rng.normal(size=48)
    b = rng.normal(size=48) + 1j * rng.normal(size=48)
    lags = np.array([-5, 0, 3, 7], dtype=np.int32)
    out = ps.lag_values(a, b, lags)
    for k, lag in enumerate(lags):
        t = np.arange(48)
        t = t[(t + lag >= 0) & (t + lag < 48)]
        u = t + lag
        assert out["g1"][k] == pytest.approx(np.sum(np.conj(a[t]) * b[u]), rel=1e-12)
        g2 = np.sum((np.conj(a[t] * a[u]) * b[u] * b[t]).real)
        assert out["g2"][k] == pytest.approx(g2, rel=1e-12)


def test_fits_round_trip():
    d = np.linspace(-15, 15, 121)
    bg = 0.9 * np.exp(0.2j)
    r = bg * (1 - (2.65 / 1.85) / (1 - 1j * d / 1.85))
    fit = ps.fit_reflection(d, r)
    assert fit["params"]["gamma1_e"]["value"] == pytest.approx(2.65, rel=1e-6)
    assert fit["derived"]["eta"]["value"] == pytest.approx(0.716216, abs=1e-5)

    phi = np.linspace(-0.4, 0.4, 17)
    f = np.array([ps.transition_frequency(39.03, 0.4, x) for x in phi])
    flux = ps.fit_flux_spectrum(phi, f)
    assert flux["params"]["ec"]["value"] == pytest.approx(0.4, rel=1e-6)

    theta = np.linspace(0, 2 * math.pi, 17)
    rabi = ps.fit_rabi(theta, 0.3 * np.sin(theta) / 2, "quadrature")
    assert rabi["r_squared"] > 0.999999
    with pytest.raises(ps.InsufficientDataError):
        ps.fit_rabi(theta[:5], theta[:5])


def test_theory_and_config():
    t = ps.g2_theory(math.pi)
    assert t["g2_center"] == 0.0 and t["g2_side"] == pytest.approx(0.25)
    cfg = ps.resolve_config({"shots": 640, "batches": 8})
    assert cfg["chain"]["trace_len"] == 320
    assert ps.config_hash(cfg) == ps.config_hash({"shots": 640, "batches": 8})
    assert ps.config_hash({"seed": 2}) != ps.config_hash({})
    with pytest.raises(ps.ValidationError):
        ps.resolve_config({"shots": 1000, "batches": 64})
    with pytest.raises(ps.ParseError):
        ps.resolve_config({"chain": {"gain_dbb": 3}})


def test_run_hbt_and_archive(tmp_path):
    cfg = {"shots": 64, "batches": 4, "seed": 5, "output": {"dir": str(tmp_path), "store_traces": True}}
    summary = ps.run_hbt(cfg)
    assert summary["shots"] == 64
    assert "g2_ratio" in summary
    header, traces = ps.read_archive(str(tmp_path / "traces.phst"))
    assert header["n_shots"] == 64
    assert traces.shape == (64, 4, 320)
    assert traces.dtype == np.complex64
    assert np.all(np.isfinite(traces)) and np.any(traces != 0)
    assert "peaks.csv  ok" in ps.report(str(tmp_path))


def test_run_spectro_and_rabi(tmp_path):
    spectro = ps.run_spectro({"output": {"dir": str(tmp_path / "s")}})
    assert spectro["sweet_spot_dip_ghz"] == pytest.approx(10.776, abs=0.005)
    rabi = ps.run_rabi({"shots": 64, "batches": 4, "output": {"dir": str(tmp_path / "r")},
                        "state": {"theta_sweep": {"start": 0, "stop": 6.283185307179586, "points": 9}}})
    assert rabi["points"] == 9


CLI = os.environ.get("PHOTONSTAT_CLI")


@pytest.mark.skipif(not CLI, reason="PHOTONSTAT_CLI not set")
def test_cli_exit_codes(tmp_path):
    def run(*args):
        return subprocess.run([CLI, *args], capture_output=True, text=True)

    ok = run("hbt", "--shots", "64", "--batches", "4", "--out", str(tmp_path / "h"))
    assert ok.returncode == 0, ok.stderr
    assert json.loads((tmp_path / "h" / "summary.json").read_text())["shots"] == 64
    assert run("hbt", "--shots", "1000").returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "chain": {"gain_dbb": 1}\n}\n')
    r = run("hbt", "--config", str(bad))
    assert r.returncode == 2 and "line 2" in r.stderr
    assert run("report", str(tmp_path / "missing")).returncode == 4
    assert run("report", str(tmp_path / "h")).returncode == 0
    fit = run("fit", "rabi-quad", str(tmp_path / "h" / "peaks.csv"))
    assert fit.returncode == 2
