import os
import subprocess
import sys

import pytest

from idnc_cde import _accel, harness


def _flag_in_child(value):
    env = dict(os.environ, IDNC_CDE_DISABLE_NUMBA=value)
    code = "from idnc_cde import _accel; print(_accel.USE_NUMBA)"
    return subprocess.run([sys.executable, "-c", code], env=env, check=True,
                          capture_output=True, text=True).stdout.strip()


def test_env_flag_selects_numpy():
    assert _flag_in_child("1") == "False"


@pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba unavailable")
def test_numba_is_default():
    assert _flag_in_child("") == "True"


def test_episodes_identical_across_backends(monkeypatch):
    cfg = harness.ExperimentConfig(players=12, packets=25, q_mean=0.3, seed=8)
    runs = {}
    for flag in (True, False):
        monkeypatch.setattr(_accel, "USE_NUMBA", flag and _accel.HAVE_NUMBA)
        runs[flag] = [harness.run_paired_iteration(cfg, i) for i in range(3)]
    assert runs[True] == runs[False]
