import numpy as np
import pytest

from cssf.config import JammerSpec, RadarConfig, linear_steps, random_steps
from cssf.rng import seed_key, stream, trial_seed


def test_defaults_and_derived_values():
    cfg = RadarConfig()
    assert cfg.window == 665
    assert cfg.range_bin == pytest.approx(15.0)
    assert cfg.sample_power == pytest.approx(1 / 512)
    assert cfg.snr_db == pytest.approx(0.0)
    assert RadarConfig(noise_var=0.01).snr_db == pytest.approx(20.0)


def test_validation():
    with pytest.raises(ValueError):
        RadarConfig(pri=1e-6)
    with pytest.raises(ValueError):
        RadarConfig(noise_var=-1)
    with pytest.raises(ValueError):
        RadarConfig(step_schedule=())


def test_dict_roundtrip():
    cfg = RadarConfig(step_schedule=(0.0, 1e6), jammer=JammerSpec(0.1, 4.0))
    back = RadarConfig.from_dict(cfg.to_dict())
    assert back == cfg


def test_schedules():
    assert np.array_equal(linear_steps(1e6, 3), [0, 1e6, 2e6])
    r = random_steps(29e6, 1000, 3)
    assert r.min() >= 0 and r.max() <= 29e6
    assert np.array_equal(r, random_steps(29e6, 1000, 3))


def test_streams_are_keyed():
    a = stream(1, "x", 2).random(3)
    assert np.array_equal(a, stream(1, "x", 2).random(3))
    assert not np.array_equal(a, stream(1, "x", 3).random(3))
    assert not np.array_equal(a, stream(2, "x", 2).random(3))
    assert np.array_equal(stream(trial_seed(5, 1), "y").random(2),
                          stream([5, "trial", 1], "y").random(2))
    assert seed_key((1, "a"), 2)[0] == 1
    with pytest.raises(ValueError):
        seed_key(None)
