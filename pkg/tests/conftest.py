import numpy as np
import pytest

from cssf.config import RadarConfig, linear_steps
from cssf.geometry import place_nodes_uniform_disk
from cssf.waveform import hadamard_waveforms


def small_config(n_pulses=4, delta_f=1e6, **kw):
    """Short waveform (L=32, L~=48, ranges up to 720 m) so systems stay tiny."""
    base = dict(l_samples=32, l_pad=48, m_compressed=6, noise_var=0.0,
                step_schedule=tuple(linear_steps(delta_f, n_pulses)))
    base.update(kw)
    return RadarConfig(**base)


@pytest.fixture
def small_cfg():
    return small_config()


@pytest.fixture
def small_scene():
    cfg = small_config()
    layout = place_nodes_uniform_disk(10.0, 3, 2, 7)
    x = hadamard_waveforms(cfg.l_samples, 3)
    return cfg, layout, x


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def loop_column(point, l, m, layout, x, cfg):
    """Basis column built sample by sample, independent of the vectorised code."""
    from cssf.config import C
    a, b, c = point
    f = cfg.carriers[m]
    tau = int(np.floor(2 * (c - cfg.range_origin) / (C * cfg.ts) + 1e-9))
    fd = 2 * b * f / C
    er = layout.rx[l, 0] * np.cos(a - layout.rx[l, 1])
    col = np.zeros(cfg.window, dtype=complex)
    for n in range(tau, tau + cfg.l_samples):
        acc = 0
        for i in range(x.m_t):
            et = layout.tx[i, 0] * np.cos(a - layout.tx[i, 1])
            acc += x.samples[n - tau, i] * np.exp(2j * np.pi * f * et / C)
        ph = (-2 * c * f + er * f) / C + fd * m * cfg.pri + fd * n * cfg.ts
        col[n] = acc * np.exp(2j * np.pi * ph)
    return col
