import numpy as np
import pytest

from relaypair import ChannelRealization, RicianConfig, sample_realization


def make_rician(m, k_factor=1.0, sr=3.0, sd=1.0, rd=3.0, noise=1.0, **kw):
    return RicianConfig(k_factor=k_factor, mean_sq_sr=sr, mean_sq_sd=sd,
                        mean_sq_rd=rd, noise_var=noise, m=m, **kw)


def random_real(m, seed, **kw):
    return sample_realization(make_rician(m, **kw), seed)


def manual_real(a_sd, a_sr, a_rd, w=None):
    m = len(a_sd)
    if w is None:
        w = np.ones(m)
    return ChannelRealization(m=m, a_sd=np.asarray(a_sd, float),
                              a_sr=np.asarray(a_sr, float),
                              a_rd=np.asarray(a_rd, float),
                              w=np.asarray(w, float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
