import math

import numpy as np
import pytest

from mimoexp import ChannelSpec, db_to_linear, linear_to_db
from mimoexp.errors import ValidationError
from mimoexp.spectra import exponential_correlation


def test_db_conversion_round_trip():
    assert db_to_linear(10.0) == pytest.approx(10.0)
    assert db_to_linear(0.0) == 1.0
    assert linear_to_db(db_to_linear(15.0)) == pytest.approx(15.0)


def test_identity_defaults_make_iid():
    s = ChannelSpec(3, 3, 5, 10.0)
    assert s.is_iid
    assert s.es1.mult == (3,) and s.es2.mult == (3,)


def test_side_selection_more_receive_antennas():
    s = ChannelSpec.exponential(2, 4, 1, 10.0, 0.3, 0.6)
    assert (s.m, s.n) == (2, 4)
    assert s.phi1 is s.phi_t and s.phi2 is s.phi_r


def test_side_selection_more_transmit_antennas():
    s = ChannelSpec.exponential(4, 2, 1, 10.0, 0.3, 0.6)
    assert (s.m, s.n) == (2, 4)
    assert s.phi1 is s.phi_r and s.phi2 is s.phi_t


def test_square_uses_receive_as_first():
    s = ChannelSpec.exponential(3, 3, 1, 10.0, 0.3, 0.6)
    assert s.phi1 is s.phi_r


def test_exponential_builder_and_snr():
    s = ChannelSpec.exponential(3, 3, 5, 15.0, 0.5, 0.7)
    assert s.gamma == pytest.approx(10 ** 1.5)
    assert s.snr_db == pytest.approx(15.0)
    assert not s.is_iid
    assert s.phi_t.matrix[0, 1] == 0.5 and s.phi_r.matrix[0, 2] == pytest.approx(0.49)


def test_zero_snr_allowed():
    s = ChannelSpec(2, 2, 1, 0.0)
    assert s.snr_db == -math.inf


@pytest.mark.parametrize("kw", [
    dict(n_t=0, n_r=2, n_c=1, gamma=1.0),
    dict(n_t=2, n_r=2, n_c=0, gamma=1.0),
    dict(n_t=2.5, n_r=2, n_c=1, gamma=1.0),
    dict(n_t=2, n_r=2, n_c=1, gamma=-1.0),
    dict(n_t=2, n_r=2, n_c=1, gamma=math.nan),
    dict(n_t=2, n_r=2, n_c=1, gamma=1.0, phi_t=np.eye(3)),
    dict(n_t=2, n_r=2, n_c=1, gamma=1.0, phi_r=np.diag([2.0, 0.5])),
])
def test_validation(kw):
    with pytest.raises(ValidationError):
        ChannelSpec(**kw)


def test_replace_with_snr():
    s = ChannelSpec.exponential(2, 2, 1, 10.0)
    t = s.replace(snr_db=20.0, n_c=4)
    assert t.gamma == pytest.approx(100.0) and t.n_c == 4 and s.n_c == 1


def test_key_ignores_snr_and_coherence_time():
    a = ChannelSpec.exponential(3, 3, 1, 5.0, 0.5, 0.7)
    b = ChannelSpec.exponential(3, 3, 7, 15.0, 0.5, 0.7)
    c = ChannelSpec.exponential(3, 3, 7, 15.0, 0.5, 0.6)
    assert a.key() == b.key() != c.key()


def test_characteristic_coefficients_follow_second_matrix():
    s = ChannelSpec(2, 3, 1, 1.0, phi_r=exponential_correlation(3, 0.4))
    assert len(s.psi2.table) == 3
    assert sum(sum(r) for r in s.psi2.table) == pytest.approx(1.0, abs=1e-12)
