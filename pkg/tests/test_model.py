import math
import warnings

import pytest
from hypothesis import given, strategies as st

from bsshift.model import (ModelParams, ParameterError, RegimeWarning, coupling_for_g,
                           derive_g)


def test_zero_coupling_gives_zero_g():
    assert derive_g(ModelParams(11.0, coupling_u=0.0, n_ref=37.0)) == 0.0


def test_g_example():
    p = ModelParams(11.0, 1.0, 1.0, 100.0)
    assert derive_g(p) == pytest.approx(10 / 11, rel=1e-15)


def test_doubling_u_doubles_g():
    p = ModelParams(11.0, coupling_u=0.3, n_ref=50.0)
    assert derive_g(p.with_coupling(0.6)) == pytest.approx(2 * derive_g(p), rel=1e-15)


def test_coupling_for_g_examples():
    p = ModelParams(11.0, n_ref=100.0)
    assert coupling_for_g(0.0, p) == 0.0
    assert coupling_for_g(10 / 11, p) == pytest.approx(1.0, rel=1e-15)


@pytest.mark.parametrize("g", [0.1, 0.5, 1.0])
def test_round_trip(g):
    p = ModelParams(11.0, n_ref=60.0)
    assert derive_g(p.with_g(g)) == pytest.approx(g, rel=1e-14)


@pytest.mark.parametrize("kwargs", [
    dict(delta_e=0.0),
    dict(delta_e=-1.0),
    dict(delta_e=11.0, hbar_omega0=0.0),
    dict(delta_e=11.0, coupling_u=-0.1),
    dict(delta_e=11.0, n_ref=0.5),
    dict(delta_e=math.nan),
])
def test_invalid_parameters(kwargs):
    with pytest.raises(ParameterError):
        ModelParams(**kwargs)


def test_negative_g_rejected():
    with pytest.raises(ParameterError):
        coupling_for_g(-0.1, ModelParams(11.0))


def test_regime_flag():
    assert ModelParams(11.0, n_ref=60).regime_ok
    assert not ModelParams(3.0, n_ref=60).regime_ok
    assert not ModelParams(11.0, n_ref=10).regime_ok
    with pytest.warns(RegimeWarning):
        ModelParams(3.0, n_ref=60).check_regime()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ModelParams(11.0, n_ref=60).check_regime()


positive = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False)


@given(de=positive, w=positive, u=st.floats(0, 1e3), n=st.floats(1, 1e4), lam=positive)
def test_g_invariant_under_energy_rescaling(de, w, u, n, lam):
    p = ModelParams(de, w, u, n)
    q = ModelParams(lam * de, lam * w, lam * u, n)
    assert derive_g(q) == pytest.approx(derive_g(p), rel=1e-12, abs=1e-300)


@given(de=positive, u=st.floats(0, 1e3), n=st.floats(1, 1e4))
def test_coupling_round_trip_property(de, u, n):
    p = ModelParams(de, 1.0, u, n)
    assert coupling_for_g(derive_g(p), p) == pytest.approx(u, rel=1e-14, abs=1e-300)
