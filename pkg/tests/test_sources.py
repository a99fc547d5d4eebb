import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import make_panel
from sources import BaseExogSource, ExogRegistry, RawInputs
from core.errors import InputError


def test_builtin_sources_registered():
    assert ExogRegistry.names() == ["bad", "good", "iv", "on"]


def test_available_depends_on_inputs():
    returns = make_panel([[0.01, -0.02], [0.0, 0.03]])
    assert RawInputs(returns=returns).present() == {"returns"}
    assert ExogRegistry.available(RawInputs()) == []
    assert ExogRegistry.available(RawInputs(returns=returns)) == ["bad", "good"]
    prices = make_panel([[1.0, 2.0], [1.1, 2.1]])
    assert ExogRegistry.available(RawInputs(opens=prices, closes=prices, iv=prices)) == ["iv", "on"]


def test_return_sources_split_sign():
    raw = RawInputs(returns=make_panel([[0.01, -0.02], [0.0, 0.03]]))
    assert_allclose(ExogRegistry.get("good").build(raw).values, [[0.01, 0.0], [0.0, 0.03]])
    assert_allclose(ExogRegistry.get("bad").build(raw).values, [[0.0, -0.02], [0.0, 0.0]])


def test_overnight_source():
    closes = make_panel([[100.0], [110.0]])
    opens = make_panel([[99.0], [110.0]])
    panel = ExogRegistry.get("on").build(RawInputs(opens=opens, closes=closes))
    assert panel.dates == closes.dates[1:]
    assert_allclose(panel.values, [[0.1]])


def test_implied_vol_passes_through():
    iv = make_panel(np.arange(6.0).reshape(3, 2) + 10)
    assert ExogRegistry.get("iv").build(RawInputs(iv=iv)) is iv


def test_missing_inputs_and_unknown_names():
    with pytest.raises(InputError, match="needs inputs"):
        ExogRegistry.get("on").build(RawInputs(opens=make_panel([[1.0]])))
    with pytest.raises(InputError, match="unknown exogenous"):
        ExogRegistry.get("vix")


def test_register_keeps_first_source():
    class Shadow(BaseExogSource):
        name = "iv"
        requires = frozenset()

        def _build(self, raw):
            raise AssertionError("shadowed source should not be used")

    original = ExogRegistry.get("iv")
    ExogRegistry.register(Shadow())
    assert ExogRegistry.get("iv") is original
