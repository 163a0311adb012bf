import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saddlenode.asymptotics import expand_rescaled
from saddlenode.series import BSeries, USeries
from saddlenode.system import (NormalizedSystem, RawSystem, SystemParseError, SystemValidationError,
                               TransformRecord, dump_system, low_order_prefix, normalize,
                               parse_system, pullback_expansion, required_M, riccati_f)

from oracles import raw_recursion_exact, riccati_exact


def test_parse_riccati():
    sys = parse_system('{"kind": "riccati", "a": -2, "b": 0}')
    assert isinstance(sys, RawSystem) and sys.a == -2.0
    assert sys.f.coeff(0, 2) == 1.0 and sys.f.coeff(0, 0) == 0.0


def test_parse_rejects_linear_y_term():
    with pytest.raises(SystemValidationError, match=r"df/dy"):
        parse_system('{"kind": "raw", "a": 1, "f": [[0, 1, 0.5]]}')
    with pytest.raises(SystemValidationError, match=r"d2f/dxdy"):
        parse_system('{"kind": "raw", "a": 1, "f": [[1, 1, 0.5]]}')


def test_parse_normalized_needs_a_ge_2():
    with pytest.raises(SystemValidationError):
        parse_system('{"kind": "normalized", "a": 0.5, "f0": [[0, 1]], "f2": []}')


def test_parse_error_has_line():
    with pytest.raises(SystemParseError) as err:
        parse_system('{\n "kind": "raw",\n "a": 1\n "f": []}')
    assert err.value.line == 4


@pytest.mark.parametrize("text", ['[1, 2]', '{"a": 1}', '{"kind": "riccati", "a": 1}',
                                  '{"kind": "raw", "a": "x", "f": []}',
                                  '{"kind": "raw", "a": 1, "f": [[1, 0]]}'])
def test_parse_invalid_documents(text):
    with pytest.raises(ValueError):
        parse_system(text)


def test_dump_round_trips_17_digits():
    sys = RawSystem(0.1 + 0.2, BSeries({(2, 0): 1 / 3, (0, 3): math.pi}))
    back = parse_system(dump_system(sys))
    assert back.a == sys.a and back.f.terms == sys.f.terms
    ns, _ = normalize(RawSystem(0.5, riccati_f(1.0)), 20)
    back = parse_system(dump_system(ns))
    np.testing.assert_array_equal(back.f0_dense(20), ns.f0_dense(20))
    assert back.f2.terms == ns.f2.terms and back.a == ns.a


def test_prefix_examples():
    euler = RawSystem(0.0, BSeries({(1, 0): 1.0}))
    assert list(low_order_prefix(euler, 3)) == [1.0, -1.0, 2.0]
    assert not np.any(low_order_prefix(RawSystem(1.3, BSeries({})), 10))
    phi = low_order_prefix(RawSystem(-3.0, riccati_f(1.0)), 3)
    assert phi[1] == 1.0 and phi[2] == 1.0


def test_prefix_matches_exact_recursion():
    phi = low_order_prefix(RawSystem(-3.0, riccati_f(1.0)), 40)
    exact = riccati_exact(Fraction(-3), Fraction(1), 40)
    for n in range(1, 41):
        assert phi[n - 1] == pytest.approx(float(exact[n]), rel=1e-13, abs=0)


@pytest.mark.parametrize("a,b,M,a_norm", [(0.5, 1.0, 2, 2.5), (-3.2, 1.0, 6, 2.8), (3.0, 0.0, 2, 5.0)])
def test_normalize_shift(a, b, M, a_norm):
    ns, rec = normalize(RawSystem(a, riccati_f(b)), 40)
    assert rec.M == M == required_M(a)
    assert ns.a == pytest.approx(a_norm, abs=1e-14)
    assert rec.q.coeff(0) == 1.0


def test_normalize_refuses_small_order():
    with pytest.raises(ValueError):
        normalize(RawSystem(-3.2, riccati_f(1.0)), 8)


def test_order_in_file_is_enforced():
    sys = parse_system('{"kind": "riccati", "a": 0.5, "b": 1, "order": 30}')
    with pytest.raises(ValueError):
        sys.require_order(40)


def test_pullback_identity_and_prefix_only():
    tilde = USeries.from_dense([0, 0, 1.0, -2.0, 0.5], 8, leading_order=2)
    out = pullback_expansion(tilde, TransformRecord.identity(8), 8)
    np.testing.assert_array_equal(out.dense(), tilde.dense())
    _, rec = normalize(RawSystem(0.5, riccati_f(1.0)), 30)
    out = pullback_expansion(USeries.zero(30, 2), rec, 30).dense()
    np.testing.assert_allclose(out[1:rec.M + 2], rec.prefix, rtol=0, atol=0)
    assert not np.any(out[rec.M + 2:])


def test_identity_record_not_production():
    with pytest.raises(ValueError):
        TransformRecord(0, np.zeros(0), USeries.from_dense([1.0], 4), 0.0, 0.0)


def _pullback_vs_direct(sys, N):
    ns, rec = normalize(sys, N)
    exp = expand_rescaled(ns, N)
    tilde = USeries(2, [float(c) for c in exp.phi[2:]], N)
    hat = pullback_expansion(tilde, rec, N).dense()[1:]
    direct = low_order_prefix(sys, N)
    return hat, direct


def test_pullback_riccati():
    hat, direct = _pullback_vs_direct(RawSystem(0.5, riccati_f(1.0)), 40)
    np.testing.assert_allclose(hat, direct, rtol=1e-10)


@settings(max_examples=10, deadline=None)
@given(st.floats(-4.0, 4.0), st.lists(st.floats(-0.5, 0.5), min_size=6, max_size=6))
def test_pullback_random_systems(a, c):
    f = BSeries({(1, 0): c[0], (2, 0): c[1], (0, 2): c[2], (2, 1): c[3], (1, 2): c[4], (0, 3): c[5]})
    sys = RawSystem(a, f)
    hat, direct = _pullback_vs_direct(sys, 30)
    scale = np.maximum(np.abs(direct), 1e-300)
    mask = np.abs(direct) > 1e-12 * np.max(np.abs(direct))
    assert np.all(np.abs(hat - direct)[mask] / scale[mask] <= 1e-9)


def test_general_raw_system_against_exact_recursion():
    terms = {(1, 0): 0.5, (2, 0): -1, (0, 2): 1, (2, 1): 0.25, (0, 3): -0.5}
    exact = raw_recursion_exact(Fraction(-3, 2), terms, 14)
    phi = low_order_prefix(RawSystem(-1.5, BSeries(terms)), 14)
    np.testing.assert_allclose(phi, [float(v) for v in exact[1:]], rtol=1e-12)


def test_normalized_structure():
    ns, _ = normalize(RawSystem(-1.3, BSeries({(1, 0): 1.0, (0, 2): 1.0, (3, 1): 0.5})), 40)
    assert isinstance(ns, NormalizedSystem) and ns.a >= 2
    assert all(l >= 2 for (_, l) in ns.f2.terms)
    raw = ns.as_raw_f()
    assert raw.coeff(0, 0) == 0 and raw.coeff(0, 1) == 0 and raw.coeff(1, 1) == 0
