import pytest
from hypothesis import given
from hypothesis import strategies as st

from sfem.art import DomainError
from sfem.feedback import (
    FeedbackKind,
    FeedbackParams,
    classify_feedback,
    modulate_strength,
    modulate_vigilance,
)

P = FeedbackParams()
unit = st.floats(0.0, 1.0)


@pytest.mark.parametrize(
    "xi,kind",
    [(2, FeedbackKind.STRONG_POSITIVE), (1.5, FeedbackKind.STRONG_POSITIVE), (1, FeedbackKind.WEAK_POSITIVE),
     (0.5, FeedbackKind.NEGATIVE), (-1, FeedbackKind.NEGATIVE), (None, FeedbackKind.NONE)],
)
def test_classify(xi, kind):
    assert classify_feedback(xi) is kind


def test_worked_values():
    assert modulate_strength(0.8, FeedbackKind.STRONG_POSITIVE, P) == pytest.approx(0.84)
    assert modulate_strength(0.8, FeedbackKind.WEAK_POSITIVE, P) == pytest.approx(0.82)
    assert modulate_strength(0.8, FeedbackKind.NEGATIVE, P) == pytest.approx(0.8 * 0.95**2)
    assert modulate_strength(0.8, FeedbackKind.NONE, P) == pytest.approx(0.76)
    # below s_init (1 - ds)^p the node drops to the floor
    assert modulate_strength(0.7, FeedbackKind.NEGATIVE, P) == pytest.approx(0.1 / 0.95)


def test_floor_survives_one_decay_only():
    floor = modulate_strength(0.5, FeedbackKind.NEGATIVE, P)
    assert floor > P.theta
    assert floor * (1 - P.delta_s) == pytest.approx(P.theta)


@given(unit)
def test_strength_direction(s):
    strong = modulate_strength(s, FeedbackKind.STRONG_POSITIVE, P)
    weak = modulate_strength(s, FeedbackKind.WEAK_POSITIVE, P)
    none = modulate_strength(s, FeedbackKind.NONE, P)
    assert s <= weak <= strong <= 1.0
    assert none <= s
    neg = modulate_strength(s, FeedbackKind.NEGATIVE, P)
    if s > P.s_init * (1 - P.delta_s) ** P.p:
        assert neg < s


@given(st.floats(0.01, 1.0))
def test_vigilance_direction(rho):
    assert modulate_vigilance(rho, FeedbackKind.STRONG_POSITIVE, P) <= rho
    assert rho <= modulate_vigilance(rho, FeedbackKind.NEGATIVE, P) <= 1.0
    assert modulate_vigilance(rho, FeedbackKind.WEAK_POSITIVE, P) == rho
    assert modulate_vigilance(rho, FeedbackKind.NONE, P) == rho


def test_params_validation():
    with pytest.raises(DomainError):
        FeedbackParams(delta_s=1.0)
    with pytest.raises(DomainError):
        FeedbackParams(p=0)
    with pytest.raises(DomainError):
        FeedbackParams(r_s=1.5)
