#!/usr/bin/env python
"""
Property-based tests for the Composite Jumper using Hypothesis.
Tests ledger conservation, the log-loss protection bound and agreement with brute-force enumeration.
"""

import math

import hypothesis.strategies as st
import numpy as np
from hypothesis import HealthCheck, given, settings

from protclass.cox import build_default_grid
from protclass.jumper import JumperConfig, init, predict, process_stream, update
from protclass.oracle import enumerate_predict

# ============================================================================
# Strategies
# ============================================================================


@st.composite
def labelled_streams(draw, min_size=1, max_size=60):
    """Generate (probs, labels) with K in 2..4 and probabilities bounded away from 0."""
    K = draw(st.integers(2, 4))
    n = draw(st.integers(min_size, max_size))
    rows = draw(
        st.lists(
            st.lists(st.floats(1e-3, 1.0, allow_nan=False, allow_infinity=False), min_size=K, max_size=K),
            min_size=n,
            max_size=n,
        )
    )
    probs = np.array(rows)
    probs = probs / probs.sum(axis=1, keepdims=True)
    labels = draw(st.lists(st.integers(0, K - 1), min_size=n, max_size=n))
    return probs, np.array(labels)


@st.composite
def jumper_configs(draw, K):
    """Generate a jumper configuration over the default grid."""
    pi = draw(st.floats(0.05, 0.95, allow_nan=False))
    rates = draw(st.lists(st.floats(1e-4, 0.5, allow_nan=False), min_size=1, max_size=3, unique=True))
    return JumperConfig(grid=build_default_grid(K), pi=pi, jump_rates=tuple(rates))


@st.composite
def configured_streams(draw, max_size=60):
    """Generate a stream together with a configuration of matching class count."""
    probs, labels = draw(labelled_streams(max_size=max_size))
    return draw(jumper_configs(probs.shape[1])), probs, labels


# ============================================================================
# Ledger Tests
# ============================================================================


@given(configured_streams())
@settings(max_examples=100, deadline=None)
def test_ledger_mass_stays_one(case):
    """After every update P + sum(A) is 1 and every weight is non-negative."""
    config, probs, labels = case
    state = init(config)
    for p, y in zip(probs, labels):
        outcome, mixed = predict(config, state, p)
        assert abs(mixed.total_mass - state.total_mass) < 1e-12
        state = update(config, mixed, outcome.base_p, y)
        assert abs(state.total_mass - 1.0) < 1e-9
        assert state.P >= 0.0
        assert np.all(state.A >= 0.0)


@given(configured_streams())
@settings(max_examples=100, deadline=None)
def test_predictions_on_simplex(case):
    """Every protected prediction is a probability vector."""
    config, probs, labels = case
    outcomes, _ = process_stream(config, zip(probs, labels))
    for outcome in outcomes:
        assert np.all(outcome.protected_p.entries > 0.0)
        assert abs(outcome.protected_p.entries.sum() - 1.0) < 1e-9


@given(configured_streams(max_size=200))
@settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_protection_bound(case):
    """Cumulative log loss never exceeds the base's by more than log(1 / pi), at every prefix."""
    config, probs, labels = case
    outcomes, _ = process_stream(config, zip(probs, labels))
    regret = 0.0
    for outcome, y in zip(outcomes, labels):
        regret += math.log(outcome.base_p[y]) - math.log(outcome.protected_p[y])
        assert regret <= config.protection_cost + 1e-9


@given(configured_streams())
@settings(max_examples=50, deadline=None)
def test_normalizer_is_protected_probability(case):
    """The update's normalizer equals the protected probability of the observed label."""
    config, probs, labels = case
    outcomes, _ = process_stream(config, zip(probs, labels))
    for outcome, y in zip(outcomes, labels):
        assert abs(outcome.normalizer_C - outcome.protected_p[y]) < 1e-12


# ============================================================================
# Oracle Agreement Tests
# ============================================================================


@given(labelled_streams(max_size=4), st.floats(0.1, 0.9, allow_nan=False))
@settings(max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow])
def test_matches_enumeration(stream, pi):
    """The engine agrees with trajectory enumeration on short streams."""
    probs, labels = stream
    K = probs.shape[1]
    grid = build_default_grid(K, betas=(1.0, 0.5), alpha_magnitudes=())
    config = JumperConfig(grid=grid, pi=pi, jump_rates=(0.3, 0.05))
    outcomes, _ = process_stream(config, zip(probs, labels))
    expected = enumerate_predict(config, list(zip(probs, labels)))
    for outcome, brute in zip(outcomes, expected):
        np.testing.assert_allclose(outcome.protected_p.entries, np.asarray(brute), atol=1e-9)
