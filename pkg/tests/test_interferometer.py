import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qscissors.fock import MultimodeState, coherent_state
from qscissors.interferometer import (
    MeasurementPattern,
    apply_network,
    beam_splitter_matrix,
    check_unitary,
    compositions,
    embed,
    gain_beam_splitter,
    legacy_equivalence_check,
    omega_submatrix,
    permanent,
    permanent_naive,
    postselect,
    qft_matrix,
    scatter_amplitude,
)


def random_unitary(m, rng):
    z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def omega(m):
    return np.exp(-2j * np.pi / m)


def test_balanced_splitter_and_gain_mapping():
    b = beam_splitter_matrix(0.5)
    np.testing.assert_allclose(np.abs(b), np.full((2, 2), 1 / math.sqrt(2)))
    np.testing.assert_allclose(gain_beam_splitter(1.0), b)
    check_unitary(gain_beam_splitter(2.7))


def test_single_photon_splitter_action():
    out = apply_network(beam_splitter_matrix(0.5), MultimodeState.product((1, 0)))
    assert out.terms[(1, 0)] == pytest.approx(-1 / math.sqrt(2))
    assert out.terms[(0, 1)] == pytest.approx(1 / math.sqrt(2))


@pytest.mark.parametrize("n,g", [(2, 1.0), (3, 0.7), (4, 2.0)])
def test_gain_splitter_on_bunched_photons(n, g):
    out = apply_network(gain_beam_splitter(g), MultimodeState.product((n, 0)))
    for j in range(n + 1):
        want = (-1) ** j * g**j * math.sqrt(math.comb(n, j)) / (g * g + 1) ** (n / 2)
        assert out.terms.get((j, n - j), 0) == pytest.approx(want, abs=1e-13)


def test_qft_small_cases():
    np.testing.assert_allclose(qft_matrix(2), np.array([[1, 1], [1, -1]]) / math.sqrt(2), atol=1e-15)
    np.testing.assert_allclose(qft_matrix(3).sum(axis=1), [math.sqrt(3), 0, 0], atol=1e-14)
    w = omega(4)
    displayed = 0.5 * np.array([[w ** (-j * k) for k in range(4)] for j in range(4)])
    np.testing.assert_allclose(qft_matrix(4).conj().T, displayed, atol=1e-14)


@pytest.mark.parametrize("m", range(1, 9))
def test_constructed_matrices_unitary(m):
    for u in (qft_matrix(m), embed(beam_splitter_matrix(0.3), (0, m), m + 1)):
        assert np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) < 1e-10


def test_check_unitary_rejects():
    with pytest.raises(ValueError):
        check_unitary(np.array([[1, 1], [0, 1]]))


def test_permanent_basics():
    assert permanent(np.eye(3)) == pytest.approx(1)
    for n in range(1, 7):
        assert permanent(np.ones((n, n))) == pytest.approx(math.factorial(n))
    assert permanent(omega_submatrix(3, 1)) == pytest.approx(-2)


def test_omega_submatrix_displays():
    np.testing.assert_allclose(omega_submatrix(2, 0), np.ones((2, 2)))
    w = omega(3)
    np.testing.assert_allclose(omega_submatrix(2, 1), [[1, w], [1, w**2]], atol=1e-15)


@pytest.mark.parametrize("dim", range(1, 8))
def test_ryser_matches_naive(dim):
    rng = np.random.default_rng(dim)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    want = permanent_naive(a)
    assert abs(permanent(a) - want) / abs(want) < 1e-11


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 6), st.integers(0, 5), st.complex_numbers(min_magnitude=0.1, max_magnitude=3))
def test_permanent_column_scaling(dim, col, s):
    col = col % dim
    rng = np.random.default_rng(dim * 7 + col)
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    b = a.copy()
    b[:, col] *= s
    assert permanent(b) == pytest.approx(s * permanent(a), rel=1e-10)


def test_permanent_identity_all_ports():
    for n in range(1, 9):
        for j in range(n + 1):
            for m0 in range(n + 1):
                want = omega(n + 1) ** (j * m0) * (-1) ** j * math.factorial(j) * math.factorial(n - j)
                got = permanent(omega_submatrix(n, j, m0))
                assert abs(got - want) / abs(want) < 1e-9


@pytest.mark.parametrize("n", range(1, 9))
def test_roots_of_unity_sum(n):
    # sum over distinct k_1..k_j in 1..n of omega^(k_1+...+k_j), normalized by j!
    w = omega(n + 1)
    for j in range(0, min(n, 4) + 1):
        total = sum(w ** sum(c) for c in itertools.combinations(range(1, n + 1), j))
        assert total == pytest.approx((-1) ** j, abs=1e-9)


def test_scatter_amplitude_examples():
    assert scatter_amplitude(qft_matrix(2), (1, 0), (0, 1)) == pytest.approx(1 / math.sqrt(2))
    for n in range(1, 7):
        f = qft_matrix(n + 1)
        out = (0,) + (1,) * n
        for j in range(n + 1):
            inp = (n - j, j) + (0,) * (n - 1)
            want = (-1) ** j * math.sqrt(math.factorial(j) * math.factorial(n - j)) / (n + 1) ** (n / 2)
            assert scatter_amplitude(f, inp, out) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("modes,photons", [(2, 4), (3, 3), (4, 2), (5, 2), (3, 6)])
def test_amplitude_unitarity(modes, photons):
    u = random_unitary(modes, np.random.default_rng(modes + photons))
    for inp in itertools.islice(compositions(photons, modes), 4):
        total = sum(abs(scatter_amplitude(u, inp, out)) ** 2 for out in compositions(photons, modes))
        assert total == pytest.approx(1, abs=1e-9)


def test_apply_network_identity_and_norm():
    state = MultimodeState(3, {(1, 0, 2): 0.6, (0, 1, 1): 0.8})
    same = apply_network(np.eye(3), state)
    assert same.terms == pytest.approx(state.terms)
    u = random_unitary(3, np.random.default_rng(0))
    assert apply_network(u, state).norm2 == pytest.approx(1, abs=1e-12)


def test_apply_network_spectators_and_pattern():
    rng = np.random.default_rng(5)
    u = random_unitary(3, rng)
    state = MultimodeState(4, {(2, 1, 0, 1): 0.6, (1, 0, 2, 1): 0.8})
    full = apply_network(u, state, modes=(1, 2, 3))
    pattern = MeasurementPattern((2,), (1,))
    restricted = apply_network(u, state, modes=(1, 2, 3), pattern=pattern)
    kept_a, p_a = postselect(full, pattern)
    kept_b, p_b = postselect(restricted, pattern)
    assert p_a == pytest.approx(p_b, abs=1e-14)
    for key, amp in kept_a.terms.items():
        assert kept_b.terms[key] == pytest.approx(amp, abs=1e-14)
    assert all(k[0] in (1, 2) for k in full.terms)


def test_postselect_examples():
    kept, p = postselect(MultimodeState.product((1, 0)), MeasurementPattern((0,), (1,)))
    assert p == pytest.approx(1)
    assert kept.amplitudes[0] == pytest.approx(1)
    half = MultimodeState(2, {(1, 0): 1 / math.sqrt(2), (0, 1): 1 / math.sqrt(2)})
    _, p = postselect(half, MeasurementPattern((0,), (1,)))
    assert p == pytest.approx(0.5)
    _, p = postselect(half, MeasurementPattern((0, 1), (1, 0)))
    assert p == pytest.approx(0.5)


def test_one_photon_scissor_vacuum_probability():
    # n = 1 bunched layout with g = 1 and vacuum input heralds with probability 1/4
    u = embed(qft_matrix(2), (1, 2), 3) @ embed(gain_beam_splitter(1.0), (0, 1), 3)
    pattern = MeasurementPattern((1, 2), (0, 1))
    out = apply_network(u, MultimodeState.product((1, 0, 0)), pattern=pattern)
    kept, p = postselect(out, pattern)
    assert p == pytest.approx(0.25)


def test_pruning_keeps_probabilities():
    psi = coherent_state(0.3, 12)
    terms = {(k, 0): c for k, c in enumerate(psi.amplitudes)}
    u = random_unitary(2, np.random.default_rng(1))
    loose = apply_network(u, MultimodeState(2, terms), prune=0.0)
    tight = apply_network(u, MultimodeState(2, terms))
    assert abs(loose.norm2 - tight.norm2) < 1e-12


def test_pattern_validation():
    with pytest.raises(ValueError):
        MeasurementPattern((0, 0), (1, 1))
    with pytest.raises(ValueError):
        MeasurementPattern((0,), (-1,))
    with pytest.raises(ValueError):
        MeasurementPattern((3,), (1,)).validate(2)


def test_legacy_scissors_match_fourier_splitters():
    report = legacy_equivalence_check()
    assert report["f2"] < 1e-12
    assert report["f4"] < 1e-12
    assert report["f4_unitarity"] < 1e-12
