import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import eval_hermite, factorial

from macroreal.errors import InvalidArgumentError, NonConvergenceError
from macroreal.fock import (
    FockVector,
    HermiteBasisCache,
    ModeOperator,
    amplitude_P,
    annihilation,
    apply_two_mode_unitary,
    beam_splitter_5050,
    coherent_vector,
    creation,
    expectation,
    half_line_overlap,
    make_noon,
    make_number_superposition,
    momentum,
    number,
    position,
    rotated_quadrature,
)

SQ2 = 1 / math.sqrt(2)


def phi_oracle(n, x):
    """Textbook normalisation, independent of the package's recurrence."""
    return (
        1.0 / math.sqrt(2.0**n * math.factorial(n)) * math.pi**-0.25
        * np.exp(-(x**2) / 2) * eval_hermite(n, x)
    )


# -- constructors -----------------------------------------------------------


def test_number_superposition_n1():
    s = make_number_superposition(1, 0.0, 4)
    np.testing.assert_allclose(s.amplitudes, [SQ2, SQ2, 0, 0, 0], atol=1e-15)


def test_number_superposition_phase_on_vacuum():
    s = make_number_superposition(3, math.pi, 3)
    assert s.amplitudes[0] == pytest.approx(-SQ2, abs=1e-15)
    assert s.amplitudes[3] == pytest.approx(SQ2, abs=1e-15)


def test_number_superposition_cutoff_error_names_values():
    with pytest.raises(InvalidArgumentError, match=r"cutoff=1.*N=2"):
        make_number_superposition(2, 0.0, 1)


def test_noon_n1():
    s = make_noon(1, 1)
    psi = s.tensor()
    assert psi[1, 0] == pytest.approx(SQ2)
    assert psi[0, 1] == pytest.approx(SQ2)
    # little-endian flat index: n_a + 2 n_b
    assert s.amplitudes[1] == pytest.approx(SQ2)
    assert s.amplitudes[2] == pytest.approx(SQ2)


def test_noon_structure():
    s = make_noon(2, 4)
    assert np.count_nonzero(s.amplitudes) == 2
    assert np.linalg.norm(s.amplitudes) == pytest.approx(1.0, abs=1e-15)


def test_noon_cutoff_error():
    with pytest.raises(InvalidArgumentError):
        make_noon(4, 3)


def test_fock_vector_rejects_bad_length_and_norm():
    with pytest.raises(InvalidArgumentError):
        FockVector(2, 2, np.ones(8) / math.sqrt(8))
    with pytest.raises(InvalidArgumentError):
        FockVector(2, 1, [1.0, 1.0, 0.0])


def test_coherent_vacuum():
    s, tail = coherent_vector(0, 5)
    np.testing.assert_allclose(s.amplitudes, [1, 0, 0, 0, 0, 0])
    assert tail == 0.0


def test_coherent_mean_photon_number():
    s, tail = coherent_vector(2, 40)
    # direct Poisson summation oracle
    n = np.arange(41)
    p = np.exp(-4.0) * 4.0**n / factorial(n)
    oracle = float(np.sum(n * p) / np.sum(p))
    assert oracle == pytest.approx(4.0, abs=1e-6)
    assert expectation(s, number(40)).real == pytest.approx(oracle, abs=1e-12)
    assert tail < 1e-8


@pytest.mark.parametrize(
    "cutoff, expected",
    [
        (2, 1 - math.exp(-1) * (1 + 1 + 1 / 2)),
        (3, 1 - math.exp(-1) * (1 + 1 + 1 / 2 + 1 / 6)),
    ],
)
def test_coherent_tail_mass(cutoff, expected):
    _, tail = coherent_vector(1, cutoff)
    assert tail == pytest.approx(expected, rel=1e-12)


def test_coherent_tail_at_cutoff_3_is_about_0019():
    assert coherent_vector(1, 3)[1] == pytest.approx(0.019, abs=5e-4)


# -- operators ---------------------------------------------------------------


@pytest.mark.parametrize("cutoff", [5, 20])
def test_operator_invariants(cutoff):
    for op in (number(cutoff), position(cutoff), momentum(cutoff), amplitude_P(cutoff)):
        assert op.is_hermitian(1e-12), op.label
    a, ad = annihilation(cutoff), creation(cutoff)
    np.testing.assert_array_equal(a.matrix.conj().T, ad.matrix)
    x, p = position(cutoff).matrix, momentum(cutoff).matrix
    comm = x @ p - p @ x
    np.testing.assert_allclose(comm[:cutoff, :cutoff], 1j * np.eye(cutoff), atol=1e-12)
    np.testing.assert_allclose(amplitude_P(cutoff).matrix, math.sqrt(2) * p, atol=1e-14)


@pytest.mark.parametrize("theta", [0.0, 0.3, 1.2, math.pi, 4.0])
def test_rotated_quadrature_phase_convention(theta):
    # <x_theta|n> = exp(-i n theta) phi_n(x)  <=>  x_theta = R x R^dag with R = exp(i theta n)
    cutoff = 12
    R = np.diag(np.exp(1j * theta * np.arange(cutoff + 1)))
    x = position(cutoff).matrix
    np.testing.assert_allclose(R @ x @ R.conj().T, rotated_quadrature(theta, cutoff).matrix, atol=1e-13)


def test_mode_operator_shape_check():
    with pytest.raises(InvalidArgumentError):
        ModeOperator(3, np.eye(3))


# -- beam splitter -----------------------------------------------------------


def test_beam_splitter_vacuum():
    vac = FockVector.from_tensor(np.array([[1.0, 0], [0, 0]]))
    np.testing.assert_allclose(beam_splitter_5050(vac).amplitudes, vac.amplitudes, atol=1e-14)


def test_beam_splitter_single_photon():
    psi = np.zeros((2, 2))
    psi[1, 0] = 1.0
    out = beam_splitter_5050(FockVector.from_tensor(psi)).tensor()
    # a1^dag = (c+^dag - c-^dag)/sqrt2
    assert out[1, 0] == pytest.approx(SQ2, abs=1e-13)
    assert out[0, 1] == pytest.approx(-SQ2, abs=1e-13)
    assert abs(out[0, 0]) < 1e-14 and abs(out[1, 1]) < 1e-14


def _coherent_pair(beta, gamma, cutoff):
    a, _ = coherent_vector(beta, cutoff)
    b, _ = coherent_vector(gamma, cutoff)
    return FockVector.from_tensor(np.outer(a.amplitudes, b.amplitudes))


@pytest.mark.parametrize("beta, gamma", [(1.0, 0.5), (0.8j, -0.3), (1.2 + 0.4j, 0.7 - 0.2j)])
def test_beam_splitter_coherent_states(beta, gamma):
    cutoff = 30
    out = beam_splitter_5050(_coherent_pair(beta, gamma, cutoff))
    expected = _coherent_pair((beta + gamma) / math.sqrt(2), (-beta + gamma) / math.sqrt(2), cutoff)
    fidelity = abs(np.vdot(expected.amplitudes, out.amplitudes)) ** 2
    assert fidelity > 1 - 1e-6


def test_beam_splitter_rejects_wrong_mode_count():
    with pytest.raises(InvalidArgumentError):
        beam_splitter_5050(make_number_superposition(1, 0, 2))


def test_beam_splitter_leak_is_an_error():
    psi = np.zeros((4, 4))
    psi[3, 3] = 1.0
    with pytest.raises(NonConvergenceError):
        beam_splitter_5050(FockVector.from_tensor(psi))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_beam_splitter_preserves_norm_and_total_number(seed):
    rng = np.random.default_rng(seed)
    d = 4
    psi = rng.normal(size=(d + 1, d + 1)) + 1j * rng.normal(size=(d + 1, d + 1))
    psi /= np.linalg.norm(psi)
    state = FockVector.from_tensor(psi)
    out = apply_two_mode_unitary(state, np.eye(2), out_cutoff=2 * d)
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-10)
    out = beam_splitter_5050(state, out_cutoff=2 * d)
    assert np.linalg.norm(out.amplitudes) == pytest.approx(1.0, abs=1e-10)
    n_in = np.add.outer(np.arange(d + 1), np.arange(d + 1))
    n_out = np.add.outer(np.arange(2 * d + 1), np.arange(2 * d + 1))
    p_in = np.bincount(n_in.ravel(), weights=(np.abs(psi) ** 2).ravel(), minlength=4 * d + 1)
    p_out = np.bincount(n_out.ravel(), weights=(np.abs(out.tensor()) ** 2).ravel(), minlength=4 * d + 1)
    np.testing.assert_allclose(p_out[: p_in.size], p_in, atol=1e-12)


# -- Hermite functions and overlaps ------------------------------------------


def test_hermite_cache_orthonormal_and_parity():
    cache = HermiteBasisCache.build(60)
    np.testing.assert_allclose(cache.gram(), np.eye(61), atol=1e-8)
    x = cache.grid
    mirror = np.argsort(-x)
    np.testing.assert_allclose(x[mirror], -x, atol=1e-13)
    signs = (-1.0) ** np.arange(61)
    np.testing.assert_allclose(cache.values[:, mirror], signs[:, None] * cache.values, atol=1e-12)


def test_hermite_values_match_textbook_formula():
    cache = HermiteBasisCache.build(20)
    x = cache.grid
    for n in (0, 1, 5, 20):
        np.testing.assert_allclose(cache.values[n], phi_oracle(n, x), atol=1e-12)


def test_half_line_overlap_examples():
    assert half_line_overlap(0, 0) == pytest.approx(0.5, abs=1e-12)
    oracle, _ = integrate.quad(lambda x: phi_oracle(0, x) * phi_oracle(1, x), 0, np.inf, epsabs=1e-13)
    assert oracle == pytest.approx(1 / math.sqrt(2 * math.pi), abs=1e-10)
    assert half_line_overlap(0, 1) == pytest.approx(oracle, abs=1e-9)
    assert abs(half_line_overlap(1, 3)) < 1e-12


@pytest.mark.parametrize("n, m", [(2, 5), (7, 4), (10, 13), (0, 15)])
def test_half_line_overlap_against_adaptive_quadrature(n, m):
    oracle, _ = integrate.quad(
        lambda x: phi_oracle(n, x) * phi_oracle(m, x), 0, 40, limit=200, epsabs=1e-13
    )
    assert half_line_overlap(n, m) == pytest.approx(oracle, abs=1e-9)
    assert half_line_overlap(m, n) == half_line_overlap(n, m)


def test_half_line_parity_identity_holds_before_pinning():
    cache = HermiteBasisCache.build(40)
    raw = cache.interval_overlaps(0.0, np.inf)
    n = np.arange(41)
    even = (n[:, None] + n[None, :]) % 2 == 0
    np.testing.assert_allclose(raw[even], (0.5 * np.eye(41))[even], atol=1e-12)
    np.testing.assert_allclose(raw, cache.half_line_overlaps(), atol=1e-12)


def test_half_line_overlap_out_of_range():
    cache = HermiteBasisCache.build(10)
    with pytest.raises(InvalidArgumentError):
        cache.half_line_overlap(3, 11)
    with pytest.raises(InvalidArgumentError):
        half_line_overlap(-1, 0)


# -- expectation -------------------------------------------------------------


def test_expectation_examples():
    vac, _ = coherent_vector(0, 6)
    assert expectation(vac, number(6)) == 0
    s = make_number_superposition(1, 0.0, 6)
    assert expectation(s, position(6)) == pytest.approx(SQ2, abs=1e-9)
    assert abs(expectation(s, position(6)).imag) < 1e-12


def test_expectation_tensor_product_and_mismatch():
    noon = make_noon(1, 2)
    val = expectation(noon, [creation(2), annihilation(2)])
    assert val == pytest.approx(0.5)
    with pytest.raises(InvalidArgumentError):
        expectation(noon, [number(3), None])
    with pytest.raises(InvalidArgumentError):
        expectation(noon, number(2))


def test_expectation_converges_under_cutoff_doubling():
    alpha = 1.5 + 0.5j
    vals = []
    for cutoff in (30, 60):
        s, _ = coherent_vector(alpha, cutoff)
        vals.append(expectation(s, position(cutoff)))
    assert abs(vals[1] - vals[0]) < 1e-6
    assert vals[1].real == pytest.approx(math.sqrt(2) * alpha.real, abs=1e-9)
