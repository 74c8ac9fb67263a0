import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from macroreal.errors import InvalidArgumentError
from macroreal.qubits import (
    PRINTED_LAST_SITE_ANGLES,
    QubitRegisterState,
    SiteSetting,
    bipartition_inference_check,
    collective_z_distribution,
    hybrid_bound,
    hybrid_optimum_vertex,
    make_ghz,
    pi_operator,
    product_up,
    svetlichny_pi,
    svetlichny_report,
    svetlichny_settings,
    svetlichny_value,
)


def test_ghz_two_sites():
    s = make_ghz(2)
    np.testing.assert_allclose(s.amplitudes, [1 / math.sqrt(2), 0, 0, -1 / math.sqrt(2)])


def test_ghz_three_sites_structure():
    amps = make_ghz(3).amplitudes
    nz = np.flatnonzero(amps)
    assert nz.tolist() == [0, 7]
    assert amps[0].real > 0 > amps[7].real


@pytest.mark.parametrize("N", [1, 15])
def test_ghz_out_of_range(N):
    with pytest.raises(InvalidArgumentError):
        make_ghz(N)


@pytest.mark.parametrize("N, expected", [(2, 2.828427), (3, 5.656854)])
def test_svetlichny_value_examples(N, expected):
    assert svetlichny_value(make_ghz(N)) == pytest.approx(expected, abs=1e-6)


@pytest.mark.parametrize("N", range(2, 11))
def test_svetlichny_value_closed_form(N):
    assert svetlichny_value(make_ghz(N)) == pytest.approx(2 ** (N - 0.5), abs=1e-9)


def test_svetlichny_product_state_is_zero():
    for N in (2, 5):
        assert svetlichny_value(product_up(N)) == pytest.approx(0.0, abs=1e-14)


def test_svetlichny_printed_angles_give_im_minus_re():
    for N in (2, 3, 6):
        pi = svetlichny_pi(make_ghz(N), PRINTED_LAST_SITE_ANGLES)
        assert pi.real + pi.imag == pytest.approx(0.0, abs=1e-10)
        assert pi.imag - pi.real == pytest.approx(2 ** (N - 0.5), abs=1e-9)


def test_svetlichny_matches_dense_operator():
    for N in (2, 3, 5):
        from macroreal.qubits import LAST_SITE_ANGLES

        psi = make_ghz(N).amplitudes
        dense = np.vdot(psi, pi_operator(N, LAST_SITE_ANGLES) @ psi)
        assert svetlichny_pi(make_ghz(N)) == pytest.approx(dense, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0, max_value=2 * math.pi), st.integers(2, 6))
def test_svetlichny_global_phase_invariance(phase, N):
    ghz = make_ghz(N)
    rotated = QubitRegisterState(N, np.exp(1j * phase) * ghz.amplitudes)
    assert svetlichny_value(rotated) == pytest.approx(svetlichny_value(ghz), abs=1e-10)


def test_site_settings_normalised():
    assert SiteSetting(0, -math.pi / 2).angle == pytest.approx(3 * math.pi / 2)
    settings_ = svetlichny_settings(4)
    assert len(settings_) == 4
    assert all(0 <= s.angle < 2 * math.pi for pair in settings_ for s in pair)


@pytest.mark.parametrize("N, k, expected", [(2, 1, 2.0), (3, 1, 4.0), (5, 2, 16.0)])
def test_hybrid_bound_examples(N, k, expected):
    assert hybrid_bound(N, k) == expected


def test_hybrid_bound_exhaustive_oracle():
    # independent brute force over all 16 sign patterns, written out longhand
    N, k = 5, 2
    c, s = 2.0 ** (N - k - 1), 2.0 ** (k - 1)
    best = -np.inf
    for signs in itertools.product([-1, 1], repeat=4):
        rc, ic, rs, is_ = signs[0] * c, signs[1] * c, signs[2] * s, signs[3] * s
        pi = complex(rc, ic) * complex(rs, is_)
        best = max(best, pi.real + pi.imag)
    assert hybrid_bound(N, k) == best == 2.0 ** (N - 1)


@pytest.mark.parametrize("N", range(2, 11))
def test_hybrid_bound_all_cuts(N):
    for k in range(1, N):
        assert hybrid_bound(N, k) == pytest.approx(2.0 ** (N - 1), abs=1e-12)
        r = svetlichny_report(N, k)
        assert r.violated
        assert r.quantum_value / r.hybrid_bound == pytest.approx(math.sqrt(2), abs=1e-12)


@pytest.mark.parametrize("k", [0, 5])
def test_hybrid_bound_k_range(k):
    with pytest.raises(InvalidArgumentError):
        hybrid_bound(5, k)


@pytest.mark.parametrize("M", range(1, 9))
def test_side_box_is_the_quantum_algebraic_bound(M):
    pi = pi_operator(M)
    re = (pi + pi.conj().T) / 2
    im = (pi - pi.conj().T) / 2j
    assert np.linalg.eigvalsh(re).max() == pytest.approx(2.0 ** (M - 1), abs=1e-9)
    assert np.linalg.eigvalsh(im).max() == pytest.approx(2.0 ** (M - 1), abs=1e-9)
    assert np.linalg.eigvalsh(re + im).max() <= 2.0**M + 1e-9


def test_sum_constraint_inactive_at_optimum():
    for N, k in [(4, 1), (6, 3), (9, 4)]:
        rc, ic, rs, is_ = hybrid_optimum_vertex(N, k)
        assert rc + ic <= 2.0 ** (N - k) + 1e-12
        assert rs + is_ <= 2.0**k + 1e-12


def test_closed_form_beyond_dense_limit():
    r = svetlichny_report(20, 7)
    assert r.method == "closed-form"
    assert r.quantum_value == 2.0**19.5 and r.hybrid_bound == 2.0**19
    assert svetlichny_report(4).method == "computed"


@pytest.mark.parametrize("N, k", [(4, 1), (3, 2), (6, 3)])
def test_bipartition_inference(N, k):
    assert bipartition_inference_check(N, k) == 1.0


def test_bipartition_product_control():
    N = 4
    state = product_up(N)
    assert bipartition_inference_check(N, 2, state) == 1.0
    assert collective_z_distribution(state, range(N)) == {4: 1.0}
    ghz = collective_z_distribution(make_ghz(N), range(2))
    assert ghz == pytest.approx({-2: 0.5, 2: 0.5})
