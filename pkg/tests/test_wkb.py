import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhjwave import potentials as P
from qhjwave import wkb
from qhjwave.classical import classical_action
from qhjwave.errors import DomainError


def test_phase_at_centre(osc):
    w = wkb.wkb_wavefunction(osc, 8.5, np.array([0.0]), amplitude=1.0)
    p0 = math.sqrt(17.0)
    # half the well action is 8.5 pi / 2 for E = 8.5
    expected = math.sin(8.5 * math.pi / 2 + math.pi / 4) / math.sqrt(p0)
    assert w.psi_wkb[0] == pytest.approx(expected, abs=1e-12)
    assert float(classical_action(osc, 8.5, np.array([0.0]))[0]) == pytest.approx(8.5 * math.pi / 2)


def test_validity_mask_excludes_turning_regions(osc):
    tp = P.find_turning_points(osc, 8.5)
    xs = np.linspace(tp.x1 + 1e-4, tp.x2 - 1e-4, 2001)
    w = wkb.wkb_wavefunction(osc, 8.5, xs)
    assert w.validity_mask[len(xs) // 2]
    assert not w.validity_mask[0] and not w.validity_mask[-1]
    near = xs > tp.x2 - 1e-3
    assert np.all(w.ratio[near] > wkb.VALIDITY_RATIO)
    # the raw form keeps growing as x2 is approached
    assert np.max(np.abs(w.psi_wkb[near])) > 2 * np.max(np.abs(w.psi_wkb[w.validity_mask]))


def test_grid_must_be_inside_well(osc):
    with pytest.raises(DomainError):
        wkb.wkb_wavefunction(osc, 8.5, np.array([0.0, math.sqrt(17)]))
    with pytest.raises(DomainError):
        wkb.wkb_wavefunction(osc, 8.5, np.array([-5.0]))


def test_free_particle_exact():
    m = P.constant(0.0, domain=(-20, 20))
    xs = np.linspace(0, 10, 101)
    w = wkb.wkb_wavefunction(m, 0.5, xs, x_ref=0.0)
    np.testing.assert_allclose(w.psi_wkb, np.sin(xs + math.pi / 4), atol=1e-13)
    assert np.all(w.validity_mask)


def test_amplitude_independent_of_grid(osc):
    a = wkb.wkb_wavefunction(osc, 4.5, np.array([0.1])).amplitude
    b = wkb.wkb_wavefunction(osc, 4.5, np.linspace(-1, 1, 7)).amplitude
    assert a == b


def test_classical_normalization(osc):
    w = wkb.wkb_wavefunction(osc, 8.5, np.array([0.0]), normalization="classical")
    # integral dx/p over the harmonic well is pi
    assert w.amplitude == pytest.approx(math.sqrt(2 / math.pi), rel=1e-9)
    with pytest.raises(ValueError):
        wkb.wkb_wavefunction(osc, 8.5, np.array([0.0]), normalization="bogus")


def test_quantization_harmonic(osc):
    assert wkb.wkb_quantization(osc, 8) == pytest.approx(8.5, abs=1e-9)
    assert wkb.wkb_quantization(osc, 0) == pytest.approx(0.5, abs=1e-9)


def test_quantization_coulomb_regression(hydrogen):
    # no Langer correction, so this sits below the exact -1/18
    E = wkb.wkb_quantization(hydrogen, 3)
    assert E == pytest.approx(-0.0588745030457, abs=1e-10)
    assert E < -1 / 18


def test_quantization_rejects_missing_state(hydrogen):
    with pytest.raises(ValueError):
        wkb.wkb_quantization(hydrogen, 1)


def test_error_decreases_with_n(osc):
    errs = []
    for n in (2, 4, 8):
        x = np.array([0.5 * math.sqrt(2 * n + 1)])
        w = wkb.wkb_wavefunction(osc, n + 0.5, x)
        errs.append(abs(w.psi_wkb[0] - P.analytic_eigenfunction(osc, n, x)[0]))
    assert errs[0] > errs[1] > errs[2]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 12))
def test_harmonic_quantization_is_exact(n):
    assert wkb.wkb_quantization(P.harmonic(), n) == pytest.approx(n + 0.5, abs=1e-9)
