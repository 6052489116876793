"""Hypothesis checks of invariants that hold for any admissible input."""

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qhjwave import assembly, qhje
from qhjwave import potentials as P
from qhjwave.classical import classical_action

slow = settings(max_examples=6, deadline=None)


@settings(max_examples=40, deadline=None)
@given(k=st.floats(0.2, 5.0), E=st.floats(0.1, 20.0))
def test_turning_points_lie_on_energy(k, E):
    m = P.harmonic(k=k)
    tp = P.find_turning_points(m, E)
    assert m(tp.x1) == pytest.approx(E, rel=1e-10)
    assert m(tp.x2) == pytest.approx(E, rel=1e-10)
    assert tp.x1 < 0 < tp.x2


@settings(max_examples=40, deadline=None)
@given(k=st.floats(0.2, 5.0), E=st.floats(0.1, 20.0))
def test_half_orbit_action(k, E):
    m = P.harmonic(k=k)
    tp = P.find_turning_points(m, E)
    W = float(classical_action(m, E, np.array([tp.x2]), turning=tp)[0])
    assert W == pytest.approx(math.pi * E / math.sqrt(k), rel=1e-8)


@slow
@given(n=st.integers(0, 6), phi=st.floats(0.05, 3.0), X0=st.floats(0.0, 2.0))
def test_state_invariants_any_gauge(n, phi, X0):
    assume(abs(math.sin(X0 + phi)) > 0.05)
    m = P.harmonic()
    run = assembly.solve_state(m, n=n, phi=phi, X0=X0, boundary="oracle")
    t = run.table
    assert len(t.nodes) == n
    assert np.all(run.action.Xp > 0)
    c = assembly.compare(t, lambda x: P.analytic_eigenfunction(m, n, x))
    assert c.max_abs_error < 1e-7


@slow
@given(hbar=st.floats(0.5, 2.0), mass=st.floats(0.5, 2.0), n=st.integers(0, 4))
def test_units_scale(hbar, mass, n):
    m = P.harmonic(hbar=hbar, mass=mass)
    E = P.analytic_energy(m, n)
    assert E == pytest.approx(hbar * (n + 0.5) / math.sqrt(mass), rel=1e-12)
    run = assembly.solve_state(m, n=n, boundary="analytic")
    assert run.table.report.joined
    c = assembly.compare(run.table, lambda x: P.analytic_eigenfunction(m, n, x))
    assert c.max_abs_error < 1e-7


@slow
@given(E=st.floats(0.55, 8.45))
def test_residual_vanishes_only_at_eigenvalues(E):
    assume(min(abs(E - (n + 0.5)) for n in range(10)) > 1e-3)
    r = assembly.quantization_residual(P.harmonic(), E)
    assert r.usable and not r.joined


@settings(max_examples=30, deadline=None)
@given(E=st.floats(0.5, 12.0))
def test_riccati_tail_decays(E):
    m = P.harmonic()
    f = qhje.integrate_forbidden(m, E, "III", with_norm=False)
    assert np.all(f.Yp[1:] > 0)
    assert np.all(np.diff(f.Y) > 0)
