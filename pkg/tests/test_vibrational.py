import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from ulrm.pec import WellDescriptor, find_wells, pec_low_l_swave
from ulrm.radial import RydbergState
from ulrm.species import species_lookup
from ulrm.vibrational import ResolutionError, reduced_mass, solve_grid, solve_vibrational

MU_RB2 = 79216.0


@pytest.fixture(scope="module")
def rb35s_curve():
    s = RydbergState("Rb", 35, 0)
    R = np.linspace(1.0 * s.nstar**2, 2.4 * s.nstar**2, 1500)
    V = pec_low_l_swave(s, "Rb", R).curve(0)
    return R, V, find_wells(R, V)[0]


def harmonic(omega, mu=MU_RB2, R0=2000.0, half=60.0, depth=-1e-6):
    R = np.linspace(R0 - 3 * half, R0 + 3 * half, 4001)
    V = 0.5 * mu * omega**2 * (R - R0) ** 2 + depth
    well = WellDescriptor(1, R0, R0 - half, R0 + half, depth, barrier=1.0)
    return R, V, well


def test_reduced_mass_examples():
    rb, cs = species_lookup("Rb").mass, species_lookup("Cs").mass
    assert reduced_mass(rb, rb) == pytest.approx(79216)
    assert reduced_mass(rb, cs) == pytest.approx(158432 * 242282 / 400714, rel=1e-15)
    assert reduced_mass(rb, cs) == reduced_mass(cs, rb)
    with pytest.raises(ValueError):
        reduced_mass(0, rb)


def test_harmonic_oracle():
    omega = 1e-7
    R, V, well = harmonic(omega)
    levels = solve_vibrational(R, V, well, MU_RB2, n_levels=4)
    assert len(levels) == 4
    for lv in levels:
        assert (lv.energy + 1e-6) == pytest.approx((lv.v + 0.5) * omega, rel=1e-3)


def test_node_theorem():
    R, V, well = harmonic(1e-7)
    for lv in solve_vibrational(R, V, well, MU_RB2, n_levels=4):
        assert lv.node_count() == lv.v


def _square_well_levels(V0, L, m, mu):
    """Bound energies of a finite well of width ``L`` with hard walls ``m`` beyond each edge."""

    def parts(E):
        k = math.sqrt(2 * mu * (E + V0))
        kap = math.sqrt(-2 * mu * E)
        return k, kap, math.sin(k * L / 2), math.cos(k * L / 2), math.sinh(kap * m), math.cosh(kap * m)

    def even(E):
        k, kap, s, c, sh, ch = parts(E)
        return k * s * sh - kap * c * ch

    def odd(E):
        k, kap, s, c, sh, ch = parts(E)
        return k * c * sh + kap * s * ch

    E = np.linspace(-V0 + 1e-9, -1e-9, 20001)
    roots = []
    for f in (even, odd):
        vals = np.array([f(e) for e in E])
        for i in np.flatnonzero(np.sign(vals[1:]) != np.sign(vals[:-1])):
            roots.append(brentq(f, E[i], E[i + 1], xtol=1e-14))
    return np.sort(roots)


def test_square_well_oracle():
    V0, L, m, mu = 1.0, 10.0, 2.0, 1.0
    exact = _square_well_levels(V0, L, m, mu)
    R = np.linspace(-(L / 2 + m), L / 2 + m, 8001)
    V = np.where(np.abs(R) < L / 2, -V0, 0.0)
    w, _ = solve_grid(R, V, mu, exact.size + 3)
    assert np.count_nonzero(w < 0) == exact.size == 5
    np.testing.assert_allclose(w[: exact.size], exact, rtol=1e-2)


def test_rb35s_levels_converge_in_grid(rb35s_curve):
    R, V, well = rb35s_curve
    mu = MU_RB2
    a = solve_vibrational(R, V, well, mu, 2, points=800)
    b = solve_vibrational(R, V, well, mu, 2, points=1600)
    for x, y in zip(a, b):
        assert x.energy == pytest.approx(y.energy, rel=1e-2)


def test_rb35s_ground_insensitive_to_margin(rb35s_curve):
    # the inner barrier of this s-wave curve peaks at the asymptote, so only
    # the ground level is well separated from the neighbouring inner well
    R, V, well = rb35s_curve
    a = solve_vibrational(R, V, well, MU_RB2, 1, margin=0.1)
    b = solve_vibrational(R, V, well, MU_RB2, 1, margin=0.2)
    assert a[0].energy == pytest.approx(b[0].energy, rel=5e-3)


def test_margin_insensitive_with_real_barrier():
    R, V, well = harmonic(1e-7, half=80.0)
    a = solve_vibrational(R, V, well, MU_RB2, 4, margin=0.1)
    b = solve_vibrational(R, V, well, MU_RB2, 4, margin=0.2)
    for x, y in zip(a, b):
        assert x.energy == pytest.approx(y.energy, rel=5e-3)


def test_ground_above_minimum(rb35s_curve):
    R, V, well = rb35s_curve
    levels = solve_vibrational(R, V, well, MU_RB2, 2)
    v_min = np.min(V[(R >= well.R_left) & (R <= well.R_right)])
    assert levels[0].energy >= v_min
    assert levels[0].energy < levels[1].energy < well.barrier


def test_heavier_mass_binds_deeper(rb35s_curve):
    R, V, well = rb35s_curve
    light = solve_vibrational(R, V, well, MU_RB2, 2)
    heavy = solve_vibrational(R, V, well, 2 * MU_RB2, 2)
    for a, b in zip(light, heavy):
        assert b.energy < a.energy


@settings(max_examples=20)
@given(st.floats(min_value=0.5, max_value=3.0))
def test_harmonic_spacing(omega_e7):
    omega = omega_e7 * 1e-7
    R, V, well = harmonic(omega)
    e = [lv.energy for lv in solve_vibrational(R, V, well, MU_RB2, n_levels=3)]
    assert np.diff(e) == pytest.approx([omega, omega], rel=2e-3)


def test_wavefunction_normalized():
    R, V, well = harmonic(1e-7)
    for lv in solve_vibrational(R, V, well, MU_RB2, n_levels=2):
        assert trapezoid(lv.chi**2, lv.R) == pytest.approx(1.0, rel=1e-10)


def test_under_resolved_well():
    R = np.linspace(0.0, 10.0, 11)
    V = (R - 5.0) ** 2
    with pytest.raises(ResolutionError):
        solve_vibrational(R, V, WellDescriptor(1, 5.0, 4.5, 5.5, -1.0), 1.0)


def test_bad_mass(rb35s_curve):
    R, V, well = rb35s_curve
    with pytest.raises(ValueError):
        solve_vibrational(R, V, well, -1.0)
