import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.special import eval_legendre

from ulrm import pec
from ulrm.pec import (
    BasisSet,
    DegeneracyError,
    build_hamiltonian,
    extended_basis,
    find_wells,
    first_order_mixing,
    manifold_basis,
    nearest_manifold_basis,
    pec_diagonalize,
    pec_low_l_swave,
)
from ulrm.radial import RydbergState
from ulrm.units import HARTREE_MHZ


@pytest.fixture(scope="module")
def rb35_manifold():
    return manifold_basis("Rb", 35)


@pytest.fixture(scope="module")
def rb35_extended():
    return extended_basis("Rb", 35, 0)


def test_extended_basis_rb35s(rb35_extended):
    low = sorted(s.label for s in rb35_extended.states if s.l < 3)
    assert low == ["33D", "34P", "35S"]
    high = {(s.n, s.l) for s in rb35_extended.states if s.l >= 3}
    assert high == {(m, l) for m in (31, 32) for l in range(3, m)}
    assert rb35_extended.kind == "extended-p-wave"


def test_nearest_manifold_partner():
    assert {s.n for s in nearest_manifold_basis("Rb", 42, 0).states[1:]} == {39}
    assert {s.n for s in nearest_manifold_basis("Cs", 42, 0).states[1:]} == {38}


def test_basis_validation():
    s = RydbergState("Rb", 30, 0)
    with pytest.raises(ValueError):
        BasisSet((s, s))
    with pytest.raises(ValueError):
        BasisSet((s, RydbergState("Cs", 30, 0)))


def test_unperturbed_limit(monkeypatch, rb35_extended):
    monkeypatch.setattr(pec.scattering, "s_wave_length", lambda species, k: np.zeros_like(np.asarray(k, float)))
    H, _ = build_hamiltonian(rb35_extended, 1500.0)
    np.testing.assert_array_equal(H, np.diag(rb35_extended.energies))


def test_two_state_analytic():
    b = BasisSet((RydbergState("Rb", 35, 0), RydbergState("Rb", 34, 2)))
    for R in (900.0, 1500.0, 1900.0):
        H, _ = build_hamiltonian(b, R)
        a, c, d = H[0, 0], H[0, 1], H[1, 1]
        mean, half = 0.5 * (a + d), math.sqrt(0.25 * (a - d) ** 2 + c * c)
        w = np.linalg.eigvalsh(H)
        np.testing.assert_allclose(w, [mean - half, mean + half], rtol=1e-12, atol=0)


def test_hamiltonian_symmetric_with_pwave(rb35_extended):
    H, _ = build_hamiltonian(rb35_extended, 400.0, include_p_wave=True, k_energy=RydbergState("Rb", 35, 0).energy)
    assert np.max(np.abs(H - H.T)) == 0.0


def test_pwave_gradient_matches_3d_finite_difference():
    b = BasisSet(tuple(RydbergState("Rb", 30, l) for l in range(0, 6)))
    R = 1100.0
    _, dpsi = b.contact_amplitudes([R])
    h = 1e-3

    def psi(wf, p):
        r = np.linalg.norm(p)
        y = math.sqrt((2 * wf.state.l + 1) / (4 * math.pi))
        return float(wf.evaluate_u(r) / r * y * eval_legendre(wf.state.l, p[2] / r))

    for i, wf in enumerate(b.wavefunctions):
        p0 = np.array([0.0, 0.0, R])
        grad = np.array([(psi(wf, p0 + h * e) - psi(wf, p0 - h * e)) / (2 * h) for e in np.eye(3)])
        assert grad[0] == pytest.approx(0.0, abs=1e-9) and grad[1] == pytest.approx(0.0, abs=1e-9)
        assert grad[2] == pytest.approx(dpsi[0, i], rel=1e-5, abs=1e-12)


def test_manifold_rank_one():
    # l >= 4 only: the F defect would lift the degeneracy
    b = manifold_basis("Rb", 35, l_min=4)
    R = np.linspace(1200, 2300, 40)
    pcs = pec_diagonalize(b, R, perturber="Rb", reference_energy=b.energies[0])
    psi, _ = b.contact_amplitudes(R)
    bound = np.abs(2 * math.pi * 18.5) * np.max(psi**2)
    E = np.sort(pcs.energies, axis=1)
    assert np.all(E[:, 0] < -1e-3 * bound)
    assert np.max(np.abs(E[:, 1:])) <= 1e-9 * bound


def test_trilobite_wells_rb35(rb35_manifold):
    R = np.linspace(1200, 2400, 1200)
    pcs = pec_diagonalize(rb35_manifold, R, perturber="Rb", keep=[0])
    wells = find_wells(R, pcs.curve(0))
    assert wells[0].R_min == pytest.approx(2150, rel=0.03)
    assert wells[1].R_min == pytest.approx(1910, rel=0.03)


def test_trace_and_residuals(rb35_extended):
    s = RydbergState("Rb", 35, 0)
    R = np.linspace(300, 1400, 60)
    pcs = pec_diagonalize(
        rb35_extended, R, include_p_wave=True, perturber="Rb", k_energy=s.energy, reference_energy=0.0, check_residuals=True
    )
    for i, r in enumerate(R):
        H, _ = build_hamiltonian(rb35_extended, r, include_p_wave=True, perturber="Rb", k_energy=s.energy)
        assert pcs.energies[i].sum() == pytest.approx(np.trace(H), rel=1e-10)


def test_eigvecs_unit_norm_and_sign():
    b = nearest_manifold_basis("Rb", 35, 0)
    R = np.linspace(1200, 2400, 200)
    pcs = pec_diagonalize(b, R, perturber="Rb", keep="all")
    for j in range(0, b.__len__(), 7):
        v = pcs.eigvecs(j)
        np.testing.assert_allclose(np.linalg.norm(v, axis=1), 1.0, atol=1e-12)
        big = v[np.arange(len(R)), np.argmax(np.abs(v), axis=1)]
        assert np.all(big > 0)


def test_continuity_overlaps(rb35_extended):
    s = RydbergState("Rb", 35, 0)
    R = np.linspace(300, 1400, 1200)
    pcs = pec_diagonalize(rb35_extended, R, include_p_wave=True, perturber="Rb", k_energy=s.energy)
    ok = pcs.reliable.copy()
    ok[:-1] &= pcs.reliable[1:]
    assert np.min(pcs.overlaps[ok]) >= 0.5


def test_asymptotic_freedom():
    s = RydbergState("Cs", 30, 0)
    b = nearest_manifold_basis("Cs", 30, 0)
    n_top = max(x.nstar for x in b.states)
    R = np.linspace(2.5 * n_top**2, b.r_max, 20)
    pcs = pec_diagonalize(b, R, perturber="Rb", reference_energy=0.0)
    asym = np.sort(b.energies)
    E = np.sort(pcs.energies, axis=1)
    assert np.max(np.abs(E - asym)) * HARTREE_MHZ <= 1.0
    assert s in b.states


def test_swave_zero_scattering():
    s = RydbergState("Rb", 35, 0)
    R = np.linspace(1000, 2400, 100)
    assert np.all(pec_low_l_swave(s, "Rb", R, a_s_override=0.0).curve(0) == 0.0)


def test_swave_node_vanishes():
    s = RydbergState("Rb", 35, 0)
    b = BasisSet((s,))
    wf = b.wavefunctions[0]
    r = wf.r
    sign = np.flatnonzero(np.signbit(wf.u[1:]) != np.signbit(wf.u[:-1]))
    i = sign[-1]
    node = brentq(wf.evaluate_u, r[i], r[i + 1], xtol=1e-13)
    V = pec_low_l_swave(s, "Rb", [node]).curve(0)[0]
    peak = np.min(pec_low_l_swave(s, "Rb", np.linspace(1000, 2400, 500)).curve(0))
    assert abs(V) <= 1e-12 * abs(peak)


def test_perturbative_and_diagonal_agree():
    s = RydbergState("Rb", 35, 2)
    R = np.linspace(1000, 2400, 1400)
    v1 = pec_low_l_swave(s, "Rb", R).curve(0)
    b = BasisSet((s,))
    pcs = pec_diagonalize(b, R, perturber="Rb", k_energy=s.energy, reference_energy=s.energy)
    w1, w2 = find_wells(R, v1)[0], find_wells(R, pcs.curve(0))[0]
    assert abs(w2.depth - w1.depth) <= 0.05 * abs(w1.depth)


def test_first_order_mixing_zero_scattering(monkeypatch):
    monkeypatch.setattr(pec.scattering, "s_wave_length", lambda species, k: 0.0)
    c = first_order_mixing(RydbergState("Rb", 42, 0), "Rb", 2500.0, manifold_basis("Rb", 39).states[:5])
    assert np.all(c == 0.0)


def test_first_order_mixing_antisymmetry():
    a, b = RydbergState("Rb", 42, 0), RydbergState("Rb", 41, 1)
    c_ab = first_order_mixing(a, "Rb", 2500.0, [b])[0]
    c_ba = first_order_mixing(b, "Rb", 2500.0, [a])[0]
    # same contact coupling up to the k(R) energy, opposite denominator
    assert np.sign(c_ab) == -np.sign(c_ba)
    assert abs(c_ab) == pytest.approx(abs(c_ba), rel=0.1)


def test_first_order_mixing_degenerate():
    with pytest.raises(DegeneracyError):
        first_order_mixing(RydbergState("Rb", 39, 5), "Rb", 2000.0, [RydbergState("Rb", 39, 6)])


def test_first_order_admixture_grows_toward_well():
    s = RydbergState("Rb", 42, 0)
    partners = manifold_basis("Rb", 39).states
    c_far = first_order_mixing(s, "Rb", 3300.0, partners)
    c_near = first_order_mixing(s, "Rb", 2900.0, partners)
    assert np.sum(c_near**2) > 100 * np.sum(c_far**2)
    b = BasisSet((s,) + partners)
    for R, c, rel in ((3100.0, first_order_mixing(s, "Rb", 3100.0, partners), 0.1), (2900.0, c_near, 1.0)):
        pcs = pec_diagonalize(b, np.array([R - 1.0, R]), perturber="Rb", k_energy=s.energy, keep="all")
        v = pcs.eigvecs(pcs.curve_for_state(s))[1]
        exact = v[1:] / v[0]
        # same admixture direction; magnitude agrees away from the trilobite well
        assert abs(c @ exact) / np.linalg.norm(c) / np.linalg.norm(exact) > 0.999
        assert np.sum(exact**2) == pytest.approx(np.sum(c**2), rel=rel)


def test_find_wells_parabola():
    R = np.linspace(0, 10, 201)
    wells = find_wells(R, (R - 4.0) ** 2 - 50.0, asymptote=0.0)
    assert len(wells) == 1 and wells[0].R_min == pytest.approx(4.0)


def test_find_wells_monotonic():
    R = np.linspace(1, 10, 100)
    assert find_wells(R, -1.0 / R) == []


@given(st.floats(min_value=1.5, max_value=8.5), st.floats(min_value=1e-6, max_value=1e-3))
def test_find_wells_gaussian_dip(center, depth):
    R = np.linspace(0, 10, 1001)
    V = -depth * np.exp(-((R - center) ** 2))
    wells = find_wells(R, V, depth_floor=1e-9)
    assert len(wells) == 1
    assert wells[0].R_min == pytest.approx(center, abs=0.011)
    assert wells[0].depth < 0


def test_reliability_mask_propagates(rb35_extended):
    s = RydbergState("Rb", 35, 0)
    R = np.linspace(600, 800, 400)
    pcs = pec_diagonalize(rb35_extended, R, include_p_wave=True, perturber="Rb", k_energy=s.energy)
    bad = np.flatnonzero(~pcs.reliable)
    assert bad.size and np.all(np.diff(bad) == 1)
    _, ok = build_hamiltonian(rb35_extended, R[bad[0]], include_p_wave=True, perturber="Rb", k_energy=s.energy)
    assert not ok
