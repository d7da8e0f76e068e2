"""End-to-end calculations: dimer levels, dipoles, butterfly and trilobite geometry, n-scaling."""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import pec as _pec
from .density import default_density_grid, dipole_matrix, dipole_moment, electron_density, lobe_count
from .radial import RydbergState
from .species import species_lookup
from .units import HARTREE_MHZ
from .vibrational import reduced_mass, solve_vibrational

PAIRS = (("Rb", "Rb"), ("Rb", "Cs"), ("Cs", "Rb"), ("Cs", "Cs"))
BASES = {
    "nearest": _pec.nearest_manifold_basis,
    "extended": _pec.extended_basis,
}


@dataclass(frozen=True, eq=False)
class DimerResult:
    """Outermost-well levels of one Rydberg/perturber pair (energies in MHz)."""

    rydberg: str
    perturber: str
    state: RydbergState
    well: _pec.WellDescriptor
    levels: tuple
    curves: _pec.PotentialCurveSet
    curve_index: int

    @property
    def energies_mhz(self):
        return [lv.energy_mhz for lv in self.levels]


def pair_mass(rydberg, perturber):
    return reduced_mass(species_lookup(rydberg).mass, species_lookup(perturber).mass)


def default_r_grid(state, lo=1.2, hi=2.3, points=1500):
    """Uniform R grid spanning the outer wells, in units of ``n*^2``."""
    ns2 = state.nstar**2
    return np.linspace(lo * ns2, hi * ns2, points)


def _outer_levels(R, V, rydberg, perturber, n_levels):
    wells = _pec.find_wells(R, V)
    if not wells:
        raise ValueError(f"no potential well found for {rydberg}-{perturber}")
    mu = pair_mass(rydberg, perturber)
    # shoulder ripples from weak avoided crossings can register as wells
    # without supporting a level; the outermost binding well is wanted
    for well in wells:
        levels = solve_vibrational(R, V, well, mu, n_levels)
        if levels:
            return well, tuple(levels)
    return wells[0], ()


def swave_dimer(rydberg, n, l, perturber, n_levels=2, R_grid=None):
    """Outermost-well levels on the single-state s-wave curve."""
    state = RydbergState(rydberg, n, l)
    R = default_r_grid(state, 1.0, 2.4) if R_grid is None else np.asarray(R_grid, dtype=float)
    pcs = _pec.pec_low_l_swave(state, perturber, R)
    well, levels = _outer_levels(R, pcs.curve(0), rydberg, perturber, n_levels)
    return DimerResult(rydberg, perturber, state, well, levels, pcs, 0)


def coupled_dimer(rydberg, n, l, perturber, basis="nearest", include_p_wave=False, n_levels=2, R_grid=None):
    """Outermost-well levels on the diagonalized curve that connects to ``(n, l)``.

    ``basis`` is ``"nearest"`` (target plus nearest hydrogenic manifold) or
    ``"extended"`` (both bracketing manifolds and intervening low-l states).
    """
    state = RydbergState(rydberg, n, l)
    b = BASES[basis](rydberg, n, l)
    R = default_r_grid(state) if R_grid is None else np.asarray(R_grid, dtype=float)
    pcs = _pec.pec_diagonalize(
        b,
        R,
        include_p_wave=include_p_wave,
        perturber=perturber,
        k_energy=state.energy,
        reference_energy=state.energy,
        keep=(),
    )
    j = pcs.curve_for_state(state)
    pcs = _pec.pec_diagonalize(
        b,
        R,
        include_p_wave=include_p_wave,
        perturber=perturber,
        k_energy=state.energy,
        reference_energy=state.energy,
        keep=[j],
    )
    well, levels = _outer_levels(R, pcs.curve(j), rydberg, perturber, n_levels)
    return DimerResult(rydberg, perturber, state, well, levels, pcs, j)


def dimer_quartet(n=55, l=0, basis="nearest"):
    """Ground-level shifts (MHz) of the four Rb/Cs dimers, ordered RbRb, RbCs, CsRb, CsCs."""
    return tuple(coupled_dimer(r, n, l, p, basis=basis, n_levels=1).levels[0].energy_mhz for r, p in PAIRS)


@dataclass(frozen=True)
class DipoleResult:
    R: float
    dipole_debye: float
    target_weight: float


def outer_well_dipole(rydberg, n, l, perturber, basis="nearest"):
    """Permanent dipole at the outermost well minimum of the curve tied to ``(n, l)``."""
    res = coupled_dimer(rydberg, n, l, perturber, basis=basis, n_levels=1)
    pcs = res.curves
    i = int(np.argmin(np.abs(pcs.R - res.well.R_min)))
    c = pcs.eigvecs(res.curve_index)[i]
    d = dipole_moment(pcs.basis, c)
    return DipoleResult(float(pcs.R[i]), d, float(c[pcs.basis.index(res.state)] ** 2))


def dipole_curve(pcs, j):
    """``d(R)`` in Debye along curve ``j``."""
    zmat = dipole_matrix(pcs.basis)
    vec = pcs.eigvecs(j)
    return np.array([dipole_moment(pcs.basis, c, zmat=zmat) for c in vec])


@dataclass(frozen=True)
class ButterflyResult:
    well_R: float
    well_energy_mhz: float
    mask: tuple
    curves: _pec.PotentialCurveSet


def butterfly_geometry(species="Rb", n=35, l=0, R_grid=None, margin=5.0):
    """Deepest well of the lowest adiabatic curve inside the p-wave divergence radius.

    The curve set uses the extended basis with p-wave scattering; energies are
    referenced to the hydrogenic level of the upper bracketing manifold.
    """
    state = RydbergState(species, n, l)
    b = _pec.extended_basis(species, n, l)
    R = np.linspace(150.0, 1400.0, 2500) if R_grid is None else np.asarray(R_grid, dtype=float)
    ref = -0.5 / math.ceil(state.nstar) ** 2
    pcs = _pec.pec_diagonalize(
        b, R, include_p_wave=True, perturber=species, k_energy=state.energy, reference_energy=ref, keep=()
    )
    bad = R[~pcs.reliable]
    if bad.size == 0:
        raise ValueError("no p-wave divergence window on this grid")
    mask = (float(bad.min()), float(bad.max()))
    inner = R < mask[0] - margin
    low = np.min(pcs.energies[inner], axis=1)
    wells = _pec.find_wells(R[inner], low, asymptote=low[-1])
    if wells:
        best = min(wells, key=lambda w: w.depth)
        well_R = best.R_min
        e = best.depth + low[-1]
    else:
        i = int(np.argmin(low))
        well_R, e = float(R[inner][i]), float(low[i])
    return ButterflyResult(float(well_R), float(e) * HARTREE_MHZ, mask, pcs)


def trilobite_lobes(species="Rb", n=35, n_wells=3, R_grid=None, grid=(401, 801)):
    """Lobe counts of the trilobite density at its outermost ``n_wells`` wells."""
    b = _pec.manifold_basis(species, n)
    R = np.linspace(0.65 * n * n, 2.1 * n * n, 1800) if R_grid is None else np.asarray(R_grid, dtype=float)
    pcs = _pec.pec_diagonalize(b, R, perturber=species, keep=[0])
    wells = _pec.find_wells(R, pcs.curve(0))[:n_wells]
    out = []
    for w in wells:
        i = int(np.argmin(np.abs(R - w.R_min)))
        m = electron_density(b, pcs.eigvecs(0)[i], R[i], default_density_grid(b, *grid))
        out.append((w, lobe_count(m)))
    return out


@dataclass(frozen=True, eq=False)
class ScalingTable:
    l: int
    n: np.ndarray
    # (pair) -> array of shape (len(n), 2), MHz; NaN where a level is missing
    levels: dict

    def slope(self, pair):
        e = self.levels[pair][:, 0]
        ok = np.isfinite(e) & (e < 0)
        return float(np.polyfit(np.log(self.n[ok]), np.log(-e[ok]), 1)[0])

    def non_crossing(self):
        """True when the pairwise ordering of ground levels is the same at every n."""
        for p, q in itertools.combinations(self.levels, 2):
            diff = self.levels[p][:, 0] - self.levels[q][:, 0]
            if not (np.all(diff > 0) or np.all(diff < 0)):
                return False
        return True


def scaling_study(l=2, n_range=range(30, 51), pairs=PAIRS, include_p_wave=True, basis="extended"):
    """Outermost-well ``v = 0, 1`` energies versus ``n`` for every pair."""
    ns = np.array(list(n_range))
    table = {}
    for pair in pairs:
        rows = np.full((ns.size, 2), np.nan)
        for k, n in enumerate(ns):
            res = coupled_dimer(pair[0], int(n), l, pair[1], basis=basis, include_p_wave=include_p_wave)
            for v, lv in enumerate(res.levels[:2]):
                rows[k, v] = lv.energy_mhz
        table[pair] = rows
    return ScalingTable(l, ns, table)
