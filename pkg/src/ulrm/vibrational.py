"""Bound vibrational levels in a tabulated potential well."""

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal
from scipy.integrate import trapezoid

from .units import HARTREE_MHZ

DEFAULT_POINTS = 800
MIN_WELL_POINTS = 20


class ResolutionError(ValueError):
    pass


def reduced_mass(m1, m2):
    if m1 <= 0 or m2 <= 0:
        raise ValueError("masses must be positive")
    return m1 * m2 / (m1 + m2)


@dataclass(frozen=True, eq=False)
class VibrationalLevel:
    v: int
    energy: float
    R: np.ndarray
    chi: np.ndarray
    well: object = None

    @property
    def energy_mhz(self):
        return self.energy * HARTREE_MHZ

    def node_count(self, rel_tol=1e-3):
        c = self.chi[np.abs(self.chi) > rel_tol * np.max(np.abs(self.chi))]
        return int(np.count_nonzero(np.signbit(c[1:]) != np.signbit(c[:-1])))


def solve_grid(R, V, mu, n_levels):
    """Lowest eigenpairs of ``-1/(2 mu) d2/dR2 + V`` on a uniform grid with hard walls.

    Returns energies and wavefunctions normalized to ``int chi**2 dR = 1``.
    """
    h = R[1] - R[0]
    t = 1.0 / (2.0 * mu * h * h)
    diag = V + 2.0 * t
    off = np.full(R.size - 1, -t)
    n = min(n_levels, R.size) - 1
    w, vec = eigh_tridiagonal(diag, off, select="i", select_range=(0, n))
    vec = vec / np.sqrt(trapezoid(vec**2, R, axis=0))
    return w, vec


def solve_vibrational(R, V, well, mu, n_levels=2, points=DEFAULT_POINTS, margin=0.1, localization=0.5):
    """Vibrational levels of ``well`` in the curve ``(R, V)`` (hartree).

    The well domain ``[R_left, R_right]`` is widened by ``margin`` times its
    width on each side (clipped to the curve), resampled on ``points`` uniform
    nodes by cubic spline and closed with hard walls. Only states that stay
    mostly inside the well and lie below its confining barrier are returned.
    """
    R = np.asarray(R, dtype=float)
    V = np.asarray(V, dtype=float)
    if mu <= 0:
        raise ValueError("mu must be positive")
    inside = (R >= well.R_left) & (R <= well.R_right)
    if np.count_nonzero(inside) < 5:
        raise ResolutionError("well spans fewer than 5 curve samples")
    width = well.R_right - well.R_left
    lo = max(R[0], well.R_left - margin * width)
    hi = min(R[-1], well.R_right + margin * width)
    grid = np.linspace(lo, hi, points)
    if np.count_nonzero((grid >= well.R_left) & (grid <= well.R_right)) < MIN_WELL_POINTS:
        raise ResolutionError("well narrower than the minimum vibrational grid")
    pot = CubicSpline(R, V)(grid)

    # extra eigenpairs guard against states of neighbouring wells inside the margin
    w, vec = solve_grid(grid, pot, mu, n_levels + 6)
    in_well = (grid >= well.R_left) & (grid <= well.R_right)
    levels = []
    for e, chi in zip(w, vec.T):
        if len(levels) == n_levels or e >= well.barrier:
            break
        if trapezoid(np.where(in_well, chi**2, 0.0), grid) < localization:
            continue
        # sign-positive at the first antinode
        first = np.argmax(np.abs(chi) > 0.5 * np.max(np.abs(chi)))
        if chi[first] < 0:
            chi = -chi
        levels.append(VibrationalLevel(v=len(levels), energy=float(e), R=grid, chi=chi, well=well))
    return levels
