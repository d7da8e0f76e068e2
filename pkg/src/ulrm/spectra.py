"""Line spectra of polyatomic molecules from additive dimer binding energies."""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import poisson

MERGE_TOL_MHZ = 1e-3
MAX_ATOMS = 10


class CoverageWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DimerEnergyQuartet:
    """Ground-level shifts in MHz: a (Rb*-Rb), b (Rb*-Cs), c (Cs*-Rb), d (Cs*-Cs)."""

    a: float
    b: float
    c: float
    d: float
    n: int = 55
    l: int = 0

    def __post_init__(self):
        if not all(x < 0 for x in (self.a, self.b, self.c, self.d)):
            raise ValueError("dimer shifts must be negative")

    def pair(self, rydberg):
        """Shifts ``(Rb perturber, Cs perturber)`` for the given Rydberg species."""
        if rydberg == "Rb":
            return self.a, self.b
        if rydberg == "Cs":
            return self.c, self.d
        raise ValueError(f"unsupported Rydberg species {rydberg!r}")


@dataclass(frozen=True)
class SpectrumLine:
    rydberg_species: str
    i: int
    j: int
    shift: float
    weight: float = 1.0
    # extra (i, j) compositions that landed on the same line
    merged: tuple = ()


def polyatomic_shift(quartet, rydberg, i, j):
    """Shift ``i * (Rb perturber) + j * (Cs perturber)`` in MHz."""
    if i < 0 or j < 0:
        raise ValueError("atom counts must be non-negative")
    x, y = quartet.pair(rydberg)
    return i * x + j * y


def compositions(max_total_atoms, mode="total"):
    """``(i, j)`` pairs with at least one atom.

    ``mode="total"`` caps ``i + j``; ``mode="each"`` caps ``i`` and ``j``
    separately.
    """
    if max_total_atoms > MAX_ATOMS:
        raise ValueError(f"at most {MAX_ATOMS} atoms supported")
    rng = range(max_total_atoms + 1)
    if mode == "total":
        return [(i, j) for i in rng for j in rng if 1 <= i + j <= max_total_atoms]
    if mode == "each":
        return [(i, j) for i in rng for j in rng if i + j >= 1]
    raise ValueError(f"unknown cap mode {mode!r}")


def enumerate_lines(quartet, rydberg, max_total_atoms, mode="total", occupation=None, tol=MERGE_TOL_MHZ):
    """Stick lines sorted by shift.

    Parameters
    ----------
    occupation : tuple of float, optional
        Mean numbers ``(lambda_Rb, lambda_Cs)`` of ground-state atoms in the
        Rydberg volume; line weights become independent Poisson probabilities.
    tol : float
        Lines closer than this (MHz) are merged with summed weights.
    """
    raw = []
    for i, j in compositions(max_total_atoms, mode):
        w = 1.0
        if occupation is not None:
            w = float(poisson.pmf(i, occupation[0]) * poisson.pmf(j, occupation[1]))
        raw.append((polyatomic_shift(quartet, rydberg, i, j), i, j, w))
    raw.sort()
    lines = []
    for shift, i, j, w in raw:
        if lines and abs(shift - lines[-1].shift) <= tol:
            last = lines[-1]
            lines[-1] = SpectrumLine(
                rydberg, last.i, last.j, last.shift, last.weight + w, last.merged + ((i, j),)
            )
        else:
            lines.append(SpectrumLine(rydberg, i, j, shift, w))
    return lines


def lorentzian(x, x0, fwhm):
    """Area-normalized Lorentzian."""
    g = 0.5 * fwhm
    return g / np.pi / ((x - x0) ** 2 + g * g)


def render_spectrum(lines, broadening_fwhm, grid):
    """Sum of Lorentzians (area = weight) sampled on ``grid`` (MHz)."""
    if broadening_fwhm <= 0:
        raise ValueError("broadening must be positive")
    grid = np.asarray(grid, dtype=float)
    shifts = np.array([ln.shift for ln in lines])
    weights = np.array([ln.weight for ln in lines])
    if shifts.size and (shifts.min() < grid.min() or shifts.max() > grid.max()):
        warnings.warn("energy grid does not cover every line", CoverageWarning, stacklevel=2)
    out = np.zeros_like(grid)
    for s, w in zip(shifts, weights):
        out += w * lorentzian(grid, s, broadening_fwhm)
    return out


def default_grid(lines, broadening_fwhm, points=4001, pad=10.0):
    shifts = [ln.shift for ln in lines]
    lo = min(shifts + [0.0]) - pad * broadening_fwhm
    hi = max(shifts + [0.0]) + pad * broadening_fwhm
    return np.linspace(lo, hi, points)
