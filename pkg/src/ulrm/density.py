"""Electronic probability densities and permanent dipole moments of molecular states.

A molecular state at distance ``R`` is the superposition
``Psi(r) = sum_i c_i u_i(r)/r Y_{l_i 0}(theta)`` over a :class:`BasisSet`.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.integrate import trapezoid
from scipy.special import eval_legendre

from .units import DEBYE_PER_AU

LOBE_FRACTION = 0.5


class CoverageWarning(UserWarning):
    pass


class DegenerateMapError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ElectronDensityMap:
    """``rho |Psi|**2`` on a cylindrical grid.

    ``density[0]`` is the half plane ``phi = 0`` and ``density[1]`` the half
    plane ``phi = pi``; each has shape ``(len(z), len(rho))``.
    """

    rho: np.ndarray
    z: np.ndarray
    density: np.ndarray
    R: float

    @property
    def combined(self):
        """Full (x, z) plane with ``x = -rho`` for ``phi = pi``; shape ``(len(z), 2 len(rho) - 1)``."""
        left = self.density[1][:, :0:-1]
        return np.concatenate([left, self.density[0]], axis=1)

    @property
    def x(self):
        return np.concatenate([-self.rho[:0:-1], self.rho])

    def integral(self):
        """Integral of ``rho |Psi|**2`` over both sampled half planes."""
        return float(sum(trapezoid(trapezoid(d, self.rho, axis=1), self.z) for d in self.density))

    def peak(self):
        """``(x, z)`` of the global density maximum."""
        img = self.combined
        iz, ix = np.unravel_index(np.argmax(img), img.shape)
        return float(self.x[ix]), float(self.z[iz])


def _check_vector(basis, coeffs):
    c = np.asarray(coeffs, dtype=float)
    if c.shape != (len(basis),):
        raise ValueError(f"eigenvector has shape {c.shape}, basis has {len(basis)} states")
    return c


def default_density_grid(basis, n_rho=241, n_z=481):
    """Cylindrical grid covering the whole Rydberg orbit."""
    r_out = basis.r_max
    return np.linspace(0.0, r_out, n_rho), np.linspace(-r_out, r_out, n_z)


def wavefunction_plane(basis, coeffs, rho, z):
    """``Psi`` on the ``(z, rho)`` mesh.

    Points beyond the radial grids lie in the evanescent tail and are set to
    0. A :class:`CoverageWarning` is raised when the mesh stops short of the
    outer classical turning point of an occupied state, i.e. when part of the
    orbit is cut off.
    """
    c = _check_vector(basis, coeffs)
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    Z, P = np.meshgrid(z, rho, indexing="ij")
    r = np.hypot(P, Z)
    cos_t = np.divide(Z, r, out=np.ones_like(r), where=r > 0)
    psi = np.zeros_like(r)
    reach = min(rho.max(), -z.min(), z.max())
    for ci, wf in zip(c, basis.wavefunctions):
        if ci == 0.0:
            continue
        if reach < 2.0 * wf.state.nstar**2:
            warnings.warn(f"density grid does not cover the {wf.state.label} orbit", CoverageWarning, stacklevel=2)
        inside = (r >= wf.r[0]) & (r <= wf.r[-1])
        u = np.zeros_like(r)
        u[inside] = wf.evaluate_u(r[inside])
        l = wf.state.l
        ylm = math.sqrt((2 * l + 1) / (4.0 * math.pi)) * eval_legendre(l, cos_t)
        psi += ci * np.divide(u, r, out=np.zeros_like(r), where=r > 0) * ylm
    return psi


def electron_density(basis, coeffs, R, density_grid=None):
    """Electron density map of the state with coefficients ``coeffs`` at distance ``R``.

    Parameters
    ----------
    basis : BasisSet
    coeffs : array_like
        Expansion coefficients, one per basis state.
    R : float
        Perturber position on the +z axis (a.u.); stored as metadata.
    density_grid : tuple of arrays, optional
        ``(rho, z)`` sample points; defaults to :func:`default_density_grid`.

    Returns
    -------
    ElectronDensityMap
    """
    rho, z = density_grid if density_grid is not None else default_density_grid(basis)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    psi = wavefunction_plane(basis, coeffs, rho, z)
    dens = rho[None, :] * psi**2
    # m = 0 states are axially symmetric, so both half planes coincide
    return ElectronDensityMap(rho=rho, z=np.asarray(z, dtype=float), density=np.stack([dens, dens.copy()]), R=float(R))


def lobe_count(density_map, fraction=LOBE_FRACTION):
    """Number of connected regions above ``fraction`` of the maximum over both half planes."""
    img = density_map.combined
    top = img.max()
    if not top > 0:
        raise DegenerateMapError("density map is identically zero")
    labels, count = ndimage.label(img > fraction * top)
    if count == 0:
        raise DegenerateMapError("threshold leaves no region")
    return int(count)


def dipole_matrix(basis):
    """Matrix of ``<i|z|j>`` (a.u.) between the ``m = 0`` basis states.

    The radial integral ``int u_i u_j r dr`` is taken on the shared log grid;
    the angular factor for ``l`` and ``l - 1`` is ``l / sqrt((2l-1)(2l+1))``.
    """
    wfs = basis.wavefunctions
    r = basis.r_grid
    x = np.log(r)
    nb = len(basis)
    Z = np.zeros((nb, nb))
    for i in range(nb):
        for j in range(i + 1, nb):
            li, lj = wfs[i].state.l, wfs[j].state.l
            if abs(li - lj) != 1:
                continue
            big = max(li, lj)
            ang = big / math.sqrt((2 * big - 1) * (2 * big + 1))
            # dr = r dx on the log grid
            Z[i, j] = Z[j, i] = trapezoid(wfs[i].u * wfs[j].u * r * r, x) * ang
    return Z


def dipole_moment(basis, coeffs, R=None, zmat=None):
    """Permanent dipole ``<Psi|z|Psi>`` in Debye.

    ``R`` is accepted for symmetry with :func:`electron_density`; the dipole
    only depends on the coefficients. A precomputed ``zmat`` avoids
    recomputing the radial integrals along a curve.
    """
    c = _check_vector(basis, coeffs)
    norm = float(c @ c)
    if not math.isclose(norm, 1.0, rel_tol=1e-8):
        raise ValueError(f"eigenvector is not normalized (|c|^2 = {norm:.12g})")
    if zmat is None:
        zmat = dipole_matrix(basis)
    return float(c @ zmat @ c) * DEBYE_PER_AU
