"""Electron--perturber scattering: s-wave length, p-wave volume, local wavenumber.

The triplet p-wave phase shift is modelled as a Breit--Wigner shape
resonance with a ``k**3`` threshold width,

    delta_p(E) = atan2(Gamma(E) / 2, E_res - E),  Gamma(E) = Gamma (E / E_res)**1.5,

which passes through pi/2 exactly at ``E_res``. An optional background
scattering volume adds ``-atan(background k**3)`` scaled by ``(1 - E/E_res)``
so the resonance position is untouched.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .species import species_lookup
from .units import ev_to_hartree

DIVERGENCE_THRESHOLD = 50.0
CALIBRATED_EMAX = ev_to_hartree(0.1)


class ExtrapolationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ScatteringEvaluation:
    k: np.ndarray
    a_s: np.ndarray
    a_p3: np.ndarray
    delta_p: np.ndarray
    reliable: np.ndarray
    forbidden: np.ndarray


def semiclassical_k(E_nl, r, return_flag=False):
    """Local electron wavenumber ``sqrt(2 (E_nl + 1/r))``.

    In the classically forbidden region the wavenumber is clamped to zero;
    with ``return_flag`` a boolean mask of those radii is returned as well.
    """
    r = np.asarray(r, dtype=float)
    kin = E_nl + 1.0 / r
    forbidden = kin < 0.0
    k = np.sqrt(2.0 * np.where(forbidden, 0.0, kin))
    if k.ndim == 0:
        k = float(k)
        forbidden = bool(forbidden)
    return (k, forbidden) if return_flag else k


def s_wave_length(species, k):
    """Effective-range s-wave scattering length ``a0 + pi alpha k / 3``."""
    sp = species_lookup(species)
    return sp.a0 + np.pi * sp.alpha * np.asarray(k, dtype=float) / 3.0


def _require_pwave(species):
    sp = species_lookup(species)
    if sp.pwave is None:
        raise ValueError(f"species {sp.name} has no p-wave resonance data")
    return sp.pwave


def p_wave_phase_shift(species, E_electron, warn=True):
    """Triplet p-wave phase shift (rad) at electron kinetic energy ``E_electron`` (hartree)."""
    pw = _require_pwave(species)
    E = np.asarray(E_electron, dtype=float)
    if np.any(E < 0):
        raise ValueError("electron energy must be non-negative")
    if warn and np.any(E > CALIBRATED_EMAX):
        warnings.warn(
            "p-wave phase shift evaluated above the calibrated 0.1 eV window",
            ExtrapolationWarning,
            stacklevel=2,
        )
    x = E / pw.E_res
    delta = np.arctan2(0.5 * pw.Gamma * x**1.5, pw.E_res - E)
    if pw.background:
        k = np.sqrt(2.0 * E)
        delta = delta - np.arctan(pw.background * k**3) * (1.0 - x)
    return float(delta) if delta.ndim == 0 else delta


def zero_energy_volume(species):
    """``lim_{k->0} a_p^3(k)`` of the resonance model."""
    pw = _require_pwave(species)
    return -pw.Gamma / (2.0**2.5 * pw.E_res**2.5) - pw.background


def p_wave_volume(species, k, threshold=DIVERGENCE_THRESHOLD):
    """p-wave scattering volume ``-tan(delta_p)/k**3`` and its reliability.

    Returns
    -------
    a_p3, reliable
        ``reliable`` is False where ``|tan delta_p|`` exceeds ``threshold``.
    """
    k = np.asarray(k, dtype=float)
    E = 0.5 * k**2
    delta = np.asarray(p_wave_phase_shift(species, E, warn=False))
    tan = np.tan(delta)
    reliable = np.abs(tan) <= threshold
    small = k < 1e-6
    with np.errstate(divide="ignore", invalid="ignore"):
        a_p3 = np.where(small, zero_energy_volume(species), -tan / np.where(small, 1.0, k) ** 3)
    if a_p3.ndim == 0:
        return float(a_p3), bool(reliable)
    return a_p3, reliable


def evaluate(species, E_nl, R, include_p_wave=True, threshold=DIVERGENCE_THRESHOLD):
    """All scattering quantities for a perturber at radii ``R``."""
    R = np.atleast_1d(np.asarray(R, dtype=float))
    k, forbidden = semiclassical_k(E_nl, R, return_flag=True)
    a_s = s_wave_length(species, k)
    if include_p_wave:
        delta = np.asarray(p_wave_phase_shift(species, 0.5 * k**2, warn=False))
        a_p3, reliable = p_wave_volume(species, k, threshold)
    else:
        delta = np.zeros_like(k)
        a_p3 = np.zeros_like(k)
        reliable = np.ones_like(k, dtype=bool)
    return ScatteringEvaluation(
        k=k, a_s=a_s, a_p3=a_p3, delta_p=delta, reliable=reliable, forbidden=forbidden
    )
