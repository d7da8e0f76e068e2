"""Rydberg energies and radial wavefunctions by Numerov integration.

The radial function ``u(r) = r R_nl(r)`` solves

    u'' = [l(l+1)/r**2 - 2/r - 2E] u

with a pure Coulomb potential and the quantum-defect energy
``E = -1 / (2 (n - delta_l)**2)``. Integration runs inward on a logarithmic
grid, where the substitution ``r = exp(x)``, ``u = sqrt(r) w`` turns the
equation into ``w'' = [(l + 1/2)**2 - 2r - 2E r**2] w`` with uniform step.
"""

from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from scipy.integrate import simpson, trapezoid
from scipy.interpolate import CubicSpline
from scipy.special import eval_genlaguerre, gammaln

from .species import check_state, quantum_defect, species_lookup

DEFAULT_POINTS = 4000
R_FLOOR = 0.05


class IntegrationError(RuntimeError):
    pass


class GridAccuracyError(RuntimeError):
    pass


class RangeError(ValueError):
    pass


def rydberg_energy(species, n, l):
    """Quantum-defect energy of the ``(n, l)`` level in hartree."""
    nstar = n - quantum_defect(species, n, l)
    return -0.5 / nstar**2


@dataclass(frozen=True, order=True)
class RydbergState:
    species: str
    n: int
    l: int

    def __post_init__(self):
        species_lookup(self.species)
        check_state(self.n, self.l)

    @property
    def defect(self):
        return quantum_defect(self.species, self.n, self.l)

    @property
    def nstar(self):
        return self.n - self.defect

    @property
    def energy(self):
        return -0.5 / self.nstar**2

    @property
    def label(self):
        letters = "SPDFGHIK"
        sym = letters[self.l] if self.l < len(letters) else f"(l={self.l})"
        return f"{self.n}{sym}"


def outer_radius(nstar):
    """Default outer grid edge: classical turning point plus a decay margin."""
    return 2.0 * nstar**2 + max(0.5 * nstar**2, 12.0 * nstar ** (4.0 / 3.0))


def inner_turning_point(state):
    """Inner classical turning point of the Coulomb + centrifugal potential."""
    l = state.l
    if l == 0:
        return 0.0
    eps = -state.energy
    disc = 1.0 - 2.0 * eps * l * (l + 1)
    return (1.0 - np.sqrt(max(disc, 0.0))) / (2.0 * eps)


def inner_cutoff(state):
    """Innermost radius integration may reach: half the inner turning point."""
    return max(R_FLOOR, 0.5 * inner_turning_point(state))


@dataclass(frozen=True)
class GridSpec:
    """Logarithmic radial grid ``r_min .. r_max`` with ``points`` nodes."""

    r_min: float = R_FLOOR
    r_max: float | None = None
    points: int = DEFAULT_POINTS

    def build(self, nstar):
        r_max = self.r_max if self.r_max is not None else outer_radius(nstar)
        if r_max <= self.r_min:
            raise ValueError("grid r_max must exceed r_min")
        return np.exp(np.linspace(np.log(self.r_min), np.log(r_max), self.points))


def make_grid(states, points=DEFAULT_POINTS):
    """Shared log grid covering every state in ``states``."""
    nmax = max(s.nstar for s in states)
    return GridSpec(points=points).build(nmax)


@dataclass(frozen=True, eq=False)
class RadialWavefunction:
    state: RydbergState
    r: np.ndarray
    u: np.ndarray
    norm_error: float
    r_cut: float = field(default=0.0)

    @cached_property
    def _spline(self):
        return CubicSpline(self.r, self.u)

    @cached_property
    def _dspline(self):
        return self._spline.derivative()

    def _check(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r < self.r[0]) or np.any(r > self.r[-1]):
            raise RangeError(
                f"r outside wavefunction grid [{self.r[0]:.4g}, {self.r[-1]:.4g}] "
                f"for {self.state.species} {self.state.label}"
            )
        return r

    def evaluate_u(self, r):
        """Cubic-spline value of ``u`` at ``r`` (scalar or array)."""
        return self._spline(self._check(r))

    def evaluate_du(self, r):
        """Cubic-spline derivative ``du/dr`` at ``r``."""
        return self._dspline(self._check(r))

    def node_count(self, rel_tol=1e-6):
        u = self.u[np.abs(self.u) > rel_tol * np.max(np.abs(self.u))]
        return int(np.count_nonzero(np.signbit(u[1:]) != np.signbit(u[:-1])))


def evaluate_u(wf, r):
    return wf.evaluate_u(r)


def evaluate_du(wf, r):
    return wf.evaluate_du(r)


def _numerov_inward(x, f, i_stop, i_turn):
    """Integrate ``w'' = f w`` from the last node inward.

    Integration ends at ``i_stop`` or, inside the inner turning point
    ``i_turn``, as soon as ``u = sqrt(r) w`` grows inward (irregular solution
    taking over) or underflows. Returns ``(w, first)`` with ``w[:first] = 0``.
    """
    h2 = (x[1] - x[0]) ** 2
    npts = len(x)
    if f[-1] <= 0.0 or f[-2] <= 0.0:
        raise IntegrationError("outer grid edge lies in the classically allowed region")
    kap = 0.5 * (np.sqrt(f[-1]) + np.sqrt(f[-2])) * (x[-1] - x[-2])
    wl = [0.0] * npts
    wl[-1] = 1e-30
    wl[-2] = 1e-30 * np.exp(kap) * (f[-1] / f[-2]) ** 0.25
    al = (1.0 - h2 * f / 12.0).tolist()
    bl = (2.0 + 10.0 * h2 * f / 12.0).tolist()
    sq = np.exp(0.5 * np.asarray(x)).tolist()
    peak = abs(wl[-2] * sq[-2])
    first = i_stop
    for i in range(npts - 2, i_stop, -1):
        w = (bl[i] * wl[i] - al[i + 1] * wl[i + 1]) / al[i - 1]
        wl[i - 1] = w
        au = abs(w * sq[i - 1])
        if au > 1e200:
            for j in range(i - 1, npts):
                wl[j] *= 1e-200
            au *= 1e-200
            peak *= 1e-200
        if au > peak:
            peak = au
        elif i - 1 < i_turn:
            prev = abs(wl[i] * sq[i])
            if au > prev or au < 1e-250 * peak:
                wl[i - 1] = 0.0
                first = i
                break
            if (w > 0) != (wl[i] > 0):
                wl[i - 1] = 0.0
                first = i
                break
    return np.array(wl), first


def solve_radial(state, grid=None):
    """Normalized radial wavefunction of ``state``.

    Parameters
    ----------
    state : RydbergState
    grid : GridSpec or ndarray, optional
        Logarithmically spaced radii. A default grid sized to the state is
        used when omitted.

    Returns
    -------
    RadialWavefunction
    """
    nstar = state.nstar
    if grid is None:
        grid = GridSpec()
    r = grid.build(nstar) if isinstance(grid, GridSpec) else np.asarray(grid, dtype=float)
    x = np.log(r)
    if not np.allclose(np.diff(x), x[1] - x[0], rtol=1e-6, atol=0):
        raise ValueError("radial grid must be logarithmically spaced")
    if r[-1] < 2.0 * nstar**2:
        raise GridAccuracyError(
            f"grid ends at r={r[-1]:.4g} inside the classical orbit of {state.label}"
        )

    E = state.energy
    l = state.l
    f = (l + 0.5) ** 2 - 2.0 * r - 2.0 * E * r**2
    r_cut = inner_cutoff(state) if state.defect != 0.0 else R_FLOOR
    i_stop = max(int(np.searchsorted(r, r_cut)), 1) - 1
    i_turn = int(np.searchsorted(r, inner_turning_point(state)))
    w, first = _numerov_inward(x, f, i_stop, i_turn)
    u = np.sqrt(r) * w
    u[:first] = 0.0
    r_cut = float(r[first])
    if not np.all(np.isfinite(u)):
        raise IntegrationError(f"non-finite values integrating {state.label}")

    dens = u**2
    norm = trapezoid(dens * r, x)
    u = u / np.sqrt(norm)
    # outermost lobe positive
    imax = np.argmax(np.abs(u) * (r > 0.5 * nstar**2))
    if u[imax] < 0:
        u = -u
    norm_error = abs(simpson(u**2 * r, x=x) - 1.0)
    wf = RadialWavefunction(state=state, r=r, u=u, norm_error=float(norm_error), r_cut=r_cut)
    if state.defect == 0.0:
        expected = state.n - state.l - 1
        if wf.node_count() != expected:
            raise GridAccuracyError(
                f"{state.label}: {wf.node_count()} nodes, expected {expected}; refine the grid"
            )
    return wf


@lru_cache(maxsize=4096)
def _cached_solve(state, r_max, points):
    return solve_radial(state, GridSpec(r_max=r_max, points=points))


def solve_radial_cached(state, r_max, points=DEFAULT_POINTS):
    """Memoized :func:`solve_radial` on a shared grid."""
    return _cached_solve(state, float(r_max), int(points))


def hydrogen_u(n, l, r):
    """Closed-form hydrogen ``u_nl(r) = r R_nl(r)``, positive outermost lobe."""
    r = np.asarray(r, dtype=float)
    rho = 2.0 * r / n
    lognorm = 0.5 * (3 * np.log(2.0 / n) + gammaln(n - l) - np.log(2.0 * n) - gammaln(n + l + 1))
    u = r * np.exp(lognorm - 0.5 * rho + l * np.log(np.where(rho > 0, rho, 1.0))) * eval_genlaguerre(n - l - 1, 2 * l + 1, rho)
    # Laguerre sign at large argument is (-1)**(n-l-1)
    return u * (-1) ** (n - l - 1)
