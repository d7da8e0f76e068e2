"""Born--Oppenheimer potential energy curves from the contact pseudopotential.

The perturber sits on the z axis at distance ``R`` from the Rydberg core, so
only ``m = 0`` states couple. For basis functions
``psi_i(r) = u_i(r)/r * Y_l0(theta)`` the Hamiltonian at ``R`` is

    H_ij = E_i delta_ij + 2 pi a_s(k) psi_i(R) psi_j(R)
                        + C_p a_p^3(k) d_r psi_i(R) d_r psi_j(R)

with ``C_p = -6 pi``. On the axis the polar derivative of ``Y_l0`` vanishes,
so for ``m = 0`` the gradient product reduces to the radial derivatives
``d_r psi_i = Y_l0(0) (u_i'/R - u_i/R**2)``.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import scattering
from .radial import DEFAULT_POINTS, RydbergState, make_grid, solve_radial_cached
from .species import effective_n, species_lookup
from .units import HARTREE_MHZ

PWAVE_PREFACTOR = -6.0 * math.pi
HIGH_L = 3
# eigenvalues closer than this (hartree) are treated as one eigenspace
DEGENERACY_TOL = 1e-13


class DegeneracyError(ValueError):
    pass


class EigensolverError(RuntimeError):
    pass


def angular_factor(l):
    """``Y_l0`` on the positive z axis."""
    return math.sqrt((2 * l + 1) / (4.0 * math.pi))


@dataclass(frozen=True)
class BasisSet:
    states: tuple
    kind: str = "single-state"
    points: int = DEFAULT_POINTS

    def __post_init__(self):
        states = tuple(self.states)
        object.__setattr__(self, "states", states)
        if not states:
            raise ValueError("empty basis")
        if len({(s.species, s.n, s.l) for s in states}) != len(states):
            raise ValueError("duplicate states in basis")
        if len({s.species for s in states}) != 1:
            raise ValueError("basis states must share one species")

    def __len__(self):
        return len(self.states)

    @property
    def species(self):
        return self.states[0].species

    @cached_property
    def energies(self):
        return np.array([s.energy for s in self.states])

    @cached_property
    def ls(self):
        return np.array([s.l for s in self.states])

    @cached_property
    def r_max(self):
        return float(make_grid(self.states, points=2)[-1])

    @cached_property
    def wavefunctions(self):
        return tuple(solve_radial_cached(s, self.r_max, self.points) for s in self.states)

    @property
    def r_grid(self):
        return self.wavefunctions[0].r

    def index(self, state):
        return self.states.index(state)

    def contact_amplitudes(self, R):
        """``psi_i(R)`` and ``d_r psi_i(R)`` for every basis state; shape ``(len(R), n)``."""
        R = np.atleast_1d(np.asarray(R, dtype=float))
        psi = np.empty((R.size, len(self)))
        dpsi = np.empty_like(psi)
        for i, wf in enumerate(self.wavefunctions):
            y = angular_factor(wf.state.l)
            u = wf.evaluate_u(R)
            du = wf.evaluate_du(R)
            psi[:, i] = y * u / R
            dpsi[:, i] = y * (du / R - u / R**2)
        return psi, dpsi


def single_state_basis(species, n, l, points=DEFAULT_POINTS):
    return BasisSet((RydbergState(species, n, l),), "single-state", points)


def manifold_basis(species, n, l_min=HIGH_L, points=DEFAULT_POINTS):
    """All ``m = 0`` states of the hydrogenic ``n`` level with ``l >= l_min``."""
    states = tuple(RydbergState(species, n, l) for l in range(l_min, n))
    return BasisSet(states, "degenerate-manifold", points)


def extended_basis(species, n, l, points=DEFAULT_POINTS):
    """Target state, the two hydrogenic manifolds bracketing it, and the
    low-l states whose effective quantum numbers fall between them.

    For Rb 35S this yields 32(l>2), 35S, 34P, 33D, 31(l>2).
    """
    nstar = effective_n(species, n, l)
    lower = math.floor(nstar)
    upper = lower + 1
    if nstar == lower:
        lower -= 1
    states = []
    for m in (upper, lower):
        states.extend(RydbergState(species, m, ll) for ll in range(HIGH_L, m))
    for ll in range(HIGH_L):
        for nn in range(max(ll + 1, 5), upper + 6):
            ns = effective_n(species, nn, ll)
            if lower < ns < upper:
                states.append(RydbergState(species, nn, ll))
    target = RydbergState(species, n, l)
    if target not in states:
        states.append(target)
    states.sort(key=lambda s: (s.energy, s.l))
    return BasisSet(tuple(states), "extended-p-wave", points)


def nearest_manifold_basis(species, n, l, points=DEFAULT_POINTS):
    """Target state plus the hydrogenic manifold (``l > 2``) closest in energy.

    For alkali nS states this is the ``n - 3`` (Rb) or ``n - 4`` (Cs) level,
    the near-degenerate partner that dominates s-wave mixing.
    """
    target = RydbergState(species, n, l)
    m = int(round(target.nstar))
    states = (target,) + tuple(RydbergState(species, m, ll) for ll in range(HIGH_L, m) if (m, ll) != (n, l))
    return BasisSet(states, "degenerate-manifold", points)


def build_hamiltonian(basis, R, include_p_wave=False, perturber=None, k_energy=None, psi=None):
    """Hamiltonian matrix at one internuclear distance.

    Parameters
    ----------
    basis : BasisSet
    R : float
        Perturber distance from the Rydberg core (a.u.).
    include_p_wave : bool
    perturber : str
        Ground-state atom species; defaults to the Rydberg species.
    k_energy : float, optional
        Energy used in the semiclassical wavenumber; defaults to the mean
        basis energy.
    psi : tuple, optional
        Precomputed ``(psi, dpsi)`` rows at ``R``.

    Returns
    -------
    H : ndarray
    reliable : bool
    """
    perturber = perturber or basis.species
    if k_energy is None:
        k_energy = float(np.mean(basis.energies))
    if psi is None:
        p, dp = basis.contact_amplitudes([R])
        p, dp = p[0], dp[0]
    else:
        p, dp = psi
    sc = scattering.evaluate(perturber, k_energy, [R], include_p_wave=include_p_wave)
    H = np.diag(basis.energies.astype(float))
    H += 2.0 * math.pi * sc.a_s[0] * np.outer(p, p)
    if include_p_wave:
        H += PWAVE_PREFACTOR * sc.a_p3[0] * np.outer(dp, dp)
    # exact symmetry regardless of rounding in the outer products
    H = 0.5 * (H + H.T)
    return H, bool(sc.reliable[0])


@dataclass(frozen=True, eq=False)
class PotentialCurveSet:
    """Adiabatic curves on an R grid.

    ``energies[:, j]`` is curve ``j`` in hartree relative to
    ``reference_energy``; curve ``j`` is the ``j``-th lowest at the outer
    grid edge and is followed inward by eigenvector overlap.
    """

    R: np.ndarray
    energies: np.ndarray
    reference_energy: float
    reliable: np.ndarray
    basis: BasisSet | None = None
    vectors: dict = field(default_factory=dict)
    overlaps: np.ndarray | None = None
    labels: tuple = ()
    outer_vectors: np.ndarray | None = None

    @property
    def n_curves(self):
        return self.energies.shape[1]

    def curve(self, j=0):
        return self.energies[:, j]

    def curve_mhz(self, j=0):
        return self.energies[:, j] * HARTREE_MHZ

    def eigvecs(self, j):
        if j not in self.vectors:
            raise KeyError(f"eigenvectors of curve {j} were not stored")
        return self.vectors[j]

    def curve_for_state(self, state):
        """Curve whose eigenvector at the outer edge is dominated by ``state``."""
        if self.outer_vectors is None:
            return 0
        i = self.basis.index(state)
        return int(np.argmax(self.outer_vectors[i] ** 2))


def _align_degenerate(w, v, prev, tol):
    """Rotate eigenvectors inside each degenerate cluster onto ``prev``.

    Any orthonormal basis of a degenerate eigenspace is valid; choosing the one
    closest to the previous grid point keeps overlap tracking meaningful.
    """
    start = 0
    n = w.size
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] <= tol:
            stop += 1
        if stop - start > 1:
            block = v[:, start:stop]
            proj = block.T @ prev
            # previous vectors that live mostly in this eigenspace
            cols = np.argsort(-np.sum(proj**2, axis=0))[: stop - start]
            a, _, bt = np.linalg.svd(proj[:, cols])
            v[:, start:stop] = block @ (a @ bt)
        start = stop
    return v


def _sign_fix(vecs):
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def pec_diagonalize(
    basis,
    R_grid,
    include_p_wave=False,
    perturber=None,
    k_energy=None,
    reference_energy=None,
    keep=None,
    check_residuals=False,
):
    """Diagonalize the contact Hamiltonian along ``R_grid``.

    Curves are connected across neighbouring R points by maximal eigenvector
    overlap (ties broken by energy proximity), starting from the outermost
    point. Eigenvector signs follow the largest-component-positive rule.

    Parameters
    ----------
    keep : iterable of int or "all", optional
        Curves whose eigenvectors are stored; by default all curves when the
        basis has at most 12 states.
    """
    R_grid = np.asarray(R_grid, dtype=float)
    if R_grid.ndim != 1 or np.any(np.diff(R_grid) <= 0):
        raise ValueError("R_grid must be strictly increasing")
    perturber = perturber or basis.species
    nb = len(basis)
    if k_energy is None:
        k_energy = float(np.mean(basis.energies))
    if reference_energy is None:
        reference_energy = float(np.mean(basis.energies))
    if keep is None:
        keep = range(nb) if nb <= 12 else ()
    elif keep == "all":
        keep = range(nb)
    keep = sorted(set(int(j) for j in keep))

    psi, dpsi = basis.contact_amplitudes(R_grid)
    sc = scattering.evaluate(perturber, k_energy, R_grid, include_p_wave=include_p_wave)
    E0 = basis.energies - reference_energy
    nR = R_grid.size
    energies = np.empty((nR, nb))
    vectors = {j: np.empty((nR, nb)) for j in keep}
    overlaps = np.ones((nR, nb))
    prev = None
    prev_E = None
    outer = None
    for step, g in enumerate(range(nR - 1, -1, -1)):
        H = np.diag(E0) + (2.0 * math.pi * sc.a_s[g]) * np.outer(psi[g], psi[g])
        if include_p_wave:
            H += (PWAVE_PREFACTOR * sc.a_p3[g]) * np.outer(dpsi[g], dpsi[g])
        H = 0.5 * (H + H.T)
        try:
            w, v = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise EigensolverError(f"eigensolver failed at grid index {g} (R={R_grid[g]:.6g})") from exc
        if check_residuals:
            res = np.linalg.norm(H @ v - v * w, axis=0).max()
            if res > 1e-10 * np.linalg.norm(H, 2):
                raise EigensolverError(f"eigen-residual {res:.3g} at grid index {g}")
        if prev is None:
            order = np.arange(nb)
            outer = v.copy()
        else:
            v = _align_degenerate(w, v, prev, DEGENERACY_TOL)
            ov = np.abs(prev.T @ v)
            scale = max(np.ptp(w), 1e-300)
            cost = -ov + 1e-6 * np.abs(prev_E[:, None] - w[None, :]) / scale
            _, order = linear_sum_assignment(cost)
            overlaps[g] = ov[np.arange(nb), order]
        w = w[order]
        v = v[:, order]
        energies[g] = w
        sv = _sign_fix(v)
        for j in keep:
            vectors[j][g] = sv[:, j]
        prev, prev_E = v, w

    labels = tuple(basis.states[int(i)].label for i in np.argmax(outer**2, axis=0))
    return PotentialCurveSet(
        R=R_grid,
        energies=energies,
        reference_energy=float(reference_energy),
        reliable=np.asarray(sc.reliable, dtype=bool),
        basis=basis,
        vectors=vectors,
        overlaps=overlaps,
        labels=labels,
        outer_vectors=outer,
    )


def pec_low_l_swave(state, perturber, R_grid, a_s_override=None, points=DEFAULT_POINTS):
    """First-order s-wave curve ``V(R) = 2 pi a_s(k) |psi_nl(R)|**2`` (hartree).

    The curve is referenced to the isolated Rydberg level.
    """
    R_grid = np.asarray(R_grid, dtype=float)
    basis = BasisSet((state,), "single-state", points)
    psi, _ = basis.contact_amplitudes(R_grid)
    if a_s_override is None:
        k = scattering.semiclassical_k(state.energy, R_grid)
        a_s = scattering.s_wave_length(perturber, k)
    else:
        a_s = np.full_like(R_grid, float(a_s_override))
    V = 2.0 * math.pi * a_s * psi[:, 0] ** 2
    return PotentialCurveSet(
        R=R_grid,
        energies=V[:, None],
        reference_energy=state.energy,
        reliable=np.ones(R_grid.size, dtype=bool),
        basis=basis,
        vectors={0: np.ones((R_grid.size, 1))},
        labels=(state.label,),
        outer_vectors=np.ones((1, 1)),
    )


def first_order_mixing(state, perturber, R, other_states, degeneracy_threshold=1e-10, points=DEFAULT_POINTS):
    """First-order admixture coefficients of ``other_states`` into ``state`` at ``R``.

    ``c_j = <j|2 pi a_s delta|state> / (E_state - E_j)``, using the same
    contact amplitudes as the diagonalization path.
    """
    others = tuple(other_states)
    for s in others:
        if abs(state.energy - s.energy) <= degeneracy_threshold:
            raise DegeneracyError(
                f"{s.label} is within {degeneracy_threshold:g} hartree of {state.label}; "
                "use pec_diagonalize for near-degenerate states"
            )
    basis = BasisSet((state,) + others, "single-state", points)
    psi, _ = basis.contact_amplitudes([R])
    psi = psi[0]
    k = scattering.semiclassical_k(state.energy, R)
    a_s = float(scattering.s_wave_length(perturber, k))
    coupling = 2.0 * math.pi * a_s * psi[0] * psi[1:]
    return coupling / (state.energy - basis.energies[1:])


@dataclass(frozen=True)
class WellDescriptor:
    index: int
    R_min: float
    R_left: float
    R_right: float
    depth: float
    barrier: float = 0.0

    def __post_init__(self):
        if not self.R_left < self.R_min < self.R_right:
            raise ValueError("well boundaries must bracket the minimum")


def find_wells(R, V, R_window=None, depth_floor=0.1 / HARTREE_MHZ, asymptote=None):
    """Potential wells of a sampled curve, outermost first.

    Each well spans the local maxima (or grid ends) on either side of a local
    minimum. ``depth`` is the minimum relative to ``asymptote`` (the value at
    the outer grid edge by default); ``barrier`` is the lower confining edge.
    Wells whose minimum sits less than ``depth_floor`` below that edge are
    dropped.
    """
    R = np.asarray(R, dtype=float)
    V = np.asarray(V, dtype=float)
    if R_window is not None:
        m = (R >= R_window[0]) & (R <= R_window[1])
        R, V = R[m], V[m]
    if asymptote is None:
        asymptote = V[-1]
    if R.size < 3:
        return []
    interior = np.arange(1, R.size - 1)
    minima = interior[(V[1:-1] < V[:-2]) & (V[1:-1] <= V[2:])]
    maxima = interior[(V[1:-1] > V[:-2]) & (V[1:-1] >= V[2:])]
    wells = []
    for i in minima[::-1]:
        left = maxima[maxima < i]
        right = maxima[maxima > i]
        il = int(left[-1]) if left.size else 0
        ir = int(right[0]) if right.size else R.size - 1
        barrier = min(V[il], V[ir] if right.size else max(V[ir], asymptote))
        if barrier - V[i] < depth_floor:
            continue
        wells.append(
            WellDescriptor(
                index=len(wells) + 1,
                R_min=float(R[i]),
                R_left=float(R[il]),
                R_right=float(R[ir]),
                depth=float(V[i] - asymptote),
                barrier=float(barrier),
            )
        )
    return wells
