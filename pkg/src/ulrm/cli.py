"""Command-line interface: ``ulrm <command> [options]``.

Every option can also be given in a JSON file passed with ``--config``;
command-line flags take precedence. Exit codes: 0 success, 1 usage error,
2 compute failure, 3 regression failure.
"""

import argparse
import json
import logging
import re
import sys
import time
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .units import HARTREE_MHZ, ev_to_hartree, hartree_to_ev

log = logging.getLogger("ulrm")

EXIT_OK, EXIT_USAGE, EXIT_COMPUTE, EXIT_REGRESSION = 0, 1, 2, 3
L_LETTERS = "SPDFGHIKLMNOQRTUVWXYZ"
MIN_N = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_state(text):
    """``"35D"`` -> ``(35, 2)``."""
    m = re.fullmatch(r"\s*(\d+)\s*([A-Za-z])\s*", str(text))
    if not m:
        raise UsageError(f"state: cannot parse {text!r} (expected e.g. 35S)")
    n, letter = int(m.group(1)), m.group(2).upper()
    if letter not in L_LETTERS:
        raise UsageError(f"state: unknown orbital letter {letter!r}")
    l = L_LETTERS.index(letter)
    _check_nl("state", n, l)
    return n, l


def _check_nl(key, n, l):
    if n < MIN_N:
        raise UsageError(f"{key}: n must be >= {MIN_N}, got {n}")
    if not 0 <= l < n:
        raise UsageError(f"{key}: need 0 <= l < n, got n={n}, l={l}")


def _on_off(text):
    t = str(text).lower()
    if t in ("on", "true", "1", "yes"):
        return True
    if t in ("off", "false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected on/off, got {text!r}")


def _species(text):
    if text not in ("Rb", "Cs", "H"):
        raise argparse.ArgumentTypeError(f"unknown species {text!r}")
    return text


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
        return v

    return conv


def build_parser():
    p = _Parser(prog="ulrm", description="Ultralong-range Rydberg molecule potentials, levels and spectra.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON file of option defaults")
        return s

    s = cmd("species", "bundled atomic data")
    s.add_argument("--dump", action="store_true", help="emit the whole data table as JSON")
    s.add_argument("--name", type=_species, default="Rb")
    s.add_argument("--out")

    s = cmd("radial", "radial wavefunction u(r) as CSV")
    s.add_argument("--species", type=_species, default="Rb")
    s.add_argument("--n", type=int, default=35)
    s.add_argument("--l", type=int, default=0)
    s.add_argument("--points", type=_positive(int), default=4000)
    s.add_argument("--out", required=True)

    s = cmd("scatter", "p-wave phase shift table")
    s.add_argument("--species", type=_species, default="Rb")
    s.add_argument("--emax-ev", type=_positive(float), default=0.05)
    s.add_argument("--points", type=_positive(int), default=500)
    s.add_argument("--out", required=True)

    s = cmd("pec", "adiabatic potential curves as CSV")
    _molecule_args(s)
    s.add_argument("--basis", choices=("single", "manifold", "nearest", "extended"), default="extended")
    s.add_argument("--pwave", type=_on_off, default=False)
    s.add_argument("--rmin", type=_positive(float))
    s.add_argument("--rmax", type=_positive(float))
    s.add_argument("--points", type=_positive(int), default=2000)
    s.add_argument("--reference", choices=("state", "hydrogen"), default="state")
    s.add_argument("--out", required=True)

    s = cmd("vib", "vibrational levels of a tabulated curve")
    s.add_argument("--pec", required=True, help="CSV written by 'ulrm pec'")
    s.add_argument("--curve", type=int, help="curve column index (default: the one tied to the target state)")
    s.add_argument("--well", default="outermost", help="'outermost' or a well index (1 = outermost)")
    s.add_argument("--mu", default="auto", help="reduced mass in a.u., or 'auto' from the PEC metadata")
    s.add_argument("--rydberg", type=_species)
    s.add_argument("--perturber", type=_species)
    s.add_argument("--levels", type=_positive(int), default=2)
    s.add_argument("--out", required=True)

    s = cmd("density", "electron density map at one R")
    _molecule_args(s)
    s.add_argument("--basis", choices=("single", "manifold", "nearest", "extended"), default="nearest")
    s.add_argument("--R", type=_positive(float), help="internuclear distance (default: outermost well)")
    s.add_argument("--rho-points", type=_positive(int), default=241)
    s.add_argument("--z-points", type=_positive(int), default=481)
    s.add_argument("--out", required=True)

    s = cmd("dipole", "permanent dipole at the outermost well")
    _molecule_args(s)
    s.add_argument("--basis", choices=("nearest", "extended"), default="nearest")
    s.add_argument("--out", required=True)

    s = cmd("spectrum", "polyatomic stick and broadened spectrum")
    s.add_argument("--rydberg", type=_species, default="Rb")
    s.add_argument("--state", default="55S")
    s.add_argument("--max-atoms", type=_positive(int), default=4)
    s.add_argument("--mode", choices=("total", "each"), default="total")
    s.add_argument("--quartet", default="auto", help="'auto' or a,b,c,d in MHz")
    s.add_argument("--broaden", type=_positive(float), default=0.05, help="Lorentzian FWHM, MHz")
    s.add_argument("--occupation", help="mean Rb,Cs atom numbers for Poisson weights")
    s.add_argument("--points", type=_positive(int), default=4001)
    s.add_argument("--out", required=True)

    s = cmd("scaling", "outermost-well levels versus n for all pairs")
    s.add_argument("--l", type=int, default=2)
    s.add_argument("--nmin", type=int, default=30)
    s.add_argument("--nmax", type=int, default=50)
    s.add_argument("--pwave", type=_on_off, default=True)
    s.add_argument("--out", required=True)

    s = cmd("regression", "run a manifest of reference cases")
    s.add_argument("--manifest", help="JSON manifest (default: bundled cases)")
    s.add_argument("--out")
    return p


def _molecule_args(s):
    s.add_argument("--rydberg", type=_species, default="Rb")
    s.add_argument("--state", default="35S")
    s.add_argument("--perturber", type=_species, default="Rb")


def _prescan(argv):
    """Command name and ``--config`` path, found before full parsing."""
    command = next((a for a in argv if not a.startswith("-")), None)
    path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif a.startswith("--config="):
            path = a.split("=", 1)[1]
    return command, path


def _apply_config(parser, command, path):
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"config: cannot read {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise UsageError("config: top level must be an object")
    sub = parser._subparsers._group_actions[0].choices.get(command)
    if sub is None:
        raise UsageError(f"unknown command {command!r}")
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("help", "config"):
            raise UsageError(f"config: unknown key {key!r} for '{command}'")
        action = known[dest]
        if action.type is not None and not isinstance(value, bool):
            try:
                value = action.type(str(value))
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise UsageError(f"config: bad value for {key!r}: {exc}") from exc
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"config: {key!r} must be one of {sorted(action.choices)}")
        defaults[dest] = value
        # a config value satisfies a required flag
        action.required = False
    sub.set_defaults(**defaults)


def parse_config(argv):
    """Parse ``argv`` with an optional JSON config file underneath the flags."""
    parser = build_parser()
    command, path = _prescan(argv)
    if path is not None:
        _apply_config(parser, command, path)
    args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(args):
    for key in ("n",):
        if hasattr(args, key):
            _check_nl(key, args.n, args.l)
    if hasattr(args, "state"):
        args.n, args.l = parse_state(args.state)
    if getattr(args, "nmin", None) is not None:
        if args.nmin < MIN_N or args.nmax < args.nmin:
            raise UsageError(f"nmin/nmax: need {MIN_N} <= nmin <= nmax")
    if getattr(args, "rmin", None) and getattr(args, "rmax", None) and args.rmin >= args.rmax:
        raise UsageError("rmin must be below rmax")
    if getattr(args, "quartet", "auto") != "auto":
        try:
            q = [float(v) for v in args.quartet.split(",")]
        except ValueError as exc:
            raise UsageError("quartet: expected four comma-separated numbers") from exc
        if len(q) != 4:
            raise UsageError("quartet: expected four comma-separated numbers")
        args.quartet = q
    if getattr(args, "occupation", None):
        try:
            occ = tuple(float(v) for v in args.occupation.split(","))
        except ValueError as exc:
            raise UsageError("occupation: expected two comma-separated numbers") from exc
        if len(occ) != 2 or min(occ) < 0:
            raise UsageError("occupation: expected two non-negative numbers")
        args.occupation = occ


# commands ------------------------------------------------------------------


def _out_json(args, payload, **prov):
    io.write_json(args.out, io.envelope(args.command, payload, **prov))


def run_species(args):
    from .species import dump_species, species_lookup

    if args.dump:
        payload = dump_species()
    else:
        sp = species_lookup(args.name)
        payload = {
            "name": sp.name,
            "mass": sp.mass,
            "a0": sp.a0,
            "alpha": sp.alpha,
            "defect_coeffs": [list(c) for c in sp.defect_coeffs],
        }
    if args.out:
        _out_json(args, payload)
    else:
        sys.stdout.write(io.json_text(io.envelope("species", payload)))


def run_radial(args):
    from .radial import GridSpec, RydbergState, solve_radial

    wf = solve_radial(RydbergState(args.species, args.n, args.l), GridSpec(points=args.points))
    io.write_csv(args.out, ["r_au", "u"], zip(wf.r, wf.u))


def run_scatter(args):
    from .scattering import p_wave_phase_shift

    E = np.linspace(0.0, ev_to_hartree(args.emax_ev), args.points)
    delta = p_wave_phase_shift(args.species, E, warn=False)
    io.write_csv(args.out, ["E_eV", "delta_p", "tan_delta_p"], zip(hartree_to_ev(E), delta, np.tan(delta)))


def _basis(kind, rydberg, n, l):
    from . import pec

    if kind == "single":
        return pec.single_state_basis(rydberg, n, l)
    if kind == "manifold":
        return pec.manifold_basis(rydberg, n, l_min=min(l, pec.HIGH_L))
    if kind == "nearest":
        return pec.nearest_manifold_basis(rydberg, n, l)
    return pec.extended_basis(rydberg, n, l)


def run_pec(args):
    from . import pec
    from .radial import RydbergState

    state = RydbergState(args.rydberg, args.n, args.l)
    ns2 = state.nstar**2
    R = np.linspace(args.rmin or 1.2 * ns2, args.rmax or 2.3 * ns2, args.points)
    b = _basis(args.basis, args.rydberg, args.n, args.l)
    ref = state.energy if args.reference == "state" else -0.5 / np.ceil(state.nstar) ** 2
    pcs = pec.pec_diagonalize(
        b, R, include_p_wave=args.pwave, perturber=args.perturber, k_energy=state.energy, reference_energy=ref, keep=()
    )
    header, rows = io.pec_rows(pcs)
    io.write_csv(args.out, header, rows)
    meta = {
        "rydberg": args.rydberg,
        "perturber": args.perturber,
        "state": state.label,
        "basis": [s.label for s in b.states],
        "target_curve": pcs.curve_for_state(state),
        "reference_energy_hartree": ref,
    }
    io.write_json(str(args.out) + ".meta.json", io.envelope("pec", meta))


def run_vib(args):
    from .pec import find_wells
    from .vibrational import solve_vibrational
    from .workflows import pair_mass

    header, data = io.read_csv(args.pec)
    if not header or header[0] != "R_au":
        raise UsageError(f"pec: {args.pec} is not a curve CSV")
    meta_path = Path(str(args.pec) + ".meta.json")
    meta = io.read_json(meta_path)["payload"] if meta_path.exists() else {}
    j = args.curve if args.curve is not None else int(meta.get("target_curve", 0))
    if not 0 <= j < len(header) - 2:
        raise UsageError(f"curve: index {j} out of range")
    if args.mu == "auto":
        ryd = args.rydberg or meta.get("rydberg")
        pert = args.perturber or meta.get("perturber")
        if not (ryd and pert):
            raise UsageError("mu: 'auto' needs --rydberg/--perturber or PEC metadata")
        mu = pair_mass(ryd, pert)
    else:
        try:
            mu = float(args.mu)
        except ValueError as exc:
            raise UsageError(f"mu: expected a number or 'auto', got {args.mu!r}") from exc
        if mu <= 0:
            raise UsageError("mu: must be positive")
    R = data[:, 0]
    V = data[:, 1 + j] / HARTREE_MHZ
    wells = find_wells(R, V)
    idx = 1 if args.well == "outermost" else int(args.well)
    if not 1 <= idx <= len(wells):
        raise UsageError(f"well: {args.well!r} not found ({len(wells)} wells)")
    well = wells[idx - 1]
    levels = solve_vibrational(R, V, well, mu, args.levels)
    payload = [{"v": lv.v, "energy_MHz": lv.energy_mhz, "well_Rmin_au": well.R_min} for lv in sorted(levels, key=lambda x: x.v)]
    _out_json(args, payload, mu=mu, curve=j)


def _state_curve(args, basis_kind):
    from . import pec
    from .radial import RydbergState

    state = RydbergState(args.rydberg, args.n, args.l)
    b = _basis(basis_kind, args.rydberg, args.n, args.l)
    ns2 = state.nstar**2
    R = np.linspace(1.2 * ns2, 2.3 * ns2, 1500)
    pcs = pec.pec_diagonalize(b, R, perturber=args.perturber, k_energy=state.energy, reference_energy=state.energy, keep=())
    j = pcs.curve_for_state(state)
    pcs = pec.pec_diagonalize(
        b, R, perturber=args.perturber, k_energy=state.energy, reference_energy=state.energy, keep=[j]
    )
    return state, b, pcs, j


def run_density(args):
    from .density import default_density_grid, electron_density
    from .pec import find_wells

    state, b, pcs, j = _state_curve(args, args.basis)
    if args.R is None:
        wells = find_wells(pcs.R, pcs.curve(j))
        if not wells:
            raise UsageError("R: no well found; pass --R explicitly")
        R = wells[0].R_min
    else:
        R = args.R
    if not pcs.R[0] <= R <= pcs.R[-1]:
        raise UsageError(f"R: {R} outside [{pcs.R[0]:.1f}, {pcs.R[-1]:.1f}]")
    i = int(np.argmin(np.abs(pcs.R - R)))
    m = electron_density(b, pcs.eigvecs(j)[i], pcs.R[i], default_density_grid(b, args.rho_points, args.z_points))
    rows = []
    for half, phi in enumerate((0.0, np.pi)):
        for iz, z in enumerate(m.z):
            for ir, rho in enumerate(m.rho):
                rows.append((rho, z, m.density[half, iz, ir], phi))
    io.write_csv(args.out, ["rho_au", "z_au", "value", "phi"], rows)


def run_dipole(args):
    from .workflows import outer_well_dipole

    res = outer_well_dipole(args.rydberg, args.n, args.l, args.perturber, basis=args.basis)
    payload = {"R_au": res.R, "dipole_debye": res.dipole_debye, "target_weight": res.target_weight}
    _out_json(args, payload, basis=args.basis, state=args.state, rydberg=args.rydberg, perturber=args.perturber)


def run_spectrum(args):
    from .spectra import DimerEnergyQuartet, default_grid, enumerate_lines, render_spectrum

    if args.quartet == "auto":
        from .workflows import dimer_quartet

        q = dimer_quartet(args.n, args.l)
    else:
        q = args.quartet
    quartet = DimerEnergyQuartet(*q, n=args.n, l=args.l)
    lines = enumerate_lines(quartet, args.rydberg, args.max_atoms, mode=args.mode, occupation=args.occupation)
    grid = default_grid(lines, args.broaden, args.points)
    inten = render_spectrum(lines, args.broaden, grid)
    io.write_csv(args.out, ["energy_MHz", "intensity"], zip(grid, inten))
    sticks = [{"i": ln.i, "j": ln.j, "shift_MHz": ln.shift, "weight": ln.weight} for ln in lines]
    io.write_json(
        str(args.out) + ".lines.json",
        io.envelope("spectrum", sticks, quartet_MHz=list(q), mode=args.mode, broadening_MHz=args.broaden),
    )


def run_scaling(args):
    from .workflows import PAIRS, scaling_study

    t = scaling_study(l=args.l, n_range=range(args.nmin, args.nmax + 1), include_p_wave=args.pwave)
    payload = {
        "n": t.n,
        "levels_MHz": {f"{a}*-{b}": t.levels[(a, b)] for a, b in PAIRS},
        "slopes": {f"{a}*-{b}": t.slope((a, b)) for a, b in PAIRS},
        "non_crossing": t.non_crossing(),
    }
    _out_json(args, payload, l=args.l, pwave=args.pwave)


def run_regression(args):
    from .regression import ManifestError, load_manifest, regression_run

    try:
        if args.manifest:
            manifest = load_manifest(args.manifest)
        else:
            manifest = json.loads(resources.files("ulrm.data").joinpath("regression.json").read_text())
    except ManifestError as exc:
        raise UsageError(str(exc)) from exc
    report = regression_run(manifest)
    for case in report:
        mark = "PASS" if case["passed"] else "FAIL"
        print(f"{mark} {case['id']}: {case['detail']}")
    if args.out:
        _out_json(args, report)
    return EXIT_OK if all(c["passed"] for c in report) else EXIT_REGRESSION


COMMANDS = {
    "species": run_species,
    "radial": run_radial,
    "scatter": run_scatter,
    "pec": run_pec,
    "vib": run_vib,
    "density": run_density,
    "dipole": run_dipole,
    "spectrum": run_spectrum,
    "scaling": run_scaling,
    "regression": run_regression,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    if any(a in ("-h", "--help") for a in argv):
        try:
            build_parser().parse_args(argv)
        except SystemExit as exc:
            return exc.code or EXIT_OK
    try:
        args = parse_config(argv)
    except UsageError as exc:
        print(f"ulrm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ulrm: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, ValueError, RuntimeError, KeyError, OSError) as exc:
        print(f"ulrm: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    log.info("%s finished in %.2f s", args.command, time.perf_counter() - t0)
    return code or EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
