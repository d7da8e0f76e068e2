"""Reference-case runner: each manifest case names a check, its inputs and the expected values."""

import json
from pathlib import Path

import numpy as np

from .radial import RydbergState, hydrogen_u, solve_radial


class ManifestError(ValueError):
    pass


def _hydrogen_rms(n_max=20):
    worst = 0.0
    for n in range(5, n_max + 1):
        for l in range(n):
            wf = solve_radial(RydbergState("H", n, l))
            worst = max(worst, float(np.sqrt(np.mean((wf.u - hydrogen_u(n, l, wf.r)) ** 2))))
    return worst


def _swave_levels(rydberg, n, l, perturber):
    from .workflows import swave_dimer

    return swave_dimer(rydberg, n, l, perturber).energies_mhz


def _quartet(n=55, l=0):
    from .workflows import dimer_quartet

    return list(dimer_quartet(n, l))


def _dipole(rydberg, n, l, perturber):
    from .workflows import outer_well_dipole

    return outer_well_dipole(rydberg, n, l, perturber).dipole_debye


def _butterfly_well(species="Rb", n=35, l=0):
    from .workflows import butterfly_geometry

    return butterfly_geometry(species, n, l).well_R


def _lobes(species="Rb", n=35, n_wells=3):
    from .workflows import trilobite_lobes

    return [c for _, c in trilobite_lobes(species, n, n_wells)]


CHECKS = {
    "hydrogen_rms": _hydrogen_rms,
    "swave_levels": _swave_levels,
    "quartet": _quartet,
    "dipole": _dipole,
    "butterfly_well": _butterfly_well,
    "lobes": _lobes,
}


def load_manifest(path):
    p = Path(path)
    if not p.exists():
        raise ManifestError(f"manifest {path} not found")
    try:
        manifest = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest {path}: {exc}") from exc
    validate_manifest(manifest)
    return manifest


def validate_manifest(manifest):
    cases = manifest.get("cases") if isinstance(manifest, dict) else None
    if not isinstance(cases, list):
        raise ManifestError("manifest needs a 'cases' list")
    for c in cases:
        for key in ("id", "check", "expected"):
            if key not in c:
                raise ManifestError(f"case {c.get('id', '?')!r} lacks {key!r}")
        if c["check"] not in CHECKS:
            raise ManifestError(f"case {c['id']!r}: unknown check {c['check']!r}")


def compare(value, expected, tolerance=0.0, mode="rel"):
    """Per-element comparison; returns (passed, deltas).

    ``mode`` is ``rel`` (|v - e| <= tol |e|), ``abs`` (|v - e| <= tol),
    ``max`` (v <= e) or ``exact``.
    """
    v = np.atleast_1d(np.asarray(value, dtype=float))
    e = np.atleast_1d(np.asarray(expected, dtype=float))
    if v.shape != e.shape:
        return False, None
    delta = v - e
    tol = np.broadcast_to(np.asarray(tolerance, dtype=float), e.shape)
    if mode == "rel":
        ok = np.abs(delta) <= tol * np.abs(e)
    elif mode == "abs":
        ok = np.abs(delta) <= tol
    elif mode == "max":
        ok = v <= e
    elif mode == "exact":
        ok = v == e
    else:
        raise ManifestError(f"unknown comparison mode {mode!r}")
    return bool(np.all(ok)), delta


def regression_run(manifest):
    """Evaluate every case; returns a list of per-case result dicts."""
    validate_manifest(manifest)
    report = []
    for case in manifest["cases"]:
        value = CHECKS[case["check"]](**case.get("params", {}))
        passed, delta = compare(value, case["expected"], case.get("tolerance", 0.0), case.get("mode", "rel"))
        vals = np.atleast_1d(np.asarray(value, dtype=float)).tolist()
        report.append(
            {
                "id": case["id"],
                "passed": passed,
                "value": vals,
                "expected": case["expected"],
                "delta": None if delta is None else delta.tolist(),
                "provenance": case.get("provenance", ""),
                "detail": f"value=[{', '.join(f'{v:.6g}' for v in vals)}] expected={case['expected']}",
            }
        )
    return report
