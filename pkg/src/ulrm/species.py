"""Bundled per-species atomic data and the quantum-defect model."""

import json
import os
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .units import ev_to_hartree

DATA_ENV = "ULRM_DATA_DIR"
SPECIES_FILE = "species.json"
MIN_N = 5


class UnknownSpeciesError(KeyError):
    pass


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class PWaveResonanceParams:
    """Breit-Wigner parametrization of the triplet p-wave shape resonance.

    Energies are stored in hartree. ``background`` is an additive scattering
    volume (a.u.) that switches off linearly at the resonance energy.
    """

    E_res: float
    Gamma: float
    background: float = 0.0

    def __post_init__(self):
        if not self.E_res > 0 or not self.Gamma > 0:
            raise ValueError("p-wave resonance needs E_res > 0 and Gamma > 0")


@dataclass(frozen=True)
class SpeciesData:
    name: str
    mass: float
    a0: float
    alpha: float
    defect_coeffs: tuple
    pwave: PWaveResonanceParams | None = None

    def __post_init__(self):
        if self.mass <= 0 or self.alpha <= 0:
            raise ValueError(f"{self.name}: mass and alpha must be positive")


def _data_path():
    override = os.environ.get(DATA_ENV)
    if override:
        return Path(override) / SPECIES_FILE
    return resources.files("ulrm") / "data" / SPECIES_FILE


@lru_cache(maxsize=None)
def _load_table(path):
    with open(path) as fh:
        return json.load(fh)


def species_table():
    """Raw species table (dict) as loaded from the active data file."""
    return _load_table(str(_data_path()))


def data_version():
    return species_table()["version"]


def _build(name, entry):
    pw = entry.get("pwave")
    pwave = None
    if pw is not None:
        pwave = PWaveResonanceParams(
            E_res=ev_to_hartree(pw["E_res_eV"]),
            Gamma=ev_to_hartree(pw["Gamma_eV"]),
            background=pw.get("background", 0.0),
        )
    return SpeciesData(
        name=name,
        mass=float(entry["mass"]),
        a0=float(entry["a0"]),
        alpha=float(entry["alpha"]),
        defect_coeffs=tuple(tuple(float(c) for c in row) for row in entry["defects"]),
        pwave=pwave,
    )


def species_lookup(name):
    """Return the bundled :class:`SpeciesData` for ``name`` (``Rb``, ``Cs`` or ``H``)."""
    if isinstance(name, SpeciesData):
        return name
    table = species_table()["species"]
    if name not in table:
        raise UnknownSpeciesError(f"unknown species {name!r}; known: {sorted(table)}")
    return _build(name, table[name])


def check_state(n, l):
    if int(n) != n or int(l) != l:
        raise InvalidStateError(f"quantum numbers must be integers, got n={n}, l={l}")
    if n < MIN_N:
        raise InvalidStateError(f"n={n} below the supported minimum {MIN_N}")
    if not 0 <= l < n:
        raise InvalidStateError(f"invalid state n={n}, l={l}: need 0 <= l < n")


def quantum_defect(species, n, l):
    """Rydberg-Ritz quantum defect ``d0 + d2 / (n - d0)**2``; zero for l >= 4."""
    check_state(n, l)
    sp = species_lookup(species)
    if l >= len(sp.defect_coeffs):
        return 0.0
    d0, d2 = sp.defect_coeffs[l]
    if d0 == 0.0 and d2 == 0.0:
        return 0.0
    return d0 + d2 / (n - d0) ** 2


def effective_n(species, n, l):
    return n - quantum_defect(species, n, l)


def dump_species():
    """JSON-serializable snapshot of the active species table."""
    return json.loads(json.dumps(species_table()))
