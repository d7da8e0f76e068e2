"""Physical constants and energy unit conversions.

All computations run in Hartree atomic units; conversion happens only at
input/output boundaries.
"""

from dataclasses import dataclass

HARTREE_MHZ = 6.5796839207e9
EV_HARTREE = 3.6749322176e-2
DEBYE_PER_AU = 2.541746

# (to hartree, from hartree); each pair applies the defining constant directly
_CONVERT = {
    "hartree": (lambda x: x, lambda x: x),
    "MHz": (lambda x: x / HARTREE_MHZ, lambda x: x * HARTREE_MHZ),
    "GHz": (lambda x: x * 1e3 / HARTREE_MHZ, lambda x: x * HARTREE_MHZ / 1e3),
    "eV": (lambda x: x * EV_HARTREE, lambda x: x / EV_HARTREE),
}

UNITS = tuple(_CONVERT)


class UnitError(ValueError):
    pass


@dataclass(frozen=True)
class EnergyQuantity:
    value: float
    unit: str = "hartree"

    def __post_init__(self):
        if self.unit not in _CONVERT:
            raise UnitError(f"unknown energy unit {self.unit!r}; expected one of {UNITS}")

    def to(self, unit):
        return convert_energy(self, unit)


def convert_energy(q, target_unit):
    """Return ``q`` expressed in ``target_unit``."""
    if target_unit not in _CONVERT:
        raise UnitError(f"unknown energy unit {target_unit!r}; expected one of {UNITS}")
    if q.unit == target_unit:
        return EnergyQuantity(q.value, target_unit)
    hartree = _CONVERT[q.unit][0](q.value)
    return EnergyQuantity(_CONVERT[target_unit][1](hartree), target_unit)


def hartree_to_mhz(x):
    return x * HARTREE_MHZ


def mhz_to_hartree(x):
    return x / HARTREE_MHZ


def ev_to_hartree(x):
    return x * EV_HARTREE


def hartree_to_ev(x):
    return x / EV_HARTREE


def au_to_debye(x):
    return x * DEBYE_PER_AU
