"""Access to the bundled material tables, fitted models, and spectra."""

from __future__ import annotations

import functools
from importlib import resources

from . import materials

MATERIAL_NAMES = (
    "Ag",
    "Au",
    "AZO",
    "cSi",
    "CH3NH3PbI3",
    "Cu",
    "FusedSilica",
    "GaAs",
    "ITO",
    "Ni",
    "TiO2",
    "ZnO",
)

# handbook bulk resistivities (Ohm*m); config defaults, not measured here
RESISTIVITY_OHM_M = {
    "Ag": 1.59e-8,
    "Cu": 1.68e-8,
    "Au": 2.44e-8,
    "Ni": 6.99e-8,
}

BAND_GAP_EV = {
    "cSi": 1.12,
    "GaAs": 1.43,
    "CH3NH3PbI3": 1.51,
}


def _data_dir():
    return resources.files("photonbench") / "data"


def table_path(name: str):
    return _data_dir() / "materials" / f"{name}.csv"


def fitted_path(name: str):
    return _data_dir() / "fitted" / f"{name}.json"


def spectrum_path(name: str):
    return _data_dir() / "spectra" / f"{name}.csv"


def load_table(name: str) -> materials.TabulatedIndex:
    return materials.load_index_table(table_path(name))


@functools.lru_cache(maxsize=None)
def load_fitted(name: str) -> materials.DispersiveMaterial:
    if name == "Air":
        return materials.VACUUM
    return materials.load_material(fitted_path(name))


def material_db() -> dict[str, materials.DispersiveMaterial]:
    """All bundled fitted materials plus Air, keyed by name."""
    db = {"Air": materials.VACUUM}
    for name in MATERIAL_NAMES:
        db[name] = load_fitted(name)
    return db
