"""Structure families, their search spaces, cell sizing, and rasterization.

Six parameterized families are supported; 2D cross-sections map cones to
isoceles triangles, spheres to circles, and wires to centered rectangles.
All lengths are nanometers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

FILM_OUTER_MATERIALS = ("AZO", "cSi", "ITO", "TiO2", "ZnO")
FILM_METAL_MATERIALS = ("Ag", "Au", "Cu", "Ni")
WIRE_MATERIALS = ("cSi", "CH3NH3PbI3", "GaAs")
SPHERE_FILM_MATERIALS = ("cSi", "CH3NH3PbI3", "GaAs")
BLOCK_MATERIALS = (
    "Ag", "Air", "Au", "AZO", "cSi", "CH3NH3PbI3",
    "Cu", "GaAs", "ITO", "Ni", "TiO2", "ZnO",
)

BLOCKS_PITCH = 200.0
BLOCKS_THICKNESS = 40.0
BLOCKS_SIZE = 10.0
BLOCKS_COLS = int(BLOCKS_PITCH / BLOCKS_SIZE)  # 20
BLOCKS_ROWS = int(BLOCKS_THICKNESS / BLOCKS_SIZE)  # 4
BLOCKS_COUNT = BLOCKS_COLS * BLOCKS_ROWS  # 80

VARIANTS = (
    "ThreeLayerFilm",
    "AntiReflectiveNanocones",
    "VerticalNanowires",
    "ClosePackedNanospheres",
    "FilmWithDoubleNanocones",
    "CombinatorialBlocks",
)


class ValidationError(ValueError):
    """Raised when a structure violates its bounds; lists every violation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class StructureSpec:
    """One structure family instance: geometric parameters plus materials.

    params holds the per-variant lengths in nm; materials the per-slot
    material names; blocks (CombinatorialBlocks only) a row-major tuple of
    material names, rows top to bottom, columns left to right.
    """

    variant: str
    params: dict = field(default_factory=dict)
    materials: tuple = ()
    blocks: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", dict(self.params))
        object.__setattr__(self, "materials", tuple(self.materials))
        object.__setattr__(self, "blocks", tuple(self.blocks))

    def to_dict(self):
        d = {"variant": self.variant, "params": dict(self.params),
             "materials": list(self.materials)}
        if self.variant == "CombinatorialBlocks":
            d["blocks"] = list(self.blocks)
        return d

    @staticmethod
    def from_dict(d):
        return StructureSpec(
            d["variant"], d.get("params", {}),
            tuple(d.get("materials", ())), tuple(d.get("blocks", ())))


# (name, lower nm, upper nm) per variant; materials validated separately
_PARAM_BOUNDS = {
    "ThreeLayerFilm": (("t1", 10, 100), ("t2", 3, 20), ("t3", 10, 100)),
    "AntiReflectiveNanocones": (("r", 5, 150), ("h", 1, 300)),
    "VerticalNanowires": (("g", 1, 200), ("r", 5, 200), ("h", 200, 200)),
    "ClosePackedNanospheres": (("t", 100, 400), ("r", 10, 200)),
    "FilmWithDoubleNanocones": (
        ("t1", 10, 50), ("t2", 3, 20), ("t3", 10, 50),
        ("r1", 20, 50), ("h1", 50, 100), ("r2", 20, 50), ("h2", 50, 100)),
    "CombinatorialBlocks": (),
}

_MATERIAL_SLOTS = {
    "ThreeLayerFilm": (FILM_OUTER_MATERIALS, FILM_METAL_MATERIALS),
    "AntiReflectiveNanocones": (("FusedSilica",),),
    "VerticalNanowires": (WIRE_MATERIALS,),
    "ClosePackedNanospheres": (SPHERE_FILM_MATERIALS, ("TiO2",)),
    "FilmWithDoubleNanocones": (
        FILM_OUTER_MATERIALS, FILM_METAL_MATERIALS,
        FILM_OUTER_MATERIALS, FILM_OUTER_MATERIALS),
    "CombinatorialBlocks": (),
}

PARAM_NAMES = {v: tuple(b[0] for b in bounds) for v, bounds in _PARAM_BOUNDS.items()}

DEFAULT_MATERIALS = {
    "ThreeLayerFilm": ("TiO2", "Ag"),
    "AntiReflectiveNanocones": ("FusedSilica",),
    "VerticalNanowires": ("cSi",),
    "ClosePackedNanospheres": ("cSi", "TiO2"),
    "FilmWithDoubleNanocones": ("TiO2", "Ag", "TiO2", "TiO2"),
    "CombinatorialBlocks": (),
}


def validate(spec: StructureSpec) -> StructureSpec:
    """Return the spec unchanged iff every invariant holds.

    Collects all violations (bounds, nanowire gap, material slots, blocks
    grid shape) into one ValidationError rather than stopping at the first.
    """
    bad = []
    if spec.variant not in VARIANTS:
        raise ValidationError([f"unknown variant {spec.variant!r}"])
    bounds = _PARAM_BOUNDS[spec.variant]
    for name, lo, hi in bounds:
        if name not in spec.params:
            bad.append(f"missing parameter {name}")
            continue
        v = spec.params[name]
        if not (lo <= v <= hi):
            bad.append(f"{name}={v:g} outside [{lo}, {hi}] nm")
    extra = set(spec.params) - {b[0] for b in bounds}
    if extra:
        bad.append(f"unknown parameters {sorted(extra)}")
    if spec.variant == "VerticalNanowires" and "g" in spec.params:
        if spec.params["g"] < 0:
            bad.append(f"g={spec.params['g']:g} must be >= 0 (2r <= pitch)")
    slots = _MATERIAL_SLOTS[spec.variant]
    if spec.variant == "CombinatorialBlocks":
        if len(spec.blocks) != BLOCKS_COUNT:
            bad.append(
                f"blocks grid has {len(spec.blocks)} entries, needs "
                f"{BLOCKS_ROWS}x{BLOCKS_COLS} = {BLOCKS_COUNT}")
        unknown = sorted({b for b in spec.blocks} - set(BLOCK_MATERIALS))
        if unknown:
            bad.append(f"unknown block materials {unknown}")
    else:
        if len(spec.materials) != len(slots):
            bad.append(
                f"{spec.variant} needs {len(slots)} material slots, "
                f"got {len(spec.materials)}")
        else:
            for i, (mat, allowed) in enumerate(zip(spec.materials, slots)):
                if mat not in allowed:
                    bad.append(f"material slot {i}: {mat!r} not in {allowed}")
    if bad:
        raise ValidationError(bad)
    return spec


def structure_height(spec: StructureSpec) -> float:
    p = spec.params
    if spec.variant == "ThreeLayerFilm":
        return p["t1"] + p["t2"] + p["t3"]
    if spec.variant == "AntiReflectiveNanocones":
        return p["h"]
    if spec.variant == "VerticalNanowires":
        return p["h"]
    if spec.variant == "ClosePackedNanospheres":
        return p["t"] + 2 * p["r"]
    if spec.variant == "FilmWithDoubleNanocones":
        return p["t1"] + p["t2"] + p["t3"] + p["h1"] + p["h2"]
    if spec.variant == "CombinatorialBlocks":
        return BLOCKS_THICKNESS
    raise ValueError(spec.variant)


@dataclass(frozen=True)
class SimulationCell:
    """Cell extents plus the spacing unit m that positions everything else.

    The top and bottom m of the cell are PML.  Measured from the top edge:
    source at 1.5m, reflection monitor at 2.5m.  The transmission monitor
    sits 1.5m above the bottom edge.  The structure occupies the interior
    between 3m margins.
    """

    width_nm: float
    height_nm: float
    m_nm: float = 50.0

    @property
    def pml_nm(self):
        return self.m_nm

    @property
    def source_y_nm(self):
        return self.height_nm - 1.5 * self.m_nm

    @property
    def reflection_y_nm(self):
        return self.height_nm - 2.5 * self.m_nm

    @property
    def transmission_y_nm(self):
        return 1.5 * self.m_nm


def cell_size(spec: StructureSpec, m: float = 50.0) -> SimulationCell:
    """Simulation cell extents for a validated spec and unit depth m."""
    if m <= 0:
        raise ValueError("m must be > 0")
    p = spec.params
    v = spec.variant
    if v == "ThreeLayerFilm":
        w, h = 10.0, p["t2"] + max(2 * p["t1"], 2 * p["t3"]) + 6 * m
    elif v == "AntiReflectiveNanocones":
        w, h = 2 * p["r"], 2 * p["h"] + 6 * m
    elif v == "VerticalNanowires":
        pitch = 2 * p["r"] + p["g"]
        w, h = pitch, p["h"] + 6 * m
    elif v == "ClosePackedNanospheres":
        w, h = 2 * p["r"], max(4 * p["r"], 2 * p["t"]) + 6 * m
    elif v == "FilmWithDoubleNanocones":
        t_dag = p["t2"] + max(2 * p["t1"], 2 * p["t3"]) + max(2 * p["h1"], 2 * p["h2"])
        w, h = max(2 * p["r1"], 2 * p["r2"]), t_dag + 6 * m
    elif v == "CombinatorialBlocks":
        w, h = BLOCKS_PITCH, BLOCKS_THICKNESS + 6 * m
    else:
        raise ValueError(v)
    return SimulationCell(w, h, m)


@dataclass(frozen=True)
class MaterialGrid:
    """Material ids sampled at cell centers on a (nx, ny) lattice.

    ids[i, j] indexes into names; id 0 is always vacuum ("Air").  x is the
    periodic direction, y the vertical; j = 0 is the bottom row.
    """

    ids: np.ndarray
    names: tuple
    dx_nm: float
    width_nm: float
    height_nm: float

    def is_empty(self):
        return bool(np.all(self.ids == 0))


class _Painter:
    def __init__(self, cell: SimulationCell, dx: float):
        self.nx = max(1, math.ceil(cell.width_nm / dx))
        self.ny = max(1, math.ceil(cell.height_nm / dx))
        self.dx = dx
        self.xc = (np.arange(self.nx) + 0.5) * dx
        self.yc = (np.arange(self.ny) + 0.5) * dx
        self.ids = np.zeros((self.nx, self.ny), dtype=np.int16)
        self.names = ["Air"]

    def _id(self, name):
        if name not in self.names:
            self.names.append(name)
        return self.names.index(name)

    def rect(self, name, x0, x1, y0, y1):
        mid = self._id(name)
        sel = ((self.xc[:, None] >= x0) & (self.xc[:, None] < x1)
               & (self.yc[None, :] >= y0) & (self.yc[None, :] < y1))
        self.ids[sel] = mid

    def slab(self, name, y0, y1):
        self.rect(name, -np.inf, np.inf, y0, y1)

    def cone(self, name, cx, y_base, half_width, height, up=True):
        mid = self._id(name)
        if up:
            frac = (self.yc[None, :] - y_base) / height
        else:
            frac = (y_base - self.yc[None, :]) / height
        inside = (frac >= 0) & (frac < 1)
        hw = half_width * (1.0 - frac)
        sel = inside & (np.abs(self.xc[:, None] - cx) <= hw)
        self.ids[sel] = mid

    def circle(self, name, cx, cy, r):
        mid = self._id(name)
        sel = (self.xc[:, None] - cx) ** 2 + (self.yc[None, :] - cy) ** 2 <= r**2
        self.ids[sel] = mid


def rasterize(spec: StructureSpec, dx: float, m: float = 50.0) -> MaterialGrid:
    """Staircase-rasterize a validated spec at Yee resolution dx.

    Cell-center sampling, later shapes override earlier ones.  Substrate-
    backed families (nanocones) extend their substrate through the bottom
    boundary so the lower half-space is semi-infinite.
    """
    if dx <= 0:
        raise ValueError("dx must be > 0")
    cell = cell_size(spec, m)
    pt = _Painter(cell, dx)
    p = spec.params
    H = cell.height_nm
    v = spec.variant
    if v == "ThreeLayerFilm":
        outer, metal = spec.materials
        h = p["t1"] + p["t2"] + p["t3"]
        y0 = (H - h) / 2
        pt.slab(outer, y0, y0 + p["t3"])
        pt.slab(metal, y0 + p["t3"], y0 + p["t3"] + p["t2"])
        pt.slab(outer, y0 + p["t3"] + p["t2"], y0 + h)
    elif v == "AntiReflectiveNanocones":
        (glass,) = spec.materials
        y_base = H - 3 * m - p["h"]
        pt.slab(glass, 0.0, y_base)
        pt.cone(glass, cell.width_nm / 2, y_base, p["r"], p["h"], up=True)
    elif v == "VerticalNanowires":
        (mat,) = spec.materials
        y0 = 3 * m
        cx = cell.width_nm / 2
        pt.rect(mat, cx - p["r"], cx + p["r"], y0, y0 + p["h"])
    elif v == "ClosePackedNanospheres":
        film_mat, sphere_mat = spec.materials
        h = p["t"] + 2 * p["r"]
        y0 = (H - h) / 2
        pt.slab(film_mat, y0, y0 + p["t"])
        pt.circle(sphere_mat, cell.width_nm / 2, y0 + p["t"] + p["r"], p["r"])
    elif v == "FilmWithDoubleNanocones":
        outer, metal, cone_top, cone_bot = spec.materials
        h = p["t1"] + p["t2"] + p["t3"] + p["h1"] + p["h2"]
        y0 = (H - h) / 2
        cx = cell.width_nm / 2
        pt.cone(cone_bot, cx, y0 + p["h2"], p["r2"], p["h2"], up=False)
        film0 = y0 + p["h2"]
        pt.slab(outer, film0, film0 + p["t3"])
        pt.slab(metal, film0 + p["t3"], film0 + p["t3"] + p["t2"])
        pt.slab(outer, film0 + p["t3"] + p["t2"], film0 + p["t3"] + p["t2"] + p["t1"])
        pt.cone(cone_top, cx, film0 + p["t1"] + p["t2"] + p["t3"], p["r1"], p["h1"],
                up=True)
    elif v == "CombinatorialBlocks":
        y_top = H - 3 * m
        for idx, name in enumerate(spec.blocks):
            if name == "Air":
                continue
            row, col = divmod(idx, BLOCKS_COLS)
            x0 = col * BLOCKS_SIZE
            y1 = y_top - row * BLOCKS_SIZE
            pt.rect(name, x0, x0 + BLOCKS_SIZE, y1 - BLOCKS_SIZE, y1)
    else:
        raise ValueError(v)
    return MaterialGrid(pt.ids, tuple(pt.names), dx, cell.width_nm, cell.height_nm)


def empty_grid_like(grid: MaterialGrid) -> MaterialGrid:
    """All-vacuum grid with the same extents; the normalization counterpart."""
    return MaterialGrid(
        np.zeros_like(grid.ids), ("Air",), grid.dx_nm,
        grid.width_nm, grid.height_nm)


@dataclass(frozen=True)
class SearchSpace:
    """Discretized box: per-parameter (lower, upper, increment) in nm plus
    per-slot material candidate lists."""

    variant: str
    bounds: tuple  # ((name, lo, hi, inc), ...)
    material_choices: tuple = ()  # per-slot tuples of names

    def __post_init__(self):
        for name, lo, hi, inc in self.bounds:
            if lo > hi:
                raise ValueError(f"{name}: lower {lo} > upper {hi}")
            if inc <= 0:
                raise ValueError(f"{name}: increment must be > 0")

    def param_values(self):
        out = []
        for name, lo, hi, inc in self.bounds:
            count = int(math.floor((hi - lo) / inc + 1e-9)) + 1
            out.append((name, [lo + i * inc for i in range(count)]))
        return out

    def material_combos(self):
        if not self.material_choices:
            return [()]
        return [tuple(c) for c in itertools.product(*self.material_choices)]


def default_search_space(variant: str, all_materials: bool = False) -> SearchSpace:
    """The benchmark discretization: 1 nm increments everywhere except the
    film-with-cones family at 5 nm.  By default a single fixed material
    combination is used; all_materials=True enumerates the cross-product
    (outer film layers always share one material)."""
    if variant == "CombinatorialBlocks":
        raise ValueError(
            "the combinatorial blocks family has 12^80 configurations and is "
            "never enumerated; use blocks_encode/blocks_decode and random search")
    inc = 5.0 if variant == "FilmWithDoubleNanocones" else 1.0
    bounds = tuple((n, float(lo), float(hi), inc) for n, lo, hi in _PARAM_BOUNDS[variant])
    if all_materials:
        mats = _MATERIAL_SLOTS[variant]
    else:
        mats = tuple((m,) for m in DEFAULT_MATERIALS[variant])
    return SearchSpace(variant, bounds, mats)


def grid_count(space: SearchSpace) -> int:
    n = 1
    for _, values in space.param_values():
        n *= len(values)
    return n * len(space.material_combos())


def enumerate_grid(space: SearchSpace):
    """Yield every grid point in lexicographic order (materials outermost,
    then parameters with the first varying slowest)."""
    names = [n for n, _ in space.param_values()]
    value_lists = [v for _, v in space.param_values()]
    for combo in space.material_combos():
        for values in itertools.product(*value_lists):
            yield StructureSpec(space.variant, dict(zip(names, values)), combo)


def spec_at_index(space: SearchSpace, index: int) -> StructureSpec:
    """The index-th grid point of enumerate_grid, without iteration."""
    names = [n for n, _ in space.param_values()]
    value_lists = [v for _, v in space.param_values()]
    combos = space.material_combos()
    n_param = 1
    for v in value_lists:
        n_param *= len(v)
    if not 0 <= index < n_param * len(combos):
        raise IndexError(index)
    combo = combos[index // n_param]
    rem = index % n_param
    values = []
    for v in reversed(value_lists):
        rem, i = divmod(rem, len(v))
        values.append(v[i])
    values.reverse()
    return StructureSpec(space.variant, dict(zip(names, values)), combo)


def blocks_encode(blocks) -> str:
    """Serialize a blocks grid (row-major, 80 entries) to an index string."""
    blocks = tuple(blocks)
    if len(blocks) != BLOCKS_COUNT:
        raise ValueError(f"blocks grid must have {BLOCKS_COUNT} entries")
    for b in blocks:
        if b not in BLOCK_MATERIALS:
            raise ValueError(f"unknown block material {b!r}")
    return ",".join(blocks)


def blocks_decode(encoded: str) -> StructureSpec:
    """Inverse of blocks_encode, producing a CombinatorialBlocks spec."""
    blocks = tuple(encoded.split(","))
    if len(blocks) != BLOCKS_COUNT:
        raise ValueError(
            f"encoded blocks grid has {len(blocks)} entries, needs {BLOCKS_COUNT}")
    for b in blocks:
        if b not in BLOCK_MATERIALS:
            raise ValueError(f"unknown block material {b!r}")
    return StructureSpec("CombinatorialBlocks", {}, (), blocks)
