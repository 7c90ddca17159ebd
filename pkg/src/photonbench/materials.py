"""Frequency-dependent complex permittivities.

Materials are represented as a sum of Lorentzian susceptibilities over a
real background eps_inf, with free-carrier (Drude) response encoded as a
flagged term.  Sign convention is exp(-i*omega*t), so passive media have
Im(eps) >= 0.  Angular frequencies are normalized (rad * c/um, see units).

Tabulated refractive-index data (wavelength_nm, n, k) is ingested from CSV
and fitted to the model with full-batch adaptive-moment gradient descent on
log-parameterized values.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import units


class FitError(RuntimeError):
    """Fit failed to reach the configured residual ceiling."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class LorentzTerm:
    """One resonance: chi(w) = sigma * omega**2 / (omega**2 - w**2 - i*w*gamma).

    With drude=True the term is the free-carrier limit
    chi(w) = -sigma * omega**2 / (w**2 + i*w*gamma), where omega only sets
    the scale of the plasma frequency (sigma * omega**2 = wp**2).
    """

    sigma: float
    omega: float
    gamma: float
    drude: bool = False

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega <= 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")

    def susceptibility(self, w):
        w = np.asarray(w, dtype=float)
        if self.drude:
            return -self.sigma * self.omega**2 / (w**2 + 1j * w * self.gamma)
        return (
            self.sigma
            * self.omega**2
            / (self.omega**2 - w**2 - 1j * w * self.gamma)
        )


@dataclass(frozen=True)
class DispersiveMaterial:
    name: str
    eps_inf: float
    terms: tuple[LorentzTerm, ...] = ()
    band_gap_ev: float | None = None
    resistivity_ohm_m: float | None = None
    extinction_offset: float = 0.0
    fit_range_nm: tuple[float, float] = (280.0, 2500.0)
    residual: float | None = None

    def in_fit_range(self, omega):
        lo, hi = self.fit_range_nm
        wl = units.wavelength_nm_from_omega(np.asarray(omega, dtype=float))
        return (wl >= lo) & (wl <= hi)


VACUUM = DispersiveMaterial(name="Air", eps_inf=1.0)


def permittivity(material: DispersiveMaterial, omega):
    """Complex relative permittivity at normalized angular frequency omega.

    Total over positive omega; evaluation outside the material's fit range
    is extrapolation and is the caller's concern (see in_fit_range).
    """
    w = np.asarray(omega, dtype=float)
    eps = np.full(w.shape, material.eps_inf, dtype=complex)
    for term in material.terms:
        eps = eps + term.susceptibility(w)
    if np.ndim(omega) == 0:
        return complex(eps)
    return eps


@dataclass(frozen=True)
class TabulatedIndex:
    """Rows of (wavelength nm, n, k) with strictly increasing wavelength."""

    wavelength_nm: np.ndarray
    n: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        wl = np.asarray(self.wavelength_nm, dtype=float)
        n = np.asarray(self.n, dtype=float)
        k = np.asarray(self.k, dtype=float)
        if not (wl.shape == n.shape == k.shape) or wl.ndim != 1 or wl.size == 0:
            raise ValueError("wavelength/n/k must be equal-length 1D arrays")
        if not np.all(np.diff(wl) > 0):
            raise ValueError("wavelengths must be strictly increasing")
        if np.any(n <= 0):
            raise ValueError("refractive index n must be > 0")
        if np.any(k < 0):
            raise ValueError("extinction k must be >= 0")
        object.__setattr__(self, "wavelength_nm", wl)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "k", k)

    def omega(self):
        return units.omega_from_wavelength_nm(self.wavelength_nm)

    def epsilon(self):
        return (self.n + 1j * self.k) ** 2

    def at_nearest(self, wavelength_nm):
        i = int(np.argmin(np.abs(self.wavelength_nm - wavelength_nm)))
        return self.wavelength_nm[i], self.n[i], self.k[i]


def load_index_table(path) -> TabulatedIndex:
    """Read a CSV with header wavelength_nm,n,k; '#' lines are comments."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header_seen = False
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if not header_seen:
                cols = [c.strip() for c in line.split(",")]
                if cols != ["wavelength_nm", "n", "k"]:
                    raise ValueError(f"unexpected header {cols} in {path}")
                header_seen = True
                continue
            parts = line.split(",")
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
    if not rows:
        raise ValueError(f"no data rows in {path}")
    arr = np.array(rows, dtype=float)
    return TabulatedIndex(arr[:, 0], arr[:, 1], arr[:, 2])


def save_index_table(table: TabulatedIndex, path, comments=()):
    with open(path, "w", encoding="utf-8") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("wavelength_nm,n,k\n")
        for wl, n, k in zip(table.wavelength_nm, table.n, table.k):
            fh.write(f"{wl:.6g},{n:.8g},{k:.8g}\n")


def apply_extinction_offset(table: TabulatedIndex, offset: float) -> TabulatedIndex:
    """Shift every extinction coefficient by a constant offset >= 0."""
    if offset < 0:
        raise ValueError(f"extinction offset must be >= 0, got {offset}")
    return TabulatedIndex(table.wavelength_nm, table.n, table.k + offset)


def merge_tables(
    a: TabulatedIndex, b: TabulatedIndex, max_gap_nm: float = 50.0
) -> TabulatedIndex:
    """Combine two index tables into one covering the union of their ranges.

    Where the ranges overlap, n and k crossfade linearly from the
    earlier-starting table to the other across the overlap window.
    """
    first, second = (a, b) if a.wavelength_nm[0] <= b.wavelength_nm[0] else (b, a)
    gap = second.wavelength_nm[0] - first.wavelength_nm[-1]
    if gap > max_gap_nm:
        raise ValueError(
            f"tables are disjoint with a {gap:.1f} nm gap (limit {max_gap_nm} nm)"
        )
    lo = second.wavelength_nm[0]
    hi = min(first.wavelength_nm[-1], second.wavelength_nm[-1])

    wl = np.union1d(first.wavelength_nm, second.wavelength_nm)

    def interp(table, x):
        n = np.interp(x, table.wavelength_nm, table.n)
        k = np.interp(x, table.wavelength_nm, table.k)
        return n, k

    n_out = np.empty_like(wl)
    k_out = np.empty_like(wl)
    for i, x in enumerate(wl):
        if x < lo:
            n_out[i], k_out[i] = interp(first, x)
        elif x > first.wavelength_nm[-1]:
            n_out[i], k_out[i] = interp(second, x)
        elif hi > lo:
            w = (x - lo) / (hi - lo)
            nf, kf = interp(first, x)
            ns, ks = interp(second, x)
            n_out[i] = (1 - w) * nf + w * ns
            k_out[i] = (1 - w) * kf + w * ks
        else:
            n_out[i], k_out[i] = interp(second, x)
    return TabulatedIndex(wl, n_out, k_out)


@dataclass(frozen=True)
class FitConfig:
    n_drude: int = 0
    iterations: int = 4000
    restarts: int = 10
    learning_rate: float = 0.05
    seed: int = 0
    residual_ceiling: float = 0.05
    name: str = "fitted"
    band_gap_ev: float | None = None
    resistivity_ohm_m: float | None = None
    extinction_offset: float = 0.0


def _model_and_grad(params, drude_mask, w, eps_data):
    """Loss, gradient wrt log-params, and model eps for the current params.

    params: [u_eps_inf, (u_sigma, u_omega, u_gamma) * n_terms], all exp()'d.
    Loss is the mean squared complex residual |eps_model - eps_data|^2.
    """
    n_terms = drude_mask.size
    p = np.exp(params)
    eps_inf = p[0]
    sigma = p[1::3]
    omega0 = p[2::3]
    gamma = p[3::3]

    w2 = w**2
    eps = np.full(w.shape, eps_inf, dtype=complex)
    dchi_dsig = np.empty((n_terms, w.size), dtype=complex)
    dchi_dom = np.empty((n_terms, w.size), dtype=complex)
    dchi_dga = np.empty((n_terms, w.size), dtype=complex)
    for j in range(n_terms):
        if drude_mask[j]:
            B = w2 + 1j * w * gamma[j]
            chi = -sigma[j] * omega0[j] ** 2 / B
            dchi_dsig[j] = chi / sigma[j]
            dchi_dom[j] = 2.0 * chi / omega0[j]
            dchi_dga[j] = sigma[j] * omega0[j] ** 2 * 1j * w / B**2
        else:
            D = omega0[j] ** 2 - w2 - 1j * w * gamma[j]
            chi = sigma[j] * omega0[j] ** 2 / D
            dchi_dsig[j] = chi / sigma[j]
            dchi_dom[j] = 2.0 * sigma[j] * omega0[j] * (-w2 - 1j * w * gamma[j]) / D**2
            dchi_dga[j] = sigma[j] * omega0[j] ** 2 * 1j * w / D**2
        eps = eps + chi

    r = eps - eps_data
    loss = float(np.mean(np.abs(r) ** 2))
    rc = np.conj(r)
    n = w.size
    grad = np.empty_like(params)
    grad[0] = 2.0 / n * np.sum(rc.real) * eps_inf
    for j in range(n_terms):
        grad[1 + 3 * j] = 2.0 / n * np.real(np.sum(rc * dchi_dsig[j])) * sigma[j]
        grad[2 + 3 * j] = 2.0 / n * np.real(np.sum(rc * dchi_dom[j])) * omega0[j]
        grad[3 + 3 * j] = 2.0 / n * np.real(np.sum(rc * dchi_dga[j])) * gamma[j]
    return loss, grad, eps


def _adam(params, drude_mask, w, eps_data, iterations, lr):
    m = np.zeros_like(params)
    v = np.zeros_like(params)
    b1, b2, eps_ = 0.9, 0.999, 1e-8
    best = params.copy()
    best_loss = math.inf
    x = params.copy()
    for t in range(1, iterations + 1):
        loss, grad, _ = _model_and_grad(x, drude_mask, w, eps_data)
        if loss < best_loss:
            best_loss = loss
            best = x.copy()
        m = b1 * m + (1 - b1) * grad
        v = b2 * v + (1 - b2) * grad**2
        mh = m / (1 - b1**t)
        vh = v / (1 - b2**t)
        # cosine decay keeps late iterations in the polish regime
        step = lr * (0.5 * (1 + math.cos(math.pi * (t - 1) / iterations)))
        x = x - step * mh / (np.sqrt(vh) + eps_)
    loss, _, _ = _model_and_grad(x, drude_mask, w, eps_data)
    if loss < best_loss:
        best_loss, best = loss, x.copy()
    return best, best_loss


def _init_params(rng, n_terms, n_drude, w, eps_data, peak_init):
    w_lo, w_hi = w.min(), w.max()
    scale = max(float(np.mean(np.abs(eps_data))), 1.0)
    params = np.empty(1 + 3 * n_terms)
    params[0] = math.log(0.5 + rng.uniform(0.5, 2.0))
    im = np.imag(eps_data)
    order = np.argsort(im)[::-1]
    for j in range(n_terms):
        if j < n_drude:
            om = 1.0
            sig = rng.uniform(0.1, 2.0) * scale * w_lo**2
        elif peak_init and im.max() > 1e-6 and j - n_drude < w.size:
            om = float(w[order[j - n_drude]]) * rng.uniform(0.9, 1.1)
            sig = rng.uniform(0.1, 2.0) * scale
        else:
            om = math.exp(rng.uniform(math.log(0.5 * w_lo), math.log(4.0 * w_hi)))
            sig = math.exp(rng.uniform(math.log(1e-3), math.log(3.0))) * scale
        ga = om * math.exp(rng.uniform(math.log(1e-3), math.log(0.3)))
        params[1 + 3 * j] = math.log(sig)
        params[2 + 3 * j] = math.log(om)
        params[3 + 3 * j] = math.log(ga)
    return params


def fit_drude_lorentz(
    table: TabulatedIndex, n_terms: int, config: FitConfig = FitConfig()
) -> DispersiveMaterial:
    """Fit eps_inf plus n_terms resonances to a tabulated (n + ik)^2.

    Runs config.restarts independent seeded starts of full-batch Adam on
    log-parameterized values and keeps the lowest mean-squared residual.
    Raises FitError when the best relative residual exceeds the ceiling.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    if config.n_drude > n_terms:
        raise ValueError("n_drude cannot exceed n_terms")
    w = table.omega()
    eps_data = table.epsilon()
    drude_mask = np.array(
        [j < config.n_drude for j in range(n_terms)], dtype=bool
    )
    norm = float(np.mean(np.abs(eps_data) ** 2))

    best_params = None
    best_loss = math.inf
    for r in range(config.restarts):
        rng = np.random.default_rng([config.seed, r])
        params = _init_params(
            rng, n_terms, config.n_drude, w, eps_data, peak_init=(r == 0)
        )
        params, loss = _adam(
            params, drude_mask, w, eps_data, config.iterations, config.learning_rate
        )
        if loss < best_loss:
            best_loss = loss
            best_params = params

    residual = best_loss / norm
    p = np.exp(best_params)
    terms = tuple(
        LorentzTerm(
            sigma=float(p[1 + 3 * j]),
            omega=float(p[2 + 3 * j]),
            gamma=float(p[3 + 3 * j]),
            drude=bool(drude_mask[j]),
        )
        for j in range(n_terms)
    )
    material = DispersiveMaterial(
        name=config.name,
        eps_inf=float(p[0]),
        terms=terms,
        band_gap_ev=config.band_gap_ev,
        resistivity_ohm_m=config.resistivity_ohm_m,
        extinction_offset=config.extinction_offset,
        fit_range_nm=(float(table.wavelength_nm[0]), float(table.wavelength_nm[-1])),
        residual=float(residual),
    )
    if residual > config.residual_ceiling:
        raise FitError(
            f"fit of {config.name!r} stalled at relative residual "
            f"{residual:.3e} (ceiling {config.residual_ceiling:.3e})",
            residual=residual,
        )
    return material


def material_to_dict(material: DispersiveMaterial) -> dict:
    return {
        "name": material.name,
        "eps_inf": material.eps_inf,
        "terms": [
            {"sigma": t.sigma, "omega": t.omega, "gamma": t.gamma, "drude": t.drude}
            for t in material.terms
        ],
        "band_gap_ev": material.band_gap_ev,
        "resistivity_ohm_m": material.resistivity_ohm_m,
        "extinction_offset": material.extinction_offset,
        "fit_range_nm": list(material.fit_range_nm),
        "residual": material.residual,
    }


def material_from_dict(d: dict) -> DispersiveMaterial:
    return DispersiveMaterial(
        name=d["name"],
        eps_inf=d["eps_inf"],
        terms=tuple(
            LorentzTerm(t["sigma"], t["omega"], t["gamma"], t.get("drude", False))
            for t in d["terms"]
        ),
        band_gap_ev=d.get("band_gap_ev"),
        resistivity_ohm_m=d.get("resistivity_ohm_m"),
        extinction_offset=d.get("extinction_offset", 0.0),
        fit_range_nm=tuple(d.get("fit_range_nm", (280.0, 2500.0))),
        residual=d.get("residual"),
    )


def save_material(material: DispersiveMaterial, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(material_to_dict(material), fh, indent=2)
        fh.write("\n")


def load_material(path) -> DispersiveMaterial:
    with open(path, "r", encoding="utf-8") as fh:
        return material_from_dict(json.load(fh))
