#!/usr/bin/env python3
"""Regenerate the bundled data files under src/photonbench/data/.

Raw index tables are synthesized from reference oscillator models (metal
parameters follow the widely used Lorentz-Drude handbook sets; oxides and
semiconductors use hand-tuned plausible models; fused silica uses the
standard three-term Sellmeier form).  Fitted-material JSONs ship the
reference model directly where the table was synthesized from it, with the
residual against the shipped table computed and recorded; fused silica
(extinction-offset applied) and AZO (two merged source tables) are fitted
for real with the package fitter.

Run from the repo root:  python scripts/build_data.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from photonbench import data, materials, units  # noqa: E402

EV = units.omega_from_energy_ev(1.0)  # rad*c/um per eV

DATA = Path(__file__).resolve().parents[1] / "src" / "photonbench" / "data"


def lorentz_ev(sigma, omega_ev, gamma_ev):
    return materials.LorentzTerm(sigma, omega_ev * EV, gamma_ev * EV)


def drude_ev(wp_ev, gamma_ev, f=1.0):
    # sigma * omega^2 = (f * wp)^2 encoded with omega = wp
    return materials.LorentzTerm(f, wp_ev * EV, gamma_ev * EV, drude=True)


def ld_metal(name, wp_ev, f0, g0_ev, lorentz_rows):
    terms = [drude_ev(wp_ev, g0_ev, f=f0)]
    for f, g, w in lorentz_rows:
        terms.append(lorentz_ev(f * wp_ev**2 / w**2, w, g))
    return materials.DispersiveMaterial(
        name=name,
        eps_inf=1.0,
        terms=tuple(terms),
        resistivity_ohm_m=data.RESISTIVITY_OHM_M.get(name),
    )


# (f_j, Gamma_j eV, omega_j eV) rows per metal
REFERENCE_MODELS = {
    "Ag": ld_metal("Ag", 9.01, 0.845, 0.048, [
        (0.065, 3.886, 0.816),
        (0.124, 0.452, 4.481),
        (0.011, 0.065, 8.185),
        (0.840, 0.916, 9.083),
        (5.646, 2.419, 20.29),
    ]),
    "Au": ld_metal("Au", 9.03, 0.760, 0.053, [
        (0.024, 0.241, 0.415),
        (0.010, 0.345, 0.830),
        (0.071, 0.870, 2.969),
        (0.601, 2.494, 4.304),
        (4.384, 2.214, 13.32),
    ]),
    "Cu": ld_metal("Cu", 10.83, 0.575, 0.030, [
        (0.061, 0.378, 0.291),
        (0.104, 1.056, 2.957),
        (0.723, 3.213, 5.300),
        (0.638, 4.305, 11.18),
    ]),
    "Ni": ld_metal("Ni", 15.92, 0.096, 0.048, [
        (0.100, 4.511, 0.174),
        (0.135, 1.334, 0.582),
        (0.106, 2.178, 1.597),
        (0.729, 6.292, 6.089),
    ]),
    "cSi": materials.DispersiveMaterial(
        "cSi", 1.0,
        (lorentz_ev(6.8, 3.38, 0.12), lorentz_ev(2.7, 4.27, 0.38)),
        band_gap_ev=1.12,
    ),
    "GaAs": materials.DispersiveMaterial(
        "GaAs", 1.0,
        (lorentz_ev(1.2, 1.55, 0.06), lorentz_ev(5.8, 3.04, 0.40),
         lorentz_ev(3.5, 4.85, 0.70)),
        band_gap_ev=1.43,
    ),
    "CH3NH3PbI3": materials.DispersiveMaterial(
        "CH3NH3PbI3", 1.0,
        (lorentz_ev(1.4, 1.62, 0.10), lorentz_ev(1.1, 2.55, 0.30),
         lorentz_ev(1.6, 3.80, 0.70)),
        band_gap_ev=1.51,
    ),
    "TiO2": materials.DispersiveMaterial(
        "TiO2", 1.0,
        (lorentz_ev(3.6, 4.05, 0.25), lorentz_ev(0.8, 6.50, 0.80)),
    ),
    "ZnO": materials.DispersiveMaterial(
        "ZnO", 1.0,
        (lorentz_ev(1.6, 3.55, 0.12), lorentz_ev(0.6, 7.00, 1.00)),
    ),
    "ITO": materials.DispersiveMaterial(
        "ITO", 1.0,
        (lorentz_ev(2.2, 5.60, 0.50), drude_ev(1.75, 0.11)),
    ),
    "AZO": materials.DispersiveMaterial(
        "AZO", 1.0,
        (lorentz_ev(1.6, 3.60, 0.15), drude_ev(1.30, 0.09)),
    ),
}

SELLMEIER_B = (0.6961663, 0.4079426, 0.8974794)
SELLMEIER_C_UM = (0.0684043, 0.1162414, 9.896161)


def silica_n(wl_nm):
    lam2 = (np.asarray(wl_nm, dtype=float) / 1000.0) ** 2
    n2 = 1.0 + sum(
        b * lam2 / (lam2 - c**2) for b, c in zip(SELLMEIER_B, SELLMEIER_C_UM)
    )
    return np.sqrt(n2)


def table_from_model(model, wl_nm):
    eps = materials.permittivity(model, units.omega_from_wavelength_nm(wl_nm))
    nk = np.sqrt(eps)
    return materials.TabulatedIndex(wl_nm, nk.real, np.maximum(nk.imag, 0.0))


def residual_against(model, table):
    eps_m = materials.permittivity(model, table.omega())
    eps_d = table.epsilon()
    return float(np.mean(np.abs(eps_m - eps_d) ** 2) / np.mean(np.abs(eps_d) ** 2))


def write_material_tables():
    wl = np.geomspace(280.0, 2500.0, 241)
    for name, model in REFERENCE_MODELS.items():
        if name == "AZO":
            continue
        table = table_from_model(model, wl)
        materials.save_index_table(
            table, DATA / "materials" / f"{name}.csv",
            comments=[f"material: {name}",
                      "synthesized from the reference oscillator model in scripts/build_data.py"],
        )
    # AZO ships as two source tables with a 750-950 nm overlap
    azo = REFERENCE_MODELS["AZO"]
    wl_uv = np.geomspace(280.0, 950.0, 120)
    wl_ir = np.geomspace(750.0, 2500.0, 110)
    materials.save_index_table(
        table_from_model(azo, wl_uv), DATA / "materials" / "AZO_uv.csv",
        comments=["material: AZO (short-wavelength source)",
                  "synthesized from the reference oscillator model in scripts/build_data.py"])
    materials.save_index_table(
        table_from_model(azo, wl_ir), DATA / "materials" / "AZO_ir.csv",
        comments=["material: AZO (long-wavelength source)",
                  "synthesized from the reference oscillator model in scripts/build_data.py"])
    merged = materials.merge_tables(
        materials.load_index_table(DATA / "materials" / "AZO_uv.csv"),
        materials.load_index_table(DATA / "materials" / "AZO_ir.csv"))
    materials.save_index_table(
        merged, DATA / "materials" / "AZO.csv",
        comments=["material: AZO", "merged from AZO_uv.csv and AZO_ir.csv"])
    # fused silica from the Sellmeier form, lossless as tabulated
    n = silica_n(wl)
    materials.save_index_table(
        materials.TabulatedIndex(wl, n, np.zeros_like(n)),
        DATA / "materials" / "FusedSilica.csv",
        comments=["material: fused silica",
                  "three-term Sellmeier form, k = 0 as tabulated"])


def write_fitted_models():
    for name, model in REFERENCE_MODELS.items():
        table = materials.load_index_table(DATA / "materials" / f"{name}.csv")
        if name == "AZO":
            fitted = materials.fit_drude_lorentz(
                table, n_terms=2,
                config=materials.FitConfig(
                    n_drude=1, iterations=6000, restarts=10, seed=7,
                    residual_ceiling=1e-3, name="AZO"))
        else:
            fitted = materials.DispersiveMaterial(
                name=name, eps_inf=model.eps_inf, terms=model.terms,
                band_gap_ev=model.band_gap_ev,
                resistivity_ohm_m=model.resistivity_ohm_m,
                fit_range_nm=(float(table.wavelength_nm[0]),
                              float(table.wavelength_nm[-1])),
                residual=residual_against(model, table))
        materials.save_material(fitted, DATA / "fitted" / f"{name}.json")
        print(f"{name:12s} residual {fitted.residual:.3e}")

    raw = materials.load_index_table(DATA / "materials" / "FusedSilica.csv")
    offset = materials.apply_extinction_offset(raw, 0.04)
    fitted = materials.fit_drude_lorentz(
        offset, n_terms=6,
        config=materials.FitConfig(
            iterations=9000, restarts=12, seed=11, residual_ceiling=5e-3,
            name="FusedSilica", extinction_offset=0.04))
    materials.save_material(fitted, DATA / "fitted" / "FusedSilica.json")
    print(f"{'FusedSilica':12s} residual {fitted.residual:.3e}")
    w550 = units.omega_from_wavelength_nm(550.0)
    nk = np.sqrt(materials.permittivity(fitted, w550))
    print(f"  fitted n(550nm) = {nk.real:.4f} + {nk.imag:.4f}i "
          f"(table n = {silica_n(550.0):.4f}, k offset 0.04)")


def planck(wl_nm, T):
    x = 1.4388e7 / (np.asarray(wl_nm, dtype=float) * T)
    return (1e9 / wl_nm) ** 5 / np.expm1(x)


def write_spectra():
    wl = np.arange(280.0, 2500.0 + 1e-9, 5.0)
    base = planck(wl, 5772.0)
    dips = [(760.0, 18.0, 0.35), (940.0, 35.0, 0.75), (1130.0, 40.0, 0.80),
            (1400.0, 55.0, 2.2), (1900.0, 70.0, 2.4), (2050.0, 40.0, 0.7)]
    atten = np.ones_like(wl)
    for c, w, d in dips:
        atten *= np.exp(-d * np.exp(-((wl - c) / w) ** 2))
    atten /= 1.0 + np.exp(-(wl - 300.0) / 8.0)
    irr = base * atten
    irr *= 1.0 / irr.max()
    irr *= 1.45  # W/m^2/nm peak, plausible terrestrial scale
    with open(DATA / "spectra" / "am15.csv", "w", encoding="utf-8") as fh:
        fh.write("# kind: am15_irradiance\n")
        fh.write("# smooth terrestrial-style reference; swap in an official table as needed\n")
        fh.write("wavelength_nm,value\n")
        for x, y in zip(wl, irr):
            fh.write(f"{x:.1f},{y:.6g}\n")

    wl_d = np.arange(360.0, 780.0 + 1e-9, 5.0)
    spd = planck(wl_d, 6504.0)
    spd *= 100.0 / np.interp(560.0, wl_d, spd)
    with open(DATA / "spectra" / "d65.csv", "w", encoding="utf-8") as fh:
        fh.write("# kind: d65\n")
        fh.write("# daylight-style relative power, 100 at 560 nm\n")
        fh.write("wavelength_nm,value\n")
        for x, y in zip(wl_d, spd):
            fh.write(f"{x:.1f},{y:.6g}\n")


def report():
    w550 = units.omega_from_wavelength_nm(550.0)
    print("\nn + ik at 550 nm (reference models):")
    for name, model in REFERENCE_MODELS.items():
        nk = np.sqrt(materials.permittivity(model, w550))
        print(f"  {name:12s} {nk.real:7.3f} + {nk.imag:7.3f}i")


if __name__ == "__main__":
    write_material_tables()
    write_spectra()
    write_fitted_models()
    report()
