"""Unit conversions between external (nm, eV) and internal normalized units.

Internally the length unit is a = 1 um and c = 1, so frequencies are in
units of c/a and angular frequencies in rad * c/a.  Time is measured in
a/c.  All public interfaces take nanometers and electronvolts and convert
at the boundary.
"""

import numpy as np

# h*c in eV*nm (CODATA)
HC_EV_NM = 1239.84193

# length unit in nm (a = 1 um)
LENGTH_UNIT_NM = 1000.0


def freq_from_wavelength_nm(wavelength_nm):
    """Normalized frequency f = a/lambda for wavelength in nm."""
    return LENGTH_UNIT_NM / np.asarray(wavelength_nm, dtype=float)


def wavelength_nm_from_freq(freq):
    return LENGTH_UNIT_NM / np.asarray(freq, dtype=float)


def omega_from_wavelength_nm(wavelength_nm):
    """Normalized angular frequency 2*pi*a/lambda."""
    return 2.0 * np.pi * freq_from_wavelength_nm(wavelength_nm)


def wavelength_nm_from_omega(omega):
    return 2.0 * np.pi * LENGTH_UNIT_NM / np.asarray(omega, dtype=float)


def energy_ev_from_wavelength_nm(wavelength_nm):
    return HC_EV_NM / np.asarray(wavelength_nm, dtype=float)


def wavelength_nm_from_energy_ev(energy_ev):
    return HC_EV_NM / np.asarray(energy_ev, dtype=float)


def omega_from_energy_ev(energy_ev):
    return omega_from_wavelength_nm(wavelength_nm_from_energy_ev(energy_ev))


def energy_ev_from_omega(omega):
    return energy_ev_from_wavelength_nm(wavelength_nm_from_omega(omega))
