"""2D TM finite-difference time-domain engine.

Leapfrog updates of E_z (cell centers) and H_x, H_y (staggered edges) on a
Yee grid, with periodic side columns, split-field absorbing layers at the
top and bottom, auxiliary-differential-equation polarization currents for
dispersive media, a soft Gaussian-pulse line current, and discrete-Fourier
accumulating line monitors.

Normalized units throughout: lengths in units of 1 um, c = 1, so one time
unit is the light travel time over 1 um.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import MaterialGrid, SimulationCell
from .materials import DispersiveMaterial

FIDELITY_DX_NM = {"low": 10.0, "medium": 5.0, "high": 1.0}
FIDELITIES = ("low", "medium", "high")

DEFAULT_COURANT = 0.5
PML_GRADE_ORDER = 4
PML_TARGET_REFLECTION = 1e-6


class BuildError(ValueError):
    pass


class DivergenceError(RuntimeError):
    def __init__(self, step):
        super().__init__(f"non-finite field detected at step {step}")
        self.step = step


class DecayTimeout(RuntimeError):
    def __init__(self, steps, ratio):
        super().__init__(
            f"probe amplitude ratio {ratio:.3e} after {steps} steps (cap reached)")
        self.steps = steps
        self.ratio = ratio


def band_frequencies(wl_min_nm: float, wl_max_nm: float, n: int = 64) -> np.ndarray:
    """n normalized frequencies evenly spaced in 1/lambda over the band."""
    f_hi = 1000.0 / wl_min_nm
    f_lo = 1000.0 / wl_max_nm
    if n == 1 or f_lo == f_hi:
        return np.array([(f_lo + f_hi) / 2.0])
    return np.linspace(f_lo, f_hi, n)


@dataclass(frozen=True)
class GaussianSource:
    """Soft line current J(t) = exp(-((t-t0)/tau)^2) * cos(2 pi f_c (t-t0)).

    The envelope at t = 0 is exp(-25) of peak, so there is no startup
    discontinuity; the current is cut to exactly zero after t = 2 t0.
    """

    f_center: float
    f_width: float
    tau: float
    t0: float
    amplitude: float = 1.0

    @staticmethod
    def for_frequencies(freqs, amplitude=1.0, width_factor=1.2,
                        narrowband_fraction=0.1):
        freqs = np.asarray(freqs, dtype=float)
        f_lo, f_hi = float(freqs.min()), float(freqs.max())
        f_c = 0.5 * (f_lo + f_hi)
        width = f_hi - f_lo
        df = width_factor * width if width > 0 else narrowband_fraction * f_c
        tau = 2.0 / (math.pi * df)
        return GaussianSource(f_c, df, tau, 5.0 * tau, amplitude)

    @property
    def t_off(self):
        return 2.0 * self.t0

    def current(self, t):
        if t >= self.t_off:
            return 0.0
        u = (t - self.t0) / self.tau
        return self.amplitude * math.exp(-u * u) * math.cos(
            2.0 * math.pi * self.f_center * (t - self.t0))


class DftMonitor:
    """Per-frequency accumulators for E_z and H_x along one grid row."""

    def __init__(self, name, row, y_nm, freqs, nx):
        self.name = name
        self.row = row
        self.y_nm = y_nm
        self.freqs = np.asarray(freqs, dtype=float)
        self.omegas = 2.0 * np.pi * self.freqs
        self.acc_e = np.zeros((self.freqs.size, nx), dtype=complex)
        self.acc_h = np.zeros((self.freqs.size, nx), dtype=complex)


def monitor_flux(monitor: DftMonitor, dx: float) -> np.ndarray:
    """Per-frequency power through the monitor line.

    Evaluates Re(sum E_z^* H_x)/2 * dx with the sign arranged so that
    positive means downward (toward the transmission monitor) propagation.
    The line sum uses exact (fsum) accumulation so it is invariant under
    cyclic relabeling of the columns.
    """
    out = np.empty(monitor.freqs.size)
    for k in range(monitor.freqs.size):
        terms = np.real(np.conj(monitor.acc_e[k]) * monitor.acc_h[k])
        out[k] = -0.5 * dx * math.fsum(terms.tolist())
    return out


def cross_flux(acc_e, acc_h, dx: float) -> np.ndarray:
    """monitor_flux on explicit accumulator arrays (used after subtracting
    the incident fields of a normalization run)."""
    nf = acc_e.shape[0]
    out = np.empty(nf)
    for k in range(nf):
        terms = np.real(np.conj(acc_e[k]) * acc_h[k])
        out[k] = -0.5 * dx * math.fsum(terms.tolist())
    return out


@dataclass(frozen=True)
class FieldSnapshot:
    step: int
    time: float
    ez: np.ndarray
    hx: np.ndarray
    hy: np.ndarray


class SimulationRun:
    """Owned-by-one-worker mutable state of a single FDTD run."""

    def __init__(self, cell, grid, fidelity, freqs, materials_db,
                 dx_nm=None, courant=DEFAULT_COURANT, source_amplitude=1.0,
                 pml_target=PML_TARGET_REFLECTION):
        freqs = np.asarray(freqs, dtype=float)
        if freqs.size == 0:
            raise BuildError("frequency list must be nonempty")
        if fidelity not in FIDELITY_DX_NM and dx_nm is None:
            raise BuildError(f"unknown fidelity {fidelity!r}")
        dx_nm = FIDELITY_DX_NM[fidelity] if dx_nm is None else dx_nm
        if grid.dx_nm != dx_nm:
            raise BuildError(
                f"material grid resolution {grid.dx_nm} nm does not match "
                f"fidelity resolution {dx_nm} nm")
        m = cell.m_nm
        if cell.height_nm < 6 * m:
            raise BuildError(
                f"cell height {cell.height_nm} nm cannot fit source, monitors "
                f"and absorbers (needs >= {6 * m} nm)")

        self.cell = cell
        self.fidelity = fidelity
        self.freqs = np.sort(freqs)
        self.dx_nm = dx_nm
        self.dx = dx_nm / 1000.0
        self.dt = courant * self.dx / math.sqrt(2.0)
        self.is_empty = grid.is_empty()

        self.nx, self.ny = grid.ids.shape
        shape = (self.nx, self.ny)
        self.ezx = np.zeros(shape)
        self.ezy = np.zeros(shape)
        self.ez = np.zeros(shape)
        self.hx = np.zeros((self.nx, self.ny - 1))
        self.hy = np.zeros(shape)

        # per-cell background permittivity and dispersive term tables
        eps_inf = np.ones(shape)
        self._terms = []  # (c1, c2, c3_array, p, p_prev) per resonance
        for mat_id, name in enumerate(grid.names):
            mat = materials_db[name]
            mask = grid.ids == mat_id
            if mat_id > 0 and not mask.any():
                continue
            eps_inf[mask] = mat.eps_inf
            for term in mat.terms:
                den = 1.0 + term.gamma * self.dt / 2.0
                w2dt2 = term.omega**2 * self.dt**2
                c1 = (2.0 - (0.0 if term.drude else w2dt2)) / den
                c2 = (1.0 - term.gamma * self.dt / 2.0) / den
                c3 = np.where(mask, term.sigma * w2dt2 / den, 0.0)
                self._terms.append(
                    [c1, c2, c3, np.zeros(shape), np.zeros(shape)])
        self.inv_eps = 1.0 / eps_inf

        # absorber profiles: quartic grading, exact exponential damping
        d = m / 1000.0
        sigma_max = -(PML_GRADE_ORDER + 1) * math.log(pml_target) / (2.0 * d)
        y_e = (np.arange(self.ny) + 0.5) * self.dx  # E_z row centers
        y_h = (np.arange(self.ny - 1) + 1.0) * self.dx  # H_x rows
        height = cell.height_nm / 1000.0

        def profile(y):
            u = np.maximum(d - y, y - (height - d)) / d
            u = np.clip(u, 0.0, 1.0)
            return sigma_max * u**PML_GRADE_ORDER

        sig_e = profile(y_e)
        sig_h = profile(y_h)
        self.ca_e = np.exp(-sig_e * self.dt)[None, :]
        self.cb_e = np.where(
            sig_e > 0, (1.0 - np.exp(-sig_e * self.dt)) / np.where(sig_e > 0, sig_e, 1.0),
            self.dt)[None, :]
        self.ca_h = np.exp(-sig_h * self.dt)[None, :]
        self.cb_h = np.where(
            sig_h > 0, (1.0 - np.exp(-sig_h * self.dt)) / np.where(sig_h > 0, sig_h, 1.0),
            self.dt)[None, :]

        def nearest_row(y_nm):
            return int(round(y_nm / dx_nm - 0.5))

        self.source = GaussianSource.for_frequencies(
            self.freqs, amplitude=source_amplitude)
        self.source_row = nearest_row(cell.source_y_nm)
        refl_row = nearest_row(cell.reflection_y_nm)
        trans_row = nearest_row(cell.transmission_y_nm)
        pml_rows = int(round(m / dx_nm))
        for label, row in (("source", self.source_row),
                           ("reflection monitor", refl_row),
                           ("transmission monitor", trans_row)):
            if not pml_rows < row < self.ny - 1 - pml_rows:
                raise BuildError(f"{label} row {row} falls inside the absorber")
        if len({self.source_row, refl_row, trans_row}) != 3:
            raise BuildError("source and monitor rows coincide; cell too small")

        self.monitors = {
            "reflection": DftMonitor(
                "reflection", refl_row, cell.reflection_y_nm, self.freqs, self.nx),
            "transmission": DftMonitor(
                "transmission", trans_row, cell.transmission_y_nm, self.freqs, self.nx),
        }
        self.probe = (self.nx // 2, trans_row)
        self.probe_peak = 0.0
        self.step_count = 0
        self.snapshots = []
        self._snapshot_stride = None

    def monitor(self, name) -> DftMonitor:
        return self.monitors[name]

    def enable_snapshots(self, stride):
        if stride < 1:
            raise ValueError("stride must be >= 1")
        self._snapshot_stride = int(stride)
        self._take_snapshot()

    def _take_snapshot(self):
        self.snapshots.append(FieldSnapshot(
            self.step_count, self.step_count * self.dt,
            self.ez.copy(), self.hx.copy(), self.hy.copy()))

    def step(self):
        """Advance one dt: H half-step, polarization, E half-step, DFTs."""
        dt, dx = self.dt, self.dx
        inv_dx = 1.0 / dx
        ez = self.ez

        # H(t + dt/2) from curl E(t)
        self.hx *= self.ca_h
        self.hx -= self.cb_h * ((ez[:, 1:] - ez[:, :-1]) * inv_dx)
        self.hy += dt * ((np.roll(ez, -1, axis=0) - ez) * inv_dx)
        t_h = (self.step_count + 0.5) * dt

        # polarization currents (one auxiliary pair per resonance)
        dp = None
        for rec in self._terms:
            c1, c2, c3, p, p_prev = rec
            p_new = c1 * p - c2 * p_prev + c3 * ez
            if dp is None:
                dp = p_new - p
            else:
                dp += p_new - p
            rec[3], rec[4] = p_new, p

        # E(t + dt) from curl H, polarization, and the soft source
        curl_x = (self.hy - np.roll(self.hy, 1, axis=0)) * inv_dx
        ezx, ezy = self.ezx, self.ezy
        ezx[:, 1:-1] += dt * self.inv_eps[:, 1:-1] * curl_x[:, 1:-1]
        if dp is not None:
            ezx[:, 1:-1] -= self.inv_eps[:, 1:-1] * dp[:, 1:-1]
        j = self.source.current(t_h)
        if j != 0.0:
            ezx[:, self.source_row] -= dt * self.inv_eps[:, self.source_row] * j
        curl_y = (self.hx[:, 1:] - self.hx[:, :-1]) * inv_dx
        ezy[:, 1:-1] = (self.ca_e[:, 1:-1] * ezy[:, 1:-1]
                        - self.cb_e[:, 1:-1] * (self.inv_eps[:, 1:-1] * curl_y))
        np.add(ezx, ezy, out=self.ez)
        t_e = (self.step_count + 1) * dt

        # frequency-domain accumulation on the monitor lines
        for mon in self.monitors.values():
            phase_h = np.exp(1j * mon.omegas * t_h) * dt
            row = mon.row
            h_line = 0.5 * (self.hx[:, row - 1] + self.hx[:, row])
            mon.acc_h += phase_h[:, None] * h_line[None, :]
            phase_e = np.exp(1j * mon.omegas * t_e) * dt
            mon.acc_e += phase_e[:, None] * self.ez[:, row][None, :]

        self.step_count += 1
        v = abs(self.ez[self.probe])
        if v > self.probe_peak:
            self.probe_peak = v
        if self._snapshot_stride and self.step_count % self._snapshot_stride == 0:
            self._take_snapshot()
        return self

    def run_steps(self, n):
        for _ in range(n):
            self.step()
        return self

    def probe_value(self):
        return abs(self.ez[self.probe])

    def run_until_decay(self, decay_ratio=1e-6, check_every=50, max_steps=1_000_000):
        """Step until the probe amplitude stays below decay_ratio times its
        running peak for a full check window after source turn-off."""
        if not 0.0 < decay_ratio < 1.0:
            raise ValueError("decay_ratio must be in (0, 1)")
        # if the probe never lights up, one full down-and-back transit after
        # source-off proves nothing is coming
        transit = 2.0 * self.cell.height_nm / 1000.0
        window_max = 0.0
        while self.step_count < max_steps:
            self.step()
            v = self.probe_value()
            if v > window_max:
                window_max = v
            if self.step_count % check_every == 0:
                if not np.isfinite(self.ez).all():
                    raise DivergenceError(self.step_count)
                t = self.step_count * self.dt
                if t > self.source.t_off:
                    if self.probe_peak > 0.0 \
                            and window_max <= decay_ratio * self.probe_peak:
                        return self
                    if self.probe_peak == 0.0 and t > self.source.t_off + transit:
                        return self
                window_max = 0.0
        ratio = window_max / self.probe_peak if self.probe_peak > 0 else 0.0
        raise DecayTimeout(self.step_count, ratio)


def build_run(cell: SimulationCell, grid: MaterialGrid, fidelity: str,
              freqs, materials_db, **kwargs) -> SimulationRun:
    """Assemble a run: Yee grid at the fidelity's resolution, source near
    the top, reflection monitor one unit depth below it, transmission
    monitor near the bottom, absorbers at both vertical walls."""
    return SimulationRun(cell, grid, fidelity, freqs, materials_db, **kwargs)


def step(run: SimulationRun) -> SimulationRun:
    return run.step()


def run_until_decay(run: SimulationRun, decay_ratio=1e-6, check_every=50,
                    max_steps=1_000_000) -> SimulationRun:
    return run.run_until_decay(decay_ratio, check_every, max_steps)


def record_snapshot(run: SimulationRun, stride: int, n_steps: int = None):
    """Advance the run, keeping field snapshots every stride steps.

    With n_steps given, advances exactly that many steps; otherwise runs
    until decay.  Snapshots start at the run's current state.
    """
    run.enable_snapshots(stride)
    if n_steps is not None:
        run.run_steps(n_steps)
    else:
        run.run_until_decay()
    return run.snapshots


def save_snapshots(run: SimulationRun, path, fmt="binary"):
    """Write snapshots: a JSON header line with (nx, ny, dx_nm, dt, stride,
    count, fields) followed by row-major frames, float64 binary or CSV."""
    import json

    header = {
        "nx": run.nx, "ny": run.ny, "dx_nm": run.dx_nm, "dt": run.dt,
        "stride": run._snapshot_stride, "count": len(run.snapshots),
        "fields": ["ez", "hx", "hy"], "format": fmt,
    }
    if fmt == "binary":
        with open(path, "wb") as fh:
            fh.write((json.dumps(header) + "\n").encode())
            for snap in run.snapshots:
                for arr in (snap.ez, snap.hx, snap.hy):
                    fh.write(np.ascontiguousarray(arr, dtype=np.float64).tobytes())
    elif fmt == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("# " + json.dumps(header) + "\n")
            fh.write("step,time,field,values...\n")
            for snap in run.snapshots:
                for name, arr in (("ez", snap.ez), ("hx", snap.hx), ("hy", snap.hy)):
                    flat = ",".join(f"{v:.9g}" for v in arr.ravel())
                    fh.write(f"{snap.step},{snap.time:.9g},{name},{flat}\n")
    else:
        raise ValueError(f"unknown snapshot format {fmt!r}")
