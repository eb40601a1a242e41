"""Numerical frequency sweeps for locating nonlinear resonances.

Each grid frequency gets an independent simulation from rest: sine
forcing, a settling stretch, then an amplitude measurement window. Grid
points restart from rest rather than continuing from the previous
frequency, which makes results order-independent and safely parallel (at
the cost of not seeing sweep-direction hysteresis). The amplitude metric
is half the peak-to-peak tip displacement: robust for the strongly
asymmetric waveforms a stiff one-sided spring produces, where an RMS
would fold the DC offset in.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .forcing import SineForcing
from .integrator import IntegrationError, IntegratorConfig, integrate, resample_uniform

__all__ = [
    "SweepCurve",
    "Resonance",
    "frequency_sweep",
    "find_resonances",
    "write_sweep",
    "read_sweep",
]

# uniform samples per forcing period when measuring peak-to-peak amplitude
MEASURE_SAMPLES_PER_PERIOD = 256


@dataclass(eq=False)
class SweepCurve:
    """Steady response amplitude versus excitation frequency."""

    frequencies: np.ndarray
    amplitudes: np.ndarray
    statuses: list[str]
    settle_periods: int
    measure_periods: int

    def ok(self) -> np.ndarray:
        return np.array([s == "ok" for s in self.statuses])


@dataclass(frozen=True)
class Resonance:
    frequency: float
    amplitude: float


def _sweep_point(args):
    (model, spring, amplitude, force_node, f, config, settle, measure) = args
    period = 1.0 / f
    cfg = replace(config, t_end=(settle + measure) * period)
    forcing = SineForcing(amplitude=amplitude, frequency=f)
    try:
        traj = integrate(model, spring, forcing, force_node, config=cfg)
    except IntegrationError:
        return float("nan"), "failed"
    tip = model.reduced_translation_dof(model.tip_node)
    uniform = resample_uniform(traj, period / MEASURE_SAMPLES_PER_PERIOD)
    u = uniform.q_history[:, tip]
    mask = uniform.times >= settle * period * (1.0 - 1e-12)
    window = u[mask]
    return 0.5 * float(window.max() - window.min()), "ok"


def frequency_sweep(
    model,
    spring,
    forcing_amplitude: float,
    force_node: int,
    f_start: float,
    f_end: float,
    n_points: int,
    config: IntegratorConfig | None = None,
    settle_periods: int = 20,
    measure_periods: int = 5,
    workers: int = 1,
) -> SweepCurve:
    """Amplitude response over a geometric frequency grid.

    A failed integration marks its grid point "failed" and the sweep
    continues. ``workers > 1`` evaluates grid points in parallel
    processes; results are assembled in frequency order either way.
    """
    if not (0.0 < f_start < f_end):
        raise ValueError(f"need 0 < f_start < f_end, got {f_start}, {f_end}")
    if n_points < 2:
        raise ValueError(f"need at least 2 grid points, got {n_points}")
    if forcing_amplitude < 0.0:
        raise ValueError("forcing amplitude must be >= 0")
    if config is None:
        config = IntegratorConfig()

    grid = np.geomspace(f_start, f_end, n_points)
    tasks = [
        (model, spring, forcing_amplitude, force_node, f, config,
         settle_periods, measure_periods)
        for f in grid
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]

    amplitudes = np.array([r[0] for r in results])
    statuses = [r[1] for r in results]
    return SweepCurve(
        frequencies=grid,
        amplitudes=amplitudes,
        statuses=statuses,
        settle_periods=settle_periods,
        measure_periods=measure_periods,
    )


def find_resonances(curve: SweepCurve, n: int):
    """The ``n`` largest strict local maxima, parabolically refined.

    Fits a quadratic through the three points around each interior
    maximum and reports its apex; falls back to the grid point when the
    fit degenerates or wanders outside the bracket. Monotone curves have
    no interior maximum. Returns what exists if fewer than ``n``.
    """
    if len(curve.frequencies) < 3:
        raise ValueError("need at least 3 sweep points to locate resonances")
    f, a = curve.frequencies, curve.amplitudes
    ok = curve.ok()
    found = []
    for i in range(1, len(f) - 1):
        if not (ok[i - 1] and ok[i] and ok[i + 1]):
            continue
        if not (a[i] > a[i - 1] and a[i] > a[i + 1]):
            continue
        coeffs = np.polyfit(f[i - 1 : i + 2], a[i - 1 : i + 2], 2)
        f_star, a_star = f[i], a[i]
        if coeffs[0] < 0.0:
            vertex = -coeffs[1] / (2.0 * coeffs[0])
            if f[i - 1] < vertex < f[i + 1]:
                f_star = float(vertex)
                a_star = float(np.polyval(coeffs, vertex))
        found.append(Resonance(frequency=f_star, amplitude=a_star))
    found.sort(key=lambda r: r.amplitude, reverse=True)
    return found[:n]


def write_sweep(path, curve: SweepCurve, meta=None) -> None:
    from . import _tables

    full_meta = {
        "settle_periods": curve.settle_periods,
        "measure_periods": curve.measure_periods,
    }
    full_meta.update(meta or {})
    data = np.column_stack(
        [curve.frequencies, curve.amplitudes, curve.ok().astype(float)]
    )
    _tables.write_table(
        path,
        kind="sweep",
        column_names=["f_Hz", "amplitude_m", "status_ok"],
        data=data,
        meta=full_meta,
    )


def read_sweep(path) -> SweepCurve:
    from . import _tables

    meta, cols = _tables.read_table(path, expected_kind="sweep")
    statuses = ["ok" if s > 0.5 else "failed" for s in cols["status_ok"]]
    return SweepCurve(
        frequencies=cols["f_Hz"],
        amplitudes=cols["amplitude_m"],
        statuses=statuses,
        settle_periods=int(float(meta.get("settle_periods", 0))),
        measure_periods=int(float(meta.get("measure_periods", 0))),
    )
