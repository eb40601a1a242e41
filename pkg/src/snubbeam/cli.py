"""Command-line interface: modal analysis, simulation, sweeps, comparison.

Configuration comes from an optional flat key-value file (``key = value``
per line, ``#`` comments) overridden by CLI flags; flags win. All
quantities are SI, frequencies in Hz. Output tables carry a header
echoing the resolved configuration so runs are reproducible from their
own artifacts.

Exit codes: 0 success, 1 configuration or parse error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError

from . import spectral, sweep as sweep_mod
from .beam_fem import BeamProperties, add_point_mass, assemble, eigenfrequencies
from .contact import UnilateralSpring
from .forcing import SineForcing, load_samples, read_force_file
from .integrator import (
    IntegrationError,
    IntegratorConfig,
    integrate,
    resample_uniform,
    write_trajectory,
)

__all__ = ["RunConfig", "main", "app"]

# node index -1 means "the free-end (tip) node" before mesh resolution
TIP = -1

DEFAULTS = {
    "length": 0.35,
    "width": 0.0385,
    "thickness": 0.003,
    "young_modulus": 69.0e9,
    "density": 2700.0,
    "n_elements": 10,
    "spring_stiffness": 57.14e3,
    "spring_node": TIP,
    "force_node": 2,
    "transducer_mass": 0.0,
    "transducer_node": None,  # defaults to force_node
    "rtol": 1e-6,
    "atol": 1e-9,
    "h_init": 1e-6,
    "h_max": 1e-4,
    "t_end": 1.0,
    "damping": 0.0,
    "sample_dt": 1.0 / 8192.0,
}

_INT_KEYS = {"n_elements", "spring_node", "force_node", "transducer_node"}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Fully resolved run configuration."""

    beam: BeamProperties
    n_elements: int
    spring_stiffness: float
    spring_node: int
    force_node: int
    transducer_mass: float
    transducer_node: int
    integrator: IntegratorConfig
    sample_dt: float

    def echo(self) -> dict:
        """Flat metadata dict for output-file headers."""
        return {
            "length_m": self.beam.length,
            "width_m": self.beam.width,
            "thickness_m": self.beam.thickness,
            "young_modulus_Pa": self.beam.young_modulus,
            "density_kg_m3": self.beam.density,
            "n_elements": self.n_elements,
            "spring_stiffness_N_m": self.spring_stiffness,
            "spring_node": self.spring_node,
            "force_node": self.force_node,
            "transducer_mass_kg": self.transducer_mass,
            "transducer_node": self.transducer_node,
            "rtol": self.integrator.rtol,
            "atol": self.integrator.atol,
            "h_max_s": self.integrator.h_max,
            "t_end_s": self.integrator.t_end,
            "mass_damping": self.integrator.mass_damping,
            "sample_dt_s": self.sample_dt,
        }


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` file."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value': {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in DEFAULTS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


def _resolve_node(value, n_elements, what):
    node = n_elements if value == TIP else value
    if not 0 <= node <= n_elements:
        raise ConfigError(f"{what} {node} outside mesh nodes 0..{n_elements}")
    return node


def build_config(args) -> RunConfig:
    """Merge defaults, config file, and CLI flags (flags win)."""
    values = dict(DEFAULTS)
    if getattr(args, "config", None):
        for key, text in load_config_file(args.config).items():
            try:
                values[key] = int(text) if key in _INT_KEYS else float(text)
            except ValueError as exc:
                raise ConfigError(f"config key {key}: bad number {text!r}") from exc
    for key in DEFAULTS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag

    try:
        beam = BeamProperties(
            length=values["length"],
            width=values["width"],
            thickness=values["thickness"],
            young_modulus=values["young_modulus"],
            density=values["density"],
        )
        integrator = IntegratorConfig(
            rtol=values["rtol"],
            atol=values["atol"],
            h_init=min(values["h_init"], values["h_max"]),
            h_max=values["h_max"],
            t_end=values["t_end"],
            mass_damping=values["damping"],
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    n_elements = int(values["n_elements"])
    if n_elements < 1:
        raise ConfigError(f"n_elements must be >= 1, got {n_elements}")
    spring_node = _resolve_node(int(values["spring_node"]), n_elements, "spring node")
    force_node = _resolve_node(int(values["force_node"]), n_elements, "force node")
    t_node = values["transducer_node"]
    transducer_node = (
        force_node if t_node is None else _resolve_node(int(t_node), n_elements, "transducer node")
    )
    if values["transducer_mass"] < 0.0:
        raise ConfigError("transducer_mass must be >= 0")
    if values["spring_stiffness"] < 0.0:
        raise ConfigError("spring_stiffness must be >= 0")
    if not 0.0 < values["sample_dt"] < values["t_end"]:
        raise ConfigError("sample_dt must lie in (0, t_end)")

    return RunConfig(
        beam=beam,
        n_elements=n_elements,
        spring_stiffness=values["spring_stiffness"],
        spring_node=spring_node,
        force_node=force_node,
        transducer_mass=values["transducer_mass"],
        transducer_node=transducer_node,
        integrator=integrator,
        sample_dt=values["sample_dt"],
    )


def build_model(cfg: RunConfig):
    model = assemble(cfg.beam, cfg.n_elements)
    if cfg.transducer_mass > 0.0:
        model = add_point_mass(model, cfg.transducer_node, cfg.transducer_mass)
    return model


def build_forcing(args, cfg: RunConfig):
    if getattr(args, "sine", None) and getattr(args, "force_file", None):
        raise ConfigError("give either --sine or --force-file, not both")
    if getattr(args, "sine", None):
        parts = args.sine.split(",")
        if len(parts) not in (2, 3):
            raise ConfigError(f"--sine expects amp,freq[,phase], got {args.sine!r}")
        try:
            nums = [float(p) for p in parts]
        except ValueError as exc:
            raise ConfigError(f"--sine expects numbers, got {args.sine!r}") from exc
        return SineForcing(*nums)
    if getattr(args, "force_file", None):
        if getattr(args, "force_period", None) is None:
            raise ConfigError("--force-file requires --force-period")
        rows = read_force_file(args.force_file)
        return load_samples(rows, args.force_period)
    raise ConfigError("no forcing given: use --sine amp,freq[,phase] or --force-file")


def _fundamental(forcing) -> float:
    if isinstance(forcing, SineForcing):
        return forcing.frequency
    return 1.0 / forcing.period


def cmd_modal(args) -> int:
    cfg = build_config(args)
    bare = assemble(cfg.beam, cfg.n_elements)
    k = args.k
    n_free = len(bare.free_dofs)
    if not 1 <= k <= n_free:
        raise ConfigError(f"-k must be in [1, {n_free}] for this mesh")
    freqs = eigenfrequencies(bare, k)
    print("eigenfrequencies without transducer mass (Hz):")
    for i, f in enumerate(freqs, start=1):
        print(f"  f{i} = {f:.4f}")
    with_mass = add_point_mass(bare, cfg.transducer_node, cfg.transducer_mass)
    freqs_m = eigenfrequencies(with_mass, k)
    print(
        f"with transducer mass {cfg.transducer_mass} kg "
        f"at node {cfg.transducer_node} (Hz):"
    )
    for i, f in enumerate(freqs_m, start=1):
        print(f"  f{i} = {f:.4f}")
    return 0


def cmd_simulate(args) -> int:
    cfg = build_config(args)
    model = build_model(cfg)
    spring = UnilateralSpring(stiffness=cfg.spring_stiffness, node=cfg.spring_node)
    forcing = build_forcing(args, cfg)

    traj = integrate(model, spring, forcing, cfg.force_node, config=cfg.integrator)
    uniform = resample_uniform(traj, cfg.sample_dt)
    tip_dofs = model.reduced_dof_pair(model.tip_node)
    u_tip = uniform.q_history[:, tip_dofs[0]]

    spectrum = spectral.normalize_by_max(
        spectral.steady_state_spectrum(u_tip, cfg.sample_dt)
    )
    f0 = _fundamental(forcing)
    peaks = spectral.find_harmonics(spectrum, f0, args.k_max, args.tol_bins)

    meta = cfg.echo()
    meta["forcing"] = repr(forcing)
    prefix = args.out
    write_trajectory(f"{prefix}_trajectory.txt", uniform, tip_dofs, forcing, meta)
    spectral.write_spectrum(f"{prefix}_spectrum.txt", spectrum, meta)
    spectral.write_harmonics(f"{prefix}_harmonics.txt", peaks, meta)

    duty = float(np.mean(u_tip < 0.0))
    print(f"tip displacement: min {u_tip.min():.6e} m, max {u_tip.max():.6e} m")
    print(f"contact duty fraction: {duty:.3f}")
    print(f"harmonics of {f0:g} Hz: " + " ".join(
        f"k={p.k}:{'present' if p.present else 'absent'}" for p in peaks
    ))
    print(f"wrote {prefix}_trajectory.txt, {prefix}_spectrum.txt, {prefix}_harmonics.txt")
    return 0


def cmd_sweep(args) -> int:
    cfg = build_config(args)
    model = build_model(cfg)
    spring = UnilateralSpring(stiffness=cfg.spring_stiffness, node=cfg.spring_node)
    curve = sweep_mod.frequency_sweep(
        model,
        spring,
        args.amplitude,
        cfg.force_node,
        args.f_start,
        args.f_end,
        args.n_points,
        config=cfg.integrator,
        settle_periods=args.settle,
        measure_periods=args.measure,
        workers=args.workers,
    )
    meta = cfg.echo()
    meta["forcing_amplitude_N"] = args.amplitude
    sweep_mod.write_sweep(args.out, curve, meta)
    print(f"wrote {args.out}")
    resonances = sweep_mod.find_resonances(curve, 2)
    if not resonances:
        print("no interior resonance found in the sweep range")
    for i, r in enumerate(resonances, start=1):
        print(f"resonance {i}: f = {r.frequency:.3f} Hz, amplitude = {r.amplitude:.6e} m")
    return 0


def cmd_compare(args) -> int:
    a = spectral.read_spectrum(args.spectrum_a)
    b = spectral.read_spectrum(args.spectrum_b)
    rows = spectral.compare_spectra(a, b, args.f0, args.k_max, args.tol_bins)
    print("k delta_f_Hz magnitude_ratio")
    for r in rows:
        print(f"{r.k} {r.delta_f:+.4f} {r.magnitude_ratio:.6f}")
    return 0


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value configuration file")
    p.add_argument("--length", type=float, help="beam length, m")
    p.add_argument("--width", type=float, help="beam width, m")
    p.add_argument("--thickness", type=float, help="beam thickness, m")
    p.add_argument("--young-modulus", dest="young_modulus", type=float, help="E, N/m^2")
    p.add_argument("--rho", "--density", dest="density", type=float, help="density, kg/m^3")
    p.add_argument("--elements", dest="n_elements", type=int, help="number of elements")
    p.add_argument("--kr", dest="spring_stiffness", type=float, help="snubber stiffness, N/m")
    p.add_argument("--spring-node", dest="spring_node", type=int,
                   help="snubber node (-1 = tip)")
    p.add_argument("--force-node", dest="force_node", type=int, help="excitation node")
    p.add_argument("--transducer-mass", dest="transducer_mass", type=float,
                   help="point mass, kg")
    p.add_argument("--transducer-node", dest="transducer_node", type=int,
                   help="point-mass node (defaults to the force node)")
    p.add_argument("--rtol", type=float, help="relative tolerance")
    p.add_argument("--atol", type=float, help="absolute tolerance, m")
    p.add_argument("--h-max", dest="h_max", type=float, help="max step size, s")
    p.add_argument("--t-end", dest="t_end", type=float, help="integration time, s")
    p.add_argument("--damping", type=float, help="mass-proportional damping, 1/s")
    p.add_argument("--sample-dt", dest="sample_dt", type=float,
                   help="uniform resampling step, s")


def _add_forcing_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sine", help="analytic forcing: amp,freq[,phase]")
    p.add_argument("--force-file", dest="force_file",
                   help="two-column (t, F) sampled forcing file")
    p.add_argument("--force-period", dest="force_period", type=float,
                   help="period of the sampled forcing, s")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="snubbeam",
        description="Cantilever beam with a one-sided snubber spring: "
        "modal analysis, nonlinear vibration, harmonic content, sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modal", help="linear eigenfrequencies")
    _add_config_flags(p)
    p.add_argument("-k", type=int, default=3, help="number of modes (default 3)")
    p.set_defaults(func=cmd_modal)

    p = sub.add_parser("simulate", help="time integration + spectrum + harmonics")
    _add_config_flags(p)
    _add_forcing_flags(p)
    p.add_argument("-o", "--out", default="run", help="output file prefix")
    p.add_argument("--k-max", dest="k_max", type=int, default=8,
                   help="harmonics to report (default 8)")
    p.add_argument("--tol-bins", dest="tol_bins", type=int, default=2,
                   help="harmonic search width in bins (default 2)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="frequency sweep and resonance report")
    _add_config_flags(p)
    p.add_argument("--f-start", dest="f_start", type=float, required=True)
    p.add_argument("--f-end", dest="f_end", type=float, required=True)
    p.add_argument("--n-points", dest="n_points", type=int, required=True)
    p.add_argument("--amplitude", type=float, default=1.0,
                   help="sine forcing amplitude, N (default 1)")
    p.add_argument("--settle", type=int, default=20, help="settling periods")
    p.add_argument("--measure", type=int, default=5, help="measurement periods")
    p.add_argument("--workers", type=int, default=1, help="parallel processes")
    p.add_argument("-o", "--out", default="sweep.txt", help="output table path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="per-harmonic comparison of two spectra")
    p.add_argument("spectrum_a")
    p.add_argument("spectrum_b")
    p.add_argument("--f0", type=float, required=True, help="fundamental, Hz")
    p.add_argument("--k-max", dest="k_max", type=int, default=8)
    p.add_argument("--tol-bins", dest="tol_bins", type=int, default=2)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IntegrationError as exc:
        print(f"error: integration failed: {exc}", file=sys.stderr)
        return 2
    except LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def app() -> None:
    raise SystemExit(main())
