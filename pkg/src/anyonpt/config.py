"""Experiment configuration: a single YAML tree per run.

One file drives one runner.  Any of the axes ``potential.delta``,
``params.phi``, ``params.v`` (or ``params.v_over_vc``) and ``packet.carrier``
may be a list; the runner takes the cartesian product as its sweep, capped at
10^4 points.  ``params.v_over_vc`` expresses the drift as a fraction of the
critical velocity of the configured well's ground state and is mutually
exclusive with ``params.v``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError
from .lasermap import CavityParams
from .model import Grid, PoschlTeller, Tabulated
from .propagation import AbsorberSpec, PropagatorConfig
from .spectra import critical_velocity, poschl_teller_energies

__all__ = ["ExperimentConfig", "SweepPoint", "EXPERIMENTS"]

EXPERIMENTS = ("spectrum", "delocalize", "scatter", "amplify", "lasermap")
MAX_SWEEP_POINTS = 10_000

_TOP_KEYS = {
    "experiment",
    "output_dir",
    "seed",
    "grid",
    "boundary",
    "potential",
    "params",
    "propagator",
    "packet",
    "separatrix",
    "density_stride",
    "rt_sweep",
    "spectrum",
    "amplify",
    "cavity",
    "detuning",
    "e1",
}


@dataclass(frozen=True)
class SweepPoint:
    """One resolved cell of the sweep (all axes scalar)."""

    index: int
    phi: float
    v: float
    delta: float
    carrier: float | None = None
    v_over_vc: float | None = None


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _require(mapping: dict, key: str, ctx: str):
    if key not in mapping:
        raise ConfigError(f"{ctx}: missing required key {key!r}")
    return mapping[key]


def _check_keys(mapping: dict, allowed: set, ctx: str):
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"{ctx}: unknown keys {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    experiment: str
    grid: Grid | None = None
    boundary: str = "periodic"
    output_dir: str | None = None
    seed: int = 0
    # Potential axis values; delta may hold several sweep values.
    potential_kind: str = "poschl_teller"
    nu: float = 1.0
    delta: list = field(default_factory=lambda: [0.0])
    v0: float | None = None
    potential_file: str | None = None
    # Parameter axes.
    phi: list = field(default_factory=lambda: [0.0])
    v: list | None = None
    v_over_vc: list | None = None
    # Propagation / scattering.
    propagator: PropagatorConfig | None = None
    packet_center: float | None = None
    packet_width: float | None = None
    carrier: list | None = None
    separatrix: float = 0.0
    density_stride: int = 1
    rt_sweep: dict | None = None
    # Spectrum products.
    k_max: float = 6.0
    k_points: int = 601
    # Amplification products.
    amplify_evolve: bool = False
    g_t_times: list = field(default_factory=list)
    g_t_grid: Grid | None = None
    # Laser mapping.
    cavity: CavityParams | None = None
    detuning: dict | None = None
    e1: float | None = None

    # ------------------------------------------------------------------ parsing

    @classmethod
    def from_yaml(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            with path.open() as fh:
                raw = yaml.safe_load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from None
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML ({exc})") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        _check_keys(raw, _TOP_KEYS, "config")
        experiment = _require(raw, "experiment", "config")
        if experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {experiment!r}; pick one of {EXPERIMENTS}")

        cfg = cls(experiment=experiment)
        cfg.output_dir = raw.get("output_dir")
        cfg.seed = int(raw.get("seed", 0))

        if "grid" in raw:
            g = raw["grid"]
            _check_keys(g, {"x_min", "x_max", "n_points"}, "grid")
            try:
                cfg.grid = Grid(float(g["x_min"]), float(g["x_max"]), int(g["n_points"]))
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigError(f"grid: {exc}") from exc
        cfg.boundary = raw.get("boundary", "periodic")
        if cfg.boundary not in ("dirichlet", "periodic"):
            raise ConfigError(f"boundary must be dirichlet or periodic, got {cfg.boundary!r}")

        if "potential" in raw:
            p = raw["potential"]
            _check_keys(p, {"kind", "nu", "delta", "v0", "file"}, "potential")
            cfg.potential_kind = p.get("kind", "poschl_teller")
            if cfg.potential_kind not in ("poschl_teller", "tabulated"):
                raise ConfigError(f"potential.kind must be poschl_teller or tabulated")
            cfg.nu = float(p.get("nu", 1.0))
            cfg.delta = [float(d) for d in _as_list(p.get("delta", 0.0))]
            cfg.v0 = None if p.get("v0") is None else float(p["v0"])
            cfg.potential_file = p.get("file")
            if cfg.potential_kind == "tabulated" and not cfg.potential_file:
                raise ConfigError("potential.kind tabulated requires potential.file")

        if "params" in raw:
            pr = raw["params"]
            _check_keys(pr, {"phi", "v", "v_over_vc"}, "params")
            cfg.phi = [float(p) for p in _as_list(pr.get("phi", 0.0))]
            if "v" in pr and "v_over_vc" in pr:
                raise ConfigError("params: give either v or v_over_vc, not both")
            if "v_over_vc" in pr:
                cfg.v_over_vc = [float(f) for f in _as_list(pr["v_over_vc"])]
            else:
                cfg.v = [float(f) for f in _as_list(pr.get("v", 0.0))]
        if cfg.v is None and cfg.v_over_vc is None:
            cfg.v = [0.0]

        if "propagator" in raw:
            pp = dict(raw["propagator"])
            _check_keys(
                pp, {"dt", "t_final", "frame", "snapshot_every", "absorber"}, "propagator"
            )
            absorber = None
            if pp.get("absorber") is not None:
                ab = pp["absorber"]
                _check_keys(ab, {"width", "strength"}, "propagator.absorber")
                absorber = AbsorberSpec(float(ab["width"]), float(ab["strength"]))
            try:
                cfg.propagator = PropagatorConfig(
                    dt=float(pp.get("dt", 0.005)),
                    t_final=float(pp.get("t_final", 10.0)),
                    frame=pp.get("frame", "moving"),
                    snapshot_every=int(pp.get("snapshot_every", 100)),
                    absorber=absorber,
                )
            except ValueError as exc:
                raise ConfigError(f"propagator: {exc}") from exc

        if "packet" in raw:
            pk = raw["packet"]
            _check_keys(pk, {"center", "width", "carrier"}, "packet")
            cfg.packet_center = float(_require(pk, "center", "packet"))
            cfg.packet_width = float(_require(pk, "width", "packet"))
            cfg.carrier = [float(c) for c in _as_list(pk.get("carrier", 0.0))]
        cfg.separatrix = float(raw.get("separatrix", 0.0))

        if "spectrum" in raw:
            sp = raw["spectrum"]
            _check_keys(sp, {"k_max", "k_points"}, "spectrum")
            cfg.k_max = float(sp.get("k_max", 6.0))
            cfg.k_points = int(sp.get("k_points", 601))

        if "amplify" in raw:
            am = raw["amplify"]
            _check_keys(am, {"evolve", "g_t_times", "g_t_grid"}, "amplify")
            cfg.amplify_evolve = bool(am.get("evolve", False))
            cfg.g_t_times = [float(t) for t in am.get("g_t_times", [])]
            if am.get("g_t_grid") is not None:
                g = am["g_t_grid"]
                cfg.g_t_grid = Grid(float(g["x_min"]), float(g["x_max"]), int(g["n_points"]))

        cfg.density_stride = int(raw.get("density_stride", 1))
        if cfg.density_stride < 1:
            raise ConfigError("density_stride must be >= 1")

        if "rt_sweep" in raw:
            rt = raw["rt_sweep"]
            _check_keys(rt, {"k_min", "k_max", "num"}, "rt_sweep")
            cfg.rt_sweep = {
                "k_min": float(_require(rt, "k_min", "rt_sweep")),
                "k_max": float(_require(rt, "k_max", "rt_sweep")),
                "num": int(_require(rt, "num", "rt_sweep")),
            }
            if not (1 <= cfg.rt_sweep["num"] <= MAX_SWEEP_POINTS):
                raise ConfigError("rt_sweep.num out of range")

        if "cavity" in raw:
            cv = raw["cavity"]
            _check_keys(cv, {"D", "Dg", "delta1", "delta2", "g", "l", "Tm", "TR"}, "cavity")
            try:
                cfg.cavity = CavityParams(
                    D=float(_require(cv, "D", "cavity")),
                    Dg=float(cv.get("Dg", 0.0)),
                    delta1=float(cv.get("delta1", 0.0)),
                    delta2=float(cv.get("delta2", 0.0)),
                    g=float(cv.get("g", 0.0)),
                    l=float(cv.get("l", 0.0)),
                    Tm=float(cv.get("Tm", 1.0)),
                    TR=float(cv.get("TR", 1.0)),
                )
            except ValueError as exc:
                raise ConfigError(f"cavity: {exc}") from exc
        if "detuning" in raw:
            dt_ = raw["detuning"]
            _check_keys(dt_, {"start", "stop", "num"}, "detuning")
            cfg.detuning = {
                "start": float(_require(dt_, "start", "detuning")),
                "stop": float(_require(dt_, "stop", "detuning")),
                "num": int(_require(dt_, "num", "detuning")),
            }
            if cfg.detuning["num"] < 1 or cfg.detuning["num"] > MAX_SWEEP_POINTS:
                raise ConfigError("detuning.num out of range")
        if raw.get("e1") is not None:
            cfg.e1 = float(raw["e1"])

        cfg.validate()
        return cfg

    # ------------------------------------------------------------------ checks

    def validate(self):
        ex = self.experiment
        if ex in ("spectrum", "delocalize", "scatter", "amplify"):
            if self.grid is None:
                raise ConfigError(f"{ex}: grid section is required")
        if ex == "scatter":
            if self.propagator is None or self.packet_center is None:
                raise ConfigError("scatter: propagator and packet sections are required")
        if ex == "amplify" and self.amplify_evolve and self.propagator is None:
            raise ConfigError("amplify with evolve: true requires a propagator section")
        if ex == "lasermap":
            if self.cavity is None:
                raise ConfigError("lasermap: cavity section is required")
            if self.e1 is None:
                raise ConfigError("lasermap: e1 (well depth for the threshold) is required")
        if self.v_over_vc is not None:
            if self.potential_kind != "poschl_teller" or self.effective_amplitude() >= 0:
                raise ConfigError("v_over_vc needs a poschl_teller well (negative amplitude)")
            if any(p == 0.0 for p in self.phi):
                raise ConfigError("v_over_vc is undefined at phi = 0 (no finite v_c)")
        n = len(self.sweep_points())
        if n > MAX_SWEEP_POINTS:
            raise ConfigError(f"sweep has {n} points, cap is {MAX_SWEEP_POINTS}")

    def effective_amplitude(self) -> float:
        return self.v0 if self.v0 is not None else -self.nu * (self.nu + 1.0)

    # ------------------------------------------------------------------ access

    def ground_state_energy(self) -> float:
        """E_1 of the configured well (needs a poschl_teller well)."""
        if self.potential_kind != "poschl_teller" or self.effective_amplitude() >= 0:
            raise ConfigError("ground-state energy needs a poschl_teller well")
        return poschl_teller_energies(self.nu).energies[0]

    def potential(self, delta: float):
        if self.potential_kind == "tabulated":
            return Tabulated.from_csv(self.potential_file)
        return PoschlTeller(nu=self.nu, delta=delta, v0=self.v0)

    def packet(self, carrier: float):
        from .scattering import PacketSpec

        return PacketSpec(center=self.packet_center, width=self.packet_width, carrier=carrier)

    def sweep_points(self) -> list:
        """Cartesian product of the list-valued axes, resolved to scalars."""
        carriers = self.carrier if self.carrier is not None else [None]
        if self.v_over_vc is not None:
            e1 = self.ground_state_energy()
            v_axis = [("frac", f) for f in self.v_over_vc]
        else:
            v_axis = [("abs", v) for v in (self.v if self.v is not None else [0.0])]
        points = []
        for i, (delta, phi, (vkind, vval), carrier) in enumerate(
            itertools.product(self.delta, self.phi, v_axis, carriers)
        ):
            if vkind == "frac":
                vc = critical_velocity(e1, phi)
                v = vval * vc
                frac = vval
            else:
                v = vval
                frac = None
            points.append(
                SweepPoint(index=i, phi=phi, v=v, delta=delta, carrier=carrier, v_over_vc=frac)
            )
        return points

    # ------------------------------------------------------------------ output

    def to_dict(self) -> dict:
        out: dict = {"experiment": self.experiment, "seed": self.seed}
        if self.output_dir is not None:
            out["output_dir"] = self.output_dir
        if self.grid is not None:
            out["grid"] = {
                "x_min": self.grid.x_min,
                "x_max": self.grid.x_max,
                "n_points": self.grid.n_points,
            }
            out["boundary"] = self.boundary
        pot: dict = {"kind": self.potential_kind, "nu": self.nu, "delta": list(self.delta)}
        if self.v0 is not None:
            pot["v0"] = self.v0
        if self.potential_file is not None:
            pot["file"] = self.potential_file
        out["potential"] = pot
        params: dict = {"phi": list(self.phi)}
        if self.v_over_vc is not None:
            params["v_over_vc"] = list(self.v_over_vc)
        else:
            params["v"] = list(self.v if self.v is not None else [0.0])
        out["params"] = params
        if self.propagator is not None:
            pp: dict = {
                "dt": self.propagator.dt,
                "t_final": self.propagator.t_final,
                "frame": self.propagator.frame,
                "snapshot_every": self.propagator.snapshot_every,
            }
            if self.propagator.absorber is not None:
                pp["absorber"] = {
                    "width": self.propagator.absorber.width,
                    "strength": self.propagator.absorber.strength,
                }
            out["propagator"] = pp
        if self.packet_center is not None:
            out["packet"] = {
                "center": self.packet_center,
                "width": self.packet_width,
                "carrier": list(self.carrier or [0.0]),
            }
            out["separatrix"] = self.separatrix
        if self.density_stride != 1:
            out["density_stride"] = self.density_stride
        if self.rt_sweep is not None:
            out["rt_sweep"] = dict(self.rt_sweep)
        if self.experiment == "spectrum":
            out["spectrum"] = {"k_max": self.k_max, "k_points": self.k_points}
        if self.experiment == "amplify":
            am: dict = {"evolve": self.amplify_evolve}
            if self.g_t_times:
                am["g_t_times"] = list(self.g_t_times)
            if self.g_t_grid is not None:
                am["g_t_grid"] = {
                    "x_min": self.g_t_grid.x_min,
                    "x_max": self.g_t_grid.x_max,
                    "n_points": self.g_t_grid.n_points,
                }
            out["amplify"] = am
        if self.cavity is not None:
            c = self.cavity
            out["cavity"] = {
                "D": c.D,
                "Dg": c.Dg,
                "delta1": c.delta1,
                "delta2": c.delta2,
                "g": c.g,
                "l": c.l,
                "Tm": c.Tm,
                "TR": c.TR,
            }
        if self.detuning is not None:
            out["detuning"] = dict(self.detuning)
        if self.e1 is not None:
            out["e1"] = self.e1
        return out

    def to_yaml(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=True)
