"""Flat key = value scenario configuration with named presets.

Every scenario is a finite set of scalars, so the format is deliberately
flat: one `key = value` per line, `#` starts a comment, unknown keys are
rejected by name.  A `preset = <name>` line expands a code-defined full
configuration first; any other keys in the file then override it, wherever
the preset line appears.  Serialization is lossless (shortest round-trip
decimals, sorted keys).
"""

from __future__ import annotations

import hashlib
from dataclasses import asdict, dataclass, fields

from .free_boundary import DetectorThresholds, cosine_initial_profiles
from .kernels import Kernel, KernelSpec, build_kernel
from .model import GrowthSpec, ModelParams, PulseSpec

__all__ = ["ScenarioConfig", "ConfigError", "parse_config", "PRESETS"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    # model rates
    d1: float = 0.0
    d2: float = 0.0
    a11: float = 0.0
    a12: float = 0.0
    a22: float = 0.0
    mu1: float = 0.0
    mu2: float = 0.0
    tau: float = 1.0
    h0: float = 1.0
    # growth curve G(u) = growth_c * u / (growth_b + u)
    growth_c: float = 0.0
    growth_b: float = 0.0
    # pulse map
    pulse_form: str = "identity"
    pulse_c1: float = 1.0
    pulse_c2: float = 0.0
    pulse_c3: float = 0.0
    # kernel
    kernel_radius: float = 3.0
    # initial cosine profile amplitudes
    u0_amplitude: float = 3.0
    v0_amplitude: float = 1.0
    # numeric knobs
    dx: float = 0.05
    dt: float = 0.0  # 0 = derive from the stability rule
    n_nodes: int = 400
    eigen_l: float = 0.0  # 0 = use h0
    tol_periodic: float = 1e-8
    horizon: int = 48
    T: float = 24.0
    snapshot_times: str = ""
    output_every: int = 20  # front records per period
    # sweeps
    sweep_axis: str = "l"
    sweep_values: str = "2,4,8,16"
    # critical-capacity search
    rho_ratio: float = 10.0
    bracket_lo: float = 0.5
    bracket_hi: float = 8.0
    # outcome detector thresholds
    decay_slope_tol: float = 1e-3
    front_increment_tol: float = 1e-6
    spread_front_floor: float = 1e-4
    spread_density_floor: float = 1e-4
    # provenance
    preset: str = ""

    # -- construction helpers ----------------------------------------------

    def model_params(self) -> ModelParams:
        return ModelParams(
            d1=self.d1,
            d2=self.d2,
            a11=self.a11,
            a12=self.a12,
            a22=self.a22,
            mu1=self.mu1,
            mu2=self.mu2,
            tau=self.tau,
            h0=self.h0,
        )

    def growth(self) -> GrowthSpec:
        return GrowthSpec.saturating(self.growth_c, self.growth_b)

    def pulse(self) -> PulseSpec:
        if self.pulse_form == "identity":
            return PulseSpec.identity()
        if self.pulse_form == "linear":
            return PulseSpec.linear(self.pulse_c1)
        if self.pulse_form == "beverton-holt":
            return PulseSpec.beverton_holt(self.pulse_c2, self.pulse_c3)
        raise ConfigError(f"unknown pulse_form {self.pulse_form!r}")

    def kernel(self) -> Kernel:
        return build_kernel(KernelSpec(family="bump", radius=self.kernel_radius))

    def initial_profiles(self):
        return cosine_initial_profiles(
            self.h0, self.u0_amplitude, self.v0_amplitude
        )

    def thresholds(self) -> DetectorThresholds:
        return DetectorThresholds(
            decay_slope=self.decay_slope_tol,
            front_increment_tol=self.front_increment_tol,
            spread_front_floor=self.spread_front_floor,
            spread_density_floor=self.spread_density_floor,
        )

    def snapshot_list(self) -> tuple[float, ...]:
        if not self.snapshot_times.strip():
            return ()
        return tuple(float(s) for s in self.snapshot_times.split(",") if s.strip())

    def sweep_list(self) -> list[float]:
        return [float(s) for s in self.sweep_values.split(",") if s.strip()]

    def effective_eigen_l(self) -> float:
        return self.eigen_l if self.eigen_l > 0 else self.h0

    # -- serialization -------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"{name} = {value!r}" for name, value in sorted(asdict(self).items())]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


_EX51 = dict(
    d1=0.10,
    d2=0.10,
    tau=1.0,
    a11=0.35,
    a12=0.11,
    a22=0.10,
    mu1=20.0,
    mu2=200.0,
    h0=2.0,
    growth_c=0.5,
    growth_b=10.0,
    kernel_radius=3.0,
    u0_amplitude=3.0,
    v0_amplitude=1.0,
)

PRESETS: dict[str, dict] = {
    "example-5.1-identity": dict(_EX51, pulse_form="identity"),
    "example-5.1-pulsed": dict(
        _EX51, pulse_form="beverton-holt", pulse_c2=0.1, pulse_c3=10.0
    ),
    # Same constants with the steep growth curve G(u) = 0.5 u/(1+u); the
    # dispersal-free limit eigenvalue turns negative, so outcomes hinge on
    # the domain size and the expansion capacities.
    "spreading-preset": dict(_EX51, growth_b=1.0, pulse_form="identity"),
}

_FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}
_MANDATORY = ("d1", "d2", "a11", "a12", "a22", "mu1", "mu2", "growth_c", "growth_b")


def _coerce(key: str, raw: str):
    ftype = _FIELD_TYPES[key]
    raw = raw.strip()
    if raw.startswith(("'", '"')) and raw.endswith(("'", '"')) and len(raw) >= 2:
        raw = raw[1:-1]
    if ftype in ("float", float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"type mismatch for key {key!r}: {raw!r} is not a number")
    if ftype in ("int", int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(
                f"type mismatch for key {key!r}: {raw!r} is not an integer"
            )
    return raw


def parse_config(text: str) -> ScenarioConfig:
    """Parse flat `key = value` lines into a typed scenario.

    A preset expands first; explicit keys override it.  Unknown keys and
    type mismatches raise ConfigError naming the key.  Mandatory rate keys
    must be present unless a preset supplies them.
    """
    assignments: dict[str, str] = {}
    preset_name = ""
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown key {key!r} (line {lineno})")
        if key == "preset":
            preset_name = raw.strip().strip("'\"")
        else:
            assignments[key] = raw

    values: dict = {}
    if preset_name:
        if preset_name not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset_name!r}; known: {sorted(PRESETS)}"
            )
        values.update(PRESETS[preset_name])
        values["preset"] = preset_name
    for key, raw in assignments.items():
        values[key] = _coerce(key, raw)

    missing = [k for k in _MANDATORY if k not in values]
    if missing:
        raise ConfigError(f"missing mandatory keys: {missing}")
    return ScenarioConfig(**values)
