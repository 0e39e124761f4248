"""Battery model parameters, offline precomputation and integer scaling.

All model math runs in minutes, so charge is in mA·min and the diffusion
coefficient ``beta`` is in min^-1/2. Seconds and milliseconds are only
accepted at the edges (configuration files, duty windows) and converted here.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, ROUND_HALF_UP, Decimal
from pathlib import Path

MS_PER_MIN = 60_000
MIN_PER_HOUR = 60

#: Fixed-point scale of each offline constant (``beta`` uses tenths).
SCALES = {
    "pi2": 1000,
    "sqrt_pi": 1000,
    "beta": 10,
    "c0": 1000,
    "lam": 1000,
    "a": 1000,
    "sqrt_a": 1000,
    "inv_2sqrt_a": 1000,
}


class ConfigError(ValueError):
    """Raised for invalid or incomplete configuration."""


@dataclass(frozen=True)
class BatteryParams:
    """Physical and model constants.

    Attributes:
        alpha: total capacity, mA·min.
        beta: diffusion coefficient, min^-1/2.
        delta: estimator window length, min.
        m_max: truncation depth of the diffusion series.
    """

    alpha: float
    beta: float = 1.0
    delta: float = 2.0 / 60.0
    m_max: int = 10

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be > 0, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if int(self.m_max) != self.m_max or self.m_max < 1:
            raise ValueError(f"m_max must be an integer >= 1, got {self.m_max}")

    @classmethod
    def from_mah(cls, capacity_mah: float, beta: float = 1.0, delta_seconds: float = 2.0,
                 m_max: int = 10) -> "BatteryParams":
        """Build from a capacity in mAh and a window length in seconds."""
        return cls(alpha=capacity_mah * MIN_PER_HOUR, beta=beta,
                   delta=delta_seconds / 60.0, m_max=m_max)

    @property
    def delta_ms(self) -> int:
        return int(round(self.delta * MS_PER_MIN))


@dataclass(frozen=True)
class ScaledConstants:
    """Integer twins of the offline constants, see :data:`SCALES`."""

    pi2: int
    sqrt_pi: int
    beta: int
    c0: int
    lam: int
    a: int
    sqrt_a: int
    inv_2sqrt_a: int

    def as_tuple(self) -> tuple[int, ...]:
        return (self.pi2, self.sqrt_pi, self.beta, self.c0, self.lam,
                self.a, self.sqrt_a, self.inv_2sqrt_a)


@dataclass(frozen=True)
class DerivedParams:
    """Offline constants derived from :class:`BatteryParams`.

    ``c0`` is the truncated diffusion series at one full window, ``lam`` the
    per-window decay factor and ``a`` the idle time around which the square
    root is linearised (all times in minutes).
    """

    c0: float
    lam: float
    a: float
    sqrt_a: float
    inv_2sqrt_a: float
    pi2: float
    sqrt_pi: float
    beta: float
    scaled: ScaledConstants = field(repr=False)

    def reals(self) -> dict[str, float]:
        return {"pi2": self.pi2, "sqrt_pi": self.sqrt_pi, "beta": self.beta,
                "c0": self.c0, "lam": self.lam, "a": self.a,
                "sqrt_a": self.sqrt_a, "inv_2sqrt_a": self.inv_2sqrt_a}


@dataclass(frozen=True)
class CurrentProfile:
    """Per-state current draw of a mote family, in mA."""

    name: str
    c_cpu: float
    c_lpm: float
    c_tx: float
    c_rx: float

    def __post_init__(self):
        for label in ("c_cpu", "c_lpm", "c_tx", "c_rx"):
            if getattr(self, label) < 0:
                raise ValueError(f"{label} must be >= 0")
        if not self.c_lpm < self.c_cpu:
            raise ValueError("low-power mode must draw less than the active CPU")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c_cpu, self.c_lpm, self.c_tx, self.c_rx)

    def milli(self) -> tuple[int, int, int, int]:
        """Currents in units of 10^-3 mA, rounded half away from zero."""
        return tuple(round_half_away(c, 1000) for c in self.as_tuple())


PROFILES = {
    "sky": CurrentProfile("sky", 1.8, 0.0545, 17.4, 18.8),
    "wsn430": CurrentProfile("wsn430", 2.0, 0.02, 16.1, 15.2),
}


def round_half_away(value: float, scale: int = 1) -> int:
    """``value * scale`` rounded to the nearest integer, ties away from zero.

    The decimal representation of ``value`` is used so that datasheet values such
    as 0.0545 scale exactly.
    """
    return int((Decimal(repr(value)) * scale).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def truncate_scaled(value: float, scale: int) -> int:
    """``value * scale`` truncated toward zero.

    The product is first rounded to 9 decimals so that binary noise such as
    0.03 * 1000 = 29.999999999999996 does not cost a whole unit.
    """
    product = Decimal(repr(value)) * scale
    return int(round(product, 9).quantize(Decimal(1), rounding=ROUND_DOWN))


def series_c0(beta: float, delta: float, m_max: int) -> float:
    """Truncated sum of exp(-beta² m² delta) / (beta² m²) for m = 1..m_max."""
    b2 = beta * beta
    return math.fsum(math.exp(-b2 * m * m * delta) / (b2 * m * m) for m in range(1, m_max + 1))


def to_scaled(reals: dict[str, float]) -> ScaledConstants:
    """Fixed-point twins of the real constants.

    Every constant is truncated toward zero at its scale. Truncation is what
    reproduces the reference integers (pi² -> 9869, 1/(2√a) -> 2886);
    rounding would give 9870 and 2887.
    """
    return ScaledConstants(**{k: truncate_scaled(reals[k], SCALES[k]) for k in SCALES})


def precompute(params: BatteryParams, idle_fraction: float = 0.9) -> DerivedParams:
    """Offline constants for ``params``.

    >>> d = precompute(BatteryParams.from_mah(880))
    >>> d.scaled.as_tuple()
    (9869, 1772, 10, 1337, 967, 30, 173, 2886)
    """
    if not 0 < idle_fraction <= 1:
        raise ValueError(f"idle_fraction must be in (0, 1], got {idle_fraction}")
    beta, delta = params.beta, params.delta
    a = idle_fraction * delta
    sqrt_a = math.sqrt(a)
    reals = {
        "pi2": math.pi ** 2,
        "sqrt_pi": math.sqrt(math.pi),
        "beta": beta,
        "c0": series_c0(beta, delta, params.m_max),
        "lam": math.exp(-beta * beta * delta),
        "a": a,
        "sqrt_a": sqrt_a,
        "inv_2sqrt_a": 1.0 / (2.0 * sqrt_a),
    }
    return DerivedParams(scaled=to_scaled(reals), **reals)


@dataclass(frozen=True)
class Config:
    """Parsed configuration file."""

    params: BatteryParams
    idle_fraction: float = 0.9
    profiles: dict[str, CurrentProfile] = field(default_factory=lambda: dict(PROFILES))
    text: str = ""

    def digest(self) -> str:
        canonical = (f"alpha={self.params.alpha!r};beta={self.params.beta!r};"
                     f"delta={self.params.delta!r};m_max={self.params.m_max};"
                     f"idle={self.idle_fraction!r};"
                     + ";".join(f"{p.name}={p.as_tuple()!r}" for p in
                                sorted(self.profiles.values(), key=lambda p: p.name)))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]


DEFAULT_CONFIG = """\
[battery]
beta = 1
delta_seconds = 2
alpha_mAh = 880
m_max = 10
idle_fraction = 0.9
"""


def _number(section, key, cast=float):
    raw = section.get(key.lower())
    if raw is None:
        raise ConfigError(f"missing key '{key}' in [{section.name}]")
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError(f"key '{key}' in [{section.name}] is not a number: {raw!r}") from None


def parse_config(text: str) -> Config:
    """Parse the sectioned ``key = value`` configuration format.

    ``[battery]`` needs ``beta``, ``delta_seconds`` and ``alpha_mAh``;
    ``m_max`` and ``idle_fraction`` are optional. Each ``[profile.<name>]``
    section needs ``cpu_mA``, ``lpm_mA``, ``tx_mA`` and ``rx_mA`` and adds to
    (or overrides) the built-in profiles.
    """
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    if not cp.has_section("battery"):
        raise ConfigError("missing section [battery]")
    sec = cp["battery"]
    beta = _number(sec, "beta")
    delta_s = _number(sec, "delta_seconds")
    alpha_mah = _number(sec, "alpha_mAh")
    m_max = _number(sec, "m_max", int) if "m_max" in sec else 10
    idle = _number(sec, "idle_fraction") if "idle_fraction" in sec else 0.9
    if delta_s <= 0:
        raise ConfigError(f"delta_seconds must be > 0, got {delta_s}")
    try:
        params = BatteryParams.from_mah(alpha_mah, beta=beta, delta_seconds=delta_s, m_max=m_max)
        if not 0 < idle <= 1:
            raise ValueError(f"idle_fraction must be in (0, 1], got {idle}")
        profiles = dict(PROFILES)
        for name in cp.sections():
            if name.startswith("profile."):
                s = cp[name]
                label = name[len("profile."):]
                profiles[label] = CurrentProfile(
                    label, _number(s, "cpu_mA"), _number(s, "lpm_mA"),
                    _number(s, "tx_mA"), _number(s, "rx_mA"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return Config(params=params, idle_fraction=idle, profiles=profiles, text=text)


def load_config(path: str | Path | None = None) -> Config:
    """Read a configuration file; ``None`` gives the 880 mAh, 2 s default."""
    if path is None:
        return parse_config(DEFAULT_CONFIG)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
