"""Link-level building blocks: path loss, line-of-sight statistics, antenna
gain and small-scale fading.

All distances and heights are in meters, powers and gains are linear scale.
A link is described by the horizontal (ground) distance between the base
station and the user plus the two antenna heights; whether the link is
line-of-sight is a Bernoulli variable whose probability depends on the
built-up environment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, QuadratureError
from .quadrature import build_edges, integrate_family

__all__ = [
    "EnvironmentParams",
    "ChannelParams",
    "AntennaPattern",
    "LinkGeometry",
    "path_loss",
    "los_probability",
    "los_breakpoints",
    "los_step_width",
    "los_step_levels",
    "antenna_gain",
    "main_lobe_interval",
    "gain_switch_radii",
    "fading_pdf",
    "sample_fading",
]


@dataclass(frozen=True)
class EnvironmentParams:
    """Statistical description of the built-up environment.

    The three values follow the common urban-propagation convention:
    ``built_fraction`` is the ratio of land covered by buildings,
    ``buildings_per_km2`` the building density, and ``height_scale`` the
    Rayleigh scale parameter of the building-height distribution.
    """

    built_fraction: float
    buildings_per_km2: float
    height_scale: float

    def __post_init__(self) -> None:
        if not 0.0 < self.built_fraction <= 1.0:
            raise DomainError(
                f"built_fraction must lie in (0, 1], got {self.built_fraction}")
        if self.buildings_per_km2 <= 0.0:
            raise DomainError(
                f"buildings_per_km2 must be positive, got {self.buildings_per_km2}")
        if self.height_scale <= 0.0:
            raise DomainError(
                f"height_scale must be positive, got {self.height_scale}")


@dataclass(frozen=True)
class ChannelParams:
    """Propagation and fading parameters, split by link state.

    ``intercept_los``/``intercept_nlos`` are the linear path gains at a
    reference distance of 1 m, ``alpha_*`` the path-loss exponents and
    ``m_*`` the (integer) Nakagami fading orders.  ``m = 1`` is Rayleigh
    fading; large ``m`` approaches a non-fading channel.
    """

    alpha_los: float
    alpha_nlos: float
    intercept_los: float
    intercept_nlos: float
    m_los: int
    m_nlos: int

    def __post_init__(self) -> None:
        if self.alpha_los <= 0.0 or self.alpha_nlos <= 0.0:
            raise DomainError("path-loss exponents must be positive")
        if self.intercept_los <= 0.0 or self.intercept_nlos <= 0.0:
            raise DomainError("path-loss intercepts must be positive")
        for name in ("m_los", "m_nlos"):
            m = getattr(self, name)
            if not isinstance(m, int) or isinstance(m, bool) or m < 1:
                raise DomainError(f"{name} must be a positive integer, got {m!r}")

    def alpha(self, los: bool) -> float:
        return self.alpha_los if los else self.alpha_nlos

    def intercept(self, los: bool) -> float:
        return self.intercept_los if los else self.intercept_nlos

    def fading_order(self, los: bool) -> int:
        return self.m_los if los else self.m_nlos


@dataclass(frozen=True)
class AntennaPattern:
    """Two-level base-station antenna: a main lobe of ``beamwidth_deg``
    degrees centered ``downtilt_deg`` below the horizon, and a constant
    side-lobe floor everywhere else."""

    beamwidth_deg: float
    downtilt_deg: float
    gain_main: float
    gain_side: float

    def __post_init__(self) -> None:
        if not 0.0 < self.beamwidth_deg <= 360.0:
            raise DomainError(
                f"beamwidth_deg must lie in (0, 360], got {self.beamwidth_deg}")
        if not -90.0 <= self.downtilt_deg <= 90.0:
            raise DomainError(
                f"downtilt_deg must lie in [-90, 90], got {self.downtilt_deg}")
        if self.gain_main <= 0.0 or self.gain_side <= 0.0:
            raise DomainError("antenna gains must be positive")


@dataclass(frozen=True)
class LinkGeometry:
    """Relative placement of one base station and one user."""

    ground_distance: float
    bs_height: float
    ue_height: float

    def __post_init__(self) -> None:
        if self.ground_distance < 0.0:
            raise DomainError(
                f"ground_distance must be non-negative, got {self.ground_distance}")
        if self.bs_height < 0.0 or self.ue_height < 0.0:
            raise DomainError("antenna heights must be non-negative")

    @property
    def height_gap(self) -> float:
        """Base-station height minus user height (negative for users above)."""
        return self.bs_height - self.ue_height

    @property
    def distance_3d(self) -> float:
        return math.hypot(self.ground_distance, self.height_gap)


def path_loss(geom: LinkGeometry, channel: ChannelParams, los: bool) -> float:
    """Linear path gain ``A * d**-alpha`` over the 3-D link distance.

    Raises :class:`DomainError` when the 3-D distance is zero, since the
    power-law model diverges there.
    """
    d = geom.distance_3d
    if d == 0.0:
        raise DomainError("path loss undefined at zero link distance")
    return channel.intercept(los) * d ** (-channel.alpha(los))


def path_loss_curves(r, bs_height: float, ue_height: float,
                     channel: ChannelParams):
    """Vectorized ``(los, nlos)`` path-gain pair over ground distances ``r``."""
    r = np.asarray(r, dtype=float)
    d2 = r * r + (bs_height - ue_height) ** 2
    zl = channel.intercept_los * d2 ** (-0.5 * channel.alpha_los)
    zn = channel.intercept_nlos * d2 ** (-0.5 * channel.alpha_nlos)
    return zl, zn


def _num_blocking_segments(r: float, env: EnvironmentParams) -> int:
    # Count of potential blocking buildings along the ground projection.
    # The model formula floor(r*sqrt(a*b)/1000 - 1) + 1 simplifies to
    # floor(u) because floor(u) - 1 == floor(u - 1) for every real u.
    u = r * math.sqrt(env.built_fraction * env.buildings_per_km2) / 1000.0
    return max(int(math.floor(u)), 0)


def los_probability(geom: LinkGeometry, env: EnvironmentParams) -> float:
    """Probability that the link is unobstructed by buildings.

    Piecewise constant in the ground distance: each additional potential
    blocker along the path contributes one factor
    ``1 - exp(-h_n**2 / (2 c**2))`` where ``h_n`` is the link height at the
    blocker position and ``c`` the building-height scale.  Links shorter
    than the first breakpoint see no blockers and get probability 1.
    """
    k = _num_blocking_segments(geom.ground_distance, env)
    if k == 0:
        return 1.0
    n = np.arange(k)
    h = geom.bs_height + (n + 0.5) * (geom.ue_height - geom.bs_height) / k
    factors = -np.expm1(-h * h / (2.0 * env.height_scale ** 2))
    return float(np.prod(factors))


def los_step_width(env: EnvironmentParams) -> float:
    """Ground-distance width of one step of the line-of-sight probability."""
    return 1000.0 / math.sqrt(env.built_fraction * env.buildings_per_km2)


def los_breakpoints(env: EnvironmentParams, r_max: float):
    """Sorted ground distances in ``(0, r_max]`` where the line-of-sight
    probability steps down (integer multiples of the step width)."""
    if r_max <= 0.0:
        return np.empty(0)
    step = los_step_width(env)
    n = int(math.floor(r_max / step))
    return step * np.arange(1, n + 1)


_K_EXACT = 4000   # exact product entries; longer tables use asymptotics


@lru_cache(maxsize=64)
def _los_levels_exact(env: EnvironmentParams, bs_height: float,
                      ue_height: float, k_max: int) -> np.ndarray:
    levels = np.empty(k_max + 1)
    levels[0] = 1.0
    c2 = 2.0 * env.height_scale ** 2
    for k in range(1, k_max + 1):
        n = np.arange(k)
        h = bs_height + (n + 0.5) * (ue_height - bs_height) / k
        levels[k] = np.prod(-np.expm1(-h * h / c2))
    levels.setflags(write=False)
    return levels


def _log_factor_slope(h: float, c2: float) -> float:
    e = math.exp(-h * h / c2)
    return e * (2.0 * h / c2) / (1.0 - e)


@lru_cache(maxsize=16)
def _los_levels_long(env: EnvironmentParams, bs_height: float,
                     ue_height: float, k_max: int) -> np.ndarray:
    # Midpoint Euler-Maclaurin asymptotics: the log of the k-blocker
    # product approaches k/dh * int(ln f) with a 1/k correction from the
    # endpoint slopes of ln f.  Validated against the exact product at
    # the switch index; accurate to ~1e-11 in the log beyond it.
    exact = _los_levels_exact(env, bs_height, ue_height, _K_EXACT)
    h_lo, h_hi = sorted((bs_height, ue_height))
    c2 = 2.0 * env.height_scale ** 2
    if h_lo < 1e-9:
        raise QuadratureError(
            "step-table asymptotics need a positive lower height",
            {"h_lo": h_lo})

    def g(h):
        return np.atleast_2d(np.log(-np.expm1(-h * h / c2)))

    fam = integrate_family(g, build_edges(h_lo, h_hi),
                           rel_tol=1e-12, abs_tol=1e-14)
    dh = h_hi - h_lo
    slope_diff = _log_factor_slope(h_hi, c2) - _log_factor_slope(h_lo, c2)
    ks = np.arange(_K_EXACT + 1, k_max + 1, dtype=float)
    ln_tail = ks / dh * fam.value - (dh / (24.0 * ks)) * slope_diff
    ln_at_switch = (_K_EXACT / dh * fam.value
                    - (dh / (24.0 * _K_EXACT)) * slope_diff)
    mismatch = abs(ln_at_switch - math.log(max(exact[-1], 1e-300)))
    if mismatch > 1e-6 * max(1.0, abs(ln_at_switch)) + 1e-6:
        raise QuadratureError("step-table asymptotics failed validation",
                              {"k_switch": _K_EXACT,
                               "log_mismatch": float(mismatch)})
    out = np.concatenate([exact, np.exp(ln_tail)])
    out.setflags(write=False)
    return out


def los_step_levels(env: EnvironmentParams, bs_height: float,
                    ue_height: float, k_max: int) -> np.ndarray:
    """Table of line-of-sight probabilities per step index.

    ``levels[k]`` is the probability on the k-th constant piece, i.e. for
    ground distances in ``[k*step, (k+1)*step)``.  Useful for vectorized
    lookups: ``levels[min(floor(r/step), k_max)]``.  Entries are the exact
    blocker products up to a few thousand steps and continue with an
    asymptotic form of the log-product beyond; equal heights collapse to
    a closed geometric decay.
    """
    if k_max < 0:
        raise DomainError("k_max must be non-negative")
    k_max = int(k_max)
    bs_height = float(bs_height)
    ue_height = float(ue_height)
    if bs_height == ue_height:
        h = bs_height
        f = -math.expm1(-h * h / (2.0 * env.height_scale ** 2)) \
            if h > 0.0 else 0.0
        out = np.zeros(k_max + 1)
        if f > 0.0:
            out[:] = np.exp(math.log(f) * np.arange(k_max + 1, dtype=float))
        else:
            out[0] = 1.0
        out.setflags(write=False)
        return out
    if k_max <= _K_EXACT:
        return _los_levels_exact(env, bs_height, ue_height, k_max)
    return _los_levels_long(env, bs_height, ue_height, k_max)


def depression_angle_deg(ground_distance: float, bs_height: float,
                         ue_height: float) -> float:
    """Angle of the base-station-to-user ray below the horizon, degrees.

    Positive when the user is below the base station, negative above.
    """
    return math.degrees(math.atan2(bs_height - ue_height, ground_distance))


def antenna_gain(geom: LinkGeometry, pattern: AntennaPattern) -> float:
    """Gain seen by the user: main-lobe gain when the ray to the user falls
    inside the (inclusive) vertical beam, side-lobe gain otherwise."""
    psi = depression_angle_deg(geom.ground_distance, geom.bs_height,
                               geom.ue_height)
    half = 0.5 * pattern.beamwidth_deg
    if pattern.downtilt_deg - half <= psi <= pattern.downtilt_deg + half:
        return pattern.gain_main
    return pattern.gain_side


def main_lobe_interval(bs_height: float, ue_height: float,
                       pattern: AntennaPattern) -> tuple[float, float] | None:
    """Ground-distance interval over which a user at ``ue_height`` sits in
    the main lobe, or ``None`` when no positive distance does.

    The depression angle is monotone in the ground distance, so the main
    lobe always maps to a single (possibly unbounded) interval.
    """
    lo_deg = pattern.downtilt_deg - 0.5 * pattern.beamwidth_deg
    hi_deg = pattern.downtilt_deg + 0.5 * pattern.beamwidth_deg
    gap = bs_height - ue_height
    if gap == 0.0:
        return (0.0, math.inf) if lo_deg <= 0.0 <= hi_deg else None
    if gap > 0.0:
        # Angle falls from 90 degrees toward 0 as distance grows.
        if hi_deg <= 0.0 or lo_deg >= 90.0:
            return None
        r_lo = 0.0 if hi_deg >= 90.0 else gap / math.tan(math.radians(hi_deg))
        r_hi = math.inf if lo_deg <= 0.0 else gap / math.tan(math.radians(lo_deg))
        return (r_lo, r_hi)
    # User above the base station: angle rises from -90 degrees toward 0.
    if lo_deg >= 0.0 or hi_deg <= -90.0:
        return None
    r_lo = 0.0 if lo_deg <= -90.0 else -gap / math.tan(math.radians(-lo_deg))
    r_hi = math.inf if hi_deg >= 0.0 else -gap / math.tan(math.radians(-hi_deg))
    return (r_lo, r_hi)


def gain_switch_radii(bs_height: float, ue_height: float,
                      pattern: AntennaPattern) -> list[float]:
    """Positive finite ground distances where the gain changes level.

    Empty when one gain level covers all distances (either the main lobe
    spans everything or it never points at this user height).
    """
    interval = main_lobe_interval(bs_height, ue_height, pattern)
    if interval is None:
        return []
    return [r for r in interval if 0.0 < r < math.inf]


def fading_pdf(omega, m: int):
    """Density of the unit-mean Nakagami power fading (gamma with shape and
    rate both ``m``), evaluated at ``omega``."""
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise DomainError(f"fading order must be a positive integer, got {m!r}")
    x = np.asarray(omega, dtype=float)
    scalar = x.ndim == 0
    x1 = np.atleast_1d(x).astype(float)
    out = np.zeros_like(x1)
    pos = x1 > 0.0
    xp = x1[pos]
    out[pos] = np.exp(m * math.log(m) + (m - 1) * np.log(xp) - m * xp
                      - math.lgamma(m))
    if m == 1:
        out[x1 == 0.0] = 1.0
    return float(out[0]) if scalar else out


def sample_fading(m: int, rng: np.random.Generator) -> float:
    """One draw of the unit-mean power fading coefficient."""
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise DomainError(f"fading order must be a positive integer, got {m!r}")
    return float(rng.gamma(m, 1.0 / m))
