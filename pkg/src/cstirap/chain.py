"""Chain-coupled level systems, pulse envelopes and unit conversions.

A chain is an odd-length ladder of molecular levels, alternating
ground / excited, with exactly one laser-driven coupling between each
adjacent pair.  Everything downstream of this module works in angular
frequencies (s^-1) and times in seconds; conversions from laboratory
units (Debye, W/cm^2) live here and nowhere else.

Conventions
-----------
* Rabi frequency: Omega = mu * E / (2 * hbar), with E the peak electric
  field amplitude.  Factor-of-two conventions differ across the
  literature; this one is fixed package-wide.
* Intensity: I = epsilon_0 * c * E**2 / 2 (SI peak-field form).
* Two-photon (Raman) resonance: ground levels carry zero diagonal
  energy; only excited levels may have a one-photon detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import epsilon_0 as EPSILON_0
from scipy.constants import hbar as HBAR

# 1 Debye in C*m (exact: 1 D = 1e-21/c C*m)
DEBYE = 1e-21 / SPEED_OF_LIGHT

GROUND = "ground"
EXCITED = "excited"

ENVELOPE_SHAPES = ("constant", "tanh_on", "tanh_off", "gaussian")


class ChainValidationError(ValueError):
    """A level system or pulse schedule violates a structural invariant."""


@dataclass(frozen=True)
class Level:
    """One level of the chain.

    loss_rate is the total population-loss rate out of the simulated
    manifold (collisional for ground levels, spontaneous + collisional
    for excited ones); detuning is the one-photon detuning, allowed
    only on excited levels.
    """

    index: int
    kind: str
    label: str
    loss_rate: float = 0.0
    detuning: float = 0.0


@dataclass(frozen=True)
class PulseEnvelope:
    """Time-dependent Rabi frequency of one driven transition.

    Shapes (peak = peak_rabi, T = width, tau = delay):

    * ``constant``:  peak
    * ``tanh_on``:   peak * (1 + tanh((t - tau/2) / T)) / 2
    * ``tanh_off``:  peak * (1 - tanh((t + tau/2) / T)) / 2
    * ``gaussian``:  peak * exp(-((t - center) / T)**2)

    The two tanh shapes share a single delay parameter tau so that a
    (tanh_on, tanh_off) pair with common (T, tau) and tau < 0 realises
    the counterintuitive ordering: the off-going (Stokes-side) field is
    on before the on-going (pump-side) field, with switch points at
    tau/2 and -tau/2.  The gaussian shape is an extension beyond the
    tanh schedules, kept for robustness studies.
    """

    shape: str
    peak_rabi: float
    width: float = 0.0
    delay: float = 0.0
    center: float = 0.0

    def value(self, t):
        """Rabi frequency at time(s) t (scalar or ndarray), in s^-1."""
        if self.shape == "constant":
            if np.isscalar(t):
                return self.peak_rabi
            return np.full(np.shape(t), self.peak_rabi, dtype=float)
        if self.shape == "tanh_on":
            return self.peak_rabi * (1.0 + np.tanh((t - self.delay / 2.0) / self.width)) / 2.0
        if self.shape == "tanh_off":
            return self.peak_rabi * (1.0 - np.tanh((t + self.delay / 2.0) / self.width)) / 2.0
        if self.shape == "gaussian":
            return self.peak_rabi * np.exp(-(((t - self.center) / self.width) ** 2))
        raise ChainValidationError(f"unknown envelope shape {self.shape!r}")

    def switch_time(self):
        """Characteristic switch (or center) time, None for constant."""
        if self.shape == "tanh_on":
            return self.delay / 2.0
        if self.shape == "tanh_off":
            return -self.delay / 2.0
        if self.shape == "gaussian":
            return self.center
        return None


def envelope_eval(pulse: PulseEnvelope, t):
    """Evaluate a pulse envelope at time t."""
    return pulse.value(t)


@dataclass(frozen=True)
class Coupling:
    """Laser-driven coupling between levels lower_index and lower_index+1.

    The dipole moment (Debye) feeds the intensity conversions; the
    wavelength is bookkeeping metadata and never enters the dynamics.
    """

    lower_index: int
    dipole_moment: float
    drive: PulseEnvelope
    wavelength: float | None = None


@dataclass(frozen=True)
class ChainSystem:
    """An odd chain of levels with nearest-neighbour couplings.

    Level 0 is the initial (high-lying, e.g. Feshbach) state and level
    N-1 the transfer target by convention; both must be ground kind.
    Instances are immutable after validation and safe to share across
    parallel workers.
    """

    levels: tuple[Level, ...]
    couplings: tuple[Coupling, ...]
    initial_level: int = 0
    target_level: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(self.levels))
        object.__setattr__(self, "couplings", tuple(self.couplings))
        if self.target_level is None:
            object.__setattr__(self, "target_level", len(self.levels) - 1)

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    def loss_rates(self) -> np.ndarray:
        return np.array([lv.loss_rate for lv in self.levels], dtype=float)

    def detunings(self) -> np.ndarray:
        return np.array([lv.detuning for lv in self.levels], dtype=float)

    def labels(self) -> list[str]:
        return [lv.label for lv in self.levels]

    def rabi_at(self, t) -> np.ndarray:
        """Instantaneous Rabi frequencies of all couplings (length N-1)."""
        return np.array([cp.drive.value(t) for cp in self.couplings], dtype=float)

    def ground_indices(self) -> np.ndarray:
        return np.arange(0, self.n_levels, 2)

    def excited_indices(self) -> np.ndarray:
        return np.arange(1, self.n_levels, 2)

    def intermediate_ground_indices(self) -> np.ndarray:
        """Ground levels other than the initial and target ones."""
        idx = self.ground_indices()
        return idx[(idx != self.initial_level) & (idx != self.target_level)]

    def with_losses(self, rates) -> "ChainSystem":
        """Copy of the system with per-level loss rates replaced."""
        rates = np.asarray(rates, dtype=float)
        if rates.shape != (self.n_levels,):
            raise ChainValidationError("need one loss rate per level")
        new_levels = tuple(
            replace(lv, loss_rate=float(r)) for lv, r in zip(self.levels, rates)
        )
        return replace(self, levels=new_levels)


@dataclass(frozen=True)
class SimulationGrid:
    """Output time grid and integrator tolerances for one propagation."""

    t_start: float
    t_end: float
    output_points: int = 1201
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.output_points)

    def validate(self) -> "SimulationGrid":
        if not (self.t_end > self.t_start):
            raise ChainValidationError("grid needs t_end > t_start")
        if self.output_points < 2:
            raise ChainValidationError("grid needs at least 2 output points")
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ChainValidationError("integrator tolerances must be positive")
        return self


def _validate_envelope(env: PulseEnvelope, where: str) -> None:
    if env.shape not in ENVELOPE_SHAPES:
        raise ChainValidationError(f"{where}: unknown envelope shape {env.shape!r}")
    if not math.isfinite(env.peak_rabi) or env.peak_rabi < 0:
        raise ChainValidationError(f"{where}: peak Rabi frequency must be >= 0")
    if env.shape != "constant":
        if not math.isfinite(env.width) or env.width <= 0:
            raise ChainValidationError(f"{where}: width T must be > 0 for {env.shape}")
        if not math.isfinite(env.delay) or not math.isfinite(env.center):
            raise ChainValidationError(f"{where}: non-finite envelope timing")


def validate_chain(system: ChainSystem) -> ChainSystem:
    """Check every structural invariant; return the system unchanged.

    Raises ChainValidationError on the first violated invariant: even
    level count, non-alternating kinds, missing or duplicate couplings,
    negative rates, detuned ground levels, bad endpoint levels.
    """
    n = system.n_levels
    if n < 3:
        raise ChainValidationError(f"chain needs at least 3 levels, got {n}")
    if n % 2 == 0:
        raise ChainValidationError(
            f"chain needs an odd number of levels, got {n} (even chains have no "
            "guaranteed dark state)"
        )
    for i, lv in enumerate(system.levels):
        if lv.index != i:
            raise ChainValidationError(f"level {i} carries index {lv.index}")
        expected = GROUND if i % 2 == 0 else EXCITED
        if lv.kind != expected:
            raise ChainValidationError(
                f"level {i} must be {expected}, got {lv.kind!r} (kinds alternate "
                "along the chain)"
            )
        if not math.isfinite(lv.loss_rate) or lv.loss_rate < 0:
            raise ChainValidationError(f"level {i}: loss rate must be >= 0")
        if not math.isfinite(lv.detuning):
            raise ChainValidationError(f"level {i}: detuning must be finite")
        if lv.kind == GROUND and lv.detuning != 0.0:
            raise ChainValidationError(
                f"level {i}: ground levels carry zero detuning (two-photon "
                "resonance convention)"
            )
    if len(system.couplings) != n - 1:
        raise ChainValidationError(
            f"chain of {n} levels needs exactly {n - 1} couplings, got "
            f"{len(system.couplings)}"
        )
    for j, cp in enumerate(system.couplings):
        if cp.lower_index != j:
            raise ChainValidationError(
                f"coupling {j} connects {cp.lower_index}-{cp.lower_index + 1}; "
                "need exactly one coupling per adjacent pair, in order"
            )
        if not math.isfinite(cp.dipole_moment) or cp.dipole_moment <= 0:
            raise ChainValidationError(f"coupling {j}: dipole moment must be > 0")
        if cp.wavelength is not None and not cp.wavelength > 0:
            raise ChainValidationError(f"coupling {j}: wavelength must be > 0")
        _validate_envelope(cp.drive, f"coupling {j}")
    for name in ("initial_level", "target_level"):
        idx = getattr(system, name)
        if not 0 <= idx < n:
            raise ChainValidationError(f"{name} {idx} out of range")
        if system.levels[idx].kind != GROUND:
            raise ChainValidationError(f"{name} must be a ground level")
    return system


def default_grid(
    system: ChainSystem,
    cover: float = 8.0,
    output_points: int = 1201,
    rel_tol: float = 1e-8,
    abs_tol: float = 1e-10,
) -> SimulationGrid:
    """Simulation window covering every envelope switch point by `cover` widths.

    tanh envelopes saturate to about 1 part in 1e6 beyond 7 widths, so
    the default cover of 8 makes the boundary values asymptotic.  Needs
    at least one time-dependent envelope; constant-only schedules have
    no intrinsic time scale and require an explicit grid.
    """
    starts, ends = [], []
    for cp in system.couplings:
        sw = cp.drive.switch_time()
        if sw is None:
            continue
        starts.append(sw - cover * cp.drive.width)
        ends.append(sw + cover * cp.drive.width)
    if not starts:
        raise ChainValidationError(
            "all envelopes are constant; pass an explicit SimulationGrid"
        )
    return SimulationGrid(
        t_start=min(starts),
        t_end=max(ends),
        output_points=output_points,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
    )


# ---------------------------------------------------------------------------
# unit conversions
# ---------------------------------------------------------------------------

def rabi_from_intensity(dipole_debye: float, intensity_w_cm2: float) -> float:
    """Peak Rabi frequency (s^-1) for a beam of given intensity (W/cm^2).

    Uses I = epsilon_0*c*E^2/2 and Omega = mu*E/(2*hbar).
    """
    if dipole_debye <= 0:
        raise ValueError("dipole moment must be positive")
    if intensity_w_cm2 < 0:
        raise ValueError("intensity must be non-negative")
    field = math.sqrt(2.0 * intensity_w_cm2 * 1e4 / (EPSILON_0 * SPEED_OF_LIGHT))
    return dipole_debye * DEBYE * field / (2.0 * HBAR)


def intensity_from_rabi(dipole_debye: float, rabi: float) -> float:
    """Beam intensity (W/cm^2) producing a given Rabi frequency (s^-1)."""
    if dipole_debye <= 0:
        raise ValueError("dipole moment must be positive")
    if rabi < 0:
        raise ValueError("Rabi frequency must be non-negative")
    field = 2.0 * HBAR * rabi / (dipole_debye * DEBYE)
    return 0.5 * EPSILON_0 * SPEED_OF_LIGHT * field**2 / 1e4


def collision_decay_rate(k_inel_cm3_s: float, n_at_cm3: float) -> float:
    """Collisional loss rate (s^-1) from an inelastic rate coefficient
    (cm^3 s^-1) and an atomic background density (cm^-3)."""
    if k_inel_cm3_s < 0 or n_at_cm3 < 0:
        raise ValueError("rate coefficient and density must be non-negative")
    return k_inel_cm3_s * n_at_cm3


def ground_level(index: int, label: str, loss_rate: float = 0.0) -> Level:
    """Shorthand for a ground-kind level (zero detuning)."""
    return Level(index=index, kind=GROUND, label=label, loss_rate=loss_rate)


def excited_level(
    index: int, label: str, loss_rate: float = 0.0, detuning: float = 0.0
) -> Level:
    """Shorthand for an excited-kind level."""
    return Level(
        index=index, kind=EXCITED, label=label, loss_rate=loss_rate, detuning=detuning
    )
