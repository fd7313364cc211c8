"""Rotating-frame chain Hamiltonians, dark states and the adiabatic frame.

The Hamiltonian of a validated chain is tridiagonal in the canonical
ordering (level 0 = initial ground state): off-diagonal (i, i+1) entries
are -Omega_{i+1}(t), ground diagonals are zero (Raman resonance) and
excited diagonals carry the one-photon detunings.  hbar = 1 throughout.

Dark states are chain eigenvectors with zero eigenvalue and zero
amplitude on every excited level.  For a chain with ground amplitudes
g_1..g_{k+1} they satisfy the two-term recursions

    Omega_{2j-1} g_j + Omega_{2j} g_{j+1} = 0,   j = 1..k,

so the dark subspace is the null space of the k x (k+1) matrix coupling
excited rows to ground columns; it is computed here by SVD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import ChainSystem

# Singular values below this fraction of the largest one count as zero
# when detecting the dark subspace (double-precision conditioning of
# tridiagonal chains at typical 1e6-1e8 s^-1 Rabi scales).
KERNEL_RTOL = 1e-10


class DegenerateDriveError(ValueError):
    """All dark-state amplitudes vanish for the requested Rabi tuple."""


class GaugeContinuityError(RuntimeError):
    """Adiabatic frame lost track of eigenvector continuity in time."""


def build_hamiltonian(system: ChainSystem, t: float) -> np.ndarray:
    """N x N complex Hermitian chain Hamiltonian at time t (s^-1 units)."""
    n = system.n_levels
    h = np.zeros((n, n), dtype=complex)
    om = system.rabi_at(t)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = -om
    h[idx + 1, idx] = -om
    h[np.arange(n), np.arange(n)] = system.detunings()
    return h


@dataclass(frozen=True)
class DarkState:
    """Unit-norm zero-energy eigenvector with no excited amplitude."""

    amplitudes: np.ndarray
    support: np.ndarray

    @property
    def n_levels(self) -> int:
        return self.amplitudes.size


def _as_dark_state(vec: np.ndarray) -> DarkState:
    vec = np.asarray(vec, dtype=complex)
    vec = vec / np.linalg.norm(vec)
    # canonical sign: largest-magnitude component positive real
    pivot = int(np.argmax(np.abs(vec)))
    phase = vec[pivot] / abs(vec[pivot])
    vec = vec / phase
    return DarkState(amplitudes=vec, support=np.abs(vec) > 1e-12)


def dark_state_analytic5(o1: float, o2: float, o3: float, o4: float) -> DarkState:
    """Closed-form dark state of the 5-level chain.

    Normalized (O2*O4, 0, -O4*O1, 0, O1*O3) over (g1, e1, g2, e2, g3).
    Raises DegenerateDriveError when every component vanishes (e.g.
    O1 = O4 = 0), since no single dark direction is then selected.
    """
    num = np.array([o2 * o4, 0.0, -o4 * o1, 0.0, o1 * o3], dtype=float)
    norm = np.linalg.norm(num)
    if norm == 0.0:
        raise DegenerateDriveError(
            "degenerate drive: all dark-state amplitudes vanish for "
            f"(O1..O4) = {(o1, o2, o3, o4)}"
        )
    vec = num / norm
    return DarkState(amplitudes=vec.astype(complex), support=np.abs(vec) > 1e-12)


def dark_states_numeric(h: np.ndarray, rtol: float = KERNEL_RTOL) -> list[DarkState]:
    """All dark states of a chain Hamiltonian, via an SVD kernel search.

    For a vector with support only on ground levels, the ground rows of
    H*v vanish identically (ground diagonals are zero and neighbours are
    excited), so darkness reduces to the excited-row constraints: v is
    dark iff the k x (k+1) block B = H[odd rows, even columns] maps its
    ground part to zero.  Returns an orthonormal basis of that kernel,
    embedded back into the full chain; the list is empty only if the
    kernel is trivial (impossible for an odd chain, where B has more
    columns than rows).
    """
    h = np.asarray(h)
    n = h.shape[0]
    if n % 2 == 0:
        raise ValueError("dark-state search needs an odd chain")
    ground = np.arange(0, n, 2)
    diag = np.abs(np.diagonal(h)[ground])
    scale = np.max(np.abs(h))
    if scale > 0 and np.any(diag > 1e-12 * scale):
        raise ValueError("ground-level diagonals must be zero (Raman resonance)")
    b = np.real(h[1::2][:, ground])
    if b.size == 0:
        return []
    _, sigma, vt = np.linalg.svd(b, full_matrices=True)
    cutoff = rtol * (sigma[0] if sigma.size else 0.0)
    rank = int(np.sum(sigma > cutoff))
    states = []
    for row in vt[rank:]:
        vec = np.zeros(n, dtype=complex)
        vec[ground] = row
        states.append(_as_dark_state(vec))
    return states


@dataclass(frozen=True)
class AdiabaticFrame:
    """Instantaneous eigenframe of the chain Hamiltonian at one time.

    transform columns are the adiabatic states in the bare basis,
    ordered by ascending eigenvalue and gauge-fixed for continuity.
    theta is the pump/Stokes mixing angle (None when both the first and
    last Rabi frequencies vanish and the angle is undefined); xi is the
    effective-to-interior Rabi ratio (NaN when the chain has no interior
    constant scale, e.g. N = 3).  coupling holds the antisymmetric
    nonadiabatic matrix W^T dW/dt when one was attached.
    """

    t: float
    theta: float | None
    omega_eff: float
    xi: float
    eigenvalues: np.ndarray
    transform: np.ndarray
    dark_index: int
    coupling: np.ndarray | None = None


def mixing_angle(system: ChainSystem, t: float) -> float | None:
    """Pump/Stokes mixing angle atan(Omega_first / Omega_last), or None."""
    o_pump = float(system.couplings[0].drive.value(t))
    o_stokes = float(system.couplings[-1].drive.value(t))
    if o_pump == 0.0 and o_stokes == 0.0:
        return None
    return math.atan2(o_pump, o_stokes)


def adiabatic_frame(
    system: ChainSystem, t: float, prev: AdiabaticFrame | None = None
) -> AdiabaticFrame:
    """Diagonalize H(t) and gauge-fix the eigenvectors.

    Without a previous frame, each column's largest-magnitude component
    is made positive.  With one, column signs are matched to it by
    overlap; an overlap below 0.5 means the frame can no longer be
    followed continuously and raises GaugeContinuityError.
    """
    h = build_hamiltonian(system, t)
    if np.max(np.abs(h.imag)) > 0:
        raise ValueError("adiabatic frame expects a real chain Hamiltonian")
    evals, vecs = np.linalg.eigh(h.real)
    if prev is None:
        for j in range(vecs.shape[1]):
            pivot = int(np.argmax(np.abs(vecs[:, j])))
            if vecs[pivot, j] < 0:
                vecs[:, j] = -vecs[:, j]
    else:
        overlaps = np.einsum("ij,ij->j", prev.transform, vecs)
        if np.min(np.abs(overlaps)) < 0.5:
            raise GaugeContinuityError(
                f"adiabatic-frame breakdown at t = {t:.6e}: eigenvector overlap "
                f"{np.min(np.abs(overlaps)):.3f} < 0.5 (reduce the time step)"
            )
        vecs[:, overlaps < 0] *= -1.0
    o_pump = float(system.couplings[0].drive.value(t))
    o_stokes = float(system.couplings[-1].drive.value(t))
    omega_eff = math.hypot(o_pump, o_stokes)
    interior = system.rabi_at(t)[1:-1]
    omega0 = float(np.min(np.abs(interior))) if interior.size else 0.0
    xi = omega_eff / omega0 if omega0 > 0 else math.nan
    return AdiabaticFrame(
        t=t,
        theta=mixing_angle(system, t),
        omega_eff=omega_eff,
        xi=xi,
        eigenvalues=evals,
        transform=vecs,
        dark_index=int(np.argmin(np.abs(evals))),
    )


def frame_sequence(system: ChainSystem, times) -> list[AdiabaticFrame]:
    """Gauge-continuous adiabatic frames along a strictly increasing grid."""
    frames: list[AdiabaticFrame] = []
    prev = None
    for t in np.asarray(times, dtype=float):
        prev = adiabatic_frame(system, float(t), prev=prev)
        frames.append(prev)
    return frames


def nonadiabatic_coupling(
    minus: AdiabaticFrame,
    center: AdiabaticFrame,
    plus: AdiabaticFrame,
    asym_tol: float = 1e-6,
) -> np.ndarray:
    """Central-difference nonadiabatic coupling K = W^T dW/dt at `center`.

    The three frames must be gauge-continuous and equally spaced in
    time.  K is exactly antisymmetric for an orthogonal family, so the
    symmetric residue of the raw difference measures the step error; a
    residue beyond asym_tol (relative to max(1, |K|)) asks for a finer
    step.  The returned matrix is antisymmetrized.
    """
    h1 = center.t - minus.t
    h2 = plus.t - center.t
    if h1 <= 0 or h2 <= 0 or abs(h1 - h2) > 1e-9 * max(h1, h2):
        raise ValueError("frames must be equally spaced with increasing times")
    raw = center.transform.T @ (plus.transform - minus.transform) / (h1 + h2)
    asym = np.linalg.norm(raw + raw.T)
    if asym > asym_tol * max(1.0, np.linalg.norm(raw)):
        raise GaugeContinuityError(
            f"nonadiabatic coupling step too large at t = {center.t:.6e}: "
            f"antisymmetry residue {asym:.3e}; refine the step"
        )
    return (raw - raw.T) / 2.0
