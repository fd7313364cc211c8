"""Open-system time evolution of chain systems.

Three equivalent-by-construction routes, all integrated with an
adaptive embedded Runge-Kutta scheme (DOP853) and dense output:

* propagate_state: non-Hermitian Schrodinger equation
  dC/dt = -i (H(t) - i/2 diag(loss)) C.
* propagate_density: bare-basis master equation
  drho/dt = -i [H, rho] - 1/2 {diag(loss), rho}.
* propagate_adiabatic5: the same master equation rotated into the
  instantaneous eigenbasis of the 5-level chain, including the
  nonadiabatic [W^T dW/dt, rho] term.

Loss is population departure from the simulated manifold: a pure
anti-commutator damping with no refeeding, which makes the density
evolution factorize as rho(t) = K(t) rho0 K(t)^dagger with K the
non-unitary state propagator.  For pure initial states the first two
routes are therefore the same model, and their numerical agreement is
the package's primary integrator cross-validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .chain import ChainSystem, SimulationGrid, validate_chain
from .hamiltonian import AdiabaticFrame, adiabatic_frame

METHOD = "DOP853"

# Max Hermiticity drift of the integrated density matrix before the run
# is declared an integrator fault.
HERMITICITY_TOL = 1e-8


class IntegrationError(RuntimeError):
    """The adaptive integrator failed or produced an invalid state."""


@dataclass
class Trajectory:
    """Time-resolved populations of one propagation.

    populations[k, i] is the population of level (or adiabatic state) i
    at times[k]; trace is the total remaining population.  amplitudes
    (pure-state runs) and coherences (density runs, on request) give the
    full state.  For adiabatic-basis runs, bare_populations holds the
    back-rotated bare-level populations and dark_index the column of
    the dark state.
    """

    times: np.ndarray
    populations: np.ndarray
    trace: np.ndarray
    basis: str = "bare"
    amplitudes: np.ndarray | None = None
    coherences: np.ndarray | None = None
    bare_populations: np.ndarray | None = None
    dark_index: int | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def n_levels(self) -> int:
        return self.populations.shape[1]

    def final_populations(self) -> np.ndarray:
        return self.populations[-1]


def _integrate(rhs, y0, grid: SimulationGrid, stats: dict):
    times = grid.times()
    sol = solve_ivp(
        rhs,
        (grid.t_start, grid.t_end),
        y0,
        method=METHOD,
        t_eval=times,
        rtol=grid.rel_tol,
        atol=grid.abs_tol,
        dense_output=False,
    )
    if not sol.success:
        raise IntegrationError(f"integration failed: {sol.message}")
    stats.update(
        method=METHOD,
        rel_tol=grid.rel_tol,
        abs_tol=grid.abs_tol,
        n_rhs_evals=int(sol.nfev),
        # heuristic global-error scale of an embedded pair run at rel_tol
        error_estimate=50.0 * grid.rel_tol + 10.0 * grid.abs_tol,
    )
    return times, sol.y


def _check_populations(populations: np.ndarray, what: str) -> None:
    low = float(populations.min())
    high = float(populations.max())
    if low < -1e-6 or high > 1.0 + 1e-6:
        raise IntegrationError(
            f"{what} populations left [0, 1] by more than 1e-6 "
            f"(min {low:.3e}, max {high:.3e}); tighten tolerances"
        )


def basis_state(n: int, index: int) -> np.ndarray:
    """Unit amplitude vector |index> of an n-level chain."""
    psi = np.zeros(n, dtype=complex)
    psi[index] = 1.0
    return psi


def propagate_state(
    system: ChainSystem,
    grid: SimulationGrid,
    psi0: np.ndarray | None = None,
) -> Trajectory:
    """Integrate the non-Hermitian Schrodinger equation.

    psi0 defaults to the system's initial level.  The trajectory's trace
    is the squared norm, which matches the density-matrix trace of the
    factorized loss model.
    """
    validate_chain(system)
    grid.validate()
    n = system.n_levels
    if psi0 is None:
        psi0 = basis_state(n, system.initial_level)
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (n,):
        raise ValueError(f"psi0 must have shape ({n},)")
    if np.linalg.norm(psi0) > 1.0 + 1e-9:
        raise ValueError("initial state norm must be <= 1")

    diag_eff = system.detunings() - 0.5j * system.loss_rates()
    couplings = system.couplings

    def rhs(t, c):
        om = np.array([cp.drive.value(t) for cp in couplings])
        out = diag_eff * c
        out[:-1] -= om * c[1:]
        out[1:] -= om * c[:-1]
        return -1j * out

    stats: dict = {}
    times, y = _integrate(rhs, psi0, grid, stats)
    amps = np.ascontiguousarray(y.T)
    populations = np.abs(amps) ** 2
    _check_populations(populations, "pure-state")
    return Trajectory(
        times=times,
        populations=populations,
        trace=populations.sum(axis=1),
        amplitudes=amps,
        metadata=stats,
    )


def propagate_density(
    system: ChainSystem,
    grid: SimulationGrid,
    rho0: np.ndarray | None = None,
    store_coherences: bool = False,
) -> Trajectory:
    """Integrate the bare-basis master equation with anti-commutator loss.

    rho0 defaults to the pure projector on the system's initial level.
    The result is re-symmetrized at every output point; a Hermiticity
    drift beyond 1e-8 or an eigenvalue below -1e-6 raises
    IntegrationError as an integrator fault.
    """
    validate_chain(system)
    grid.validate()
    n = system.n_levels
    if rho0 is None:
        rho0 = np.outer(
            basis_state(n, system.initial_level),
            basis_state(n, system.initial_level).conj(),
        )
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (n, n):
        raise ValueError(f"rho0 must have shape ({n}, {n})")
    if np.linalg.norm(rho0 - rho0.conj().T) > 1e-10:
        raise ValueError("rho0 must be Hermitian")
    tr = float(np.trace(rho0).real)
    if not -1e-12 <= tr <= 1.0 + 1e-9:
        raise ValueError("rho0 trace must lie in [0, 1]")
    if float(np.linalg.eigvalsh(rho0).min()) < -1e-10:
        raise ValueError("rho0 must be positive semidefinite")

    detunings = system.detunings()
    losses = system.loss_rates()
    couplings = system.couplings
    heff = np.zeros((n, n), dtype=complex)
    heff[np.arange(n), np.arange(n)] = detunings - 0.5j * losses
    idx = np.arange(n - 1)

    def rhs(t, y):
        om = np.array([cp.drive.value(t) for cp in couplings])
        heff[idx, idx + 1] = -om
        heff[idx + 1, idx] = -om
        rho = y.reshape(n, n)
        # drho/dt = -i (H_eff rho - rho H_eff^dagger); H_eff is symmetric,
        # so its adjoint is its elementwise conjugate
        return (-1j * (heff @ rho - rho @ heff.conj())).ravel()

    stats: dict = {}
    times, y = _integrate(rhs, rho0.ravel(), grid, stats)
    rhos = np.ascontiguousarray(y.T).reshape(-1, n, n)
    drift = float(np.max(np.abs(rhos - rhos.conj().transpose(0, 2, 1))))
    if drift > HERMITICITY_TOL:
        raise IntegrationError(
            f"Hermiticity drift {drift:.3e} exceeds {HERMITICITY_TOL:.0e}; "
            "integrator fault (tighten tolerances)"
        )
    rhos = (rhos + rhos.conj().transpose(0, 2, 1)) / 2.0
    min_eig = float(min(np.linalg.eigvalsh(r).min() for r in rhos))
    if min_eig < -1e-6:
        raise IntegrationError(
            f"density matrix developed eigenvalue {min_eig:.3e}; integrator fault"
        )
    populations = np.real(np.diagonal(rhos, axis1=1, axis2=2)).copy()
    _check_populations(populations, "density")
    stats.update(hermiticity_drift=drift, min_eigenvalue=min_eig)
    return Trajectory(
        times=times,
        populations=populations,
        trace=populations.sum(axis=1),
        coherences=rhos if store_coherences else None,
        metadata=stats,
    )


def _constant_interior_scale(system: ChainSystem) -> float:
    interior = system.couplings[1:-1]
    peaks = {cp.drive.peak_rabi for cp in interior}
    shapes = {cp.drive.shape for cp in interior}
    if shapes != {"constant"} or len(peaks) != 1:
        raise ValueError(
            "adiabatic-basis propagation needs constant equal interior couplings"
        )
    (omega0,) = peaks
    if omega0 <= 0:
        raise ValueError("interior coupling must be nonzero")
    return omega0


@dataclass
class _FrameTable:
    """Dense precomputed eigenframe data for interpolation in the RHS."""

    times: np.ndarray
    eigenvalues: np.ndarray  # (m, n)
    couplings: np.ndarray  # (m, n, n) antisymmetric W^T dW/dt
    loss_rotated: np.ndarray  # (m, n, n) W^T diag(loss) W
    frames: list[AdiabaticFrame]

    def interpolate(self, t: float):
        ts = self.times
        if t <= ts[0]:
            return self.eigenvalues[0], self.couplings[0], self.loss_rotated[0]
        if t >= ts[-1]:
            return self.eigenvalues[-1], self.couplings[-1], self.loss_rotated[-1]
        j = int(np.searchsorted(ts, t)) - 1
        w = (t - ts[j]) / (ts[j + 1] - ts[j])
        return (
            (1.0 - w) * self.eigenvalues[j] + w * self.eigenvalues[j + 1],
            (1.0 - w) * self.couplings[j] + w * self.couplings[j + 1],
            (1.0 - w) * self.loss_rotated[j] + w * self.loss_rotated[j + 1],
        )


def _build_frame_table(
    system: ChainSystem, grid: SimulationGrid, n_points: int
) -> _FrameTable:
    times = np.linspace(grid.t_start, grid.t_end, n_points)
    dt = times[1] - times[0]
    h = dt / 8.0
    losses = system.loss_rates()
    frames: list[AdiabaticFrame] = []
    evs, ks, das = [], [], []
    prev = None
    for t in times:
        frame = adiabatic_frame(system, float(t), prev=prev)
        minus = adiabatic_frame(system, float(t) - h, prev=frame)
        plus = adiabatic_frame(system, float(t) + h, prev=frame)
        raw = frame.transform.T @ (plus.transform - minus.transform) / (2.0 * h)
        k = (raw - raw.T) / 2.0
        frames.append(frame)
        evs.append(frame.eigenvalues)
        ks.append(k)
        das.append(frame.transform.T @ (losses[:, None] * frame.transform))
        prev = frame
    return _FrameTable(
        times=times,
        eigenvalues=np.array(evs),
        couplings=np.array(ks),
        loss_rotated=np.array(das),
        frames=frames,
    )


def propagate_adiabatic5(
    system: ChainSystem,
    grid: SimulationGrid,
    rho0_adiabatic: np.ndarray | None = None,
    frame_points: int | None = None,
) -> Trajectory:
    """Integrate the master equation in the instantaneous eigenbasis.

    Restricted to 5-level chains whose two interior couplings are one
    constant Omega_0, the regime where the eigenframe is analytically
    controlled.  The equation is

        drho/dt = -i [diag(eps), rho] - [K, rho] - 1/2 {W^T D W, rho}

    with K = W^T dW/dt the nonadiabatic coupling and D the bare loss
    diagonal.  Eigenframe quantities are precomputed on a dense gauge-
    continuous grid (frame_points, auto-sized from the envelope widths)
    and interpolated inside the right-hand side.  rho0_adiabatic
    defaults to a pure dark state, the column frames[0].dark_index.

    The returned trajectory is in the adiabatic basis; bare_populations
    carries the back-rotation W rho^a W^T at the output points.
    """
    validate_chain(system)
    grid.validate()
    n = system.n_levels
    if n != 5:
        raise ValueError("adiabatic-basis propagation is implemented for 5 levels")
    _constant_interior_scale(system)

    if frame_points is None:
        widths = [
            cp.drive.width for cp in system.couplings if cp.drive.shape != "constant"
        ]
        span = grid.t_end - grid.t_start
        frame_points = int(min(max(1400.0 * span / min(widths), 4097), 65537))
    table = _build_frame_table(system, grid, frame_points)
    dark = table.frames[0].dark_index
    if rho0_adiabatic is None:
        rho0 = np.zeros((n, n), dtype=complex)
        rho0[dark, dark] = 1.0
    else:
        rho0 = np.asarray(rho0_adiabatic, dtype=complex)
        if rho0.shape != (n, n):
            raise ValueError(f"rho0_adiabatic must have shape ({n}, {n})")

    def rhs(t, y):
        eps, k, da = table.interpolate(t)
        rho = y.reshape(n, n)
        out = -1j * (eps[:, None] - eps[None, :]) * rho
        out -= k @ rho - rho @ k
        out -= 0.5 * (da @ rho + rho @ da)
        return out.ravel()

    stats: dict = {}
    times, y = _integrate(rhs, rho0.ravel(), grid, stats)
    rhos = np.ascontiguousarray(y.T).reshape(-1, n, n)
    rhos = (rhos + rhos.conj().transpose(0, 2, 1)) / 2.0
    populations = np.real(np.diagonal(rhos, axis1=1, axis2=2)).copy()
    _check_populations(populations, "adiabatic-basis")

    # back-rotate at output points with frames gauge-matched to the table
    bare = np.empty_like(populations)
    for i, t in enumerate(times):
        j = int(np.argmin(np.abs(table.times - t)))
        frame = adiabatic_frame(system, float(t), prev=table.frames[j])
        w = frame.transform
        bare[i] = np.real(np.diagonal(w @ rhos[i] @ w.T))
    stats.update(frame_points=frame_points)
    return Trajectory(
        times=times,
        populations=populations,
        trace=populations.sum(axis=1),
        basis="adiabatic",
        bare_populations=bare,
        dark_index=dark,
        metadata=stats,
    )
