"""Ramsey outcome probabilities for single atoms and GHZ probes under dephasing.

The closed forms are the working model for everything else in the package.
``lindblad_ramsey_oracle`` integrates the single-atom master equation
numerically and exists only to cross-check them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConvergenceError, DomainError

__all__ = [
    "Correlation",
    "ProbeConfig",
    "excited_probability",
    "ground_probability",
    "p_excited",
    "p_ground",
    "lindblad_ramsey_oracle",
    "ramsey_amplitudes",
    "check_density_matrix",
]


class Correlation(enum.Enum):
    UNCORRELATED = "uncorrelated"
    GHZ = "ghz"


@dataclass(frozen=True)
class ProbeConfig:
    """One interrogation setting of a probe.

    The collective phase read out at the end of the sequence is
    ``n_atoms * (omega0 - omega_ref) * t_interrogation + phase_offset`` and the
    fringe contrast is ``exp(-n_atoms * gamma * t_interrogation)``.

    An ensemble of N uncorrelated atoms is N independent ``ProbeConfig``
    instances with ``n_atoms=1``; ``Correlation.UNCORRELATED`` therefore only
    accepts ``n_atoms=1``.
    """

    n_atoms: int = 1
    correlation: Correlation = Correlation.UNCORRELATED
    omega0: float = 0.0
    omega_ref: float = 0.0
    t_interrogation: float = 1.0
    phase_offset: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if isinstance(self.correlation, str):
            object.__setattr__(self, "correlation", Correlation(self.correlation))
        if int(self.n_atoms) != self.n_atoms or self.n_atoms < 1:
            raise DomainError(f"n_atoms must be a positive integer, got {self.n_atoms!r}")
        object.__setattr__(self, "n_atoms", int(self.n_atoms))
        if self.correlation is Correlation.UNCORRELATED and self.n_atoms != 1:
            raise DomainError(
                "an uncorrelated probe holds one atom; use n_atoms independent configs"
            )
        if not self.t_interrogation > 0 or not math.isfinite(self.t_interrogation):
            raise DomainError(f"t_interrogation must be positive, got {self.t_interrogation!r}")
        if not self.gamma >= 0 or not math.isfinite(self.gamma):
            raise DomainError(f"gamma must be non-negative, got {self.gamma!r}")
        for name in ("omega0", "omega_ref", "phase_offset"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @property
    def detuning(self) -> float:
        return self.omega0 - self.omega_ref

    @property
    def collective_phase(self) -> float:
        return self.n_atoms * self.detuning * self.t_interrogation + self.phase_offset

    @property
    def contrast(self) -> float:
        return math.exp(-self.n_atoms * self.gamma * self.t_interrogation)

    def with_omega0(self, omega0: float) -> ProbeConfig:
        return replace(self, omega0=omega0)


def _split(n, detuning, t, phase, gamma):
    arg = n * np.asarray(detuning, dtype=float) * t + phase
    decay = n * gamma * t
    contrast = np.exp(-decay)
    # (1 - contrast)/2 without cancellation for small n*gamma*t
    floor = -0.5 * np.expm1(-decay)
    return arg, contrast, floor


def excited_probability(n, detuning, t, phase=0.0, gamma=0.0):
    """Vectorised P(e) = (1 + cos(n*detuning*t + phase) * exp(-n*gamma*t)) / 2.

    Evaluated as ``floor + contrast*cos^2(arg/2)`` so that both terms are
    non-negative and values near 0 keep full relative precision.
    """
    arg, contrast, floor = _split(n, detuning, t, phase, gamma)
    return floor + contrast * np.cos(0.5 * arg) ** 2


def ground_probability(n, detuning, t, phase=0.0, gamma=0.0):
    """Vectorised P(g), the complement of :func:`excited_probability`."""
    arg, contrast, floor = _split(n, detuning, t, phase, gamma)
    return floor + contrast * np.sin(0.5 * arg) ** 2


def p_excited(cfg: ProbeConfig) -> float:
    """Probability that the probe is read out in the excited state.

    For a GHZ probe of N atoms this is the probability of finding all N atoms
    excited after disentangling; for N=1 it is the single-atom Ramsey fringe.
    """
    p = float(
        excited_probability(
            cfg.n_atoms, cfg.detuning, cfg.t_interrogation, cfg.phase_offset, cfg.gamma
        )
    )
    return min(1.0, max(0.0, p))


def p_ground(cfg: ProbeConfig) -> float:
    return 1.0 - p_excited(cfg)


# --- density-matrix cross-check ------------------------------------------------

# basis order (|g>, |e>); pi/2 pulse sends |g> -> (|g> + |e>)/sqrt(2)
_HALF_PI_PULSE = np.array([[1.0, -1.0], [1.0, 1.0]], dtype=complex) / math.sqrt(2.0)
_SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
_PROJ_E = np.diag([0.0, 1.0]).astype(complex)


def ramsey_amplitudes(detuning: float, t: float) -> np.ndarray:
    """State vector after the ideal pulse / free evolution / pulse sequence."""
    psi = _HALF_PI_PULSE @ np.array([1.0, 0.0], dtype=complex)
    psi = np.array([psi[0], np.exp(-1j * detuning * t) * psi[1]])
    return _HALF_PI_PULSE @ psi


def _lindblad_rhs(rho, detuning, gamma):
    coherent = 1j * detuning * (rho @ _PROJ_E - _PROJ_E @ rho)
    return coherent + 0.5 * gamma * (_SIGMA_Z @ rho @ _SIGMA_Z - rho)


def _superoperator(detuning, gamma):
    # columns are the images of the row-major basis matrices
    cols = []
    for k in range(4):
        basis = np.zeros(4, dtype=complex)
        basis[k] = 1.0
        cols.append(_lindblad_rhs(basis.reshape(2, 2), detuning, gamma).ravel())
    return np.column_stack(cols)


def _rk4_propagate(rho0, detuning, gamma, t, n_steps):
    h = t / n_steps
    hl = h * _superoperator(detuning, gamma)
    # one classical RK4 step of a linear system is this degree-4 polynomial in h*L
    step = np.eye(4, dtype=complex)
    term = np.eye(4, dtype=complex)
    for order in range(1, 5):
        term = term @ hl / order
        step = step + term
    vec = rho0.ravel().copy()
    for _ in range(n_steps):
        vec = step @ vec
    return vec.reshape(2, 2)


def check_density_matrix(rho, atol: float = 1e-12) -> None:
    """Raise ``ConvergenceError`` unless ``rho`` is a valid 2x2 density matrix."""
    rho = np.asarray(rho)
    if rho.shape != (2, 2):
        raise DomainError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol, rtol=0):
        raise ConvergenceError("density matrix lost hermiticity")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ConvergenceError("density matrix trace drifted from 1")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -atol:
        raise ConvergenceError("density matrix has a negative eigenvalue")


def lindblad_ramsey_oracle(
    cfg: ProbeConfig,
    tol: float = 1e-10,
    initial_steps: int | None = None,
    max_steps: int = 2**22,
) -> float:
    """Excited-state population from a numerically integrated Ramsey sequence.

    Applies a pi/2 pulse, integrates the rotating-frame dephasing master
    equation for ``t_interrogation`` with fixed-step RK4, applies the second
    pulse and reads out P(e). The step count is doubled until two successive
    results differ by less than ``tol``.

    Raises
    ------
    DomainError
        If the probe is not a single atom or carries a phase offset.
    ConvergenceError
        If ``max_steps`` is reached before the tolerance is met.
    """
    if cfg.n_atoms != 1:
        raise DomainError("the density-matrix oracle covers single atoms only")
    if cfg.phase_offset != 0.0:
        raise DomainError("the density-matrix oracle assumes phase_offset = 0")
    detuning, gamma, t = cfg.detuning, cfg.gamma, cfg.t_interrogation

    ground = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
    rho0 = _HALF_PI_PULSE @ ground @ _HALF_PI_PULSE.conj().T

    def readout(n):
        rho = _rk4_propagate(rho0, detuning, gamma, t, n)
        return _HALF_PI_PULSE @ rho @ _HALF_PI_PULSE.conj().T

    n = initial_steps or max(8, math.ceil(4.0 * t * (abs(detuning) + gamma)))
    previous = readout(n)[1, 1].real
    while True:
        n *= 2
        if n > max_steps:
            raise ConvergenceError(
                f"RK4 did not converge to {tol:g} within {max_steps} steps"
            )
        rho = readout(n)
        current = rho[1, 1].real
        if abs(current - previous) < tol:
            check_density_matrix(rho, atol=1e-9)
            return float(current)
        previous = current
