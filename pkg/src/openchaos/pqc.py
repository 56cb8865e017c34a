"""Discrete-time parametric quantum channels and their superoperators.

One step of the channel mixes a Hamiltonian kick with an environment event,

    Lambda_{tau,eps}[rho] = (1-eps) * U rho U^dag + eps * sum_r N_r rho N_r^dag,

with U = exp(-i*tau*H/hbar), eps in [0, 1] the event probability per step and
N_1..N_K a trace-preserving Kraus set.  Evolution over j steps means applying
the same channel j times, t = j*tau.

Everything is done in the eigenbasis of H, where the unitary part of the
vectorized channel

    L_{tau,eps} = (1-eps) * exp(i*tau*(1 (x) H^T - H (x) 1)/hbar)
                  + eps * sum_r N_r (x) conj(N_r)

is diagonal with phases exp(i*tau*(E_m - E_n)/hbar) at row index n*d + m.
Kraus operators handed in along with a Hamiltonian matrix are rotated into
that basis once, at channel construction.

Two related generators are provided for limit checks: the interleaved product
W_eps U_tau, which agrees with L_{tau,eps} to first order in eps*tau/hbar, and
the Lindblad generator of the continuous weak-coupling limit eps = 2*gamma*tau,

    d rho/dt = -(i/hbar)[H, rho]
               + 2*gamma * sum_r (N_r rho N_r^dag - {N_r^dag N_r, rho}/2).

With the single generator-only operator N_1 = H this Lindblad form collapses
to the energy-dephasing master equation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np

from .rmt import HamiltonianSpectrum, KrausSet
from .states import DensityMatrix, as_density, as_energies

__all__ = [
    "Superoperator",
    "ParametricChannel",
    "apply_channel",
    "build_superoperator",
    "evolve_discrete",
    "unitary_superoperator",
    "kick_superoperator",
    "build_wu_channel",
    "lindblad_generator",
]


@dataclass(frozen=True)
class Superoperator:
    """Dense d^2 x d^2 matrix acting on row-major vectorized operators."""

    matrix: np.ndarray
    hilbert_dim: int

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", m)
        d2 = self.hilbert_dim**2
        if m.shape != (d2, d2):
            raise ValueError(
                f"matrix shape {m.shape} does not match hilbert_dim {self.hilbert_dim}"
            )

    @property
    def dim(self) -> int:
        """Liouville-space dimension d^2."""
        return self.hilbert_dim**2

    def apply(self, rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
        """Matrix action devectorize(L @ vectorize(rho))."""
        m = as_density(rho)
        return (self.matrix @ m.reshape(-1)).reshape(m.shape)

    def trace_defect(self) -> float:
        """Max norm of the identity row functional (1| L - (1|; zero iff trace preserving."""
        d = self.hilbert_dim
        one = np.eye(d, dtype=complex).reshape(-1)
        return float(np.max(np.abs(one @ self.matrix - one)))


def _phase_diagonal(energies: np.ndarray, tau: float, hbar: float) -> np.ndarray:
    """Diagonal of the vectorized conjugation by exp(-i*tau*H/hbar).

    Entry (n*d + m) is exp(i*tau*(E_m - E_n)/hbar).
    """
    w = energies[np.newaxis, :] - energies[:, np.newaxis]  # w[n, m] = E_m - E_n
    return np.exp(1j * tau * w / hbar).reshape(-1)


@dataclass(frozen=True)
class ParametricChannel:
    """One (tau, eps) channel tied to a sampled Hamiltonian and Kraus set.

    The channel works in the H eigenbasis: if the Kraus set was sampled in the
    same basis as the Hamiltonian matrix, its operators are conjugated by the
    eigenvector matrix once here.  States handed to `apply_channel` are
    understood in the eigenbasis as well, which is where the coherent Gibbs
    state lives anyway.
    """

    tau: float
    epsilon: float
    hamiltonian: HamiltonianSpectrum
    kraus: KrausSet
    hbar: float = 1.0
    kraus_ops: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be > 0, got {self.hbar}")
        if self.kraus.generator_only:
            raise ValueError("generator-only Kraus sets cannot form a discrete channel")
        if self.kraus.dim != self.hamiltonian.dim:
            raise ValueError(
                f"Kraus dimension {self.kraus.dim} != Hamiltonian dimension {self.hamiltonian.dim}"
            )
        ops = self.kraus.operators
        q = self.hamiltonian.eigenvectors
        if q is not None:
            ops = np.einsum("in,rij,jm->rnm", q.conj(), ops, q)
        object.__setattr__(self, "kraus_ops", ops)

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    @property
    def energies(self) -> np.ndarray:
        return self.hamiltonian.energies


def apply_channel(
    channel: ParametricChannel, rho: Union[DensityMatrix, np.ndarray]
) -> DensityMatrix:
    """One channel step in Kraus form, without building the d^2 x d^2 matrix.

    The unitary part is an elementwise phase twist of rho in the eigenbasis;
    the environment part is the usual sum of Kraus conjugations, O(K d^3).
    """
    m = as_density(rho)
    if m.shape[0] != channel.dim:
        raise ValueError(f"state dimension {m.shape[0]} != channel dimension {channel.dim}")
    u = np.exp(-1j * channel.tau * channel.energies / channel.hbar)
    out = (1.0 - channel.epsilon) * (np.outer(u, u.conj()) * m)
    if channel.epsilon > 0.0:
        acc = np.zeros_like(m)
        for n in channel.kraus_ops:
            acc += n @ m @ n.conj().T
        out = out + channel.epsilon * acc
    return DensityMatrix(out)


def evolve_discrete(
    channel: ParametricChannel,
    rho0: Union[DensityMatrix, np.ndarray],
    steps: int,
) -> Iterator[DensityMatrix]:
    """Yield rho_0, rho_1, ..., rho_steps under repeated channel application.

    Streaming generator: memory stays O(d^2) no matter how long the run is,
    so diagnostics can be accumulated on the fly.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    state = DensityMatrix(as_density(rho0).copy())
    yield state
    for _ in range(steps):
        state = apply_channel(channel, state)
        yield state


def unitary_superoperator(channel: ParametricChannel) -> Superoperator:
    """Vectorized conjugation U_tau: diagonal phases exp(i*tau*(E_m - E_n)/hbar)."""
    diag = _phase_diagonal(channel.energies, channel.tau, channel.hbar)
    return Superoperator(np.diag(diag), channel.dim)


def kick_superoperator(channel: ParametricChannel) -> Superoperator:
    """Environment event W_eps = (1-eps)*1 + eps * sum_r N_r (x) conj(N_r)."""
    d = channel.dim
    m = (1.0 - channel.epsilon) * np.eye(d * d, dtype=complex)
    for n in channel.kraus_ops:
        m += channel.epsilon * np.kron(n, n.conj())
    return Superoperator(m, d)


def build_superoperator(channel: ParametricChannel) -> Superoperator:
    """Dense matrix of Lambda_{tau,eps} in the H eigenbasis.

    (1-eps) sits on the diagonal phase part; the Kraus part adds
    eps * sum_r N_r (x) conj(N_r).
    """
    d = channel.dim
    diag = _phase_diagonal(channel.energies, channel.tau, channel.hbar)
    m = np.diag((1.0 - channel.epsilon) * diag)
    for n in channel.kraus_ops:
        m += channel.epsilon * np.kron(n, n.conj())
    return Superoperator(m, d)


def build_wu_channel(channel: ParametricChannel) -> Superoperator:
    """Interleaved step W_eps U_tau (environment event after the kick).

    Differs from the mixed channel by eps * (sum_r N_r (x) conj(N_r)) (U_tau - 1),
    i.e. the two agree to first order in eps*tau/hbar.
    """
    diag = _phase_diagonal(channel.energies, channel.tau, channel.hbar)
    w = kick_superoperator(channel)
    return Superoperator(w.matrix * diag[np.newaxis, :], channel.dim)


def lindblad_generator(
    hamiltonian: HamiltonianSpectrum,
    kraus: KrausSet,
    gamma: float,
    hbar: float = 1.0,
) -> Superoperator:
    """Generator of the continuous limit eps = 2*gamma*tau, tau -> 0.

    L = -(i/hbar)(H (x) 1 - 1 (x) H^T)
        + 2*gamma * sum_r [ N_r (x) conj(N_r)
                            - (N_r^dag N_r (x) 1 + 1 (x) (N_r^dag N_r)^T)/2 ]

    built in the H eigenbasis.  Accepts generator-only Kraus sets; with the
    single operator N_1 = diag(E) the result is the energy-dephasing
    Liouvillian, diagonal with entries -(i/hbar)*(E_n - E_m) - gamma*(E_n - E_m)^2.
    """
    if gamma < 0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    if hbar <= 0:
        raise ValueError(f"hbar must be > 0, got {hbar}")
    if kraus.dim != hamiltonian.dim:
        raise ValueError(
            f"Kraus dimension {kraus.dim} != Hamiltonian dimension {hamiltonian.dim}"
        )
    d = hamiltonian.dim
    e = as_energies(hamiltonian)
    ident = np.eye(d, dtype=complex)
    w = e[:, np.newaxis] - e[np.newaxis, :]  # w[n, m] = E_n - E_m
    gen = np.diag((-1j / hbar) * w.reshape(-1)).astype(complex)
    ops = kraus.operators
    q = hamiltonian.eigenvectors
    if q is not None:
        ops = np.einsum("in,rij,jm->rnm", q.conj(), ops, q)
    for n in ops:
        ndn = n.conj().T @ n
        gen += 2.0 * gamma * (
            np.kron(n, n.conj())
            - 0.5 * (np.kron(ndn, ident) + np.kron(ident, ndn.T))
        )
    return Superoperator(gen, d)
