"""Coherent Gibbs states, density matrices and Liouville-space vectorization.

The reference state throughout is the coherent Gibbs state

    |Psi_beta> = sum_n sqrt(p_n) |n>,    p_n = exp(-beta*E_n)/Z(beta),

a pure state whose populations match the thermal ones while keeping every
off-diagonal coherence positive.  At beta = 0 it is the maximally coherent
state with amplitudes 1/sqrt(d).

Vectorization is row major ("horizontal"): |rho) stacks the rows of rho, so
the matrix element rho_nm sits at index n*d + m and A rho B maps to
kron(A, B^T) |rho).  With this convention the Hilbert-Schmidt product is
(A|B) = Tr[A^dag B] and devectorize(vectorize(rho)) is an exact reshape
round trip.  Every superoperator in the package uses the same stacking.

Partition sums are evaluated with the dominant energy shifted out of the
exponent, so large beta*|E| does not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .rmt import HamiltonianSpectrum

__all__ = [
    "EnergiesLike",
    "as_energies",
    "log_partition_function",
    "partition_function",
    "CoherentGibbsState",
    "make_cgs",
    "DensityMatrix",
    "cgs_density",
    "vectorize",
    "devectorize",
    "plateau_value",
]

EnergiesLike = Union[HamiltonianSpectrum, np.ndarray]


def as_energies(energies: EnergiesLike) -> np.ndarray:
    """Coerce a HamiltonianSpectrum or array-like into a 1-D float array."""
    if isinstance(energies, HamiltonianSpectrum):
        return energies.energies
    e = np.asarray(energies, dtype=float)
    if e.ndim != 1 or e.size < 1:
        raise ValueError(f"energies must be a non-empty 1-D array, got shape {e.shape}")
    return e


def log_partition_function(energies: EnergiesLike, beta: float) -> float:
    """log Z(beta) via a shifted log-sum-exp; beta must be >= 0."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    e = as_energies(energies)
    return float(logsumexp(-beta * e))


def partition_function(energies: EnergiesLike, beta: float) -> float:
    """Partition function Z(beta) = sum_n exp(-beta*E_n)."""
    return float(np.exp(log_partition_function(energies, beta)))


@dataclass(frozen=True)
class CoherentGibbsState:
    """Amplitude vector sqrt(p_n) of a coherent Gibbs state at inverse temperature beta."""

    beta: float
    amplitudes: np.ndarray
    energies: np.ndarray

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=float)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "energies", np.asarray(self.energies, dtype=float))
        if amp.ndim != 1 or amp.shape != self.energies.shape:
            raise ValueError("amplitudes and energies must be 1-D arrays of equal length")
        if np.any(amp < 0):
            raise ValueError("amplitudes must be non-negative")
        norm = float(np.sum(amp**2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"amplitudes not normalized: sum p_n = {norm!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def make_cgs(energies: EnergiesLike, beta: float) -> CoherentGibbsState:
    """Build the coherent Gibbs state sum_n sqrt(p_n)|n> for the given spectrum.

    Amplitudes are computed as exp(-beta*(E_n - E_min)/2) and normalized, so
    the result is finite for any beta >= 0.
    """
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    e = as_energies(energies)
    half = np.exp(-0.5 * beta * (e - e.min()))
    amp = half / np.linalg.norm(half)
    return CoherentGibbsState(beta=float(beta), amplitudes=amp, energies=e)


@dataclass(frozen=True)
class DensityMatrix:
    """Thin wrapper around a d x d density matrix.

    Construction only checks shape; the physics invariants (Hermiticity,
    unit trace, positivity) are verified by `validate`, which evolution
    loops call where they need it rather than at every step.
    """

    mat: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mat, dtype=complex)
        object.__setattr__(self, "mat", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def validate(
        self,
        herm_tol: float = 1e-10,
        trace_tol: float = 1e-10,
        eig_floor: float = -1e-8,
    ) -> None:
        """Raise unless Hermitian, unit trace and positive within tolerances."""
        m = self.mat
        herm = float(np.max(np.abs(m - m.conj().T)))
        if herm > herm_tol:
            raise ValueError(f"not Hermitian: |rho - rho^dag|_max = {herm:.3e}")
        tr = self.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"trace deviates from 1: {tr!r}")
        lo = float(np.min(np.linalg.eigvalsh((m + m.conj().T) / 2)))
        if lo < eig_floor:
            raise ValueError(f"negative eigenvalue {lo:.3e} below floor {eig_floor:.1e}")


def as_density(rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    """Matrix view of a DensityMatrix or bare array."""
    if isinstance(rho, DensityMatrix):
        return rho.mat
    m = np.asarray(rho, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def cgs_density(state: CoherentGibbsState) -> DensityMatrix:
    """Rank-one density matrix |Psi_beta><Psi_beta|, entries sqrt(p_n*p_m)."""
    return DensityMatrix(np.outer(state.amplitudes, state.amplitudes).astype(complex))


def vectorize(rho: Union[DensityMatrix, np.ndarray]) -> np.ndarray:
    """Row-major vectorization: component n*d + m holds rho_nm."""
    return as_density(rho).reshape(-1).copy()


def devectorize(vec: np.ndarray) -> np.ndarray:
    """Inverse of `vectorize`; the length must be a perfect square."""
    v = np.asarray(vec, dtype=complex)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValueError(f"length {v.size} is not a perfect square")
    return v.reshape(d, d).copy()


def plateau_value(energies: EnergiesLike, beta: float) -> float:
    """Late-time fidelity plateau F_p = Z(2*beta)/Z(beta)^2.

    Equals the purity of the dephased Gibbs populations; 1/d at beta = 0.
    Evaluated in log space so it is overflow safe.
    """
    e = as_energies(energies)
    return float(
        np.exp(log_partition_function(e, 2.0 * beta) - 2.0 * log_partition_function(e, beta))
    )
