"""Random-matrix ensembles and the spectral scales derived from them.

Hamiltonians are drawn from the Gaussian orthogonal ensemble GOE(d).  We fix
the normalization through the semicircle law

    mu(E) = sqrt(2*d*sigma**2 - E**2) / (pi*d*sigma**2),

i.e. the spectrum fills [-sigma*sqrt(2d), +sigma*sqrt(2d)].  Concretely the
sample is H = (A + A^T)/2 with A_ij i.i.d. N(0, sigma**2), which puts variance
sigma**2 on the diagonal and sigma**2/2 off the diagonal.  All derived scales
follow from the same convention:

    mean level spacing   Delta = sigma*sqrt(8d)/(d - 1)
    Heisenberg time      t_H   = 2*pi*hbar/Delta
    critical period      tau_c = pi*hbar/(sigma*sqrt(2d))

tau_c is the kick period at which the spread of unitary phases
tau*(E_m - E_n)/hbar first covers the full circle.

Environment (Kraus) operators come from Haar-random unitaries: K operators of
shape (d, d) are cut out of a CUE(K*d) matrix as vertical blocks of a common
d-column slab.  Orthonormality of the slab's columns makes the set exactly
trace preserving, sum_r N_r^dag N_r = 1.

Reproducibility: every sampler is driven by the counter-based Philox bit
generator seeded through numpy's SeedSequence, so a (master seed, realization
index) pair identifies a stream on any platform.  Use `derive_seed` to build
per-realization seeds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "HamiltonianSpectrum",
    "KrausSet",
    "derive_seed",
    "rng_from_seed",
    "sample_goe",
    "sample_cue",
    "kraus_from_truncation",
    "sample_kraus_set",
    "semicircle_radius",
    "semicircle_density",
    "mean_level_spacing",
    "heisenberg_time",
    "critical_tau",
]


def derive_seed(master_seed: int, *indices: int) -> int:
    """Derive a child seed from a master seed and an index path.

    The path (master_seed, i0, i1, ...) is fed to numpy's SeedSequence and
    hashed into a single 64-bit integer.  Distinct paths give statistically
    independent Philox streams, so ensembles can key their realizations as
    derive_seed(master, realization) and remain reproducible under any
    scheduling of the work.

    A fixed nonzero terminator word is appended before hashing: SeedSequence
    ignores trailing zero entropy words, so without it the paths (7,) and
    (7, 0, 0) would collide.
    """
    entropy = [int(master_seed)] + [int(i) for i in indices] + [0x5DEECE66D]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])


def rng_from_seed(seed: int) -> np.random.Generator:
    """Philox generator for `seed`; the single RNG entry point of the package."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


@dataclass(frozen=True)
class HamiltonianSpectrum:
    """Spectrum (and optionally the matrix) of one sampled Hamiltonian.

    energies are sorted ascending.  When `matrix` is kept, `eigenvectors`
    holds the orthogonal matrix Q with H = Q diag(energies) Q^T; channel
    builders use it to rotate environment operators into the eigenbasis.
    """

    dim: int
    sigma: float
    energies: np.ndarray
    seed: int
    matrix: Optional[np.ndarray] = None
    eigenvectors: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        energies = np.asarray(self.energies, dtype=float)
        object.__setattr__(self, "energies", energies)
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if energies.shape != (self.dim,):
            raise ValueError(
                f"energies shape {energies.shape} does not match dim {self.dim}"
            )
        if np.any(np.diff(energies) < 0):
            raise ValueError("energies must be sorted ascending")

    def validate(self, rtol: float = 1e-10) -> None:
        """Check that `matrix`, when present, reproduces `energies`.

        Relative tolerance is measured against the spectral width.
        """
        if self.matrix is None:
            return
        ev = np.linalg.eigvalsh(self.matrix)
        scale = max(np.max(np.abs(self.energies)), 1.0)
        if np.max(np.abs(ev - self.energies)) > rtol * scale:
            raise ValueError("matrix eigenvalues disagree with stored energies")


@dataclass(frozen=True)
class KrausSet:
    """A set of d x d environment operators N_1..N_K.

    Trace preservation sum_r N_r^dag N_r = 1 is checked on construction to
    1e-12 in max norm.  `generator_only=True` skips that check; it marks sets
    that only make sense inside a Lindblad generator (e.g. the single
    operator N_1 = H reproducing energy dephasing) and such sets are rejected
    by the discrete-channel constructors.
    """

    dim: int
    operators: np.ndarray
    seed: Optional[int] = None
    generator_only: bool = False

    def __post_init__(self) -> None:
        ops = np.asarray(self.operators, dtype=complex)
        object.__setattr__(self, "operators", ops)
        if ops.ndim != 3 or ops.shape[1:] != (self.dim, self.dim):
            raise ValueError(
                f"operators must have shape (K, {self.dim}, {self.dim}), got {ops.shape}"
            )
        k = ops.shape[0]
        if not self.generator_only and not 1 <= k <= self.dim**2 - 2:
            raise ValueError(f"count K={k} outside allowed range [1, d^2-2]")
        if not self.generator_only:
            defect = self.trace_defect()
            if defect > 1e-12:
                raise ValueError(
                    f"Kraus set is not trace preserving: |sum N^dag N - 1|_max = {defect:.3e}"
                )

    @property
    def count(self) -> int:
        return self.operators.shape[0]

    def trace_defect(self) -> float:
        """Max-norm deviation of sum_r N_r^dag N_r from the identity."""
        acc = np.einsum("rji,rjk->ik", self.operators.conj(), self.operators)
        return float(np.max(np.abs(acc - np.eye(self.dim))))


def sample_goe(d: int, sigma: float, seed: int) -> HamiltonianSpectrum:
    """Draw one GOE(d) Hamiltonian and diagonalize it.

    Parameters
    ----------
    d : matrix dimension, >= 2.
    sigma : scale of the underlying Gaussian; the eigenvalue density is the
        semicircle of radius sigma*sqrt(2d).
    seed : integer seed for the Philox stream.

    Returns
    -------
    HamiltonianSpectrum with sorted energies, the symmetric matrix and its
    eigenvector matrix attached.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    rng = rng_from_seed(seed)
    a = rng.normal(0.0, sigma, size=(d, d))
    h = (a + a.T) / 2.0
    energies, vecs = np.linalg.eigh(h)
    return HamiltonianSpectrum(
        dim=d, sigma=sigma, energies=energies, seed=int(seed), matrix=h, eigenvectors=vecs
    )


def sample_cue(n: int, seed: int) -> np.ndarray:
    """Haar-random U(n) matrix.

    QR decomposition of a complex Ginibre matrix, with the R diagonal
    rescaled to unit modulus so the factorization is unique and Q is
    Haar distributed.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = rng_from_seed(seed)
    z = (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))) * np.sqrt(0.5)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def kraus_from_truncation(
    unitary: np.ndarray,
    d: int,
    k: int,
    column_offset: int = 1,
    seed: Optional[int] = None,
) -> KrausSet:
    """Cut K trace-preserving Kraus operators out of a (K*d) x (K*d) unitary.

    Operator r (r = 1..K) is the block of rows (r-1)*d .. r*d - 1 restricted
    to the d consecutive columns starting at `column_offset`.  Because those
    columns are orthonormal, sum_r N_r^dag N_r = 1 holds exactly.

    For K == 1 the whole matrix is the single (unitary) operator and
    `column_offset` is ignored.  Otherwise 1 <= column_offset <= d*(K-1).
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 1 <= k <= d**2 - 2:
        raise ValueError(f"k={k} outside allowed range [1, d^2-2]")
    u = np.asarray(unitary, dtype=complex)
    if u.shape != (k * d, k * d):
        raise ValueError(f"unitary has shape {u.shape}, expected {(k * d, k * d)}")
    if k == 1:
        ops = u[np.newaxis, :, :].copy()
        return KrausSet(dim=d, operators=ops, seed=seed)
    if not 1 <= column_offset <= d * (k - 1):
        raise ValueError(
            f"column_offset={column_offset} outside allowed range [1, {d * (k - 1)}]"
        )
    cols = slice(column_offset, column_offset + d)
    ops = np.stack([u[r * d : (r + 1) * d, cols] for r in range(k)])
    return KrausSet(dim=d, operators=ops, seed=seed)


def sample_kraus_set(d: int, k: int, seed: int, column_offset: int = 1) -> KrausSet:
    """Sample CUE(K*d) and truncate it into a KrausSet (convenience wrapper)."""
    v = sample_cue(k * d, seed)
    return kraus_from_truncation(v, d, k, column_offset=column_offset, seed=int(seed))


def semicircle_radius(d: int, sigma: float) -> float:
    """Edge of the eigenvalue support, sigma*sqrt(2d)."""
    return float(sigma * np.sqrt(2.0 * d))


def semicircle_density(energies: np.ndarray, d: int, sigma: float) -> np.ndarray:
    """Semicircle eigenvalue density mu(E); zero outside the support."""
    e = np.asarray(energies, dtype=float)
    r2 = 2.0 * d * sigma**2
    out = np.zeros_like(e)
    inside = e**2 < r2
    out[inside] = np.sqrt(r2 - e[inside] ** 2) / (np.pi * d * sigma**2)
    return out


def mean_level_spacing(d: int, sigma: float) -> float:
    """Mean spacing Delta = sigma*sqrt(8d)/(d-1): full support width over d-1 gaps."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return float(sigma * np.sqrt(8.0 * d) / (d - 1))


def heisenberg_time(d: int, sigma: float, hbar: float = 1.0) -> float:
    """Heisenberg time t_H = 2*pi*hbar/Delta = pi*hbar*(d-1)/(sigma*sqrt(2d))."""
    if hbar <= 0:
        raise ValueError(f"hbar must be > 0, got {hbar}")
    return float(2.0 * np.pi * hbar / mean_level_spacing(d, sigma))


def critical_tau(d: int, sigma: float, hbar: float = 1.0) -> float:
    """Kick period tau_c = pi*hbar/(sigma*sqrt(2d)) where the phase spread reaches 2*pi.

    For tau >= tau_c the unitary phases tau*(E_m - E_n)/hbar wrap the whole
    circle; below it they stay in a sector.  Equivalently t_H = (d-1)*tau_c.
    """
    if hbar <= 0:
        raise ValueError(f"hbar must be > 0, got {hbar}")
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return float(np.pi * hbar / (sigma * np.sqrt(2.0 * d)))
