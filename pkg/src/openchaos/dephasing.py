"""Energy dephasing: exact evolution and closed-form diagnostics.

The master equation

    d rho/dt = -(i/hbar) [H, rho] - gamma [H, [H, rho]]

is diagonal in the energy eigenbasis and solves to

    rho_nm(t) = rho_nm(0) * exp(-(i/hbar)*t*(E_n - E_m) - gamma*t*(E_n - E_m)^2),

so populations freeze and every coherence decays at a rate set by its energy
gap.  Starting from the coherent Gibbs state rho_nm(0) = sqrt(p_n p_m) the
fidelity (spectral form factor), l1 coherence and purity have closed sums
over level pairs; all three land on the plateau F_p = Z(2*beta)/Z(beta)^2 as
t -> infinity for gamma > 0.

At beta = 0 the fidelity obeys the two-sided coherence bound implemented in
`diagnostics` and, more tightly from below,

    SFF(t) >= (1/d) * (1 + C_l1(t) + t * dC_l1/dgamma / (2*hbar^2)),

the first two terms of an expansion whose gamma derivative is available in
closed form.  (The hbar^2 keeps the bound dimensionally consistent; the
common convention hbar = 1 makes it invisible.)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .pqc import Superoperator
from .states import DensityMatrix, EnergiesLike, as_density, as_energies, plateau_value

__all__ = [
    "EDParams",
    "ed_evolve",
    "ed_sff",
    "ed_cl1",
    "ed_cl1_gamma_derivative",
    "ed_purity",
    "ed_sff_lower_bound",
    "ed_liouvillian",
]


@dataclass(frozen=True)
class EDParams:
    """Dephasing strength gamma >= 0 and hbar > 0."""

    gamma: float
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.hbar <= 0:
            raise ValueError(f"hbar must be > 0, got {self.hbar}")


def _check_times(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("times must be >= 0")
    return t


def ed_evolve(
    rho0: Union[DensityMatrix, np.ndarray],
    energies: EnergiesLike,
    params: EDParams,
    t: float,
) -> DensityMatrix:
    """Exact dephasing propagation of rho0 (eigenbasis) to time t >= 0."""
    tt = float(_check_times(t))
    m = as_density(rho0)
    e = as_energies(energies)
    if m.shape[0] != e.size:
        raise ValueError(f"state dimension {m.shape[0]} != spectrum size {e.size}")
    w = e[:, np.newaxis] - e[np.newaxis, :]
    kernel = np.exp(-1j * tt * w / params.hbar - params.gamma * tt * w**2)
    return DensityMatrix(m * kernel)


def _pair_data(energies: EnergiesLike, beta: float):
    """Populations p_n and the m < n pair arrays (w, p_n*p_m, sqrt(p_n*p_m))."""
    if beta < 0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    e = as_energies(energies)
    half = np.exp(-0.5 * beta * (e - e.min()))
    p = half**2 / np.sum(half**2)
    i, j = np.triu_indices(e.size, k=1)
    w = e[i] - e[j]
    return p, w, p[i] * p[j], np.sqrt(p[i] * p[j])


def ed_sff(energies: EnergiesLike, beta: float, params: EDParams, t) -> np.ndarray:
    """Fidelity <Psi_beta| rho(t) |Psi_beta> under dephasing, vectorized over t.

    SFF(t) = F_p + 2 * sum_{m<n} p_n p_m exp(-gamma*t*w^2) cos(w*t/hbar),
    w = E_n - E_m.  Scalar t in, scalar out.
    """
    t = _check_times(t)
    e = as_energies(energies)
    _, w, pp, _ = _pair_data(e, beta)
    ts = np.atleast_1d(t)[:, np.newaxis]
    damp = np.exp(-params.gamma * ts * w**2)
    osc = np.cos(w * ts / params.hbar)
    out = plateau_value(e, beta) + 2.0 * np.sum(pp * damp * osc, axis=1)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def ed_cl1(energies: EnergiesLike, beta: float, params: EDParams, t) -> np.ndarray:
    """l1 coherence 2 * sum_{m<n} sqrt(p_n p_m) exp(-gamma*t*w^2); d-1 at t=0, beta=0."""
    t = _check_times(t)
    e = as_energies(energies)
    _, w, _, sqpp = _pair_data(e, beta)
    ts = np.atleast_1d(t)[:, np.newaxis]
    out = 2.0 * np.sum(sqpp * np.exp(-params.gamma * ts * w**2), axis=1)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def ed_cl1_gamma_derivative(
    energies: EnergiesLike, beta: float, params: EDParams, t
) -> np.ndarray:
    """Analytic dC_l1/dgamma = -2 * sum_{m<n} sqrt(p_n p_m) t w^2 exp(-gamma*t*w^2)."""
    t = _check_times(t)
    e = as_energies(energies)
    _, w, _, sqpp = _pair_data(e, beta)
    ts = np.atleast_1d(t)[:, np.newaxis]
    out = -2.0 * np.sum(sqpp * ts * w**2 * np.exp(-params.gamma * ts * w**2), axis=1)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def ed_purity(energies: EnergiesLike, beta: float, params: EDParams, t) -> np.ndarray:
    """Purity F_p + 2 * sum_{m<n} p_n p_m exp(-2*gamma*t*w^2): same sum, twice the rate."""
    t = _check_times(t)
    e = as_energies(energies)
    _, w, pp, _ = _pair_data(e, beta)
    ts = np.atleast_1d(t)[:, np.newaxis]
    out = plateau_value(e, beta) + 2.0 * np.sum(pp * np.exp(-2.0 * params.gamma * ts * w**2), axis=1)
    return out.reshape(t.shape) if t.ndim else float(out[0])


def ed_sff_lower_bound(
    energies: EnergiesLike, params: EDParams, t, beta: float = 0.0
) -> np.ndarray:
    """Coherence lower bound (1/d)(1 + C_l1 + t*dC_l1/dgamma/(2*hbar^2)) at beta = 0.

    Only the infinite-temperature form is known; any other beta raises.
    """
    if beta != 0.0:
        raise ValueError(f"lower bound is only defined at beta = 0, got beta = {beta}")
    e = as_energies(energies)
    d = e.size
    cl1 = ed_cl1(e, 0.0, params, t)
    dcl1 = ed_cl1_gamma_derivative(e, 0.0, params, t)
    t = np.asarray(t, dtype=float)
    return (1.0 + cl1 + t * dcl1 / (2.0 * params.hbar**2)) / d


def ed_liouvillian(energies: EnergiesLike, params: EDParams) -> Superoperator:
    """Dephasing Liouvillian, diagonal in the vectorized eigenbasis.

    Entry (n*d + m) is -(i/hbar)*(E_n - E_m) - gamma*(E_n - E_m)^2; matches the
    Lindblad generator with the single generator-only operator N_1 = H.
    """
    e = as_energies(energies)
    w = (e[:, np.newaxis] - e[np.newaxis, :]).reshape(-1)
    diag = -1j * w / params.hbar - params.gamma * w**2
    return Superoperator(np.diag(diag), e.size)
