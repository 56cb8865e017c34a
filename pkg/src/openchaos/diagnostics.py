"""Fidelity, coherence and purity diagnostics along evolutions, plus ensemble reduction.

The central observable is the fidelity of the evolved coherent Gibbs state
with its initial condition,

    SFF_beta(t) = <Psi_beta| rho_beta(t) |Psi_beta>,

the open-system spectral form factor.  At beta = 0 it is pinned by the l1
coherence C_l1 = sum_{n != m} |rho_nm| through the two-sided bound

    (1 - C_l1)/d <= SFF <= (1 + C_l1)/d,

which holds pointwise for any trace-preserving evolution; `sff_cl1_sandwich`
audits a whole series against it and reports the worst violation instead of
a bare boolean.

The correlation hole of an ensemble-averaged SFF is condensed into a single
number, the effective depth

    D_eff = sqrt( max(0, sum_{j=j_Th}^{j_H} ln(F_p / SFF(j*tau))) ),

summed over whole steps between the Thouless and Heisenberg times.  The sum
is clamped at zero: for a flat (fully dephased) series the hairline
fluctuations of SFF around F_p would otherwise push the argument of the
square root negative.  `estimate_thouless` fixes j_Th operationally as the
argmin of the 5-point smoothed ensemble mean restricted to t < t_H.

Reduction over realizations is done with compensated (Kahan) sums held in
`SeriesAccumulator`, which is associative under `merge`, so a parallel run
reduces to identical numbers no matter how the work was split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .dephasing import EDParams, ed_cl1, ed_purity, ed_sff, ed_sff_lower_bound
from .pqc import ParametricChannel, evolve_discrete
from .states import (
    CoherentGibbsState,
    DensityMatrix,
    EnergiesLike,
    as_density,
    as_energies,
    cgs_density,
    make_cgs,
    plateau_value,
)

__all__ = [
    "sff_fidelity",
    "cl1_norm",
    "purity",
    "diagonal_weight",
    "DiagnosticSeries",
    "SandwichReport",
    "sandwich_bounds",
    "sff_cl1_sandwich",
    "effective_depth",
    "relative_effective_depth",
    "estimate_thouless",
    "SeriesAccumulator",
    "ensemble_average",
    "ed_diagnostics",
    "channel_diagnostics",
    "series_to_csv",
]


def sff_fidelity(state: CoherentGibbsState, rho: Union[DensityMatrix, np.ndarray]) -> float:
    """Fidelity <Psi_beta| rho |Psi_beta>.

    The quadratic form is real for Hermitian rho up to roundoff; the real
    part is reported and rho is left untouched.
    """
    m = as_density(rho)
    psi = state.amplitudes
    if m.shape[0] != psi.size:
        raise ValueError(f"state dimension {m.shape[0]} != CGS dimension {psi.size}")
    return float(np.real(psi @ m @ psi))


def cl1_norm(rho: Union[DensityMatrix, np.ndarray]) -> float:
    """l1 coherence: sum of moduli of all off-diagonal entries."""
    m = as_density(rho)
    return float(np.abs(m).sum() - np.abs(np.diagonal(m)).sum())


def purity(rho: Union[DensityMatrix, np.ndarray]) -> float:
    """Tr[rho^2] evaluated as the squared Frobenius norm (rho Hermitian)."""
    m = as_density(rho)
    return float(np.real(np.vdot(m, m)))


def diagonal_weight(rho: Union[DensityMatrix, np.ndarray]) -> float:
    """sum_n |rho_nn|^2, the population part of the purity."""
    return float(np.sum(np.abs(np.diagonal(as_density(rho))) ** 2))


@dataclass
class DiagnosticSeries:
    """SFF / coherence / purity sampled on a time grid, for one run or an ensemble mean.

    `plateau` carries F_p = Z(2 beta)/Z(beta)^2 of the underlying spectrum
    (ensemble mean thereof after reduction).  Standard errors are attached by
    `ensemble_average` and stay None for a single realization.  `lower_bound`
    holds the dephasing Taylor bound where one applies.
    """

    dim: int
    beta: float
    times: np.ndarray
    sff: np.ndarray
    cl1: np.ndarray
    purity: np.ndarray
    plateau: float
    n_realizations: int = 1
    sff_stderr: Optional[np.ndarray] = None
    cl1_stderr: Optional[np.ndarray] = None
    purity_stderr: Optional[np.ndarray] = None
    lower_bound: Optional[np.ndarray] = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.sff = np.asarray(self.sff, dtype=float)
        self.cl1 = np.asarray(self.cl1, dtype=float)
        self.purity = np.asarray(self.purity, dtype=float)
        n = self.times.size
        for name in ("sff", "cl1", "purity"):
            if getattr(self, name).shape != (n,):
                raise ValueError(f"{name} length does not match times length {n}")

    def validate(self, tol: float = 1e-9) -> None:
        """Range checks: sff and purity in [0, 1], cl1 in [0, d-1], up to tol."""
        for name, arr, hi in (
            ("sff", self.sff, 1.0),
            ("purity", self.purity, 1.0),
            ("cl1", self.cl1, float(self.dim - 1)),
        ):
            if np.any(arr < -tol) or np.any(arr > hi + tol):
                raise ValueError(f"{name} leaves [0, {hi}] beyond tolerance {tol:g}")


def sandwich_bounds(cl1, dim: int):
    """Lower and upper coherence bounds ((1 -+ C_l1)/d) for the beta = 0 fidelity."""
    c = np.asarray(cl1, dtype=float)
    return (1.0 - c) / dim, (1.0 + c) / dim


@dataclass(frozen=True)
class SandwichReport:
    """Worst-case audit of SFF against the coherence sandwich."""

    max_violation: float
    time: float
    count: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.count == 0


def sff_cl1_sandwich(series: DiagnosticSeries, tol: float = 1e-10) -> SandwichReport:
    """Check (1 - C_l1)/d <= SFF <= (1 + C_l1)/d pointwise along a beta = 0 series.

    Returns the largest violation and where it happened together with the
    number of grid points beyond `tol`; it never raises on a violation, so
    callers can decide how loud to be.
    """
    if series.beta != 0.0:
        raise ValueError("the coherence sandwich is stated at beta = 0")
    lo, hi = sandwich_bounds(series.cl1, series.dim)
    excess = np.maximum(lo - series.sff, series.sff - hi)
    worst = int(np.argmax(excess))
    return SandwichReport(
        max_violation=float(max(excess[worst], 0.0)),
        time=float(series.times[worst]),
        count=int(np.sum(excess > tol)),
        tol=tol,
    )


def _step_indices(series: DiagnosticSeries, tau: float) -> np.ndarray:
    """Integer step labels of the series grid; raises if times are off-grid."""
    if tau <= 0:
        raise ValueError(f"tau must be > 0, got {tau}")
    j = np.rint(series.times / tau).astype(int)
    if np.max(np.abs(series.times - j * tau)) > 1e-9 * max(tau, float(series.times.max(initial=tau))):
        raise ValueError("series is not sampled at integer multiples of tau")
    return j


def effective_depth(
    series: DiagnosticSeries,
    t_thouless: float,
    t_heisenberg: float,
    tau: float,
) -> float:
    """Correlation-hole depth of an (ensemble-averaged) step series.

    Sums ln(F_p / SFF(j*tau)) over whole steps j = ceil(t_Th/tau) ..
    ceil(t_H/tau); every step in the window must be present in the series.
    The sum is clamped at zero before the square root.
    """
    j_th = math.ceil(t_thouless / tau)
    j_h = math.ceil(t_heisenberg / tau)
    if j_th > j_h:
        raise ValueError(f"empty depth window: ceil(t_Th/tau)={j_th} > ceil(t_H/tau)={j_h}")
    j = _step_indices(series, tau)
    pos = np.searchsorted(j, np.arange(j_th, j_h + 1))
    if np.any(pos >= j.size) or np.any(j[pos] != np.arange(j_th, j_h + 1)):
        raise ValueError(f"series is missing steps in the window [{j_th}, {j_h}]")
    sff = series.sff[pos]
    if np.any(sff <= 0):
        raise ValueError("SFF must be positive inside the depth window")
    total = float(np.sum(np.log(series.plateau / sff)))
    return math.sqrt(max(0.0, total))


def relative_effective_depth(
    series: DiagnosticSeries,
    isolated: DiagnosticSeries,
    t_thouless: float,
    t_heisenberg: float,
    tau: float,
    tau_isolated: Optional[float] = None,
) -> float:
    """Depth of `series` over the depth of the isolated reference, same window.

    The isolated run may live on its own step size; its depth must be
    positive or there is nothing to normalize by.
    """
    d_iso = effective_depth(isolated, t_thouless, t_heisenberg, tau_isolated or tau)
    if d_iso == 0.0:
        raise ValueError("isolated reference has zero depth")
    return effective_depth(series, t_thouless, t_heisenberg, tau) / d_iso


def _smooth5(x: np.ndarray) -> np.ndarray:
    """Centered moving average over 5 points, window shrinking at the edges."""
    csum = np.concatenate(([0.0], np.cumsum(x)))
    n = x.size
    idx = np.arange(n)
    lo = np.maximum(idx - 2, 0)
    hi = np.minimum(idx + 2, n - 1)
    return (csum[hi + 1] - csum[lo]) / (hi + 1 - lo)


def estimate_thouless(series: DiagnosticSeries, t_heisenberg: float) -> float:
    """Operational Thouless time: argmin of the smoothed mean SFF before t_H.

    The ensemble mean is smoothed with a centered 5-point moving average and
    the minimum is searched strictly below the Heisenberg time.
    """
    mask = series.times < t_heisenberg
    if not np.any(mask):
        raise ValueError("no grid points below the Heisenberg time")
    smooth = _smooth5(series.sff)[mask]
    return float(series.times[mask][int(np.argmin(smooth))])


class SeriesAccumulator:
    """Streaming mean/stderr reducer over equally gridded DiagnosticSeries.

    Kahan-compensated elementwise sums of the observables and their squares;
    `merge` combines two accumulators so the reduction tree can have any
    shape without changing the result beyond the compensation guarantee.
    """

    _FIELDS = ("sff", "cl1", "purity")

    def __init__(self) -> None:
        self.count = 0
        self._template: Optional[DiagnosticSeries] = None
        self._sum: dict = {}
        self._comp: dict = {}
        self._sumsq: dict = {}
        self._compsq: dict = {}
        self._plateau_sum = 0.0
        self._bound_sum: Optional[np.ndarray] = None

    @staticmethod
    def _kahan_add(total: np.ndarray, comp: np.ndarray, x: np.ndarray) -> None:
        y = x - comp
        t = total + y
        comp[...] = (t - total) - y
        total[...] = t

    def add(self, series: DiagnosticSeries) -> None:
        if self._template is None:
            self._template = series
            n = series.times.size
            for f in self._FIELDS:
                self._sum[f] = np.zeros(n)
                self._comp[f] = np.zeros(n)
                self._sumsq[f] = np.zeros(n)
                self._compsq[f] = np.zeros(n)
            if series.lower_bound is not None:
                self._bound_sum = np.zeros(n)
        else:
            ref = self._template
            if series.times.shape != ref.times.shape or not np.array_equal(
                series.times, ref.times
            ):
                raise ValueError("all series in one ensemble must share the time grid")
            if series.beta != ref.beta or series.dim != ref.dim:
                raise ValueError("all series in one ensemble must share beta and dim")
        for f in self._FIELDS:
            x = getattr(series, f)
            self._kahan_add(self._sum[f], self._comp[f], x)
            self._kahan_add(self._sumsq[f], self._compsq[f], x * x)
        if self._bound_sum is not None:
            if series.lower_bound is None:
                raise ValueError("mixing series with and without lower bounds")
            self._bound_sum += series.lower_bound
        self._plateau_sum += series.plateau
        self.count += 1

    def merge(self, other: "SeriesAccumulator") -> "SeriesAccumulator":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        ref, oth = self._template, other._template
        if not np.array_equal(ref.times, oth.times) or ref.beta != oth.beta or ref.dim != oth.dim:
            raise ValueError("accumulators disagree on grid, beta or dim")
        for f in self._FIELDS:
            self._kahan_add(self._sum[f], self._comp[f], other._sum[f])
            self._kahan_add(self._sumsq[f], self._compsq[f], other._sumsq[f])
        if (self._bound_sum is None) != (other._bound_sum is None):
            raise ValueError("mixing series with and without lower bounds")
        if self._bound_sum is not None:
            self._bound_sum += other._bound_sum
        self._plateau_sum += other._plateau_sum
        self.count += other.count
        return self

    def finalize(self) -> DiagnosticSeries:
        if self.count == 0:
            raise ValueError("cannot average an empty ensemble")
        n = self.count
        ref = self._template
        means, errs = {}, {}
        for f in self._FIELDS:
            mean = self._sum[f] / n
            if n > 1:
                var = np.maximum(self._sumsq[f] - n * mean**2, 0.0) / (n - 1)
                errs[f] = np.sqrt(var / n)
            else:
                errs[f] = np.zeros_like(mean)
            means[f] = mean
        return DiagnosticSeries(
            dim=ref.dim,
            beta=ref.beta,
            times=ref.times.copy(),
            sff=means["sff"],
            cl1=means["cl1"],
            purity=means["purity"],
            plateau=self._plateau_sum / n,
            n_realizations=n,
            sff_stderr=errs["sff"],
            cl1_stderr=errs["cl1"],
            purity_stderr=errs["purity"],
            lower_bound=None if self._bound_sum is None else self._bound_sum / n,
            metadata=dict(ref.metadata, n_realizations=n),
        )


def ensemble_average(series: Iterable[DiagnosticSeries]) -> DiagnosticSeries:
    """Mean and standard error over realizations sharing one time grid."""
    acc = SeriesAccumulator()
    for s in series:
        acc.add(s)
    return acc.finalize()


def ed_diagnostics(
    energies: EnergiesLike,
    beta: float,
    params: EDParams,
    times: np.ndarray,
    metadata: Optional[dict] = None,
) -> DiagnosticSeries:
    """Closed-form dephasing series on an arbitrary time grid."""
    e = as_energies(energies)
    t = np.asarray(times, dtype=float)
    bound = ed_sff_lower_bound(e, params, t) if beta == 0.0 else None
    return DiagnosticSeries(
        dim=e.size,
        beta=beta,
        times=t,
        sff=ed_sff(e, beta, params, t),
        cl1=ed_cl1(e, beta, params, t),
        purity=ed_purity(e, beta, params, t),
        plateau=plateau_value(e, beta),
        lower_bound=bound,
        metadata=dict(metadata or {}, gamma=params.gamma, hbar=params.hbar),
    )


def channel_diagnostics(
    channel: ParametricChannel,
    beta: float,
    steps: int,
    record_steps: Optional[Sequence[int]] = None,
    metadata: Optional[dict] = None,
) -> DiagnosticSeries:
    """Evolve the coherent Gibbs state through the channel and record diagnostics.

    The evolution streams through all j = 0..steps; observables are stored at
    `record_steps` only (default: every step).  Each observable costs O(d^2)
    per recorded step on top of the channel application itself.
    """
    cgs = make_cgs(channel.energies, beta)
    rho0 = cgs_density(cgs)
    if record_steps is None:
        record = np.arange(steps + 1)
    else:
        record = np.unique(np.asarray(record_steps, dtype=int))
        if record.size == 0:
            raise ValueError("record_steps must not be empty")
        if record[0] < 0 or record[-1] > steps:
            raise ValueError("record_steps outside [0, steps]")
    sff = np.empty(record.size)
    cl1 = np.empty(record.size)
    pur = np.empty(record.size)
    pos = 0
    for j, rho in enumerate(evolve_discrete(channel, rho0, int(record[-1]))):
        if pos < record.size and j == record[pos]:
            sff[pos] = sff_fidelity(cgs, rho)
            cl1[pos] = cl1_norm(rho)
            pur[pos] = purity(rho)
            pos += 1
    return DiagnosticSeries(
        dim=channel.dim,
        beta=beta,
        times=record * channel.tau,
        sff=sff,
        cl1=cl1,
        purity=pur,
        plateau=plateau_value(channel.energies, beta),
        metadata=dict(
            metadata or {},
            tau=channel.tau,
            epsilon=channel.epsilon,
            kraus_count=channel.kraus.count,
            hbar=channel.hbar,
        ),
    )


def series_to_csv(series: DiagnosticSeries) -> str:
    """Render a series to CSV with the canonical column set.

    Columns: t, sff, sff_stderr, cl1, purity, lower_bound, upper_bound.  The
    bound columns hold the dephasing Taylor bound when the series carries
    one, otherwise the beta = 0 coherence sandwich; outside beta = 0 they are
    nan.  The float formatting is value-preserving, so equal inputs give
    byte-identical files.
    """
    n = series.times.size
    err = series.sff_stderr if series.sff_stderr is not None else np.zeros(n)
    if series.beta == 0.0:
        lo, hi = sandwich_bounds(series.cl1, series.dim)
        if series.lower_bound is not None:
            lo = series.lower_bound
    else:
        lo = np.full(n, np.nan)
        hi = np.full(n, np.nan)
    lines = ["t,sff,sff_stderr,cl1,purity,lower_bound,upper_bound"]
    for k in range(n):
        row = (
            series.times[k], series.sff[k], err[k], series.cl1[k],
            series.purity[k], lo[k], hi[k],
        )
        lines.append(",".join(np.format_float_scientific(v, unique=True) for v in row))
    return "\n".join(lines) + "\n"
