"""Experiment driver: seeded ensemble runs from a JSON config to CSV artifacts.

A config names one of six modes and the physical grid to sweep:

    ed-sff      closed-form dephasing diagnostics over a gamma list
    pqc-sff     channel-evolution diagnostics over a (tau, epsilon) grid
    spectrum    superoperator eigenvalue clouds with phase boundaries
    csr         complex spacing ratios of those clouds
    phase-grid  phase labels and boundary parameters over a (tau, epsilon) grid
    depth-grid  relative correlation-hole depth over a (tau, epsilon) grid

Every realization draws its Hamiltonian from the stream
derive_seed(master_seed, 0, index) and its environment unitary from
derive_seed(master_seed, 1, index), so realization i is the same physical
sample in every mode and at every grid point; ensembles are therefore paired
across parameters, and a run is reproducible from (config, master_seed)
alone.  Workers only change scheduling: results are reduced in realization
order, so the emitted CSV numbers are byte-identical for any --workers value.

Each run writes its artifacts plus a manifest.json recording the config, the
package version, wall times, per-grid-point status and a sha256 per artifact.
Exit codes: 0 success, 1 config validation failure, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__
from .dephasing import EDParams
from .diagnostics import (
    DiagnosticSeries,
    SeriesAccumulator,
    ed_diagnostics,
    channel_diagnostics,
    effective_depth,
    estimate_thouless,
    series_to_csv,
)
from .pqc import ParametricChannel, build_superoperator, build_wu_channel
from .rmt import derive_seed, heisenberg_time, sample_goe, sample_kraus_set
from .spectral import (
    classify_phase,
    complex_spacing_ratios,
    containment_fraction,
    density_grid,
    eigenvalues,
    phase_boundary,
    phi_max,
    split_bulk,
)

__all__ = ["ExperimentConfig", "load_config", "validate_config", "run", "emit_gnuplot_script", "main"]

MODES = ("ed-sff", "pqc-sff", "spectrum", "csr", "phase-grid", "depth-grid")

_GOE_STREAM = 0
_CUE_STREAM = 1

# Full-scale realization counts, enabled by --full-scale / "full_scale".
_FULL_SCALE_REALIZATIONS = {
    "ed-sff": 500,
    "pqc-sff": 500,
    "spectrum": 4,
    "csr": 4,
    "depth-grid": 100,
    "phase-grid": 1,
}


@dataclass
class ExperimentConfig:
    """One experiment: mode, physics parameters, grids and output location."""

    mode: str
    dim: int = 32
    sigma: float = 1.0
    hbar: float = 1.0
    beta: float = 0.0
    kraus_count: int = 3
    column_offset: int = 1
    realizations: int = 100
    master_seed: int = 20260815
    gamma: List[float] = field(default_factory=lambda: [0.1])
    tau: List[float] = field(default_factory=lambda: [0.01])
    epsilon: List[float] = field(default_factory=lambda: [0.1])
    channel_form: str = "mixture"
    grid_kind: str = "log"
    t_min: float = 0.1
    t_max: Optional[float] = None
    points: int = 400
    margin: float = 0.02
    histogram_bins: int = 256
    output_dir: str = "out"
    allow_large: bool = False
    full_scale: bool = False

    def resolved_t_max(self) -> float:
        if self.t_max is not None:
            return self.t_max
        factor = 4.0 if self.mode == "ed-sff" else 2.0
        return factor * heisenberg_time(self.dim, self.sigma, self.hbar)


_CONFIG_KEYS = set(ExperimentConfig.__dataclass_fields__)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a JSON config file; unknown keys are rejected by validate_config."""
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, dict):
        raise ValueError("config must be a JSON object")
    unknown = sorted(set(raw) - _CONFIG_KEYS)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    if "mode" not in raw:
        raise ValueError("config is missing required key 'mode'")
    for key in ("gamma", "tau", "epsilon"):
        if key in raw and not isinstance(raw[key], list):
            raw[key] = [raw[key]]
    cfg = ExperimentConfig(**raw)
    if cfg.full_scale:
        cfg.dim = max(cfg.dim, 64)
        cfg.realizations = _FULL_SCALE_REALIZATIONS.get(cfg.mode, cfg.realizations)
        cfg.allow_large = True
    return cfg


def validate_config(cfg: ExperimentConfig) -> List[str]:
    """Collect every problem with the config; an empty list means runnable."""
    issues: List[str] = []
    say = issues.append
    if cfg.mode not in MODES:
        say(f"mode must be one of {MODES}, got {cfg.mode!r}")
        return issues
    if cfg.dim < 2:
        say(f"dim must be >= 2, got {cfg.dim}")
    if cfg.dim > 32 and not cfg.allow_large:
        say(f"dim={cfg.dim} above the desk-scale limit 32 requires allow_large=true")
    if cfg.sigma <= 0:
        say(f"sigma must be > 0, got {cfg.sigma}")
    if cfg.hbar <= 0:
        say(f"hbar must be > 0, got {cfg.hbar}")
    if cfg.beta < 0:
        say(f"beta must be >= 0, got {cfg.beta}")
    if cfg.realizations < 1:
        say(f"realizations must be >= 1, got {cfg.realizations}")
    if cfg.points < 2:
        say(f"points must be >= 2, got {cfg.points}")
    if cfg.grid_kind not in ("log", "linear"):
        say(f"grid_kind must be 'log' or 'linear', got {cfg.grid_kind!r}")
    if cfg.t_min <= 0 and cfg.grid_kind == "log":
        say(f"t_min must be > 0 on a log grid, got {cfg.t_min}")
    if cfg.t_max is not None and cfg.t_max <= cfg.t_min:
        say(f"t_max={cfg.t_max} must exceed t_min={cfg.t_min}")
    if cfg.channel_form not in ("mixture", "interleaved"):
        say(f"channel_form must be 'mixture' or 'interleaved', got {cfg.channel_form!r}")
    if cfg.margin < 0:
        say(f"margin must be >= 0, got {cfg.margin}")
    if cfg.histogram_bins < 8:
        say(f"histogram_bins must be >= 8, got {cfg.histogram_bins}")
    if cfg.mode == "ed-sff":
        if not cfg.gamma:
            say("ed-sff needs a non-empty gamma list")
        if any(g < 0 for g in cfg.gamma):
            say("gamma values must be >= 0")
    else:
        d2 = cfg.dim**2
        if not 1 <= cfg.kraus_count <= d2 - 2:
            say(f"kraus_count must lie in [1, {d2 - 2}], got {cfg.kraus_count}")
        elif cfg.kraus_count > 1 and not 1 <= cfg.column_offset <= cfg.dim * (cfg.kraus_count - 1):
            say(
                f"column_offset must lie in [1, {cfg.dim * (cfg.kraus_count - 1)}],"
                f" got {cfg.column_offset}"
            )
        if not cfg.tau:
            say(f"{cfg.mode} needs a non-empty tau list")
        if any(t <= 0 for t in cfg.tau):
            say("tau values must be > 0")
        if not cfg.epsilon:
            say(f"{cfg.mode} needs a non-empty epsilon list")
        if any(not 0.0 <= e <= 1.0 for e in cfg.epsilon):
            say("epsilon values must lie in [0, 1]")
    return issues


# ---------------------------------------------------------------------------
# shared run plumbing


def _hamiltonian(cfg: ExperimentConfig, idx: int):
    return sample_goe(cfg.dim, cfg.sigma, derive_seed(cfg.master_seed, _GOE_STREAM, idx))


def _kraus(cfg: ExperimentConfig, idx: int):
    return sample_kraus_set(
        cfg.dim,
        cfg.kraus_count,
        derive_seed(cfg.master_seed, _CUE_STREAM, idx),
        column_offset=cfg.column_offset,
    )


def _channel(cfg: ExperimentConfig, h, kraus, tau: float, eps: float) -> ParametricChannel:
    return ParametricChannel(tau=tau, epsilon=eps, hamiltonian=h, kraus=kraus, hbar=cfg.hbar)


def _channel_matrix(cfg: ExperimentConfig, channel: ParametricChannel):
    if cfg.channel_form == "interleaved":
        return build_wu_channel(channel)
    return build_superoperator(channel)


def _time_grid(cfg: ExperimentConfig) -> np.ndarray:
    t_max = cfg.resolved_t_max()
    if cfg.grid_kind == "linear":
        return np.linspace(cfg.t_min, t_max, cfg.points)
    return np.geomspace(cfg.t_min, t_max, cfg.points)


def _record_steps(cfg: ExperimentConfig, steps: int) -> np.ndarray:
    """Log-spaced (or linear) subset of integer steps, always including 0."""
    if cfg.grid_kind == "linear":
        j = np.rint(np.linspace(1, steps, min(cfg.points, steps))).astype(int)
    else:
        j = np.rint(np.geomspace(1, steps, min(cfg.points, steps))).astype(int)
    return np.unique(np.concatenate([[0], j]))


def _ensemble_map(
    cfg: ExperimentConfig, worker: Callable[[int], object], workers: int
) -> Iterable[object]:
    """Map `worker` over realization indices, yielding results in index order."""
    indices = range(cfg.realizations)
    if workers <= 1:
        return map(worker, indices)
    pool = ThreadPoolExecutor(max_workers=workers)
    return pool.map(worker, indices)


def _format(value: float) -> str:
    return np.format_float_scientific(value, unique=True)


def _write(path: Path, text: str, manifest: dict, kind: str, label: str) -> None:
    path.write_text(text)
    digest = hashlib.sha256(text.encode()).hexdigest()
    manifest["artifacts"].append(
        {"path": path.name, "kind": kind, "label": label, "sha256": digest, "bytes": len(text)}
    )


def _cloud_csv(evals: Sequence[np.ndarray], fixed: Sequence[complex]) -> str:
    lines = ["re,im,is_fixed_point,realization"]
    for r, ev in enumerate(evals):
        for z in ev:
            lines.append(f"{_format(z.real)},{_format(z.imag)},0,{r}")
        lines.append(f"{_format(fixed[r].real)},{_format(fixed[r].imag)},1,{r}")
    return "\n".join(lines) + "\n"


def _curve_csv(curves) -> str:
    lines = ["re,im,curve"]
    for c_idx, curve in enumerate(curves):
        for z in curve:
            lines.append(f"{_format(z.real)},{_format(z.imag)},{c_idx}")
    return "\n".join(lines) + "\n"


def _tag(tau: Optional[float] = None, eps: Optional[float] = None, gamma: Optional[float] = None) -> str:
    parts = []
    if gamma is not None:
        parts.append(f"gamma{gamma:g}")
    if tau is not None:
        parts.append(f"tau{tau:g}")
    if eps is not None:
        parts.append(f"eps{eps:g}")
    return "_".join(parts)


# ---------------------------------------------------------------------------
# mode implementations


def _run_ed_sff(cfg: ExperimentConfig, out: Path, manifest: dict, workers: int) -> None:
    times = _time_grid(cfg)
    gammas = list(cfg.gamma)

    def worker(idx: int):
        h = _hamiltonian(cfg, idx)
        return [
            ed_diagnostics(h, cfg.beta, EDParams(g, cfg.hbar), times, metadata={"mode": "ed-sff"})
            for g in gammas
        ]

    accs = [SeriesAccumulator() for _ in gammas]
    for series_list in _ensemble_map(cfg, worker, workers):
        for acc, s in zip(accs, series_list):
            acc.add(s)
    for g, acc in zip(gammas, accs):
        mean = acc.finalize()
        _write(out / f"ed-sff_{_tag(gamma=g)}.csv", series_to_csv(mean), manifest, "series", _tag(gamma=g))
        manifest["grid"].append({"gamma": g, "status": "ok", "n": mean.n_realizations})


def _run_pqc_sff(cfg: ExperimentConfig, out: Path, manifest: dict, workers: int) -> None:
    grid = [(t, e) for t in cfg.tau for e in cfg.epsilon]
    t_max = cfg.resolved_t_max()
    steps = {t: max(1, math.ceil(t_max / t)) for t in cfg.tau}
    record = {t: _record_steps(cfg, steps[t]) for t in cfg.tau}

    def worker(idx: int):
        h = _hamiltonian(cfg, idx)
        kraus = _kraus(cfg, idx)
        out_series = []
        for tau, eps in grid:
            ch = _channel(cfg, h, kraus, tau, eps)
            if cfg.channel_form == "interleaved":
                s = _interleaved_diagnostics(cfg, ch, record[tau])
            else:
                s = channel_diagnostics(
                    ch, cfg.beta, int(record[tau][-1]), record_steps=record[tau],
                    metadata={"mode": "pqc-sff", "channel_form": cfg.channel_form},
                )
            out_series.append(s)
        return out_series

    accs = [SeriesAccumulator() for _ in grid]
    for series_list in _ensemble_map(cfg, worker, workers):
        for acc, s in zip(accs, series_list):
            acc.add(s)
    for (tau, eps), acc in zip(grid, accs):
        mean = acc.finalize()
        tag = _tag(tau=tau, eps=eps)
        _write(out / f"pqc-sff_{tag}.csv", series_to_csv(mean), manifest, "series", tag)
        manifest["grid"].append({"tau": tau, "epsilon": eps, "status": "ok", "n": mean.n_realizations})


def _interleaved_diagnostics(cfg: ExperimentConfig, channel: ParametricChannel, record: np.ndarray) -> DiagnosticSeries:
    """Diagnostics under the interleaved product W_eps U_tau instead of the mixture.

    The interleaved step has no Kraus decomposition with K+1 terms of the
    mixture form, so it is driven through its dense superoperator; this form
    is only intended for small dim.
    """
    from .diagnostics import cl1_norm, purity as _purity, sff_fidelity
    from .states import cgs_density, make_cgs, plateau_value, vectorize

    cgs = make_cgs(channel.energies, cfg.beta)
    rho = cgs_density(cgs).mat
    m = build_wu_channel(channel).matrix
    d = channel.dim
    sff = np.empty(record.size)
    cl1 = np.empty(record.size)
    pur = np.empty(record.size)
    pos = 0
    vec = rho.reshape(-1)
    for j in range(int(record[-1]) + 1):
        if j > 0:
            vec = m @ vec
        if pos < record.size and j == record[pos]:
            state = vec.reshape(d, d)
            sff[pos] = sff_fidelity(cgs, state)
            cl1[pos] = cl1_norm(state)
            pur[pos] = _purity(state)
            pos += 1
    return DiagnosticSeries(
        dim=d, beta=cfg.beta, times=record * channel.tau, sff=sff, cl1=cl1, purity=pur,
        plateau=plateau_value(channel.energies, cfg.beta),
        metadata={"mode": "pqc-sff", "channel_form": "interleaved",
                  "tau": channel.tau, "epsilon": channel.epsilon},
    )


def _spectra(cfg: ExperimentConfig, workers: int):
    """Eigenvalue clouds for every (tau, eps) grid point and realization."""
    grid = [(t, e) for t in cfg.tau for e in cfg.epsilon]

    def worker(idx: int):
        h = _hamiltonian(cfg, idx)
        kraus = _kraus(cfg, idx)
        spectra = []
        for tau, eps in grid:
            ch = _channel(cfg, h, kraus, tau, eps)
            ev = eigenvalues(
                _channel_matrix(cfg, ch),
                context=f"tau={tau}, eps={eps}, realization={idx}",
            )
            spectra.append(ev)
        return spectra

    per_point = [[] for _ in grid]
    for spectra in _ensemble_map(cfg, worker, workers):
        for store, ev in zip(per_point, spectra):
            store.append(ev)
    return grid, per_point


def _run_spectrum(cfg: ExperimentConfig, out: Path, manifest: dict, workers: int) -> None:
    grid, per_point = _spectra(cfg, workers)
    summary = ["tau,epsilon,phase,containment,margin,outer,inner,center,radius,n_eigenvalues"]
    for (tau, eps), clouds in zip(grid, per_point):
        tag = _tag(tau=tau, eps=eps)
        bulks, fixed = [], []
        for ev in clouds:
            b, f = split_bulk(ev)
            bulks.append(b)
            fixed.append(f)
        phase = classify_phase(eps, tau, cfg.kraus_count, cfg.dim, cfg.sigma, cfg.hbar)
        boundary = phase_boundary(
            phase, eps, cfg.kraus_count, tau=tau, d=cfg.dim, sigma=cfg.sigma, hbar=cfg.hbar
        )
        pooled = np.concatenate(bulks)
        frac = containment_fraction(pooled, boundary, cfg.margin)
        _write(out / f"spectrum_{tag}.csv", _cloud_csv(bulks, fixed), manifest, "cloud", tag)
        _write(out / f"boundary_{tag}.csv", _curve_csv(boundary.curves), manifest, "boundary", tag)
        _write(
            out / f"spectrum_{tag}.hist.json",
            json.dumps(density_grid(pooled, bins=cfg.histogram_bins)),
            manifest, "histogram", tag,
        )
        center = boundary.center.real if boundary.kind == "shifted-disk" else 0.0
        summary.append(
            ",".join([
                _format(tau), _format(eps), phase, _format(frac), _format(cfg.margin),
                _format(boundary.outer or np.nan),
                _format(boundary.inner if boundary.inner is not None else np.nan),
                _format(center),
                _format(boundary.outer or np.nan) if boundary.kind == "shifted-disk" else _format(np.nan),
                str(pooled.size),
            ])
        )
        manifest["grid"].append(
            {"tau": tau, "epsilon": eps, "status": "ok", "phase": phase, "containment": frac}
        )
    _write(out / "spectrum_summary.csv", "\n".join(summary) + "\n", manifest, "summary", "summary")


def _run_csr(cfg: ExperimentConfig, out: Path, manifest: dict, workers: int) -> None:
    grid, per_point = _spectra(cfg, workers)
    summary = ["tau,epsilon,n_ratios,frac_below_0.05,flat_expectation,depletion_zscore"]
    for (tau, eps), clouds in zip(grid, per_point):
        tag = _tag(tau=tau, eps=eps)
        ratios = np.concatenate([complex_spacing_ratios(ev).ratios for ev in clouds])
        lines = ["re,im"]
        for z in ratios:
            lines.append(f"{_format(z.real)},{_format(z.imag)}")
        _write(out / f"csr_{tag}.csv", "\n".join(lines) + "\n", manifest, "ratios", tag)
        _write(
            out / f"csr_{tag}.hist.json",
            json.dumps(density_grid(ratios, bins=cfg.histogram_bins)),
            manifest, "histogram", tag,
        )
        n = ratios.size
        p_flat = 0.05**2  # uniform-on-the-disk mass of |z| <= 0.05
        count = int(np.sum(np.abs(ratios) <= 0.05))
        mu, sd = n * p_flat, math.sqrt(n * p_flat * (1 - p_flat))
        z_score = (mu - count) / sd
        summary.append(
            ",".join([
                _format(tau), _format(eps), str(n), _format(count / n), _format(p_flat),
                _format(z_score),
            ])
        )
        manifest["grid"].append(
            {"tau": tau, "epsilon": eps, "status": "ok", "n_ratios": n, "depletion_zscore": z_score}
        )
    _write(out / "csr_summary.csv", "\n".join(summary) + "\n", manifest, "summary", "summary")


def _run_phase_grid(cfg: ExperimentConfig, out: Path, manifest: dict, workers: int) -> None:
    lines = ["tau,epsilon,phase,outer,inner,center,radius,phi_max"]
    from .spectral import annular_boundaries, shifted_disk_boundary

    for tau in cfg.tau:
        for eps in cfg.epsilon:
            phase = classify_phase(eps, tau, cfg.kraus_count, cfg.dim, cfg.sigma, cfg.hbar)
            outer, inner = annular_boundaries(eps, cfg.kraus_count)
            center, radius = shifted_disk_boundary(eps, cfg.kraus_count)
            lines.append(
                ",".join([
                    _format(tau), _format(eps), phase, _format(outer),
                    _format(inner if inner is not None else np.nan),
                    _format(center), _format(radius),
                    _format(phi_max(tau, cfg.dim, cfg.sigma, cfg.hbar)),
                ])
            )
            manifest["grid"].append({"tau": tau, "epsilon": eps, "status": "ok", "phase": phase})
    _write(out / "phase_grid.csv", "\n".join(lines) + "\n", manifest, "grid", "phase-grid")


def _run_depth_grid(cfg: ExperimentConfig, out: Path, manifest: dict, workers: int) -> None:
    """Relative hole depth on the (tau, eps) grid, window fixed per tau from eps = 0.

    The isolated reference is the gamma = 0 closed form evaluated on the same
    step grid (identical to the eps = 0 channel), averaged over the same
    Hamiltonian ensemble; its smoothed minimum fixes the Thouless step and
    the depth window for every eps at that tau.
    """
    t_h = heisenberg_time(cfg.dim, cfg.sigma, cfg.hbar)
    taus = list(cfg.tau)
    j_max = {t: math.ceil(t_h / t) + 1 for t in taus}
    iso_params = EDParams(0.0, cfg.hbar)

    def worker(idx: int):
        h = _hamiltonian(cfg, idx)
        kraus = _kraus(cfg, idx)
        per_tau = []
        for tau in taus:
            times = np.arange(j_max[tau] + 1) * tau
            iso = ed_diagnostics(h, cfg.beta, iso_params, times)
            rows = []
            for eps in cfg.epsilon:
                if eps == 0.0:
                    rows.append(iso)
                    continue
                ch = _channel(cfg, h, kraus, tau, eps)
                rows.append(channel_diagnostics(ch, cfg.beta, j_max[tau], metadata={"mode": "depth-grid"}))
            per_tau.append((iso, rows))
        return per_tau

    iso_accs = {t: SeriesAccumulator() for t in taus}
    accs = {(t, e): SeriesAccumulator() for t in taus for e in cfg.epsilon}
    for per_tau in _ensemble_map(cfg, worker, workers):
        for tau, (iso, rows) in zip(taus, per_tau):
            iso_accs[tau].add(iso)
            for eps, s in zip(cfg.epsilon, rows):
                accs[(tau, eps)].add(s)

    lines = ["tau,epsilon,depth,isolated_depth,relative_depth,t_thouless,t_heisenberg"]
    for tau in taus:
        iso_mean = iso_accs[tau].finalize()
        t_th = estimate_thouless(iso_mean, t_h)
        d_iso = effective_depth(iso_mean, t_th, t_h, tau)
        for eps in cfg.epsilon:
            mean = accs[(tau, eps)].finalize()
            depth = effective_depth(mean, t_th, t_h, tau)
            rel = depth / d_iso if d_iso > 0 else np.nan
            lines.append(
                ",".join([
                    _format(tau), _format(eps), _format(depth), _format(d_iso),
                    _format(rel), _format(t_th), _format(t_h),
                ])
            )
            manifest["grid"].append(
                {"tau": tau, "epsilon": eps, "status": "ok", "relative_depth": rel}
            )
    _write(out / "depth_grid.csv", "\n".join(lines) + "\n", manifest, "grid", "depth-grid")


_RUNNERS = {
    "ed-sff": _run_ed_sff,
    "pqc-sff": _run_pqc_sff,
    "spectrum": _run_spectrum,
    "csr": _run_csr,
    "phase-grid": _run_phase_grid,
    "depth-grid": _run_depth_grid,
}


def run(cfg: ExperimentConfig, workers: int = 1) -> dict:
    """Execute a validated config; returns the manifest written next to the artifacts."""
    issues = validate_config(cfg)
    if issues:
        raise ValueError("invalid config: " + "; ".join(issues))
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "version": __version__,
        "mode": cfg.mode,
        "config": asdict(cfg),
        "seeds": {
            "master": cfg.master_seed,
            "hamiltonian_stream": _GOE_STREAM,
            "environment_stream": _CUE_STREAM,
        },
        "started": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "artifacts": [],
        "grid": [],
        "errors": [],
    }
    t0 = time.perf_counter()
    try:
        _RUNNERS[cfg.mode](cfg, out, manifest, workers)
    except Exception as exc:  # record, then re-raise after writing the manifest
        manifest["errors"].append(str(exc))
        raise
    finally:
        manifest["wall_seconds"] = time.perf_counter() - t0
        manifest["finished"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
        (out / "manifest.json").write_text(json.dumps(manifest, indent=2, default=float))
    return manifest


# ---------------------------------------------------------------------------
# gnuplot script emission


def emit_gnuplot_script(manifest: dict) -> str:
    """Gnuplot commands that render a run's artifacts next to the manifest."""
    mode = manifest.get("mode", "")
    lines = [
        "# generated by openchaos plot-script",
        "set datafile separator ','",
        "set terminal pngcairo size 900,650",
    ]
    series = [a for a in manifest.get("artifacts", []) if a["kind"] == "series"]
    clouds = [a for a in manifest.get("artifacts", []) if a["kind"] == "cloud"]
    ratios = [a for a in manifest.get("artifacts", []) if a["kind"] == "ratios"]
    boundaries = {a["label"]: a for a in manifest.get("artifacts", []) if a["kind"] == "boundary"}
    for art in series:
        png = art["path"].replace(".csv", ".png")
        lines += [
            f"set output '{png}'",
            "set logscale xy",
            "set xlabel 't'",
            "set ylabel 'SFF'",
            f"plot '{art['path']}' every ::1 using 1:2 with lines lw 2 title 'SFF', \\",
            f"     '{art['path']}' every ::1 using 1:6 with lines dashtype 2 title 'lower bound', \\",
            f"     '{art['path']}' every ::1 using 1:7 with lines dashtype 3 title 'upper bound'",
        ]
    for art in clouds + ratios:
        png = art["path"].replace(".csv", ".png")
        lines += [
            f"set output '{png}'",
            "unset logscale",
            "set size ratio -1",
            "set xlabel 'Re'",
            "set ylabel 'Im'",
        ]
        plot = f"plot '{art['path']}' every ::1 using 1:2 with dots title 'spectrum'"
        b = boundaries.get(art["label"])
        if b is not None:
            plot += f", \\\n     '{b['path']}' every ::1 using 1:2 with lines lc 'black' title 'boundary'"
        lines.append(plot)
    if mode == "depth-grid":
        lines += [
            "set output 'depth_grid.png'",
            "set logscale x",
            "set xlabel 'tau'",
            "set ylabel 'relative depth'",
            "plot 'depth_grid.csv' every ::1 using 1:5 with points pt 7 title 'D/D_0'",
        ]
    if mode == "phase-grid":
        lines += [
            "set output 'phase_grid.png'",
            "set logscale x",
            "set xlabel 'tau'",
            "set ylabel 'epsilon'",
            "plot 'phase_grid.csv' every ::1 using 1:2 with points pt 5 title 'grid'",
        ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# entry point


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="openchaos",
        description="Seeded random-matrix experiments: dephasing and channel diagnostics, "
        "superoperator spectra, spacing ratios and hole depths.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config and write CSV artifacts + manifest")
    p_run.add_argument("config", help="path to a JSON config file")
    p_run.add_argument("--workers", type=int, default=1, help="thread workers over realizations")
    p_run.add_argument("--output-dir", default=None, help="override the config output_dir")
    p_run.add_argument("--full-scale", action="store_true", help="full-scale dim and ensemble sizes")

    p_val = sub.add_parser("validate", help="check a config without running it")
    p_val.add_argument("config", help="path to a JSON config file")

    p_plot = sub.add_parser("plot-script", help="emit a gnuplot script for a finished run")
    p_plot.add_argument("manifest", help="path to a run's manifest.json")
    p_plot.add_argument("-o", "--output", default=None, help="write the script here instead of stdout")

    args = parser.parse_args(argv)

    if args.command in ("run", "validate"):
        try:
            cfg = load_config(args.config)
        except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        if args.command == "run":
            if args.output_dir:
                cfg.output_dir = args.output_dir
            if args.full_scale:
                cfg.full_scale = True
                cfg.dim = max(cfg.dim, 64)
                cfg.realizations = _FULL_SCALE_REALIZATIONS.get(cfg.mode, cfg.realizations)
                cfg.allow_large = True
        issues = validate_config(cfg)
        if issues:
            for issue in issues:
                print(f"config error: {issue}", file=sys.stderr)
            return 1
        if args.command == "validate":
            print("config ok")
            return 0
        try:
            manifest = run(cfg, workers=args.workers)
        except Exception as exc:
            print(f"runtime error: {exc}", file=sys.stderr)
            return 2
        print(f"wrote {len(manifest['artifacts'])} artifacts to {cfg.output_dir}")
        return 0

    # plot-script
    try:
        manifest = json.loads(Path(args.manifest).read_text())
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"config error: manifest is not valid JSON: {exc}", file=sys.stderr)
        return 1
    script = emit_gnuplot_script(manifest)
    if args.output:
        Path(args.output).write_text(script)
    else:
        print(script, end="")
    return 0


if __name__ == "__main__":
    sys.exit(main())
