"""Experiment runners that turn a config into a :class:`ResultTable`.

Four experiments are provided: eigenvalue spectra of a RIS correlation,
effective rank versus spacing, and estimator NMSE versus SNR or versus
spacing. Sweep points run in a thread pool; rows are assembled in sweep
order, and every random stream is keyed by seed and trial, so the output
does not depend on the number of workers.
"""

import csv
import dataclasses
import datetime
import enum
import fcntl
import hashlib
import io
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .config import Experiment
from .correlation import (CorrelationKind, subspace_correlation,
                          synthesize_cluster_correlation)
from .coupling import CouplingMatrix, array_coupling, coupled_correlation
from .errors import InvalidArgumentError, MatrixFormatError
from .estimators import (ls_error_covariance, ls_estimate, mmse_error_covariance,
                         mmse_estimate, rsls_estimate, rsls_expected_error)
from .geometry import ArrayConfig, Role
from .matrix_io import MAGICS, read_matrix, write_matrix
from .montecarlo import simulate_observations, trial_rng
from .scenario import Scenario
from .spectral import DB_FLOOR, effective_rank, hermitian_eig
from .training import (TrainingDesign, apply_adjoint, dft_phase_schedule, gram,
                       orthonormal_pilots)

log = logging.getLogger("risnf")

_KIND = {"exact": CorrelationKind.EXACT_CLUSTERED, "subspace": CorrelationKind.SUBSPACE}


# ---------------------------------------------------------------- tables

@dataclass
class ResultTable:
    """Rectangular table of scalars plus provenance metadata."""

    columns: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        for r in self.rows:
            if len(r) != len(self.columns):
                raise InvalidArgumentError("ragged result table")

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def select(self, **where):
        idx = {self.columns.index(k): v for k, v in where.items()}
        return [dict(zip(self.columns, r)) for r in self.rows
                if all(r[i] == v for i, v in idx.items())]

    def to_csv(self):
        """CSV text: ``# key: value`` metadata lines, header, data rows."""
        buf = io.StringIO()
        for k, v in self.metadata.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(v) for v in r])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(self.to_csv())


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "" if np.isnan(v) else repr(float(v))
    return str(v)


def read_csv(path):
    """Inverse of :meth:`ResultTable.write_csv`; values come back as strings."""
    meta, lines = {}, []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# "):
                k, _, v = line[2:].rstrip("\n").partition(": ")
                meta[k] = v
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    return ResultTable(rows[0], [tuple(r) for r in rows[1:]], meta)


def _metadata(config, seed):
    return {"experiment": config.experiment.value,
            "config_hash": config.config_hash,
            "seed": seed,
            "version": f"risnf {__version__}",
            "timestamp": datetime.datetime.now(datetime.timezone.utc)
            .isoformat(timespec="seconds")}


# ---------------------------------------------------------------- cache

def _plain(obj):
    if dataclasses.is_dataclass(obj):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return repr(float(obj))
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def key_hash(key):
    """Stable hash of a cache key built from dataclasses, tuples and scalars."""
    if isinstance(key, str):
        return key
    blob = json.dumps(_plain(key), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:32]


def cache_or_compute(key, producer, cache_dir, magic="correlation"):
    """Path of the cached matrix for ``key``, computing it on a miss.

    ``producer()`` returns the matrix. A cache file with a bad header or size
    is recomputed and rewritten with a warning. Concurrent processes
    serialize on an advisory lock per key.
    """
    os.makedirs(cache_dir, exist_ok=True)
    h = key_hash(key)
    path = os.path.join(cache_dir, f"{h}.{MAGICS.get(magic, magic).decode().lower()}")
    with open(path + ".lock", "w") as lock:
        fcntl.flock(lock, fcntl.LOCK_EX)
        try:
            if os.path.exists(path):
                try:
                    read_matrix(path, magic)
                    log.info("cache hit %s", h)
                    return path
                except MatrixFormatError as exc:
                    log.warning("corrupt cache file %s (%s); recomputing", path, exc)
            else:
                log.info("cache miss %s", h)
            write_matrix(path, producer(), magic)
            return path
        finally:
            fcntl.flock(lock, fcntl.LOCK_UN)


class MatrixStore:
    """Disk-backed store usable as ``Scenario.statistics(seed, store=...)``."""

    def __init__(self, cache_dir):
        self.cache_dir = cache_dir

    def __call__(self, key, producer, magic):
        path = cache_or_compute(key, producer, self.cache_dir, magic)
        return read_matrix(path, magic)[0]


def _load(store, key, producer, magic):
    return store(key, producer, magic) if store else producer()


def _pool_map(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _db(x):
    with np.errstate(divide="ignore"):
        return float(max(10 * np.log10(x), DB_FLOOR)) if x > 0 else DB_FLOOR


# ---------------------------------------------------------------- spectra

def _ris_correlations(config, arr, store):
    """Exact and subspace RIS correlations, each without and with coupling."""
    sys_ = config.system
    clusters = config.clusters.with_seed(config.seed)
    exact = _load(store, {"what": "exact", "system": sys_, "array": arr,
                          "clusters": clusters},
                  lambda: synthesize_cluster_correlation(sys_, arr, clusters).entries,
                  "correlation")
    sub = _load(store, {"what": "subspace", "system": sys_, "array": arr,
                        "grid": config.grid,
                        "distance_range": config.clusters.distance_range},
                lambda: subspace_correlation(sys_, arr, config.grid,
                                             config.clusters.distance_range).entries,
                "correlation")
    out = {("exact", False): exact, ("subspace", False): sub}
    if config.coupling_enabled:
        M = _load(store, {"what": "coupling", "system": sys_, "array": arr,
                          "dipole": config.dipole},
                  lambda: array_coupling(arr, sys_, config.dipole).entries, "coupling")
        cm = CouplingMatrix(M)
        for kind in ("exact", "subspace"):
            out[(kind, True)] = coupled_correlation(
                out[(kind, False)], cm, config.literal_paper_form).entries
    else:
        for kind in ("exact", "subspace"):
            out[(kind, True)] = out[(kind, False)]
    return out


def run_eigen_spectrum(config, threads=1, store=None):
    """Sorted eigenvalues (dB) of exact and subspace RIS correlations, MC off/on."""
    if config.experiment != Experiment.EIGEN_SPECTRUM:
        raise InvalidArgumentError("config is not an EigenSpectrum experiment")
    h, v, _ = config.arrays["ris"]

    def point(spacing):
        arr = ArrayConfig.from_wavelengths(Role.RIS, h, v, spacing, config.system)
        mats = _ris_correlations(config, arr, store)
        rows = []
        for kind in ("exact", "subspace"):
            for mc in (False, True):
                es = hermitian_eig(mats[(kind, mc)])
                rep = effective_rank(es, config.eps)
                rows += [(spacing, kind, mc, i + 1, float(d), rep.rank)
                         for i, d in enumerate(rep.eigenvalues_db)]
        return rows

    rows = [r for part in _pool_map(point, config.spacings, threads) for r in part]
    return ResultTable(["spacing_wl", "statistics_kind", "coupling", "index",
                        "eigenvalue_db", "effective_rank"], rows,
                       _metadata(config, config.seed))


def run_rank_sweep(config, threads=1, store=None):
    """Effective rank against spacing for each RIS size, kind and coupling state."""
    if config.experiment != Experiment.RANK_VS_SPACING:
        raise InvalidArgumentError("config is not a RankVsSpacing experiment")
    points = [(s, d) for s in config.ris_sizes for d in config.spacings]

    def point(p):
        (h, v), spacing = p
        arr = ArrayConfig.from_wavelengths(Role.RIS, h, v, spacing, config.system)
        mats = _ris_correlations(config, arr, store)
        rows = []
        for kind in ("exact", "subspace"):
            for mc in (False, True):
                es = hermitian_eig(mats[(kind, mc)])
                rows += [(h * v, h, v, spacing, kind, mc, eps,
                          effective_rank(es, eps).rank) for eps in config.rank_thresholds]
        return rows

    rows = [r for part in _pool_map(point, points, threads) for r in part]
    return ResultTable(["K", "count_h", "count_v", "spacing_wl", "statistics_kind",
                        "coupling", "eps", "rank"], rows, _metadata(config, config.seed))


# ---------------------------------------------------------------- NMSE

def _variants(config):
    """``(estimator, statistics_kind, mc_aware)`` triples in output order."""
    out = []
    for est in config.estimators:
        if est == "LS":
            out.append(("LS", "none", "n/a"))
        elif est == "MMSE":
            out.append(("MMSE", "exact", "true"))
        else:
            for kind in config.statistics:
                aware = ("true", "false") if config.experiment == Experiment.NMSE_VS_SNR \
                    else ("true",)
                out += [("RS-LS", kind, a) for a in aware]
    return out


def _scenario(config, spacing=None):
    arrs = dict(config.arrays)
    if spacing is not None:
        arrs = {k: (h, v, spacing) for k, (h, v, _) in arrs.items()}
    return Scenario.from_wavelengths(
        config.system, arrs["ris"], arrs["ue"], arrs["bs"], clusters=config.clusters,
        dipole=config.dipole, grid=config.grid, eps=config.eps,
        coupling=config.coupling_enabled, literal_paper_form=config.literal_paper_form)


def _seed_nmse(config, scenario, seed, snrs_db, store):
    """Per-variant analytic NMSE and Monte Carlo error sums for one cluster seed.

    Returns ``{variant: (analytic[], err_sum[], ref_sum[])}`` over ``snrs_db``.
    """
    K, N, M = scenario.dims
    T_p = config.T_p or K * N
    phi = dft_phase_schedule(K, T_p, N)
    X = orthonormal_pilots(N)
    G = gram(phi, N, M)
    st = scenario.statistics(seed, store)
    coupled = config.coupling_enabled
    R = st.covariance(CorrelationKind.EXACT_CLUSTERED, coupled)
    variants = _variants(config)
    bases = {v: st.bases(_KIND[v[1]], v[2] == "true")
             for v in variants if v[0] == "RS-LS"}
    designs = [TrainingDesign(T_p, config.noise_variance * 10 ** (s / 10),
                              config.noise_variance) for s in snrs_db]
    for d in designs:
        d.validate(K, N)

    analytic = {v: [] for v in variants}
    for d in designs:
        for v in variants:
            if v[0] == "LS":
                e = ls_error_covariance(phi, d.snr, N, M).trace
            elif v[0] == "MMSE":
                e = mmse_error_covariance(R, G, d.snr).trace
            else:
                e = rsls_expected_error(bases[v], R, G, d.snr)
            analytic[v].append(e / R.trace)

    err = {v: np.zeros(len(designs)) for v in variants}
    ref = np.zeros(len(designs))
    for t in range(config.trials):
        rng = trial_rng(seed, t)
        real = st.sample(rng, coupled)
        c2 = float(np.sum(np.abs(real.c) ** 2))
        for i, d in enumerate(designs):
            z = apply_adjoint(phi, X, simulate_observations(d, phi, X, real, rng))
            ref[i] += c2
            for v in variants:
                if v[0] == "LS":
                    c_hat = ls_estimate(z, G, d.pilot_power)
                elif v[0] == "MMSE":
                    c_hat = mmse_estimate(z, G, R, d)
                else:
                    c_hat = rsls_estimate(z, G, bases[v], d.pilot_power)
                err[v][i] += float(np.sum(np.abs(c_hat - real.c) ** 2))
    return {v: (analytic[v], err[v], ref) for v in variants}


def _aggregate(parts, variants, n_points):
    """Average analytic NMSE over seeds (linear) and pool Monte Carlo sums."""
    out = {}
    for v in variants:
        ana = np.mean([p[v][0] for p in parts], axis=0)
        err = np.sum([p[v][1] for p in parts], axis=0)
        ref = np.sum([p[v][2] for p in parts], axis=0)
        mc = [(_db(e / r) if r > 0 else float("nan")) for e, r in zip(err, ref)]
        spread = np.std([[_db(a) for a in p[v][0]] for p in parts], axis=0)
        out[v] = ([_db(a) for a in ana], mc, [float(x) for x in spread])
    return out


def run_nmse_vs_snr(config, threads=1, store=None):
    """Analytic and Monte Carlo NMSE (dB) against SNR for every estimator variant."""
    if config.experiment != Experiment.NMSE_VS_SNR:
        raise InvalidArgumentError("config is not an NmseVsSnr experiment")
    sc = _scenario(config)
    variants = _variants(config)
    parts = _pool_map(lambda s: _seed_nmse(config, sc, s, config.snr_db, store),
                      config.seeds, threads)
    agg = _aggregate(parts, variants, len(config.snr_db))
    rows = [(snr, *v, agg[v][0][i], agg[v][1][i], agg[v][2][i])
            for i, snr in enumerate(config.snr_db) for v in variants]
    return ResultTable(["snr_db", "estimator", "statistics_kind", "mc_aware",
                        "nmse_analytic_db", "nmse_mc_db", "seed_spread_db"], rows,
                       _metadata(config, config.seed))


def run_nmse_vs_spacing(config, threads=1, store=None):
    """NMSE (dB) against a spacing common to all three arrays, at a fixed SNR."""
    if config.experiment != Experiment.NMSE_VS_SPACING:
        raise InvalidArgumentError("config is not an NmseVsSpacing experiment")
    variants = _variants(config)
    snr = (config.fixed_snr_db,)
    points = [(d, s) for d in config.spacings for s in config.seeds]
    scenarios = {d: _scenario(config, d) for d in config.spacings}
    parts = _pool_map(lambda p: _seed_nmse(config, scenarios[p[0]], p[1], snr, store),
                      points, threads)
    rows = []
    n = len(config.seeds)
    for j, d in enumerate(config.spacings):
        agg = _aggregate(parts[j * n:(j + 1) * n], variants, 1)
        rows += [(d, config.fixed_snr_db, *v, agg[v][0][0], agg[v][1][0], agg[v][2][0])
                 for v in variants]
    return ResultTable(["spacing_wl", "snr_db", "estimator", "statistics_kind",
                        "mc_aware", "nmse_analytic_db", "nmse_mc_db", "seed_spread_db"],
                       rows,
                       _metadata(config, config.seed))


RUNNERS = {Experiment.EIGEN_SPECTRUM: run_eigen_spectrum,
           Experiment.RANK_VS_SPACING: run_rank_sweep,
           Experiment.NMSE_VS_SNR: run_nmse_vs_snr,
           Experiment.NMSE_VS_SPACING: run_nmse_vs_spacing}


def run_experiment(config, threads=1, store=None):
    return RUNNERS[config.experiment](config, threads=threads, store=store)
