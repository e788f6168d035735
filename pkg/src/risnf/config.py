"""Experiment configuration: strict JSON parsing with line-precise errors.

A config is a single JSON object. Every section is optional and falls back
to the defaults of the chosen experiment; unknown keys are rejected so that
typos do not silently run the default. Spacings are in wavelengths, SNRs in
dB, the carrier in Hz and distances in meters.

Example::

    {
      "experiment": "NmseVsSnr",
      "arrays": {"ris": {"count_h": 10, "count_v": 10, "spacing": 0.125}},
      "sweep": {"snr_db": [-5, 0, 5, 10]},
      "trials": 200
    }
"""

import dataclasses
import hashlib
import json
import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .correlation import ClusterSet, SubspaceIntegrationGrid
from .coupling import DipoleConfig
from .errors import ConfigError, RisnfError
from .geometry import SystemConfig
from .spectral import DEFAULT_EPS


class Experiment(Enum):
    EIGEN_SPECTRUM = "EigenSpectrum"
    RANK_VS_SPACING = "RankVsSpacing"
    NMSE_VS_SNR = "NmseVsSnr"
    NMSE_VS_SPACING = "NmseVsSpacing"

    @classmethod
    def parse(cls, name):
        """Accept the enum value or a dashed CLI alias such as ``nmse-vs-snr``."""
        if isinstance(name, cls):
            return name
        key = str(name).replace("-", "").replace("_", "").lower()
        for e in cls:
            if e.value.lower() == key:
                return e
        for alias, e in _ALIASES.items():
            if alias == key:
                return e
        raise ConfigError(f"unknown experiment {name!r}; expected one of "
                          + ", ".join(e.value for e in cls))


_ALIASES = {"eigen": Experiment.EIGEN_SPECTRUM,
            "ranksweep": Experiment.RANK_VS_SPACING,
            "rank": Experiment.RANK_VS_SPACING}

ESTIMATORS = ("LS", "MMSE", "RS-LS")
STATISTICS = ("exact", "subspace")

_DEFAULTS = {
    Experiment.EIGEN_SPECTRUM: dict(
        arrays={"ris": (32, 32, 0.5)}, spacings=(0.5, 0.25), seed_count=1, trials=0),
    Experiment.RANK_VS_SPACING: dict(
        arrays={"ris": (16, 16, 0.5)}, spacings=(1 / 8, 1 / 5, 1 / 4, 1 / 3, 1 / 2),
        ris_sizes=((16, 16), (32, 16), (32, 32)), rank_thresholds=(1e-3, 1e-5, 1e-7),
        seed_count=1, trials=0),
    Experiment.NMSE_VS_SNR: dict(
        arrays={"ris": (10, 10, 1 / 8), "ue": (2, 2, 1 / 8), "bs": (4, 4, 1 / 4)},
        snr_db=(-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0),
        estimators=ESTIMATORS, statistics=STATISTICS, seed_count=10, trials=200),
    Experiment.NMSE_VS_SPACING: dict(
        arrays={"ris": (16, 8, 0.5), "ue": (2, 2, 0.5), "bs": (4, 2, 0.5)},
        spacings=(1 / 20, 1 / 10, 1 / 8, 1 / 5, 1 / 4, 1 / 3, 1 / 2),
        estimators=("LS", "RS-LS"), statistics=("exact",), seed_count=10, trials=200),
}

# section -> key -> expected JSON type(s)
_NUM = (int, float)
_SCHEMA = {
    "": {"experiment": str, "system": dict, "arrays": dict, "clusters": dict,
         "subspace_grid": dict, "coupling": dict, "training": dict, "sweep": dict,
         "estimators": list, "statistics": list, "seed": int, "seed_count": int,
         "trials": int, "rank_threshold": _NUM, "rank_thresholds": list,
         "output_dir": str, "cache_dir": str},
    "system": {"carrier_frequency_hz": _NUM},
    "arrays": {"ris": dict, "ue": dict, "bs": dict},
    "array": {"count_h": int, "count_v": int, "spacing": _NUM},
    "clusters": {"count": int, "rays_per_cluster": int, "angular_spread_deg": _NUM,
                 "distance_spread_m": _NUM, "distance_range_m": list,
                 "solid_angle_weighting": bool},
    "subspace_grid": {"nodes_az": int, "nodes_el": int, "nodes_d": int,
                      "quadrature": str, "samples": int, "seed": int},
    "coupling": {"enabled": bool, "dissipation_resistance": _NUM, "wire_radius": _NUM,
                 "literal_paper_form": bool},
    "training": {"T_p": int, "noise_variance": _NUM, "snr_db": _NUM},
    "sweep": {"snr_db": list, "spacings": list, "ris_sizes": list},
}


def _locate(text, path):
    """1-based line of the key at ``path`` (a tuple of keys) in ``text``."""
    pos = 0
    for key in path:
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment parameters."""

    experiment: Experiment
    system: SystemConfig = SystemConfig()
    arrays: dict = field(default_factory=dict)
    clusters: ClusterSet = ClusterSet()
    grid: SubspaceIntegrationGrid = SubspaceIntegrationGrid()
    dipole: DipoleConfig = DipoleConfig()
    coupling_enabled: bool = True
    literal_paper_form: bool = False
    T_p: int = None
    noise_variance: float = 1.0
    fixed_snr_db: float = 5.0
    snr_db: tuple = ()
    spacings: tuple = ()
    ris_sizes: tuple = ()
    estimators: tuple = ()
    statistics: tuple = ()
    seed: int = 0
    seed_count: int = 1
    trials: int = 0
    eps: float = DEFAULT_EPS
    rank_thresholds: tuple = (DEFAULT_EPS,)
    output_dir: str = "results"
    cache_dir: str = None

    @classmethod
    def defaults(cls, experiment):
        experiment = Experiment.parse(experiment)
        return cls(experiment, **_DEFAULTS[experiment])

    @property
    def seeds(self):
        return tuple(self.seed + i for i in range(self.seed_count))

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        try:
            return dataclasses.replace(self, **kw)._validated()
        except RisnfError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical(self):
        """JSON-ready dict of everything that influences the results."""
        c = self.clusters
        return {
            "experiment": self.experiment.value,
            "carrier_frequency_hz": self.system.carrier_frequency,
            "arrays": {k: list(v) for k, v in sorted(self.arrays.items())},
            "clusters": [c.cluster_count, c.rays_per_cluster, c.angular_spread_std,
                         c.distance_spread_std, list(c.distance_range),
                         c.solid_angle_weighting],
            "grid": dataclasses.astuple(self.grid),
            "dipole": dataclasses.astuple(self.dipole),
            "coupling": [self.coupling_enabled, self.literal_paper_form],
            "training": [self.T_p, self.noise_variance, self.fixed_snr_db],
            "sweep": [list(self.snr_db), list(self.spacings),
                      [list(s) for s in self.ris_sizes]],
            "estimators": list(self.estimators),
            "statistics": list(self.statistics),
            "seeds": list(self.seeds),
            "trials": self.trials,
            "eps": self.eps,
            "rank_thresholds": list(self.rank_thresholds),
        }

    @property
    def config_hash(self):
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def _validated(self):
        e = self.experiment
        if e in (Experiment.EIGEN_SPECTRUM, Experiment.RANK_VS_SPACING,
                 Experiment.NMSE_VS_SPACING) and not self.spacings:
            raise ConfigError("sweep.spacings must not be empty")
        if e == Experiment.NMSE_VS_SNR and not self.snr_db:
            raise ConfigError("sweep.snr_db must not be empty")
        if e == Experiment.RANK_VS_SPACING and not self.ris_sizes:
            raise ConfigError("sweep.ris_sizes must not be empty")
        if e in (Experiment.NMSE_VS_SNR, Experiment.NMSE_VS_SPACING):
            if not self.estimators:
                raise ConfigError("estimators must not be empty")
            if "RS-LS" in self.estimators and not self.statistics:
                raise ConfigError("statistics must not be empty when RS-LS is requested")
            for name in ("ris", "ue", "bs"):
                if name not in self.arrays:
                    raise ConfigError(f"arrays.{name} is required for {e.value}")
        if any(not s > 0 for s in self.spacings):
            raise ConfigError("spacings must be positive")
        if self.seed_count < 1:
            raise ConfigError("seed_count must be at least 1")
        if self.trials < 0:
            raise ConfigError("trials must be non-negative")
        if not 0 < self.eps < 1:
            raise ConfigError("rank_threshold must lie in (0, 1)")
        if not self.rank_thresholds or not all(0 < e < 1 for e in self.rank_thresholds):
            raise ConfigError("rank_thresholds must be a nonempty list in (0, 1)")
        if not self.noise_variance > 0:
            raise ConfigError("training.noise_variance must be positive")
        return self


def _check_types(data, section, path, text, source):
    schema = _SCHEMA[section]
    for key, value in data.items():
        where = f"{source}:{_locate(text, path + (key,))}"
        if key not in schema:
            dotted = ".".join(path) or "top level"
            raise ConfigError(f"{where}: unknown key {key!r} in {dotted}")
        want = schema[key]
        ok = isinstance(value, want) and not (isinstance(value, bool) and want is not bool)
        if not ok:
            name = want.__name__ if isinstance(want, type) else "number"
            raise ConfigError(f"{where}: {'.'.join(path + (key,))} must be {name}, "
                              f"got {type(value).__name__}")
        if isinstance(value, dict):
            sub = "array" if section == "arrays" else key
            _check_types(value, sub, path + (key,), text, source)


def _number_list(values, where, what):
    if not all(isinstance(v, _NUM) and not isinstance(v, bool) for v in values):
        raise ConfigError(f"{where}: {what} must be a list of numbers")
    return tuple(float(v) for v in values)


def parse_config(text, source="<config>", experiment=None):
    """Parse and validate a JSON config.

    ``experiment`` (from the command line) takes effect when the file has no
    ``experiment`` key and must agree with it otherwise.
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{source}:1: config must be a JSON object")
    _check_types(data, "", (), text, source)
    at = lambda *p: f"{source}:{_locate(text, p)}"

    name = data.get("experiment", experiment)
    if name is None:
        raise ConfigError(f"{source}:1: no experiment given")
    try:
        exp = Experiment.parse(name)
    except ConfigError as exc:
        raise ConfigError(f"{at('experiment')}: {exc}") from exc
    if experiment is not None and Experiment.parse(experiment) != exp:
        raise ConfigError(f"{at('experiment')}: file is for {exp.value}, "
                          f"command line asked for {Experiment.parse(experiment).value}")

    cfg = ExperimentConfig.defaults(exp)
    kw = {}
    try:
        if "system" in data:
            kw["system"] = SystemConfig(
                float(data["system"].get("carrier_frequency_hz", 3e9)))
        arrays = dict(cfg.arrays)
        for name, entry in data.get("arrays", {}).items():
            old = arrays.get(name, (1, 1, 0.5))
            arrays[name] = (entry.get("count_h", old[0]), entry.get("count_v", old[1]),
                            float(entry.get("spacing", old[2])))
            if min(arrays[name][:2]) < 1 or not arrays[name][2] > 0:
                raise ConfigError(f"{at('arrays', name)}: counts must be >= 1 "
                                  "and spacing positive")
        kw["arrays"] = arrays

        cl = data.get("clusters", {})
        rng = cl.get("distance_range_m", [10.0, 20.0])
        rng = _number_list(rng, at("clusters", "distance_range_m"), "distance_range_m")
        if len(rng) != 2:
            raise ConfigError(f"{at('clusters', 'distance_range_m')}: "
                              "distance_range_m needs two entries")
        kw["clusters"] = ClusterSet(
            cluster_count=cl.get("count", 10),
            rays_per_cluster=cl.get("rays_per_cluster", 100),
            angular_spread_std=float(np.deg2rad(cl.get("angular_spread_deg", 5.0))),
            distance_spread_std=float(cl.get("distance_spread_m", 0.5)),
            distance_range=rng,
            solid_angle_weighting=cl.get("solid_angle_weighting", False))

        g = data.get("subspace_grid", {})
        kw["grid"] = SubspaceIntegrationGrid(
            g.get("nodes_az", 24), g.get("nodes_el", 24), g.get("nodes_d", 8),
            g.get("quadrature", "gauss-legendre"), g.get("seed", 0),
            g.get("samples", 100_000), cl.get("solid_angle_weighting", False))

        c = data.get("coupling", {})
        kw["coupling_enabled"] = c.get("enabled", True)
        kw["literal_paper_form"] = c.get("literal_paper_form", False)
        kw["dipole"] = DipoleConfig(
            dissipation_resistance=float(c.get("dissipation_resistance", 73.08)),
            wire_radius=float(c.get("wire_radius", 1e-3)))

        t = data.get("training", {})
        kw["T_p"] = t.get("T_p")
        kw["noise_variance"] = float(t.get("noise_variance", 1.0))
        kw["fixed_snr_db"] = float(t.get("snr_db", 5.0))

        sw = data.get("sweep", {})
        if "snr_db" in sw:
            kw["snr_db"] = _number_list(sw["snr_db"], at("sweep", "snr_db"), "snr_db")
        if "spacings" in sw:
            kw["spacings"] = _number_list(sw["spacings"], at("sweep", "spacings"),
                                          "spacings")
        if "ris_sizes" in sw:
            sizes = sw["ris_sizes"]
            if not all(isinstance(s, list) and len(s) == 2
                       and all(isinstance(v, int) and v > 0 for v in s) for s in sizes):
                raise ConfigError(f"{at('sweep', 'ris_sizes')}: ris_sizes must be a "
                                  "list of [count_h, count_v] pairs")
            kw["ris_sizes"] = tuple(tuple(s) for s in sizes)

        for key, allowed in (("estimators", ESTIMATORS), ("statistics", STATISTICS)):
            if key in data:
                bad = [v for v in data[key] if v not in allowed]
                if bad:
                    raise ConfigError(f"{at(key)}: unknown {key} {bad}; "
                                      f"allowed: {list(allowed)}")
                kw[key] = tuple(data[key])

        for key in ("seed", "seed_count", "trials", "output_dir", "cache_dir"):
            if key in data:
                kw[key] = data[key]
        if "rank_threshold" in data:
            kw["eps"] = float(data["rank_threshold"])
            kw["rank_thresholds"] = (kw["eps"],)
        if "rank_thresholds" in data:
            kw["rank_thresholds"] = _number_list(
                data["rank_thresholds"], at("rank_thresholds"), "rank_thresholds")
    except ConfigError:
        raise
    except RisnfError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    try:
        return dataclasses.replace(cfg, **kw)._validated()
    except ConfigError as exc:
        # point at the offending section when the message names one
        m = re.match(r"([a-z_]+)(?:\.([a-z_]+))?", str(exc))
        path = tuple(p for p in (m.groups() if m else ()) if p)
        raise ConfigError(f"{source}:{_locate(text, path) if path else 1}: {exc}") from exc


def load_config(path, experiment=None):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text, str(path), experiment)
