"""Scenario generators and the replication experiment harness.

Canonical scenarios (parameters are implementer-chosen fixtures, versioned
here; acceptance uses trend tolerances, not exact selection percentages):

* M1: two moderately overlapping spherical clusters in 2-D,
* M2: four distinct spherical clusters at (+-4, +-4) in 2-D,
* M3: six spherical clusters on a regular hexagon of circumradius 6 in 2-D,
* M4U: the U-shape, x ~ U(-1.5, 1.5), y ~ U(x^2 - 1, x^2 + 1),
* M5/M6/M7: M3 in the first two coordinates plus standard-normal
  coordinates up to D = 4 / 8 / 12.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, FitFailureError
from .kernels import GaussianKernel
from .mixture import FitConfig, GaussianMixture
from .selection import CRITERIA, scan, standardize
from .tuning import recommend_h

__all__ = [
    "ScenarioSpec",
    "ScanConfig",
    "FrequencyTable",
    "canonical_mixture",
    "generate",
    "run_experiment",
]

_SCENARIO_DIMS = {"M1": 2, "M2": 2, "M3": 2, "M4U": 2, "M5": 4, "M6": 8, "M7": 12}


def _hexagon_means(radius=6.0):
    angles = np.arange(6) * np.pi / 3.0
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


def canonical_mixture(scenario_id) -> GaussianMixture:
    """The true mixture behind a canonical scenario (not defined for M4U)."""
    if scenario_id == "M1":
        means = np.array([[0.0, 0.0], [2.5, 0.0]])
    elif scenario_id == "M2":
        means = np.array([[4.0, 4.0], [4.0, -4.0], [-4.0, 4.0], [-4.0, -4.0]])
    elif scenario_id in ("M3", "M5", "M6", "M7"):
        means = _hexagon_means()
        d = _SCENARIO_DIMS[scenario_id]
        if d > 2:
            means = np.hstack([means, np.zeros((6, d - 2))])
    else:
        raise ConfigurationError(f"no canonical mixture for scenario {scenario_id!r}")
    k, d = means.shape
    return GaussianMixture(
        weights=np.full(k, 1.0 / k),
        means=means,
        covs=np.array([np.eye(d)] * k),
        structure="spherical",
    )


@dataclass(frozen=True)
class ScenarioSpec:
    id: str  # M1, M2, M3, M4U, M5, M6, M7 or "custom"
    n: int
    custom: GaussianMixture | None = None

    def __post_init__(self):
        if self.id != "custom" and self.id not in _SCENARIO_DIMS:
            raise ConfigurationError(f"unknown scenario id {self.id!r}")
        if self.id == "custom" and self.custom is None:
            raise ConfigurationError("custom scenario needs a mixture")
        if self.n < 1:
            raise ConfigurationError("n must be positive")

    @property
    def dim(self) -> int:
        return self.custom.dim if self.id == "custom" else _SCENARIO_DIMS[self.id]


def generate(spec: ScenarioSpec, seed=None) -> np.ndarray:
    """One dataset from a scenario; deterministic for a fixed seed."""
    if spec.id == "M4U":
        rng = np.random.default_rng(seed)
        x = rng.uniform(-1.5, 1.5, size=spec.n)
        y = rng.uniform(x**2 - 1.0, x**2 + 1.0)
        return np.column_stack([x, y])
    mix = spec.custom if spec.id == "custom" else canonical_mixture(spec.id)
    return mix.sample(spec.n, seed=seed)


@dataclass(frozen=True)
class ScanConfig:
    k_min: int = 1
    k_max: int = 8
    h: float | str = "auto"  # "auto" resolves through the sDOF rule of thumb
    structure: str | None = None  # None: full for D=2, diagonal for D>=4
    fit: FitConfig = field(default_factory=FitConfig)

    def resolve_structure(self, d) -> str:
        if self.structure is not None:
            return self.structure
        return "full" if d <= 2 else "diagonal"


@dataclass
class FrequencyTable:
    """Selection counts per criterion over replications."""

    counts: dict  # criterion -> {label: count}, labels are "1", "2", ..., "None", "Failed"
    reps: int

    def row(self, criterion) -> dict:
        return dict(self.counts.get(criterion, {}))

    def to_json(self, **kwargs) -> str:
        return json.dumps({"reps": self.reps, "counts": self.counts}, **kwargs)

    @classmethod
    def from_json(cls, s) -> "FrequencyTable":
        d = json.loads(s)
        return cls(counts=d["counts"], reps=d["reps"])

    def write_csv(self, path):
        labels = sorted(
            {lbl for row in self.counts.values() for lbl in row},
            key=lambda s: (s in ("None", "Failed"), s == "Failed", int(s) if s.isdigit() else 0),
        )
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["criterion"] + labels)
            for crit in CRITERIA:
                row = self.counts.get(crit, {})
                writer.writerow([crit] + [row.get(lbl, 0) for lbl in labels])


def run_experiment(spec: ScenarioSpec, reps, scan_config: ScanConfig, seed=0) -> FrequencyTable:
    """Replicate generate -> standardize -> scan and tally the decisions."""
    if reps < 1:
        raise ConfigurationError("reps must be >= 1")
    counts = {crit: {} for crit in CRITERIA}

    def bump(crit, label):
        counts[crit][label] = counts[crit].get(label, 0) + 1

    seqs = np.random.SeedSequence(seed).spawn(reps)
    for seq in seqs:
        child = seq.spawn(2)
        data = generate(spec, seed=child[0])
        data, _ = standardize(data)
        d = data.shape[1]
        if scan_config.h == "auto":
            _, h = recommend_h(data)
        else:
            h = float(scan_config.h)
        fit_cfg = FitConfig(
            max_iter=scan_config.fit.max_iter,
            tol=scan_config.fit.tol,
            restarts=scan_config.fit.restarts,
            cov_floor=scan_config.fit.cov_floor,
            weight_floor=scan_config.fit.weight_floor,
            seed=int(child[1].generate_state(1)[0]),
        )
        try:
            result = scan(
                data,
                scan_config.k_min,
                scan_config.k_max,
                GaussianKernel(h=h, dim=d),
                fit_cfg,
                structure=scan_config.resolve_structure(d),
            )
        except FitFailureError:
            for crit in CRITERIA:
                bump(crit, "Failed")
            continue
        for crit in CRITERIA:
            k = result.decisions.get(crit)
            bump(crit, "None" if k is None else str(k))
    return FrequencyTable(counts=counts, reps=reps)
