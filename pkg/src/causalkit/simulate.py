"""Synthetic data generators: linear SEM sampling and case-study fixtures.

All randomness flows through the portable SplitMix64 stream (see ``rng``),
so any (spec, n, seed) triple regenerates byte-identical datasets on every
platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import CONTINUOUS, DISCRETE, Dataset
from .errors import DataError
from .graphs import Dag
from .rng import SplitMix64

# moment (kN*m) = Z (m^3) * f_y (MPa) * this factor
KNM_PER_M3_MPA = 1000.0

# default plastic-modulus envelope (m^3): common rolled beam sections.
# Narrower than the full catalog on purpose: with only two steel grades the
# yield-strength signal is faint, and stretching Z over the entire catalog
# drowns it at moderate sample sizes.
Z_RANGE_M3 = (4.0e-4, 4.0e-3)

DEFAULT_GRADES_MPA = (345.0, 250.0)  # A992, A36


@dataclass(frozen=True)
class LinearSem:
    """DAG plus edge coefficients, intercepts, and noise scales.

    Coefficient keys are (parent, child) name pairs and must match the
    DAG's edges exactly; noise_std values are >= 0.
    """

    dag: Dag
    coefficients: dict
    intercepts: dict
    noise_std: dict

    def __post_init__(self):
        g = self.dag
        edge_pairs = set()
        for i, j, ma, mb in g.edges():
            p, c = (i, j) if (ma, mb) == ("tail", "arrow") else (j, i)
            edge_pairs.add((g.names[p], g.names[c]))
        coeff_pairs = {tuple(k) for k in self.coefficients}
        if coeff_pairs != edge_pairs:
            raise DataError(
                f"coefficient keys {sorted(coeff_pairs)} do not match DAG edges "
                f"{sorted(edge_pairs)}"
            )
        for name, std in self.noise_std.items():
            if std < 0:
                raise DataError(f"negative noise std for node '{name}'")

    def intercept(self, name) -> float:
        return float(self.intercepts.get(name, 0.0))

    def noise(self, name) -> float:
        return float(self.noise_std.get(name, 1.0))


def sample_sem(sem: LinearSem, n: int, seed: int) -> Dataset:
    """Ancestral sampling in topological order; Gaussian noise from the
    portable stream, drawn node by node in a fixed order."""
    if n < 1:
        raise DataError("need n >= 1 samples")
    g = sem.dag
    rng = SplitMix64(seed)
    values = np.zeros((n, g.n_nodes))
    for v in g.topological_order():
        name = g.names[v]
        col = np.full(n, sem.intercept(name))
        for parent in sorted(g.parents(v)):
            coeff = float(sem.coefficients[(g.names[parent], name)])
            col = col + coeff * values[:, parent]
        std = sem.noise(name)
        if std > 0:
            col = col + rng.normal(n, 0.0, std)
        values[:, v] = col
    return Dataset(g.names, [CONTINUOUS] * g.n_nodes, values)


def beam_dataset(
    n_sections: int,
    grades=DEFAULT_GRADES_MPA,
    seed: int = 0,
    z_range=Z_RANGE_M3,
) -> Dataset:
    """Flexural-capacity table: each sampled section is paired with every
    steel grade, and the moment column is exactly Z * f_y (unit-converted).

    Columns Z (m^3, log-uniform), fy (MPa), M (kN*m), plus logZ / logfy /
    logM with logM = logZ + logfy identically; the multiplicative capacity
    relation is linear in the log columns.
    """
    if n_sections < 2:
        raise DataError("need at least two sections")
    grades = [float(g) for g in grades]
    if len(grades) < 2:
        raise DataError("need at least two steel grades")
    lo, hi = z_range
    if not (0 < lo < hi):
        raise DataError("invalid plastic-modulus range")
    rng = SplitMix64(seed)
    z_sections = np.exp(rng.uniform(n_sections, math.log(lo), math.log(hi)))
    z = np.repeat(z_sections, len(grades))
    fy = np.tile(np.asarray(grades), n_sections)
    m = z * fy * KNM_PER_M3_MPA
    logz, logfy = np.log(z), np.log(fy)
    values = np.column_stack([z, fy, m, logz, logfy, logz + logfy])
    return Dataset(
        ["Z", "fy", "M", "logZ", "logfy", "logM"], [CONTINUOUS] * 6, values
    )


def moment_capacity_knm(z_m3: float, fy_mpa: float) -> float:
    """Ultimate moment of a W-shape from plastic modulus and yield strength."""
    return z_m3 * fy_mpa * KNM_PER_M3_MPA


# Retrofit outcome counts: (branch, treatment, improved, total).
_RETROFIT_CELLS = (
    (0, 1, 81, 87),
    (0, 0, 243, 280),
    (1, 1, 190, 262),
    (1, 0, 60, 87),
)


def table3_dataset() -> Dataset:
    """716-row retrofit study: branch E (A=0, B=1), treatment T (old=0,
    new=1), outcome C (improved 0/1), with the documented cell counts."""
    rows = []
    for branch, treat, improved, total in _RETROFIT_CELLS:
        rows.extend([branch, treat, 1] for _ in range(improved))
        rows.extend([branch, treat, 0] for _ in range(total - improved))
    values = np.asarray(rows, dtype=np.float64)
    return Dataset(
        ["E", "T", "C"],
        [DISCRETE, DISCRETE, DISCRETE],
        values,
        code_maps={"E": ("A", "B"), "T": ("old", "new"), "C": ("no", "yes")},
    )


# column: (low, high) envelope for the fire-exposed column generator
_SPALLING_RANGES = {
    "b": (152.0, 514.0),   # width/depth, mm
    "r": (0.3, 11.7),      # reinforcement ratio, %
    "f": (15.0, 126.5),    # compressive strength, MPa
    "K": (0.5, 1.0),
    "C": (13.0, 64.0),     # cover, mm
    "P": (0.0, 5373.0),    # applied load, kN
}


def spalling_dataset(n: int, seed: int = 0) -> Dataset:
    """Schema-compatible synthetic stand-in for the fire-test database.

    Features are independent uniforms over the published envelopes; the
    binary SP outcome follows a logistic rule on standardized cover,
    strength, and width. Supports smoke tests and knowledge-constraint
    checks only; it is not the real database.
    """
    if n < 1:
        raise DataError("need n >= 1 samples")
    rng = SplitMix64(seed)
    cols = {}
    for name, (lo, hi) in _SPALLING_RANGES.items():
        cols[name] = rng.uniform(n, lo, hi)

    def standardized(name):
        lo, hi = _SPALLING_RANGES[name]
        return (cols[name] - (lo + hi) / 2.0) / ((hi - lo) / 2.0)

    logit = 1.6 * standardized("C") + 1.1 * standardized("f") \
        - 0.8 * standardized("b") + 0.3
    prob = 1.0 / (1.0 + np.exp(-logit))
    sp = (rng.uniform(n) < prob).astype(np.float64)
    names = list(_SPALLING_RANGES) + ["SP"]
    values = np.column_stack([cols[c] for c in _SPALLING_RANGES] + [sp])
    kinds = [CONTINUOUS] * len(_SPALLING_RANGES) + [DISCRETE]
    return Dataset(names, kinds, values, code_maps={"SP": ("No", "Yes")})


def sem_from_dict(obj: dict) -> LinearSem:
    """Build a LinearSem from the JSON layout used by the CLI::

        {"nodes": ["A","B"], "edges": [{"from":"A","to":"B","coef":0.8}],
         "intercepts": {"A": 0.0}, "noise_std": {"A": 1.0}}
    """
    try:
        nodes = list(obj["nodes"])
        edge_specs = obj["edges"]
    except (KeyError, TypeError) as exc:
        raise DataError(f"malformed SEM spec: missing {exc}") from exc
    pairs, coeffs = [], {}
    for e in edge_specs:
        try:
            a, b = e["from"], e["to"]
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed SEM edge entry {e!r}") from exc
        pairs.append((a, b))
        coeffs[(a, b)] = float(e.get("coef", 1.0))
    dag = Dag(nodes, pairs)
    return LinearSem(
        dag=dag,
        coefficients=coeffs,
        intercepts={k: float(v) for k, v in obj.get("intercepts", {}).items()},
        noise_std={k: float(v) for k, v in obj.get("noise_std", {}).items()},
    )
