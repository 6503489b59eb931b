"""Interventional estimation on discrete data.

The adjustment formula p(Y=1 | do(T=t)) = sum_z P(Y=1 | T=t, Z=z) P(Z=z)
is evaluated on empirical frequencies kept as exact rationals, so quoted
case figures are reproduced exactly rather than float-approximately.
Decimal values appear only in reports.

A stratum where some treatment arm is empty is a positivity violation and
aborts by default; ``allow_empty_strata`` substitutes that stratum's
arm-pooled outcome rate instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dataset import DISCRETE, Dataset
from .errors import DataError
from .graphs import Dag, backdoor_satisfied


@dataclass
class EstimateReport:
    p_do: dict                      # treatment level -> Fraction
    ate: Fraction | None
    adjustment_set: tuple
    strata_table: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "p_do": {str(t): _frac_entry(v) for t, v in sorted(self.p_do.items())},
            "ate": _frac_entry(self.ate) if self.ate is not None else None,
            "adjustment_set": list(self.adjustment_set),
            "strata_table": self.strata_table,
        }


def _frac_entry(v: Fraction) -> dict:
    return {"value": float(v), "exact": f"{v.numerator}/{v.denominator}"}


def _discrete_codes(d: Dataset, name) -> np.ndarray:
    if d.kind(name) != DISCRETE:
        raise DataError(f"column '{name}' must be discrete")
    return d.col(name).astype(np.int64)


def _check_binary_outcome(d: Dataset, outcome):
    y = _discrete_codes(d, outcome)
    if d.levels(outcome) != 2:
        raise DataError(f"outcome '{outcome}' must be binary-coded 0/1")
    return y


def _strata_ids(d: Dataset, adjust):
    if not adjust:
        return np.zeros(d.n, dtype=np.int64), [()]
    cols = [_discrete_codes(d, a) for a in adjust]
    dims = [d.levels(a) for a in adjust]
    ids = np.ravel_multi_index(cols, dims)
    combos = [
        tuple(int(v) for v in np.unravel_index(s, dims))
        for s in range(int(np.prod(dims)))
    ]
    return ids, combos


def adjustment_estimate(
    d: Dataset,
    treatment,
    outcome,
    adjust=(),
    allow_empty_strata: bool = False,
    laplace: int = 0,
    graph: Dag | None = None,
    force: bool = False,
) -> EstimateReport:
    """Do-probabilities of a binary outcome via the adjustment formula.

    With a ``graph`` supplied, the adjustment set must satisfy the backdoor
    criterion for treatment -> outcome unless ``force`` is set.
    """
    adjust = tuple(adjust)
    if treatment in adjust or outcome in adjust:
        raise DataError("adjustment set must exclude treatment and outcome")
    if graph is not None and not force:
        if not backdoor_satisfied(graph, treatment, outcome, adjust):
            raise DataError(
                f"adjustment set {sorted(adjust)} fails the backdoor criterion "
                f"for {treatment} -> {outcome} (pass force=True to override)"
            )
    t = _discrete_codes(d, treatment)
    y = _check_binary_outcome(d, outcome)
    levels = range(d.levels(treatment))
    ids, combos = _strata_ids(d, adjust)
    n = d.n

    strata_table = []
    p_do = {lvl: Fraction(0) for lvl in levels}
    for s, combo in enumerate(combos):
        in_s = ids == s
        n_s = int(in_s.sum())
        if n_s == 0:
            continue
        w = Fraction(n_s, n)
        row = {
            "stratum": {a: int(c) for a, c in zip(adjust, combo)},
            "n": n_s,
            "weight": _frac_entry(w),
            "arms": {},
        }
        pooled = Fraction(int(y[in_s].sum()) + laplace, n_s + 2 * laplace)
        for lvl in levels:
            arm = in_s & (t == lvl)
            n_arm = int(arm.sum())
            if n_arm == 0:
                if not allow_empty_strata:
                    raise DataError(
                        f"positivity violation: stratum {row['stratum']} has no "
                        f"units with {treatment}={lvl} "
                        "(pass allow_empty_strata to substitute the pooled rate)"
                    )
                rate = pooled
                row["arms"][str(lvl)] = {
                    "n": 0, "improved": 0,
                    "rate": _frac_entry(rate), "pooled_substitute": True,
                }
            else:
                hits = int(y[arm].sum())
                rate = Fraction(hits + laplace, n_arm + 2 * laplace)
                row["arms"][str(lvl)] = {
                    "n": n_arm, "improved": hits, "rate": _frac_entry(rate),
                }
            p_do[lvl] += rate * w
        strata_table.append(row)

    ate = None
    if set(levels) == {0, 1}:
        ate = p_do[1] - p_do[0]
    return EstimateReport(
        p_do=p_do, ate=ate, adjustment_set=adjust, strata_table=strata_table
    )


def ate_randomized(d: Dataset, treatment, outcome) -> float:
    """Difference in mean outcome between the two treatment arms."""
    t = _discrete_codes(d, treatment)
    if d.levels(treatment) != 2:
        raise DataError(f"treatment '{treatment}' must be binary-coded 0/1")
    y = d.col(outcome)
    treated, control = y[t == 1], y[t == 0]
    if treated.size == 0 or control.size == 0:
        raise DataError("a treatment arm is empty")
    return float(treated.mean() - control.mean())


def att(
    d: Dataset, treatment, outcome, adjust=(), allow_empty_strata: bool = False
) -> Fraction:
    """Average effect on the treated: within-stratum rate differences
    weighted by the stratum distribution among treated units."""
    adjust = tuple(adjust)
    t = _discrete_codes(d, treatment)
    y = _check_binary_outcome(d, outcome)
    if d.levels(treatment) != 2:
        raise DataError(f"treatment '{treatment}' must be binary-coded 0/1")
    ids, combos = _strata_ids(d, adjust)
    n_treated = int((t == 1).sum())
    if n_treated == 0:
        raise DataError("no treated units")
    total = Fraction(0)
    for s, combo in enumerate(combos):
        in_s = ids == s
        n_s1 = int((in_s & (t == 1)).sum())
        if n_s1 == 0:
            continue
        n_s0 = int((in_s & (t == 0)).sum())
        if n_s0 == 0:
            if not allow_empty_strata:
                raise DataError(
                    f"positivity violation: stratum "
                    f"{dict(zip(adjust, combo))} has no control units"
                )
            r0 = Fraction(int(y[in_s].sum()), int(in_s.sum()))
        else:
            r0 = Fraction(int(y[in_s & (t == 0)].sum()), n_s0)
        r1 = Fraction(int(y[in_s & (t == 1)].sum()), n_s1)
        total += (r1 - r0) * Fraction(n_s1, n_treated)
    return total


def paired_ite(d: Dataset, pair_id, treatment, outcome) -> list[tuple]:
    """Per-pair treated-minus-control outcome differences.

    Each pair id must appear exactly once in each treatment arm.
    """
    t = _discrete_codes(d, treatment)
    if d.levels(treatment) != 2:
        raise DataError(f"treatment '{treatment}' must be binary-coded 0/1")
    ids = d.col(pair_id)
    y = d.col(outcome)
    by_id: dict = {}
    for pid, arm, out in zip(ids.tolist(), t.tolist(), y.tolist()):
        key = int(pid) if float(pid).is_integer() else pid
        slot = by_id.setdefault(key, {})
        if arm in slot:
            raise DataError(f"unpaired id {key}: duplicate rows in arm {arm}")
        slot[arm] = out
    results = []
    for key in sorted(by_id):
        slot = by_id[key]
        if set(slot) != {0, 1}:
            raise DataError(f"unpaired id {key}: missing one treatment arm")
        results.append((key, slot[1] - slot[0]))
    return results


def simpson_check(d: Dataset, treatment, outcome, covariate):
    """Detect a stratified-vs-aggregate sign reversal.

    True exactly when every covariate stratum shows the same strict sign of
    the treated-minus-control rate difference and the aggregate shows the
    opposite strict sign. Strata with an empty arm are excluded and
    flagged. Returns (flag, strata_table).
    """
    t = _discrete_codes(d, treatment)
    y = _check_binary_outcome(d, outcome)
    if d.levels(treatment) != 2:
        raise DataError(f"treatment '{treatment}' must be binary-coded 0/1")
    z = _discrete_codes(d, covariate)
    table = []
    signs = []
    used_strata = 0
    for level in range(d.levels(covariate)):
        in_s = z == level
        n1 = int((in_s & (t == 1)).sum())
        n0 = int((in_s & (t == 0)).sum())
        if n1 == 0 or n0 == 0:
            table.append({"stratum": level, "excluded": True, "n": int(in_s.sum())})
            continue
        used_strata += 1
        r1 = Fraction(int(y[in_s & (t == 1)].sum()), n1)
        r0 = Fraction(int(y[in_s & (t == 0)].sum()), n0)
        diff = r1 - r0
        signs.append(1 if diff > 0 else (-1 if diff < 0 else 0))
        table.append({
            "stratum": level, "excluded": False,
            "treated": {"n": n1, "improved": int(y[in_s & (t == 1)].sum()),
                        "rate": _frac_entry(r1)},
            "control": {"n": n0, "improved": int(y[in_s & (t == 0)].sum()),
                        "rate": _frac_entry(r0)},
            "difference": _frac_entry(diff),
        })
    agg1 = Fraction(int(y[t == 1].sum()), int((t == 1).sum()))
    agg0 = Fraction(int(y[t == 0].sum()), int((t == 0).sum()))
    agg_diff = agg1 - agg0
    agg_sign = 1 if agg_diff > 0 else (-1 if agg_diff < 0 else 0)
    table.append({"stratum": "aggregate", "difference": _frac_entry(agg_diff)})
    reversal = (
        used_strata >= 2
        and len(set(signs)) == 1
        and signs[0] != 0
        and agg_sign == -signs[0]
    )
    return reversal, table
