"""Independence measures over contingency tables.

Three ways to quantify how exactly an independence condition holds:

  * mutual information (nats), zero iff the variables are independent;
  * Pearson chi-square with an upper-tail p-value from the regularized
    incomplete gamma function (implemented here, no external dependency);
  * balanced error ratio of the best deterministic predictor of the
    column variable from the row variable (maximal iff independent).

Conditional variants aggregate per-stratum values with the stratum weights
carried by StratifiedTables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateTable, MissingClass
from .tables import ContingencyTable, JointTable, StratifiedTables, normalize

_NEG_FLOOR = -1e-12  # tolerated numerical undershoot before clamping MI to 0


@dataclass
class MeasureValue:
    kind: str   # mutual_information | chi_square | balanced_error_ratio
    value: float
    aux: dict = field(default_factory=dict)


# -- mutual information -------------------------------------------------------

def mi_nats(probs: np.ndarray) -> np.ndarray:
    """Mutual information in nats for a batch of joint tables.

    probs has shape (..., R, C), each trailing table summing to 1.
    Cells with p = 0 contribute 0 (the 0 * log 0 convention).
    """
    p = np.asarray(probs, dtype=np.float64)
    pr = p.sum(axis=-1, keepdims=True)
    pc = p.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log(p / (pr * pc))
    terms = np.where(p > 0.0, terms, 0.0)
    value = terms.sum(axis=(-2, -1))
    return np.where((value < 0.0) & (value > _NEG_FLOOR), 0.0, value)


def _entropy(marginal: np.ndarray) -> float:
    m = marginal[marginal > 0.0]
    return float(-(m * np.log(m)).sum())


def mutual_information(joint: JointTable) -> MeasureValue:
    """I(row; col) in nats, with aux.normalized = I / min(H(row), H(col))."""
    value = float(mi_nats(joint.probs))
    if value < 0.0:
        raise ValueError(f"mutual information came out negative: {value!r}")
    h_row = _entropy(joint.probs.sum(axis=1))
    h_col = _entropy(joint.probs.sum(axis=0))
    h_min = min(h_row, h_col)
    normalized = value / h_min if h_min > 0.0 else 0.0
    return MeasureValue(
        kind="mutual_information",
        value=value,
        aux={"normalized": normalized, "entropy_row": h_row, "entropy_col": h_col},
    )


def conditional_mutual_information(strata: StratifiedTables, alpha: float = 0.0) -> MeasureValue:
    """I(row; col | strata) = sum over strata of weight * MI(stratum table).

    Weights are record fractions of the whole dataset, so dropped strata
    simply contribute nothing; the dropped fraction is surfaced in aux.
    """
    per_stratum = []
    total = 0.0
    for key, table, weight in strata.entries:
        mv = mutual_information(normalize(table, alpha))
        mv.aux["rate_gap"] = rate_gap(table.counts)
        per_stratum.append((key, mv, weight))
        total += weight * mv.value
    return MeasureValue(
        kind="mutual_information",
        value=total,
        aux={"per_stratum": per_stratum, "dropped_mass": strata.dropped_mass},
    )


# -- chi-square ----------------------------------------------------------------

def _gamma_q(a: float, x: float, tol: float = 1e-12, max_iter: int = 500) -> float:
    """Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).

    Series expansion of P for x < a + 1, Lentz continued fraction for Q
    otherwise; both iterated to relative tolerance `tol`.
    """
    if a <= 0.0:
        raise ValueError("a must be positive")
    if x < 0.0:
        raise ValueError("x must be non-negative")
    if x == 0.0:
        return 1.0
    log_prefix = -x + a * math.log(x) - math.lgamma(a)
    if x < a + 1.0:
        # P(a,x) = x^a e^-x / Gamma(a) * sum_n x^n / (a (a+1) ... (a+n))
        term = 1.0 / a
        total = term
        for n in range(1, max_iter + 1):
            term *= x / (a + n)
            total += term
            if abs(term) < abs(total) * tol:
                break
        else:
            raise ArithmeticError("incomplete gamma series did not converge")
        return 1.0 - math.exp(log_prefix) * total
    # modified Lentz for the continued fraction of Q(a,x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            break
    else:
        raise ArithmeticError("incomplete gamma continued fraction did not converge")
    return math.exp(log_prefix) * h


def chi2_sf(statistic: float, dof: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    return _gamma_q(dof / 2.0, statistic / 2.0)


def _chi_square_core(counts: np.ndarray) -> tuple[float, int] | None:
    """Pearson statistic and dof after deleting all-zero rows/columns.

    Returns None when fewer than two non-empty rows or columns remain.
    """
    counts = np.asarray(counts, dtype=np.float64)
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    counts = counts[rows > 0][:, cols > 0]
    if counts.shape[0] < 2 or counts.shape[1] < 2:
        return None
    rows = counts.sum(axis=1)
    cols = counts.sum(axis=0)
    total = counts.sum()
    expected = np.outer(rows, cols) / total
    stat = float(((counts - expected) ** 2 / expected).sum())
    dof = (counts.shape[0] - 1) * (counts.shape[1] - 1)
    return stat, max(dof, 1)


def chi_square(table: ContingencyTable) -> MeasureValue:
    """Pearson chi-square test of independence for a contingency table."""
    if table.total < 1:
        raise DegenerateTable("table has no observations")
    core = _chi_square_core(table.counts)
    if core is None:
        raise DegenerateTable("fewer than 2 non-empty rows or columns")
    stat, dof = core
    return MeasureValue(
        kind="chi_square",
        value=stat,
        aux={"dof": dof, "p_value": chi2_sf(stat, dof)},
    )


def stratified_chi_square(strata: StratifiedTables) -> MeasureValue:
    """Sum of per-stratum Pearson statistics with summed degrees of freedom.

    Strata where independence is vacuous (a single non-empty row or column)
    contribute nothing.  If every stratum is vacuous the condition holds
    trivially: statistic 0, dof 1, p-value 1.
    """
    per_stratum = []
    stat_total = 0.0
    dof_total = 0
    for key, table, weight in strata.entries:
        core = _chi_square_core(table.counts)
        if core is None:
            mv = MeasureValue("chi_square", 0.0, {"dof": 0, "degenerate": True})
        else:
            stat, dof = core
            stat_total += stat
            dof_total += dof
            mv = MeasureValue(
                "chi_square", stat,
                {"dof": dof, "p_value": chi2_sf(stat, dof), "rate_gap": rate_gap(table.counts)},
            )
        per_stratum.append((key, mv, weight))
    dof = max(dof_total, 1)
    return MeasureValue(
        kind="chi_square",
        value=stat_total,
        aux={
            "dof": dof,
            "p_value": chi2_sf(stat_total, dof),
            "per_stratum": per_stratum,
            "dropped_mass": strata.dropped_mass,
        },
    )


# -- balanced error ratio --------------------------------------------------------

def balanced_error_ratio(joint: JointTable) -> MeasureValue:
    """Mean per-class error of the best deterministic column-variable predictor.

    The predictor maps each row value to a column category (argmax of the
    class-conditional cell, ties to the lower index).  Value (k-1)/k means
    the column variable cannot be predicted at all, i.e. independence;
    aux.max_ber carries that ceiling so callers can use value / max_ber.
    """
    p = joint.probs
    class_marginals = p.sum(axis=0)
    if (class_marginals == 0.0).any():
        missing = int(np.argmin(class_marginals))
        raise MissingClass(f"column category {missing} has zero marginal")
    value, max_ber = _ber_core(p, class_marginals)
    return MeasureValue(
        kind="balanced_error_ratio",
        value=value,
        aux={"max_ber": max_ber, "normalized": value / max_ber},
    )


def _ber_core(p: np.ndarray, class_marginals: np.ndarray) -> tuple[float, float]:
    k = p.shape[1]
    conditional = p / class_marginals  # p(row | class)
    best = np.argmax(conditional, axis=1)  # ties -> lower index
    picked = conditional[np.arange(p.shape[0]), best]
    correct = np.bincount(best, weights=picked, minlength=k)
    value = float((1.0 - correct).mean())
    return value, (k - 1) / k


def stratified_balanced_error_ratio(strata: StratifiedTables, alpha: float = 0.0) -> MeasureValue:
    """Weight-averaged per-stratum balanced error ratio.

    Within a stratum only the column categories actually present are scored;
    strata with fewer than two present categories are vacuous and skipped.
    aux.max_ber is the matching weighted ceiling, so value / max_ber stays a
    scale-free independence score.  All-vacuous stratifications count as
    independence (normalized 1.0).
    """
    per_stratum = []
    value_total = 0.0
    max_total = 0.0
    for key, table, weight in strata.entries:
        counts = table.counts
        present = counts.sum(axis=0) > 0
        if int(present.sum()) < 2:
            mv = MeasureValue("balanced_error_ratio", 0.0, {"degenerate": True})
            per_stratum.append((key, mv, weight))
            continue
        reduced = ContingencyTable(counts[:, present])
        joint = normalize(reduced, alpha)
        sub_value, sub_max = _ber_core(joint.probs, joint.probs.sum(axis=0))
        mv = MeasureValue(
            "balanced_error_ratio", sub_value,
            {"max_ber": sub_max, "normalized": sub_value / sub_max,
             "rate_gap": rate_gap(counts)},
        )
        per_stratum.append((key, mv, weight))
        value_total += weight * sub_value
        max_total += weight * sub_max
    normalized = value_total / max_total if max_total > 0.0 else 1.0
    return MeasureValue(
        kind="balanced_error_ratio",
        value=value_total,
        aux={
            "max_ber": max_total,
            "normalized": normalized,
            "per_stratum": per_stratum,
            "dropped_mass": strata.dropped_mass,
        },
    )


# -- shared helpers ----------------------------------------------------------------

def rate_gap(counts: np.ndarray) -> float:
    """Largest spread of P(row = v | col group) across column groups with members.

    For binary rows this is the familiar absolute rate difference between
    groups; it is reported as diagnostic context, not a pass/fail measure.
    """
    counts = np.asarray(counts, dtype=np.float64)
    group_totals = counts.sum(axis=0)
    present = group_totals > 0
    if int(present.sum()) < 2:
        return 0.0
    rates = counts[:, present] / group_totals[present]
    return float((rates.max(axis=1) - rates.min(axis=1)).max())
