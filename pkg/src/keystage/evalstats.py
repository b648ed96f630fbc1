"""Statistical comparison of trained model results.

Two tools for deciding whether one family of models beats another:

- a two-sided paired t-test whose p-value comes from the Student-t CDF,
  evaluated through the regularized incomplete beta function with a
  continued fraction (modified Lentz iteration), so no statistics
  library is needed at runtime;
- Pareto-front extraction over the (higher F1, lower inference time)
  objective pair, via a sort-and-sweep that matches brute-force pairwise
  dominance exactly.

Results enter as ModelResult rows, typically read from a CSV whose
columns mirror the dataclass fields.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ResourceError, ValidationError

__all__ = [
    "CSV_COLUMNS",
    "PAIRED_METRICS",
    "ModelResult",
    "TTestResult",
    "paired_metric_tests",
    "paired_t_test",
    "pareto_front",
    "read_results_csv",
    "regularized_incomplete_beta",
    "student_t_p_value",
]

# Header of a results CSV, in emission order. Readers accept any column
# order and ignore extras.
CSV_COLUMNS = (
    "name",
    "accuracy",
    "precision",
    "recall",
    "f1",
    "parameters",
    "inference_time_s",
)

# Metrics compared pairwise between model groups, in report order.
PAIRED_METRICS = ("accuracy", "precision", "recall", "f1", "inference_time_s")

_METRIC_RANGE_FIELDS = ("accuracy", "precision", "recall", "f1")

_BETA_MAX_ITERATIONS = 300
_BETA_TOLERANCE = 1e-12
# Floor that keeps the Lentz recurrence away from division by zero.
_BETA_FLOOR = 1e-300


@dataclass(frozen=True)
class ModelResult:
    """One evaluated model: quality metrics, size, and latency."""

    name: str
    accuracy: float
    precision: float
    recall: float
    f1: float
    parameters: int
    inference_time_s: float

    def __post_init__(self) -> None:
        if not self.name:
            raise ValidationError("model result needs a non-empty name")
        for field in _METRIC_RANGE_FIELDS:
            value = getattr(self, field)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(f"{self.name}: {field} must be a real number")
            if not math.isfinite(value) or not 0.0 <= value <= 1.0:
                raise ValidationError(
                    f"{self.name}: {field} {value!r} outside [0, 1]"
                )
        if not isinstance(self.parameters, int) or isinstance(self.parameters, bool):
            raise ValidationError(f"{self.name}: parameters must be an integer")
        if self.parameters < 0:
            raise ValidationError(
                f"{self.name}: parameters {self.parameters} is negative"
            )
        time = self.inference_time_s
        if not isinstance(time, (int, float)) or isinstance(time, bool):
            raise ValidationError(f"{self.name}: inference_time_s must be a real number")
        if not math.isfinite(time) or time <= 0.0:
            raise ValidationError(
                f"{self.name}: inference_time_s {time!r} must be positive"
            )


class TTestResult(NamedTuple):
    """Outcome of a two-sided paired t-test."""

    t_statistic: float
    p_value: float


def _beta_continued_fraction(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, by modified Lentz iteration.

    Converges rapidly when x < (a + 1) / (a + b + 2); the caller applies
    the symmetry transform to stay in that regime.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETA_FLOOR:
        d = _BETA_FLOOR
    d = 1.0 / d
    h = d
    for m in range(1, _BETA_MAX_ITERATIONS + 1):
        m2 = 2 * m
        # Even step of the recurrence.
        coeff = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + coeff * d
        if abs(d) < _BETA_FLOOR:
            d = _BETA_FLOOR
        c = 1.0 + coeff / c
        if abs(c) < _BETA_FLOOR:
            c = _BETA_FLOOR
        d = 1.0 / d
        h *= d * c
        # Odd step.
        coeff = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + coeff * d
        if abs(d) < _BETA_FLOOR:
            d = _BETA_FLOOR
        c = 1.0 + coeff / c
        if abs(c) < _BETA_FLOOR:
            c = _BETA_FLOOR
        d = 1.0 / d
        step = d * c
        h *= step
        if abs(step - 1.0) < _BETA_TOLERANCE:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge for "
        f"a={a}, b={b}, x={x}"
    )


def _incomplete_beta_pair(a: float, b: float, x: float, cx: float) -> float:
    """I_x(a, b) given x and its complement cx = 1 - x.

    Callers that know the complement to full precision (rather than as
    the rounded difference 1.0 - x) pass it here, which keeps the result
    accurate when x is within a few ulps of 0 or 1.
    """
    if x == 0.0:
        return 0.0
    if cx == 0.0:
        return 1.0
    log_x = math.log(x) if x <= 0.5 else math.log1p(-cx)
    log_cx = math.log(cx) if cx <= 0.5 else math.log1p(-x)
    front = math.exp(
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * log_x
        + b * log_cx
    )
    # Use the reflection I_x(a, b) = 1 - I_{1-x}(b, a) on the half of the
    # domain where the direct fraction converges slowly.
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_continued_fraction(a, b, x) / a
    return 1.0 - front * _beta_continued_fraction(b, a, cx) / b


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """Return I_x(a, b), the regularized incomplete beta function.

    Requires a > 0, b > 0, and 0 <= x <= 1. The log-gamma prefactor and
    the continued fraction together give better than 1e-9 absolute
    accuracy over that domain.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or a <= 0.0 or b <= 0.0:
        raise ValidationError(f"beta parameters must be positive, got a={a}, b={b}")
    if not math.isfinite(x) or not 0.0 <= x <= 1.0:
        raise ValidationError(f"beta argument x={x} outside [0, 1]")
    return _incomplete_beta_pair(a, b, x, 1.0 - x)


def student_t_p_value(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with df degrees of freedom.

    Uses the identity P(|T| >= |t|) = I_x(df/2, 1/2) with
    x = df / (df + t^2); the complement t^2 / (df + t^2) is formed
    directly so tiny statistics keep full precision.
    """
    if df < 1:
        raise ValidationError(f"degrees of freedom must be >= 1, got {df}")
    if not math.isfinite(t):
        raise ValidationError(f"t statistic must be finite, got {t}")
    squared = t * t
    denominator = df + squared
    return _incomplete_beta_pair(df / 2.0, 0.5, df / denominator, squared / denominator)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TTestResult:
    """Two-sided paired t-test of matched samples a and b.

    The statistic is the mean of the differences over its standard error
    (sample standard deviation, df = n - 1). Samples must be the same
    length, at least two pairs, and the differences must not all be
    equal: a constant shift has zero variance and no defined t.
    """
    first = np.asarray(a, dtype=float)
    second = np.asarray(b, dtype=float)
    if first.ndim != 1 or second.ndim != 1:
        raise ValidationError("paired samples must be one-dimensional")
    if first.size != second.size:
        raise ValidationError(
            f"paired samples differ in length: {first.size} vs {second.size}"
        )
    if first.size < 2:
        raise ValidationError("paired t-test needs at least two pairs")
    if not np.all(np.isfinite(first)) or not np.all(np.isfinite(second)):
        raise ValidationError("paired samples must be finite")
    diffs = first - second
    spread = float(np.std(diffs, ddof=1))
    if spread == 0.0:
        raise ValidationError(
            "differences have zero variance; the t statistic is undefined"
        )
    t = float(np.mean(diffs)) / (spread / math.sqrt(first.size))
    return TTestResult(t, student_t_p_value(t, first.size - 1))


def paired_metric_tests(
    fused: Sequence[ModelResult], unimodal: Sequence[ModelResult]
) -> tuple[tuple[str, TTestResult], ...]:
    """Run the paired t-test per metric across two ranked model groups.

    Rows pair positionally: callers supply both groups ordered the same
    way, best first, so the i-th best fused model is compared with the
    i-th best unimodal one.
    """
    if len(fused) != len(unimodal):
        raise ValidationError(
            f"groups differ in size: {len(fused)} fused vs {len(unimodal)} unimodal"
        )
    table: list[tuple[str, TTestResult]] = []
    for metric in PAIRED_METRICS:
        result = paired_t_test(
            [getattr(row, metric) for row in fused],
            [getattr(row, metric) for row in unimodal],
        )
        table.append((metric, result))
    return tuple(table)


def pareto_front(results: Sequence[ModelResult]) -> tuple[ModelResult, ...]:
    """Return the results not dominated in (higher f1, lower inference time).

    A result is dominated when some other result has f1 at least as high
    and time at least as low, with one of the two strict. Points that tie
    on both coordinates do not dominate each other, so duplicates on the
    front are all retained. Input order is preserved in the output.

    The sweep walks f1 groups in descending order and keeps a group's
    fastest members only when they beat the fastest time seen among
    strictly higher groups; this equals the quadratic pairwise check.
    """
    if not results:
        raise ValidationError("pareto_front requires at least one result")
    order = sorted(range(len(results)), key=lambda i: -results[i].f1)
    keep = [False] * len(results)
    best_time = math.inf
    at = 0
    while at < len(order):
        group_f1 = results[order[at]].f1
        group: list[int] = []
        while at < len(order) and results[order[at]].f1 == group_f1:
            group.append(order[at])
            at += 1
        group_best = min(results[i].inference_time_s for i in group)
        if group_best < best_time:
            for i in group:
                if results[i].inference_time_s == group_best:
                    keep[i] = True
            best_time = group_best
    return tuple(row for kept, row in zip(keep, results) if kept)


def read_results_csv(path: str | Path) -> tuple[ModelResult, ...]:
    """Read ModelResult rows from a CSV with the CSV_COLUMNS header.

    Extra columns are ignored. Malformed rows are collected and reported
    together with their line numbers.
    """
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"results CSV not found at {path}")
    rows: list[ModelResult] = []
    problems: list[str] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path} is empty")
        missing = [c for c in CSV_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValidationError(f"{path} is missing columns: {', '.join(missing)}")
        for record in reader:
            line = reader.line_num
            try:
                rows.append(
                    ModelResult(
                        name=(record.get("name") or "").strip(),
                        accuracy=float(record["accuracy"]),
                        precision=float(record["precision"]),
                        recall=float(record["recall"]),
                        f1=float(record["f1"]),
                        parameters=int(record["parameters"]),
                        inference_time_s=float(record["inference_time_s"]),
                    )
                )
            except ValidationError as exc:
                problems.append(f"line {line}: {exc}")
            except (TypeError, ValueError):
                problems.append(f"line {line}: non-numeric metric value")
    if problems:
        raise ValidationError("; ".join(problems))
    if not rows:
        raise ValidationError(f"{path} contains no data rows")
    return tuple(rows)
