"""Rendering of fits, test decisions, and study tables.

Three formats: "human" (aligned text), "csv", and "json" (structured
text that parses back with json.loads). The same dispatcher handles a
fitted model, a cluster test result, a list of (series id, univariate
result) pairs, and a list of study rows.
"""

from __future__ import annotations

import csv
import io as _io
import json
from typing import Sequence

from .baseline import LrTestResult
from .estimation import FittedModel
from .montecarlo import SizePowerRow, summarize
from .nptest import VolatilityTestResult

__all__ = ["render_report"]

FORMATS = ("human", "csv", "json")

UnivariateRows = Sequence[tuple[str, LrTestResult]]


def _fmt(value, digits: int = 4) -> str:
    if value is None:
        return "---"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.{digits}f}"
    return str(value)


def _table(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[j]), *(len(r[j]) for r in rows)) if rows else len(header[j])
        for j in range(len(header))
    ]
    def line(cells):
        return "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out = [line(header), line(["-" * w for w in widths])]
    out.extend(line(r) for r in rows)
    return "\n".join(out)


def _csv_doc(header: list[str], rows: list[list]) -> str:
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().rstrip("\n")


def _json_doc(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True)


def _fit_payload(fit: FittedModel) -> dict:
    return {
        "kind": "fit",
        "phi_hat": fit.phi_hat,
        "iterations": fit.iterations,
        "converged": fit.converged,
        "n_series": int(fit.lambda_hat.shape[0]),
        "lambda_hat": [float(v) for v in fit.lambda_hat],
        "clusters": [
            {"cluster": k + 1, "alpha0": a0, "alpha1": a1}
            for k, (a0, a1) in enumerate(fit.arch_hat)
        ],
    }


def _render_fit(fit: FittedModel, fmt: str) -> str:
    if fmt == "json":
        return _json_doc(_fit_payload(fit))
    if fmt == "csv":
        rows = [
            [k + 1, repr(a0), repr(a1)] for k, (a0, a1) in enumerate(fit.arch_hat)
        ]
        head = _csv_doc(["cluster", "alpha0", "alpha1"], rows)
        meta = _csv_doc(
            ["phi_hat", "iterations", "converged"],
            [[repr(fit.phi_hat), fit.iterations, fit.converged]],
        )
        return meta + "\n\n" + head
    lines = [
        f"common AR(1) coefficient: {fit.phi_hat:.4f}",
        f"iterations: {fit.iterations} (converged: {_fmt(fit.converged)})",
        "",
        _table(
            ["cluster", "alpha0", "alpha1"],
            [
                [str(k + 1), _fmt(a0), _fmt(a1)]
                for k, (a0, a1) in enumerate(fit.arch_hat)
            ],
        ),
    ]
    return "\n".join(lines)


def _test_payload(result: VolatilityTestResult) -> dict:
    return {
        "kind": "volatility_test",
        "phi_hat": result.fitted.phi_hat,
        "alpha": result.alpha,
        "corrected_level": result.corrected_level,
        "n_replicates": result.n_replicates,
        "n_errors": result.n_errors,
        "clusters": [
            {
                "cluster": d.cluster,
                "alpha1_hat": d.alpha1_hat,
                "ci_lower": d.ci_lower,
                "ci_upper": d.ci_upper,
                "reject": d.reject,
            }
            for d in result.decisions
        ],
    }


def _render_test(result: VolatilityTestResult, fmt: str) -> str:
    if fmt == "json":
        return _json_doc(_test_payload(result))
    if fmt == "csv":
        rows = [
            [d.cluster, repr(d.alpha1_hat), repr(d.ci_lower), repr(d.ci_upper),
             d.reject]
            for d in result.decisions
        ]
        meta = _csv_doc(
            ["phi_hat", "alpha", "corrected_level", "replicates", "errors"],
            [[repr(result.fitted.phi_hat), result.alpha, result.corrected_level,
              result.n_replicates, result.n_errors]],
        )
        body = _csv_doc(
            ["cluster", "alpha1_hat", "ci_lower", "ci_upper", "reject"], rows
        )
        return meta + "\n\n" + body
    rows = []
    for d in result.decisions:
        interval = f"{d.alpha1_hat:.3f} ({d.ci_lower:.4f}, {d.ci_upper:.4f})"
        rows.append([str(d.cluster), interval, "reject" if d.reject else ""])
    lines = [
        f"common AR(1) coefficient: {result.fitted.phi_hat:.4f}",
        f"familywise level {result.alpha:g}, per-cluster level "
        f"{result.corrected_level:g}, {result.n_replicates} replicates"
        + (f", {result.n_errors} errors" if result.n_errors else ""),
        "",
        _table(["cluster", "alpha1 (interval)", "decision"], rows),
    ]
    return "\n".join(lines)


def _univariate_payload(rows: UnivariateRows) -> dict:
    return {
        "kind": "univariate",
        "series": [
            {
                "series": sid,
                "ar_intercept": r.ar_intercept,
                "ar_phi": r.ar_phi,
                "statistic": r.statistic,
                "p_value": r.p_value,
                "reject": r.reject,
                "nonstationary": r.nonstationary,
            }
            for sid, r in rows
        ],
    }


def _render_univariate(rows: UnivariateRows, fmt: str) -> str:
    if fmt == "json":
        return _json_doc(_univariate_payload(rows))
    if fmt == "csv":
        body = [
            [sid, repr(r.ar_intercept), repr(r.ar_phi), repr(r.statistic),
             repr(r.p_value), r.reject, r.nonstationary]
            for sid, r in rows
        ]
        return _csv_doc(
            ["series", "ar_intercept", "ar_phi", "statistic", "p_value",
             "reject", "nonstationary"],
            body,
        )
    body = []
    for sid, r in rows:
        note = "nonstationary" if r.nonstationary else ""
        body.append(
            [sid, _fmt(r.ar_phi), _fmt(r.statistic), _fmt(r.p_value),
             "reject" if r.reject else "", note]
        )
    return _table(
        ["series", "ar_phi", "statistic", "p_value", "decision", "note"], body
    )


def _render_rows(rows: Sequence[SizePowerRow], fmt: str) -> str:
    records = summarize(rows)
    if fmt == "json":
        return _json_doc({"kind": "study", "rows": records})
    header = [
        "scenario", "replications", "completed", "np_power", "np_power_se",
        "np_size", "np_size_se", "param_power", "param_size", "errors",
    ]
    if fmt == "csv":
        body = [
            [rec["scenario"], rec["replications"], rec["completed"],
             _csv_num(rec["np_power"]), _csv_num(rec["np_power_se"]),
             _csv_num(rec["np_size"]), _csv_num(rec["np_size_se"]),
             _csv_num(rec["param_power"]), _csv_num(rec["param_size"]),
             rec["errors"]]
            for rec in records
        ]
        return _csv_doc(header, body)
    body = [
        [rec["scenario"], str(rec["replications"]), str(rec["completed"]),
         _fmt(rec["np_power"]), _fmt(rec["np_power_se"]),
         _fmt(rec["np_size"]), _fmt(rec["np_size_se"]),
         _fmt(rec["param_power"]), _fmt(rec["param_size"]),
         str(rec["errors"])]
        for rec in records
    ]
    return _table(header, body)


def _csv_num(value) -> str:
    return "" if value is None else repr(value)


def render_report(result, fmt: str = "human") -> str:
    """Render a result object to a document in the requested format.

    Accepts a :class:`FittedModel`, a :class:`VolatilityTestResult`, a
    sequence of (series id, :class:`LrTestResult`) pairs, or a sequence
    of :class:`SizePowerRow`.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unsupported format {fmt!r}; choose from {FORMATS}")
    if isinstance(result, FittedModel):
        return _render_fit(result, fmt)
    if isinstance(result, VolatilityTestResult):
        return _render_test(result, fmt)
    if isinstance(result, Sequence) and result:
        first = result[0]
        if isinstance(first, SizePowerRow):
            return _render_rows(result, fmt)
        if (
            isinstance(first, tuple)
            and len(first) == 2
            and isinstance(first[1], LrTestResult)
        ):
            return _render_univariate(result, fmt)
    raise ValueError(f"cannot render object of type {type(result).__name__}")
