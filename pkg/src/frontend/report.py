"""
Result Reporting
================
Renders an OptimizationResult as JSON or as a human-readable report.

Output depends only on the result, so identical runs produce
byte-identical reports.
"""

import json
import logging
from typing import Any, Dict, List, Optional

import pandas as pd

from src.algebra.realroots import AlgebraicNumber, algnum_approx
from src.engines.optimizer_engine import OptimizationResult

logger = logging.getLogger(__name__)

REPORT_WIDTH = 70


def _number_dict(a: AlgebraicNumber, digits: int) -> Dict[str, Any]:
    return {
        'approx': algnum_approx(a, digits),
        'interval': [str(a.interval.lo), str(a.interval.hi)],
        'defining_polynomial': a.defpoly.render(),
        'exact_rational': str(a.rational_value) if a.is_rational else None,
    }


def result_to_dict(result: OptimizationResult, digits: int = 10, include_trace: bool = False,
                   root_check: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """JSON-ready dictionary with a fixed key order."""
    data: Dict[str, Any] = {
        'status': result.status.value,
        'direction': result.direction.value,
        'parameter': result.param,
        'value': _number_dict(result.optimum, digits) if result.optimum is not None else {},
    }
    if result.candidate_poly is not None:
        data['candidate_polynomial'] = {
            'degree': result.candidate_poly.degree(result.param),
            'text': result.candidate_poly.render(),
        }
    data['candidates'] = [
        {
            'index': i,
            'interval': [str(record.root.interval.lo), str(record.root.interval.hi)],
            'approx': algnum_approx(record.root, digits),
            'fate': record.fate.value,
            'reason': record.reason,
            'verdict': record.verdict.to_dict() if record.verdict is not None else None,
        }
        for i, record in enumerate(result.candidates)
    ]
    data['caveats'] = list(result.caveats)
    data['reason'] = result.reason
    data['monotonicity'] = result.monotonicity.value if result.monotonicity is not None else None
    data['bound_certificate'] = (result.bound_certificate.render()
                                 if result.bound_certificate is not None else None)
    data['decisions'] = [
        {'value': str(d.value), 'purpose': d.purpose, 'verdict': d.verdict.to_dict()}
        for d in result.decisions
    ]
    if root_check is not None:
        data['root_check'] = root_check
    if include_trace and result.trace is not None:
        data['trace'] = result.trace.to_dict()
    return data


def _ledger_frame(result: OptimizationResult, digits: int) -> pd.DataFrame:
    rows = []
    for i, record in enumerate(result.candidates):
        rows.append({
            '#': i,
            'interval': f"[{record.root.interval.lo}, {record.root.interval.hi}]",
            'approx': algnum_approx(record.root, digits),
            'fate': record.fate.value,
            'reason': record.reason,
        })
    return pd.DataFrame(rows, columns=['#', 'interval', 'approx', 'fate', 'reason']).set_index('#')


def _trace_frame(result: OptimizationResult) -> pd.DataFrame:
    rows = [step.to_dict() for step in result.trace.steps]
    columns = ['variable', 'input_degree', 'raw_degree', 'result_degree', 'powerfree_degree_drop']
    return pd.DataFrame(rows, columns=columns)


def _text_report(result: OptimizationResult, digits: int, include_trace: bool,
                 root_check: Optional[Dict[str, Any]]) -> str:
    lines: List[str] = []
    lines.append("=" * REPORT_WIDTH)
    title = f"KBOUND RESULT ({result.direction.value.upper()} {result.param})"
    lines.append(title.center(REPORT_WIDTH))
    lines.append("=" * REPORT_WIDTH)
    lines.append(f"Status:            {result.status.value}")

    if result.optimum is not None:
        opt = result.optimum
        lines.append(f"Optimum:           {result.param} = {algnum_approx(opt, digits)}")
        if opt.is_rational:
            lines.append(f"Exact value:       {opt.rational_value}")
        lines.append(f"Isolating interval: [{opt.interval.lo}, {opt.interval.hi}]")
    if result.candidate_poly is not None:
        lines.append(f"Candidate degree:  {result.candidate_poly.degree(result.param)}")
    if result.monotonicity is not None:
        lines.append(f"Monotonicity:      {result.monotonicity.value}")
    if result.reason:
        lines.append(f"Reason:            {result.reason}")
    if result.bound_certificate is not None:
        lines.append(f"Bound certificate: {result.bound_certificate.render()} >= 0")

    if result.candidates:
        lines.append("")
        lines.append("CANDIDATE LEDGER")
        lines.append("-" * REPORT_WIDTH)
        lines.append(_ledger_frame(result, digits).to_string())

    if root_check is not None:
        lines.append("")
        verdict = "is" if root_check.get('is_root') else "is NOT"
        lines.append(f"The optimum {verdict} a root of {root_check.get('polynomial')}")

    if result.caveats:
        lines.append("")
        lines.append("CAVEATS")
        lines.extend(f"  - {caveat}" for caveat in result.caveats)

    if include_trace and result.trace is not None:
        lines.append("")
        lines.append("PROJECTION TRACE")
        lines.append("-" * REPORT_WIDTH)
        if result.trace.steps:
            lines.append(_trace_frame(result).to_string(index=False))
        lines.extend(f"  note: {note}" for note in result.trace.notes)
        for step in result.trace.steps:
            lines.extend(f"  {step.variable}: {note}" for note in step.notes)

    lines.append("=" * REPORT_WIDTH)
    return "\n".join(lines) + "\n"


def emit_result(result: OptimizationResult, fmt: str = "text", digits: int = 10,
                include_trace: bool = False, root_check: Optional[Dict[str, Any]] = None) -> str:
    """
    Render a result.

    Args:
        result: Solver output
        fmt: 'json' or 'text'
        digits: Decimal digits of every approximation
        include_trace: Append the projection trace
        root_check: Outcome of --check-root-of, if requested

    Returns:
        The report text
    """
    if fmt == "json":
        data = result_to_dict(result, digits, include_trace, root_check)
        return json.dumps(data, indent=2) + "\n"
    if fmt == "text":
        return _text_report(result, digits, include_trace, root_check)
    raise ValueError(f"unknown format {fmt!r}")
