"""Plain-text rendering of campaign reports and strategy comparisons."""
from __future__ import annotations

import json
import os
from typing import List, Optional, Sequence

from .findings import read_index


def _table(headers: Sequence[str], rows: Sequence[Sequence]) -> str:
    cells = [[str(h) for h in headers]] + [[_fmt(c) for c in r] for r in rows]
    widths = [max(len(row[k]) for row in cells) for k in range(len(headers))]
    lines = []
    for n, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if n == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    return "-" if v is None else str(v)


def render_text(report, findings: Optional[List[dict]] = None) -> str:
    r = report
    out = [
        f"campaign seed {r.seed}  strategy {r.strategy}  stopped: {r.stopped}",
        "",
        _table(
            ["iterations", "mutants", "diff>0", "out_vul", "findings", "unique", "admitted", "pool"],
            [[r.iterations_run, r.mutants, r.divergent, r.out_vul, r.findings_raw, r.findings_unique,
              r.admissions, r.pool_size]],
        ),
        "",
        _table(
            ["first divergence", "first gas divergence", "first trace-only", "first finding"],
            [[r.first_divergence, r.first_gas_divergence, r.first_trace_only, r.first_finding]],
        ),
        "",
        "classifications",
        _table(["class", "count"], sorted(r.classifications.items())),
        "",
        "crash refinement",
        _table(["backend", "ind1 (sole survivor)", "ind2 (sole crasher)"],
               [[b, a, c] for b, (a, c) in r.ind_table.items()]),
        "",
        "mutator weights",
        _table(["mutator", "weight"], [[k, v] for k, v in r.final_weights.items()]),
    ]
    for name, series in r.series.items():
        if series:
            marks = sorted({0, len(series) // 4, len(series) // 2, 3 * len(series) // 4, len(series) - 1})
            out += ["", f"best diff so far ({name})",
                    _table(["iteration", "best diff"], [[k + 1, series[k]] for k in marks])]
    if findings:
        out += ["", "findings",
                _table(["id", "class", "iteration", "lineage", "statuses"],
                       [[f["id"], f["classification"], f["iteration"], f["lineage"], "/".join(f["statuses"])]
                        for f in findings])]
    return "\n".join(out) + "\n"


def render_comparison(cmp) -> str:
    rows = cmp.table()
    step = max(1, len(rows) // 20)
    shown = rows[::step]
    if rows and shown[-1] is not rows[-1]:
        shown.append(rows[-1])
    head = _table(
        ["strategy", "median iterations to first divergence", "trials diverged"],
        [[s, cmp.median_iterations_to_first(s), sum(v is not None for v in cmp.first_divergence[s])]
         for s in cmp.strategies],
    )
    body = _table(["iteration"] + cmp.strategies, [[r["iteration"]] + [r[s] for s in cmp.strategies] for r in shown])
    return f"{head}\n\nmedian best-so-far diff\n{body}\n"


def load_corpus_report(corpus: str):
    from .run import REPORT_JSON, FINDINGS_DIR, CampaignReport

    path = os.path.join(corpus, REPORT_JSON)
    with open(path) as fh:
        payload = json.load(fh)
    report = CampaignReport.from_dict(payload["report"])
    return report, read_index(os.path.join(corpus, FINDINGS_DIR))
