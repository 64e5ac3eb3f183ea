"""CSV, key=value and text-table writers.

Every file is written to a temporary sibling and renamed into place, so an
interrupted run never leaves a truncated data file behind.
"""
from __future__ import annotations

import io
import os
import tempfile
from pathlib import Path

from .farm import CaseResult, RelativeReport, study_cases

TIMESERIES_COLUMNS = ("t", "turbine", "power", "thrust", "thrust_tilt", "thrust_yaw",
                      "theta1", "theta2", "theta3", "u_eff")
PLANE_COLUMNS = ("time", "plane_x", "y_center", "z_center", "disk_avg_u", "ke_flux")


def _num(value: float) -> str:
    return repr(float(value) + 0.0)


def atomic_write(path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def timeseries_csv(result: CaseResult) -> str:
    buf = io.StringIO()
    buf.write(",".join(TIMESERIES_COLUMNS) + "\n")
    series = result.turbines
    for k, t in enumerate(series[0].time):
        for i, s in enumerate(series, start=1):
            row = [_num(t), str(i), _num(s.power[k]), _num(s.thrust[k]), _num(s.thrust_tilt[k]),
                   _num(s.thrust_yaw[k]), *(_num(v) for v in s.pitch[k]), _num(s.u_eff[k])]
            buf.write(",".join(row) + "\n")
    return buf.getvalue()


def planes_csv(result: CaseResult) -> str:
    buf = io.StringIO()
    buf.write(",".join(PLANE_COLUMNS) + "\n")
    for p in result.planes:
        for k in range(len(p.time)):
            buf.write(",".join(_num(v) for v in (p.time[k], p.plane_x, p.y_center[k], p.z_center[k],
                                                  p.disk_avg_u[k], p.ke_flux[k])) + "\n")
    return buf.getvalue()


def format_records(metrics: dict, section: str | None = None) -> str:
    lines = [f"[{section}]"] if section else []
    lines += [f"{key} = {_num(value)}" for key, value in metrics.items()]
    return "\n".join(lines) + "\n"


def parse_records(text: str) -> dict:
    """Read key=value aggregate records into ``{case: {key: value}}``.

    Records before any ``[case]`` header belong to the case ``""``.
    """
    cases = {}
    current = ""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1]
            cases.setdefault(current, {})
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        cases.setdefault(current, {})[key] = float(value)
    return cases


def _pct(value) -> str:
    return "undef" if value is None else f"{value:+.1f}%"


def _table(title: str, columns: list, rows: list) -> str:
    """Render ``rows`` of (label, cells) as a fixed-width table."""
    label_width = max(len(r[0]) for r in rows)
    widths = [max(len(c), *(len(r[1][j]) for r in rows)) for j, c in enumerate(columns)]
    lines = [title, " " * label_width + " | " + " | ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines.append("-" * len(lines[-1]))
    for label, cells in rows:
        lines.append(label.ljust(label_width) + " | " + " | ".join(c.rjust(w) for c, w in zip(cells, widths)))
    return "\n".join(lines) + "\n"


TABLE1_ROWS = [
    ("Power", "power_mean_T1"),
    ("Variation of power", "power_var_T1"),
    ("Variation of thrust", "thrust_var_T1"),
    ("Energy at 3D", "ke_flux_3D"),
    ("Energy at 5D", "ke_flux_5D"),
    ("Energy at 7D", "ke_flux_7D"),
]
TABLE1_ABSOLUTE = [
    ("Pitch variation, mean abs rate [deg/min]", "pitch_rate_abs_T1"),
    ("Pitch variation, RMS rate [deg/min]", "pitch_rate_rms_T1"),
]
TABLE2_ROWS = [
    ("Power T1", "power_mean_T1"),
    ("Power T2", "power_mean_T2"),
    ("Total power production", "farm_power"),
    ("Variance of power T1", "power_var_T1"),
    ("Variance of power T2", "power_var_T2"),
    ("Variance of thrust T1", "thrust_var_T1"),
    ("Variance of thrust T2", "thrust_var_T2"),
]


def _case_labels(report: RelativeReport) -> list:
    labels = {c.case_id: c.label for c in study_cases()}
    return [labels.get(c, c) for c in report.cases]


def table1(report: RelativeReport) -> str:
    rows = [(label, [_pct(report.deltas[c][key]) for c in report.cases]) for label, key in TABLE1_ROWS]
    rows += [(label, [f"{report.absolute[c][key]:.2f}" for c in report.cases]) for label, key in TABLE1_ABSOLUTE]
    return _table("Single turbine, relative to baseline (pitch variation absolute)", _case_labels(report), rows)


def table2(report: RelativeReport) -> str:
    rows = [(label, [_pct(report.deltas[c][key]) for c in report.cases]) for label, key in TABLE2_ROWS]
    return _table("Two-turbine farm, relative to baseline", _case_labels(report), rows)


def relative_table(report: RelativeReport) -> str:
    rows = [(key, [_pct(report.deltas[c][key]) for c in report.cases]) for key in report.keys]
    return _table(f"Relative to {report.baseline}", list(report.cases), rows)


def case_summary(result: CaseResult, metrics: dict) -> str:
    lines = [f"case: {result.name}"]
    for i, spec in enumerate(result.strategies, start=1):
        lines.append(f"turbine {i}: {spec.kind.value} amplitude={spec.amplitude_deg:g} deg "
                     f"St={spec.strouhal:g} phase_offset={spec.phase_offset_deg:g} deg")
    lines.append(f"warmup = {result.warmup:g} s, duration = {result.duration:g} s, "
                 f"excitation period = {result.reference_period:.3f} s")
    width = max(len(k) for k in metrics)
    lines += [f"{key.ljust(width)}  {value:.6g}" for key, value in metrics.items()]
    return "\n".join(lines) + "\n"


def sweep_csv(rows) -> str:
    lines = ["strouhal,plane_d,normalized_u"]
    lines += [f"{_num(r.strouhal)},{_num(r.plane_d)},{_num(r.normalized_u)}" for r in rows]
    return "\n".join(lines) + "\n"


def sweep_table(rows) -> str:
    sts = sorted({r.strouhal for r in rows})
    planes = sorted({r.plane_d for r in rows})
    value = {(r.strouhal, r.plane_d): r.normalized_u for r in rows}
    table_rows = [(f"{d:g}D", [f"{value[(st, d)]:.4f}" for st in sts]) for d in planes]
    return _table("Normalized wake velocity vs Strouhal number", [f"St={st:g}" for st in sts], table_rows)
