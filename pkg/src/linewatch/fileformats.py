"""On-disk formats: key-value config files, data/trace CSVs, reports.

Every file written by this package starts with a version header
comment ``# linewatch <kind> v1``.  Readers tolerate a missing header
(hand-written files) but reject mismatched kinds.  Floats are written
with ``repr`` (shortest round-trip), so rereading a file recovers the
exact values and rerunning a command reproduces output byte for byte.

Key-value files hold one ``key = value`` pair per line; ``#`` starts a
comment.  Config/calibration keys (units in parentheses):

    n_jump, n_kink      bin sizes (observations; 'none' disables)
    rho_jump, rho_kink  thresholds (residual units; 'inf' disables)
    k                   historical length (observations)
    horizon             change position or ARL target (monitoring steps)
    eta                 target type-I level (probability)
    replications        Monte Carlo sample size
    master_seed         integer seed
    noise, sigma, df    noise kind and parameters
    standardize         true/false

Scenario files for ``simulate`` additionally carry the signal:
tau (fraction of horizon), alpha_minus/alpha_plus (signal units at
tau), beta_minus/beta_plus (signal units per unit fraction), n, seed.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .calibration import CalibrationResult
from .detector import DetectorConfig
from .errors import FileFormatError
from .experiments import MetricsReport
from .signal import NoiseSpec, SignalParams

FORMAT_VERSION = 1

__all__ = [
    "FORMAT_VERSION",
    "calibration_to_kv",
    "config_from_kv",
    "format_table",
    "noise_from_kv",
    "parse_series",
    "read_kv",
    "read_series",
    "report_rows_csv",
    "report_text",
    "scenario_params_from_kv",
    "write_kv",
    "write_report_csv",
    "write_series",
    "write_trace",
]


def _header(kind: str) -> str:
    return f"# linewatch {kind} v{FORMAT_VERSION}"


def write_kv(path: str, kind: str, mapping: Dict[str, str]) -> None:
    lines = [_header(kind)]
    lines += [f"{key} = {value}" for key, value in mapping.items()]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_kv(path: str, expect_kind: Optional[str] = None) -> Dict[str, str]:
    out: Dict[str, str] = {}
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise FileFormatError(str(exc), path=path) from exc
    seen_header = False
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text:
            continue
        if text.startswith("#"):
            if not seen_header and text.startswith("# linewatch "):
                seen_header = True
                parts = text.split()
                if expect_kind is not None and parts[2] != expect_kind:
                    raise FileFormatError(
                        f"expected a {expect_kind} file, found {parts[2]}",
                        path=path,
                        line=lineno,
                    )
            continue
        if "=" not in text:
            raise FileFormatError("expected 'key = value'", path=path, line=lineno)
        key, _, value = text.partition("=")
        out[key.strip()] = value.strip()
    return out


def _kv_float(kv: Dict[str, str], key: str, path: str) -> float:
    try:
        return float(kv[key])
    except KeyError:
        raise FileFormatError(f"missing key {key!r}", path=path) from None
    except ValueError:
        raise FileFormatError(f"key {key!r} is not a number: {kv[key]!r}", path=path) from None


def _kv_int(kv: Dict[str, str], key: str, path: str, default: Optional[int] = None) -> Optional[int]:
    if key not in kv:
        if default is not None:
            return default
        raise FileFormatError(f"missing key {key!r}", path=path)
    try:
        return int(kv[key])
    except ValueError:
        raise FileFormatError(f"key {key!r} is not an integer: {kv[key]!r}", path=path) from None


def config_from_kv(kv: Dict[str, str], path: str = "<config>") -> DetectorConfig:
    """Detector configuration from a config or calibration file."""

    def bin_size(key: str) -> Optional[int]:
        raw = kv.get(key, "none").lower()
        if raw in ("none", "off", "-"):
            return None
        try:
            return int(raw)
        except ValueError:
            raise FileFormatError(f"key {key!r} is not an integer: {raw!r}", path=path) from None

    def threshold(key: str) -> float:
        raw = kv.get(key, "inf")
        try:
            return float(raw)
        except ValueError:
            raise FileFormatError(f"key {key!r} is not a number: {raw!r}", path=path) from None

    try:
        return DetectorConfig(
            n_jump=bin_size("n_jump"),
            n_kink=bin_size("n_kink"),
            rho_jump=threshold("rho_jump"),
            rho_kink=threshold("rho_kink"),
        )
    except ValueError as exc:
        raise FileFormatError(str(exc), path=path) from exc


def noise_from_kv(kv: Dict[str, str], path: str = "<spec>") -> NoiseSpec:
    kind = kv.get("noise", "gaussian")
    if kind == "gaussian":
        return NoiseSpec("gaussian", sigma=float(kv.get("sigma", "1.0")))
    if kind == "student_t":
        return NoiseSpec("student_t", df=_kv_float(kv, "df", path))
    raise FileFormatError(f"unknown noise kind {kind!r}", path=path)


def scenario_params_from_kv(
    kv: Dict[str, str], path: str = "<scenario>"
) -> Tuple[SignalParams, int, NoiseSpec, int]:
    """(theta, n, noise, seed) for the simulate command."""
    theta = SignalParams(
        tau=_kv_float(kv, "tau", path),
        alpha_minus=_kv_float(kv, "alpha_minus", path),
        alpha_plus=_kv_float(kv, "alpha_plus", path),
        beta_minus=_kv_float(kv, "beta_minus", path),
        beta_plus=_kv_float(kv, "beta_plus", path),
    )
    n = _kv_int(kv, "n", path)
    seed = _kv_int(kv, "seed", path, default=0)
    return theta, n, noise_from_kv(kv, path), seed


def calibration_to_kv(result: CalibrationResult) -> Dict[str, str]:
    spec = result.spec

    def opt(v) -> str:
        return "none" if v is None else repr(v)

    return {
        "method": result.method,
        "n_jump": "none" if spec.n_jump is None else str(spec.n_jump),
        "n_kink": "none" if spec.n_kink is None else str(spec.n_kink),
        "rho_jump": repr(result.rho_jump),
        "rho_kink": repr(result.rho_kink),
        "eta": repr(spec.eta),
        "eta_marginal": repr(result.eta_marginal),
        "empirical_fa": repr(result.empirical_fa),
        "fa_jump": opt(result.fa_jump),
        "fa_kink": opt(result.fa_kink),
        "k": str(spec.k),
        "horizon": str(spec.horizon),
        "replications": str(spec.replications),
        "master_seed": str(spec.master_seed),
        "noise": spec.noise.kind,
        "sigma": repr(spec.noise.sigma),
        "df": "none" if spec.noise.df is None else repr(spec.noise.df),
        "standardize": str(spec.standardize).lower(),
        "maxima_retained": str(result.maxima_retained).lower(),
    }


def write_series(path: str, values: Sequence[float], start_index: int = 1) -> None:
    """(index, value) CSV with full-precision decimals."""
    lines = [_header("data"), "index,value"]
    lines += [f"{start_index + i},{repr(float(v))}" for i, v in enumerate(values)]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def read_series(path: str) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Values (and times, for two-column files) from a data CSV.

    Accepts a single column of values or (time, value) pairs, with an
    optional header row and ``#`` comments.  Malformed rows raise
    FileFormatError with the offending line number.
    """
    try:
        with open(path) as fh:
            raw = fh.read()
    except OSError as exc:
        raise FileFormatError(str(exc), path=path) from exc
    return parse_series(raw, path)


def parse_series(raw: str, path: str = "<data>") -> Tuple[np.ndarray, Optional[np.ndarray]]:
    values: List[float] = []
    times: List[float] = []
    n_cols: Optional[int] = None
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        fields = [f.strip() for f in text.split(",")]
        if n_cols is None and not all(_is_number(f) for f in fields):
            continue  # header row
        if n_cols is None:
            n_cols = len(fields)
            if n_cols not in (1, 2):
                raise FileFormatError(
                    f"expected 1 or 2 columns, found {n_cols}", path=path, line=lineno
                )
        if len(fields) != n_cols or not all(_is_number(f) for f in fields):
            raise FileFormatError(f"malformed row {text!r}", path=path, line=lineno)
        if n_cols == 1:
            values.append(float(fields[0]))
        else:
            times.append(float(fields[0]))
            values.append(float(fields[1]))
    if not values:
        raise FileFormatError("no data rows found", path=path)
    return np.array(values), (np.array(times) if times else None)


def write_trace(path: str, rows: Sequence[Tuple], config: DetectorConfig) -> None:
    """Statistic trace CSV, one row per monitored observation.

    ``rows`` entries are (index, observation, residual, j_stat, k_stat,
    alarm_flag, kind_or_None); thresholds are repeated per row so the
    file stands alone for plotting.
    """

    def fmt(v) -> str:
        return "" if v is None else repr(float(v))

    lines = [_header("trace"),
             "index,observation,residual,j_stat,k_stat,rho_jump,rho_kink,alarm,kind"]
    rho_j, rho_k = repr(config.rho_jump), repr(config.rho_kink)
    for idx, obs, resid, j, k, alarm, kind in rows:
        lines.append(
            f"{idx},{repr(float(obs))},{repr(float(resid))},{fmt(j)},{fmt(k)},"
            f"{rho_j},{rho_k},{int(alarm)},{kind if kind else ''}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def report_rows_csv(report: MetricsReport) -> str:
    lines = [_header("report"), "key,value"]
    lines += [f"{key},{value}" for key, value in report.rows()]
    return "\n".join(lines) + "\n"


def write_report_csv(report: MetricsReport, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(report_rows_csv(report))


def report_text(report: MetricsReport) -> str:
    """Aligned two-column rendering of a metrics report."""
    return format_table(["key", "value"], report.rows())


def format_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Aligned fixed-width text table."""
    table = [list(headers)] + [list(map(str, row)) for row in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    out = []
    for irow, row in enumerate(table):
        out.append("  ".join(cell.rjust(w) for cell, w in zip(row, widths)))
        if irow == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out)
