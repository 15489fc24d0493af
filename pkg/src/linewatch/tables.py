"""Prebuilt experiment suites behind ``linewatch experiment``.

Each builder reproduces one published-table layout at configurable
replication counts and returns (headers, rows) of formatted strings;
values are Monte Carlo estimates, so expect sampling noise around the
published numbers at the default counts.
"""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple

from .calibration import CalibrationSpec, calibrate_arl, calibrate_joint, calibrate_single
from .detector import DetectorConfig
from .experiments import (
    RobustnessTemplate,
    Scenario,
    derive_seed,
    estimate_arl,
    estimate_metrics,
    rate_check,
    robustness_study,
    type_discrimination_study,
)
from .signal import NoiseSpec, SignalParams

__all__ = ["EXPERIMENTS", "rates_table", "table2", "table3", "table5", "types_table"]

_GAUSS = NoiseSpec("gaussian", 1.0)
_MODE_ID = {"jump": 1, "kink": 2, "both": 3}
_JUMP_SIZES = (2.0, 1.0, 0.5)
_KINK_SLOPES = (0.5, 0.1, 0.02)  # per observation


def _fmt(value: Optional[float], digits: int = 6) -> str:
    if value is None:
        return "-"
    if value == math.inf:
        return "inf"
    return f"{value:.{digits}g}"


def _delay_scenario(
    jump: float, kink_per_obs: float, k: int, config: DetectorConfig,
    replications: int, seed: int, post_window: int = 4000,
) -> Scenario:
    """Change at the first monitored observation: pure-delay measurement."""
    n = k + 1 + post_window
    tau = (k + 1) / n
    theta = SignalParams(tau, 0.0, jump, 0.0, kink_per_obs * n)
    return Scenario(theta, n, k, _GAUSS, config, replications, seed)


def _fa_scenario(
    k: int, horizon: int, config: DetectorConfig, replications: int, seed: int
) -> Scenario:
    """No-change stream with the nominal change at monitoring step
    ``horizon``; fa_prob estimates the false-alarm probability."""
    n = k + horizon + 8
    theta = SignalParams((k + horizon) / n, 0.0, 0.0, 0.0, 0.0)
    return Scenario(theta, n, k, _GAUSS, config, replications, seed)


def _edd_cells(
    mode: str, k: int, config: DetectorConfig, replications: int, seed_base: int
) -> List[str]:
    cells: List[str] = []
    for idx, jump in enumerate(_JUMP_SIZES):
        if mode == "kink":
            cells.append("-")
            continue
        rep = estimate_metrics(
            _delay_scenario(jump, 0.0, k, config, replications, derive_seed(seed_base, 1, idx))
        )
        cells.append(_fmt(rep.edd, 3))
    for idx, slope in enumerate(_KINK_SLOPES):
        if mode == "jump":
            cells.append("-")
            continue
        rep = estimate_metrics(
            _delay_scenario(0.0, slope, k, config, replications, derive_seed(seed_base, 2, idx))
        )
        cells.append(_fmt(rep.edd, 3))
    return cells


def _calibrate_mode(spec: CalibrationSpec, mode: str, arl: bool):
    if arl:
        return calibrate_arl(spec, which={"both": "both", "jump": "jump", "kink": "kink"}[mode])
    if mode == "both":
        return calibrate_joint(spec)
    return calibrate_single(spec, mode)


def table2(
    calib_replications: int = 10000,
    replications: int = 200,
    master_seed: int = 20260201,
) -> Tuple[List[str], List[List[str]]]:
    """False-alarm-calibrated thresholds and detection delays across
    bin sizes and history lengths (target FA 0.5)."""
    headers = ["mode", "N", "target_fa", "k", "rho_jump", "rho_kink", "fa",
               "jump_edd_2", "jump_edd_1", "jump_edd_0.5",
               "kink_edd_0.5", "kink_edd_0.1", "kink_edd_0.02"]
    settings = [(5, 500), (10, 500), (10, 1000), (10, 5000), (15, 500)]
    rows: List[List[str]] = []
    for mode in ("jump", "kink", "both"):
        for row_idx, (n_bin, k) in enumerate(settings):
            horizon = 10000 if k == 5000 else 1000
            seed = derive_seed(master_seed, _MODE_ID[mode], row_idx)
            spec = CalibrationSpec(
                replications=calib_replications, eta=0.5, horizon=horizon, k=k,
                n_jump=n_bin if mode in ("jump", "both") else None,
                n_kink=n_bin if mode in ("kink", "both") else None,
                noise=_GAUSS, master_seed=derive_seed(seed, 0),
            )
            cal = _calibrate_mode(spec, mode, arl=False)
            config = cal.to_config()
            fa_rep = estimate_metrics(
                _fa_scenario(k, horizon, config, replications, derive_seed(seed, 3))
            )
            rows.append([
                mode, str(n_bin), "0.5", str(k),
                _fmt(cal.rho_jump if mode != "kink" else None, 3),
                _fmt(cal.rho_kink if mode != "jump" else None, 3),
                _fmt(fa_rep.fa_prob, 2),
                *_edd_cells(mode, k, config, replications, seed),
            ])
    return headers, rows


def table3(
    calib_replications: int = 10000,
    replications: int = 100,
    master_seed: int = 20260202,
) -> Tuple[List[str], List[List[str]]]:
    """ARL-calibrated thresholds, achieved ARLs and detection delays."""
    headers = ["mode", "N", "target_arl", "k", "rho_jump", "rho_kink", "arl",
               "jump_edd_2", "jump_edd_1", "jump_edd_0.5",
               "kink_edd_0.5", "kink_edd_0.1", "kink_edd_0.02"]
    settings = [(10, 1000, 1000), (15, 1000, 1000), (10, 1000, 5000), (10, 5000, 2500)]
    rows: List[List[str]] = []
    for mode in ("jump", "kink", "both"):
        for row_idx, (n_bin, target, k) in enumerate(settings):
            seed = derive_seed(master_seed, _MODE_ID[mode], row_idx)
            spec = CalibrationSpec(
                replications=calib_replications, eta=0.5, horizon=target, k=k,
                n_jump=n_bin if mode in ("jump", "both") else None,
                n_kink=n_bin if mode in ("kink", "both") else None,
                noise=_GAUSS, master_seed=derive_seed(seed, 0),
            )
            cal = _calibrate_mode(spec, mode, arl=True)
            config = cal.to_config()
            arl_rep = estimate_arl(
                config, _GAUSS, k, 10 * target, replications, derive_seed(seed, 4)
            )
            rows.append([
                mode, str(n_bin), str(target), str(k),
                _fmt(cal.rho_jump if mode != "kink" else None, 3),
                _fmt(cal.rho_kink if mode != "jump" else None, 3),
                _fmt(arl_rep.arl, 6),
                *_edd_cells(mode, k, config, replications, seed),
            ])
    return headers, rows


def table5(
    calib_replications: int = 10000,
    replications: int = 500,
    master_seed: int = 20260203,
) -> Tuple[List[str], List[List[str]]]:
    """Heavy-tail robustness: Gaussian-calibrated thresholds applied to
    Student-t noise of varying degrees of freedom."""
    tpl = RobustnessTemplate(
        bin_size=15, k=5000, target_arl=1000,
        calib_replications=calib_replications, replications=replications,
        master_seed=master_seed,
    )
    df_grid = [1.0, 2.0, 3.0, 4.0, 5.0, 10.0, 30.0, math.inf]
    report = robustness_study(df_grid, tpl)
    headers = ["arm", "df", "arl", "arl_censored", "edd", "n_detected"]
    rows = [
        [str(r.arm), "inf" if math.isinf(r.df) else _fmt(r.df, 3),
         _fmt(r.arl, 6), str(r.arl_censored), _fmt(r.edd, 3), str(r.n_detected)]
        for r in report.rows
    ]
    return headers, rows


def rates_table(
    replications: int = 200,
    master_seed: int = 20260204,
    n_grid: Sequence[int] = tuple(2 ** p for p in range(10, 17)),
) -> Tuple[List[str], List[List[str]]]:
    """Delay scaling against the horizon for both change types."""
    headers = ["kind", "n", "k", "bin", "threshold", "mean_delay",
               "delay/log(n)", "detected", "slope"]
    rows: List[List[str]] = []
    for kind in ("jump", "kink"):
        rep = rate_check(0.5, list(n_grid), kind, replications,
                         derive_seed(master_seed, _MODE_ID[kind]))
        for point, ratio in zip(rep.points, rep.delay_over_log):
            rows.append([
                kind, str(point.n), str(point.k), str(point.bin_size),
                _fmt(point.threshold, 4), _fmt(point.mean_delay, 4),
                _fmt(ratio, 3), str(point.n_detected),
                _fmt(rep.slope, 3),
            ])
    return headers, rows


def types_table(
    calib_replications: int = 10000,
    replications: int = 1000,
    master_seed: int = 20260205,
) -> Tuple[List[str], List[List[str]]]:
    """First-to-fire change-type attribution at the jointly calibrated
    N = 10, k = 1000 configuration."""
    k, n_bin, horizon = 1000, 10, 1000
    spec = CalibrationSpec(
        replications=calib_replications, eta=0.5, horizon=horizon, k=k,
        n_jump=n_bin, n_kink=n_bin, noise=_GAUSS,
        master_seed=derive_seed(master_seed, 0),
    )
    config = calibrate_joint(spec).to_config()
    n = k + horizon + 1200
    scenarios = [
        Scenario(SignalParams((k + horizon) / n, 0.0, 1.0, 0.0, 0.0), n, k,
                 _GAUSS, config, replications, derive_seed(master_seed, 1)),
        Scenario(SignalParams((k + horizon) / n, 0.0, 0.0, 0.0, 0.1 * n), n, k,
                 _GAUSS, config, replications, derive_seed(master_seed, 2)),
    ]
    rows_out = type_discrimination_study(scenarios)
    headers = ["true_kind", "replications", "post_alarms", "wrong_kind",
               "wrong_rate", "false_alarms", "missed"]
    rows = [
        [str(r.true_kind), str(r.replications), str(r.n_post_alarms),
         str(r.n_wrong_kind), _fmt(r.wrong_rate, 3), str(r.n_false_alarm),
         str(r.n_missed)]
        for r in rows_out
    ]
    return headers, rows


EXPERIMENTS = {
    "table2": table2,
    "table3": table3,
    "table5": table5,
    "rates": rates_table,
    "types": types_table,
}
