"""Constant-memory streaming detector for jumps and kinks.

Each enabled statistic keeps three bins of residual sums.  With bin
size N and monitoring clock t (t = 1 at the first monitored
observation), r = t mod N; when r == 0 the oldest bin is discarded and
a fresh one started.  The statistics over the implied window of
M = 2N + r + 1 slots (zero-padded while the bins fill) are

    jump:  J = (s1 + s2 + s3) / M
    kink:  K = (w1 + w2 + w3 + N*s2 + 2N*s3) / d,
           d = M (M+1) (2M+1) / 6

where the s's are plain residual sums per bin and the w's weight each
residual by its 1-based position within its bin.  K is the linearly
weighted residual mean with weights 1..M across the window; d is
sum(i^2, i=1..M).  An alarm fires when |J| >= rho_jump (checked first)
or |K| >= rho_kink.  State size is a constant independent of t.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DetectorStoppedError
from .prechange import (
    FractionTime,
    IndexTime,
    KnownPrechange,
    PrechangeFit,
    TimeScale,
    fit_ols,
    standardize,
)
from .signal import ChangeKind

__all__ = [
    "BinTriple",
    "DetectionEvent",
    "DetectorConfig",
    "DetectorState",
    "MultiBinResult",
    "RunResult",
    "load_state",
    "multi_bin_run",
    "run",
    "run_with_restarts",
    "save_state",
    "StatSnapshot",
    "theorem_scale_config",
]


@dataclass(frozen=True)
class DetectorConfig:
    """Bin sizes and thresholds; a statistic with bin size None is off.

    Thresholds may be math.inf to keep a statistic computed but never
    alarming.
    """

    n_jump: Optional[int] = None
    n_kink: Optional[int] = None
    rho_jump: float = math.inf
    rho_kink: float = math.inf

    def __post_init__(self) -> None:
        if self.n_jump is None and self.n_kink is None:
            raise ValueError("at least one statistic must be enabled")
        for name, n in (("n_jump", self.n_jump), ("n_kink", self.n_kink)):
            if n is not None and n < 1:
                raise ValueError(f"{name} must be >= 1, got {n}")
        for name, rho in (("rho_jump", self.rho_jump), ("rho_kink", self.rho_kink)):
            if math.isnan(rho) or rho <= 0.0:
                raise ValueError(f"{name} must be > 0 (inf allowed), got {rho}")


@dataclass
class BinTriple:
    """Rolling bins: s = residual sums, w = within-bin weighted sums."""

    bin_size: int
    s1: float = 0.0
    s2: float = 0.0
    s3: float = 0.0
    w1: float = 0.0
    w2: float = 0.0
    w3: float = 0.0
    r: int = 0


@dataclass(frozen=True)
class DetectionEvent:
    """An alarm: absolute index, change type, and what crossed what."""

    time: int
    kind: ChangeKind
    stat_value: float
    threshold: float


@dataclass(frozen=True)
class StatSnapshot:
    """Statistic values after one step; windows lie in [2N+1, 3N]."""

    t: int
    j_stat: Optional[float]
    k_stat: Optional[float]
    window_jump: Optional[int]
    window_kink: Optional[int]


class DetectorState:
    """Mutable runtime state; single writer, constant size.

    ``prechange`` supplies the fitted (or known) line and its time
    scale; residuals are always computed against the absolute
    observation index ``absolute_offset + t``.
    """

    def __init__(
        self,
        config: DetectorConfig,
        prechange: Union[PrechangeFit, KnownPrechange],
        absolute_offset: int,
    ):
        self.config = config
        self.prechange = prechange
        self.absolute_offset = int(absolute_offset)
        self.t = 0
        self.jump_bins = BinTriple(config.n_jump) if config.n_jump else None
        self.kink_bins = BinTriple(config.n_kink) if config.n_kink else None
        self.stopped: Optional[DetectionEvent] = None

    @property
    def monitoring(self) -> bool:
        return self.stopped is None

    def step(self, x_t: float) -> Tuple[StatSnapshot, Optional[DetectionEvent]]:
        """Fold in one observation; constant work and memory."""
        if self.stopped is not None:
            raise DetectorStoppedError(
                f"detector stopped at index {self.stopped.time}"
            )
        self.t += 1
        t = self.t
        abs_index = self.absolute_offset + t
        res = x_t - self.prechange.predict_at_index(abs_index)

        j_stat = k_stat = None
        window_jump = window_kink = None

        b = self.jump_bins
        if b is not None:
            r = t % b.bin_size
            if r == 0:
                b.s1, b.s2, b.s3 = b.s2, b.s3, 0.0
            b.s3 += res
            b.r = r
            m = 2 * b.bin_size + r + 1
            j_stat = (b.s1 + b.s2 + b.s3) / m
            window_jump = m

        b = self.kink_bins
        if b is not None:
            n = b.bin_size
            r = t % n
            if r == 0:
                b.s1, b.s2, b.s3 = b.s2, b.s3, 0.0
                b.w1, b.w2, b.w3 = b.w2, b.w3, 0.0
            b.s3 += res
            b.w3 += (r + 1) * res
            b.r = r
            m = 2 * n + r + 1
            d = m * (m + 1) * (2 * m + 1) / 6.0
            k_stat = (b.w1 + b.w2 + b.w3 + n * b.s2 + 2 * n * b.s3) / d
            window_kink = m

        event = None
        if j_stat is not None and abs(j_stat) >= self.config.rho_jump:
            event = DetectionEvent(
                time=abs_index,
                kind=ChangeKind.JUMP,
                stat_value=abs(j_stat),
                threshold=self.config.rho_jump,
            )
        elif k_stat is not None and abs(k_stat) >= self.config.rho_kink:
            event = DetectionEvent(
                time=abs_index,
                kind=ChangeKind.KINK,
                stat_value=abs(k_stat),
                threshold=self.config.rho_kink,
            )
        if event is not None:
            self.stopped = event
        snap = StatSnapshot(
            t=t,
            j_stat=j_stat,
            k_stat=k_stat,
            window_jump=window_jump,
            window_kink=window_kink,
        )
        return snap, event


@dataclass(frozen=True)
class RunResult:
    """Outcome of monitoring one series end to end.

    ``event`` is None when nothing crossed; ``alarm_time`` then equals
    the horizon so downstream risk computations can map no-detection to
    the end of the stream.
    """

    event: Optional[DetectionEvent]
    horizon: int
    prechange: Union[PrechangeFit, KnownPrechange]
    trace: Optional[List[StatSnapshot]] = None
    scaling: Optional[Tuple[float, float]] = None

    @property
    def detected(self) -> bool:
        return self.event is not None

    @property
    def alarm_time(self) -> int:
        return self.event.time if self.event is not None else self.horizon


def _prepare(series, k, prechange, time_scale, standardize_flag):
    x = np.asarray(series, dtype=float)
    n = x.size
    if prechange is None:
        if k < 2:
            raise ValueError(f"need history k >= 2 to fit, got {k}")
    elif k < 0:
        raise ValueError(f"history length k must be >= 0, got {k}")
    if n <= k:
        raise ValueError(f"series length {n} must exceed history length {k}")
    scaling = None
    if standardize_flag:
        x, scaling = standardize(x, k)
    if prechange is None:
        prechange = fit_ols(x[:k], time_scale=time_scale)
    return x, n, prechange, scaling


def run(
    series: Sequence[float],
    k: int,
    config: DetectorConfig,
    prechange: Optional[KnownPrechange] = None,
    time_scale: TimeScale = IndexTime(),
    standardize_first: bool = False,
    collect_trace: bool = False,
) -> RunResult:
    """Fit (or accept) the pre-change line on observations 1..k, then
    monitor k+1..end and stop at the first threshold crossing."""
    x, n, pc, scaling = _prepare(series, k, prechange, time_scale, standardize_first)
    state = DetectorState(config, pc, absolute_offset=k)
    trace: Optional[List[StatSnapshot]] = [] if collect_trace else None
    event = None
    for i in range(k, n):
        snap, event = state.step(x[i])
        if trace is not None:
            trace.append(snap)
        if event is not None:
            break
    return RunResult(event=event, horizon=n, prechange=pc, trace=trace, scaling=scaling)


@dataclass(frozen=True)
class MultiBinResult:
    event: Optional[DetectionEvent]
    scale_index: Optional[int]
    horizon: int
    prechange: Union[PrechangeFit, KnownPrechange]

    @property
    def detected(self) -> bool:
        return self.event is not None


def multi_bin_run(
    series: Sequence[float],
    k: int,
    configs: Sequence[Union[DetectorConfig, Tuple[int, float, float]]],
    prechange: Optional[KnownPrechange] = None,
    time_scale: TimeScale = IndexTime(),
    standardize_first: bool = False,
) -> MultiBinResult:
    """Monitor one stream at several bin sizes at once.

    ``configs`` entries are DetectorConfig or (N, rho_jump, rho_kink)
    tuples.  Memory grows with the number of scales only.  The first
    crossing wins; at the same observation, earlier list entries take
    precedence (and jump before kink within a scale).
    """
    if len(configs) == 0:
        raise ValueError("configs must be non-empty")
    parsed = [
        c if isinstance(c, DetectorConfig) else DetectorConfig(c[0], c[0], c[1], c[2])
        for c in configs
    ]
    x, n, pc, _ = _prepare(series, k, prechange, time_scale, standardize_first)
    states = [DetectorState(c, pc, absolute_offset=k) for c in parsed]
    for i in range(k, n):
        for idx, st in enumerate(states):
            _, event = st.step(x[i])
            if event is not None:
                return MultiBinResult(
                    event=event, scale_index=idx, horizon=n, prechange=pc
                )
    return MultiBinResult(event=None, scale_index=None, horizon=n, prechange=pc)


def run_with_restarts(
    series: Sequence[float],
    k: int,
    config: DetectorConfig,
    time_scale: TimeScale = IndexTime(),
) -> List[DetectionEvent]:
    """Convenience wrapper: refit on the next k observations after each
    alarm and keep monitoring.  Segments shorter than k + 1 at the tail
    are left unmonitored."""
    x = np.asarray(series, dtype=float)
    events: List[DetectionEvent] = []
    start = 0
    while x.size - start > k:
        result = run(x[start:], k, config, time_scale=time_scale)
        if result.event is None:
            break
        event = result.event
        events.append(
            DetectionEvent(
                time=start + event.time,
                kind=event.kind,
                stat_value=event.stat_value,
                threshold=event.threshold,
            )
        )
        start += event.time
    return events


def theorem_scale_config(n: float, c: float, target: str = "both") -> DetectorConfig:
    """Bin sizes and thresholds from the rate-optimal presets.

    N_jump = ceil(1000 log(n) / (2 c^2)) with rho_jump = 4c/5, and
    N_kink = ceil((300/c^2)^(1/3) n^(2/3) log(n)^(1/3)) with
    rho_kink = 4c/(5n).  These pair with FractionTime(n) residual
    scaling.  ``target`` selects 'jump', 'kink' or 'both'.
    """
    if not (0.0 < c <= 1.0):
        raise ValueError(f"rate constant c must lie in (0, 1], got {c}")
    if not n > 1.0:
        raise ValueError(f"horizon n must exceed 1, got {n}")
    if target not in ("jump", "kink", "both"):
        raise ValueError(f"target must be jump, kink or both, got {target!r}")
    log_n = math.log(n)
    n_jump = n_kink = None
    rho_jump = rho_kink = math.inf
    if target in ("jump", "both"):
        n_jump = math.ceil(1e3 * log_n / (2.0 * c * c))
        rho_jump = 4.0 * c / 5.0
    if target in ("kink", "both"):
        n_kink = math.ceil((300.0 / (c * c)) ** (1.0 / 3.0) * n ** (2.0 / 3.0) * log_n ** (1.0 / 3.0))
        rho_kink = 4.0 * c / (5.0 * n)
    return DetectorConfig(n_jump, n_kink, rho_jump, rho_kink)


# Snapshot format: fixed-size little-endian record so the serialized
# size of a state is a constant independent of how many observations
# it has absorbed, and floats round-trip bit-exactly.
_SNAP_MAGIC = b"LWSNAP01"
_SNAP_FMT = (
    "<8s"  # magic
    "qq"  # n_jump, n_kink (-1 = disabled)
    "dd"  # rho_jump, rho_kink
    "Bq"  # time scale kind (0 index, 1 fraction), horizon n
    "Bq"  # prechange kind (0 fit, 1 known), fit k
    "dddddddd"  # alpha, beta, mean_t, mean_x, s_tt, s_tx, s_xx, resid_sd
    "qq"  # t, absolute_offset
    "Bqdd"  # stopped flag, event time, stat_value, threshold
    "B"  # event kind (0 jump, 1 kink)
    "qdddddd"  # jump bins: r, s1, s2, s3, w1, w2, w3
    "qdddddd"  # kink bins: r, s1, s2, s3, w1, w2, w3
)
SNAPSHOT_SIZE = struct.calcsize(_SNAP_FMT)


def save_state(state: DetectorState) -> bytes:
    """Serialize to the fixed-size binary snapshot (version LWSNAP01)."""
    cfg = state.config
    ts = state.prechange.time_scale
    ts_kind, ts_n = (1, ts.n) if isinstance(ts, FractionTime) else (0, 0)
    pc = state.prechange
    if isinstance(pc, PrechangeFit):
        pc_kind = 0
        pc_vals = (pc.k, pc.alpha_hat, pc.beta_hat, pc.mean_t, pc.mean_x,
                   pc.s_tt, pc.s_tx, pc.s_xx, pc.resid_sd)
    else:
        pc_kind = 1
        pc_vals = (0, pc.alpha, pc.beta, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    ev = state.stopped
    stopped = int(ev is not None)
    ev_time = ev.time if ev else 0
    ev_stat = ev.stat_value if ev else 0.0
    ev_rho = ev.threshold if ev else 0.0
    ev_kind = int(ev.kind is ChangeKind.KINK) if ev else 0

    def bin_vals(b: Optional[BinTriple]):
        if b is None:
            return (0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        return (b.r, b.s1, b.s2, b.s3, b.w1, b.w2, b.w3)

    return struct.pack(
        _SNAP_FMT,
        _SNAP_MAGIC,
        -1 if cfg.n_jump is None else cfg.n_jump,
        -1 if cfg.n_kink is None else cfg.n_kink,
        cfg.rho_jump,
        cfg.rho_kink,
        ts_kind,
        ts_n,
        pc_kind,
        *pc_vals,
        state.t,
        state.absolute_offset,
        stopped,
        ev_time,
        ev_stat,
        ev_rho,
        ev_kind,
        *bin_vals(state.jump_bins),
        *bin_vals(state.kink_bins),
    )


def load_state(blob: bytes) -> DetectorState:
    """Rebuild a DetectorState from ``save_state`` output."""
    if len(blob) != SNAPSHOT_SIZE:
        raise ValueError(f"snapshot must be {SNAPSHOT_SIZE} bytes, got {len(blob)}")
    fields = struct.unpack(_SNAP_FMT, blob)
    if fields[0] != _SNAP_MAGIC:
        raise ValueError("bad snapshot magic; not a detector snapshot")
    (_, nj, nk, rho_j, rho_k, ts_kind, ts_n, pc_kind, pc_k,
     alpha, beta, mean_t, mean_x, s_tt, s_tx, s_xx, resid_sd,
     t, offset, stopped, ev_time, ev_stat, ev_rho, ev_kind) = fields[:24]
    jump_raw = fields[24:31]
    kink_raw = fields[31:38]
    ts: TimeScale = FractionTime(ts_n) if ts_kind == 1 else IndexTime()
    if pc_kind == 0:
        pc: Union[PrechangeFit, KnownPrechange] = PrechangeFit(
            alpha_hat=alpha, beta_hat=beta, k=pc_k, time_scale=ts,
            mean_t=mean_t, mean_x=mean_x, s_tt=s_tt, s_tx=s_tx, s_xx=s_xx,
            resid_sd=resid_sd,
        )
    else:
        pc = KnownPrechange(alpha=alpha, beta=beta, time_scale=ts)
    config = DetectorConfig(
        None if nj < 0 else nj, None if nk < 0 else nk, rho_j, rho_k
    )
    state = DetectorState(config, pc, absolute_offset=offset)
    state.t = t
    for raw, bins in ((jump_raw, state.jump_bins), (kink_raw, state.kink_bins)):
        if bins is not None:
            bins.r, bins.s1, bins.s2, bins.s3, bins.w1, bins.w2, bins.w3 = raw
    if stopped:
        state.stopped = DetectionEvent(
            time=ev_time,
            kind=ChangeKind.KINK if ev_kind else ChangeKind.JUMP,
            stat_value=ev_stat,
            threshold=ev_rho,
        )
    return state
