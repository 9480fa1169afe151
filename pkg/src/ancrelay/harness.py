"""Seeded Monte Carlo experiment runner and CSV emission.

Every trial owns an RNG stream derived by counter from the master seed, so
results are bit-identical regardless of worker count, and re-running a
config rewrites the output file byte for byte.
"""

from __future__ import annotations

import csv
import multiprocessing
from dataclasses import dataclass, replace

import numpy as np

from .baselines import amplify_forward, memoryless_mmse
from .channel import (ChannelRealization, CoeffDist, modulate_bpsk,
                      sample_channel, sigma2_from_snr_db, uplink_superpose)
from .jointbp import decode, hard_decisions, init_evidence
from .ldpc import build_gallager, derive_generator, encode, syndrome
from .metrics import (estimate_f1_curve, relay_ber, relay_mse,
                      snr_gain_lower_bound, snr_improvement,
                      snr_improvement_conditioned)

SCHEME_JOINT = "joint_bp"
SCHEME_MEMORYLESS = "memoryless_mmse"
SCHEME_AF = "amplify_forward"
ALL_SCHEMES = (SCHEME_JOINT, SCHEME_MEMORYLESS, SCHEME_AF)

DETAIL_COLUMNS = ("snr_db", "scheme", "code", "packet", "mse", "ber",
                  "decoded1", "decoded2", "iterations", "rate",
                  "h13_re", "h13_im", "h23_re", "h23_im")
SUMMARY_COLUMNS = ("mean_mse", "mean_ber", "delta_snr_db", "prop1_bound_db",
                   "extrapolation_flag")


@dataclass(frozen=True)
class ChannelSpec:
    """Uplink coefficient model: fixed pair or i.i.d. Rayleigh per packet."""

    kind: str  # "fixed" | "rayleigh"
    h13: complex = 1 + 0j
    h23: complex = 1 + 0j
    variance: float = 1.0

    @classmethod
    def fixed(cls, h13, h23):
        return cls(kind="fixed", h13=complex(h13), h23=complex(h23))

    @classmethod
    def rayleigh(cls, variance=1.0):
        if not variance > 0:
            raise ValueError("rayleigh variance must be positive")
        return cls(kind="rayleigh", variance=float(variance))

    def draw(self, rng):
        if self.kind == "fixed":
            return self.h13, self.h23
        dist = CoeffDist.rayleigh(self.variance)
        return sample_channel(dist, rng), sample_channel(dist, rng)

    @classmethod
    def parse(cls, text: str):
        kind, _, args = text.partition(":")
        if kind == "fixed":
            parts = args.split(",")
            if len(parts) != 2:
                raise ValueError(f"fixed channel needs two coefficients, got {text!r}")
            return cls.fixed(complex(parts[0]), complex(parts[1]))
        if kind == "rayleigh":
            return cls.rayleigh(float(args) if args else 1.0)
        raise ValueError(f"unknown channel spec {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    codes: tuple[tuple[int, int], ...]
    snr_db: tuple[float, ...]
    packets: int
    channel: ChannelSpec
    schemes: tuple[str, ...] = (SCHEME_JOINT, SCHEME_MEMORYLESS)
    n: int = 1800
    max_iters: int = 20
    seed: int = 0
    f1_samples: int = 200_000
    f1_step_db: float = 0.25
    f1_below_db: float = 4.0
    f1_extend_db: float = 10.0
    regenerate_h: bool = True
    workers: int = 1

    def validate(self):
        if not self.snr_db:
            raise ValueError("snr_db list is empty")
        if self.packets < 1:
            raise ValueError("packets must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.codes:
            raise ValueError("codes list is empty")
        for j, k in self.codes:
            if self.n % k != 0:
                raise ValueError(f"row weight {k} must divide n={self.n}")
        for s in self.schemes:
            if s not in ALL_SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")

    def f1_grid(self):
        lo = min(self.snr_db) - self.f1_below_db
        hi = max(self.snr_db) + self.f1_extend_db
        count = int(round((hi - lo) / self.f1_step_db)) + 1
        return lo + self.f1_step_db * np.arange(count)


@dataclass
class TrialRecord:
    """One scheme's measured metrics on one packet realization."""

    snr_db: float
    scheme: str
    code: str
    packet: int
    mse: float
    ber: float
    decoded1: bool
    decoded2: bool
    iterations: int
    rate: float
    h13: complex
    h23: complex
    seed_path: str
    delta_snr_db: float | None = None
    extrapolated: bool = False


@dataclass
class SummaryRecord:
    scheme: str
    code: str
    snr_db: float
    mean_mse: float
    mean_ber: float
    delta_snr_db: float | None
    prop1_bound_db: float
    extrapolation_flag: bool


def code_tag(code) -> str:
    return f"({code[0]},{code[1]})"


_WORKER_CFG: ExperimentConfig | None = None
_FIXED_CODE_CACHE: dict = {}


def _fixed_code(cfg, code_idx):
    key = (cfg.seed, cfg.n, code_idx, cfg.codes[code_idx])
    if key not in _FIXED_CODE_CACHE:
        j, k = cfg.codes[code_idx]
        rng = np.random.default_rng([cfg.seed, 2, code_idx])
        H = build_gallager(cfg.n, j, k, rng)
        _FIXED_CODE_CACHE[key] = (H, derive_generator(H))
    return _FIXED_CODE_CACHE[key]


def run_trial(cfg: ExperimentConfig, code_idx: int, snr_idx: int,
              packet: int) -> list[TrialRecord]:
    """Run every configured scheme on one shared packet realization."""
    j, k = cfg.codes[code_idx]
    snr = cfg.snr_db[snr_idx]
    sigma2 = sigma2_from_snr_db(snr)
    chan_rng = np.random.default_rng([cfg.seed, 1, snr_idx, packet])
    code_rng = np.random.default_rng([cfg.seed, 2, code_idx, snr_idx, packet])
    h13, h23 = cfg.channel.draw(chan_rng)

    if cfg.regenerate_h:
        H = build_gallager(cfg.n, j, k, code_rng)
        G = derive_generator(H)
    else:
        H, G = _fixed_code(cfg, code_idx)
    s1 = code_rng.integers(0, 2, G.info_len, dtype=np.uint8)
    s2 = code_rng.integers(0, 2, G.info_len, dtype=np.uint8)
    x1 = encode(G, s1)
    x2 = encode(G, s2)
    a1 = modulate_bpsk(x1)
    a2 = modulate_bpsk(x2)
    ch = ChannelRealization(h13=h13, h23=h23, sigma2=sigma2)
    r = uplink_superpose(a1, a2, ch, chan_rng)
    rate = G.info_len / cfg.n
    seed_path = f"{cfg.seed}/{code_idx}/{snr_idx}/{packet}"

    symbol_hards = None
    records = []
    for scheme in cfg.schemes:
        if scheme == SCHEME_JOINT:
            res = decode(H, r, ch, max_iters=cfg.max_iters)
            mse = relay_mse(res.relay_out, a1, a2, h13, h23)
            ber = relay_ber(res.hard1, res.hard2, x1, x2)
            decoded1, decoded2, iters = res.decoded1, res.decoded2, res.iterations
        else:
            if symbol_hards is None:
                symbol_hards = hard_decisions(init_evidence(r, h13, h23, sigma2))
            hard1, hard2 = symbol_hards
            if scheme == SCHEME_MEMORYLESS:
                x3 = memoryless_mmse(r, h13, h23, sigma2)
            else:
                x3 = amplify_forward(r, h13, h23, sigma2).x3
            mse = relay_mse(x3, a1, a2, h13, h23)
            ber = relay_ber(hard1, hard2, x1, x2)
            decoded1 = not syndrome(H, hard1).any()
            decoded2 = not syndrome(H, hard2).any()
            iters = 0
        rec = TrialRecord(snr_db=snr, scheme=scheme, code=code_tag((j, k)),
                          packet=packet, mse=mse, ber=ber, decoded1=decoded1,
                          decoded2=decoded2, iterations=iters, rate=rate,
                          h13=h13, h23=h23, seed_path=seed_path)
        if (cfg.channel.kind == "rayleigh" and cfg.f1_samples > 0
                and scheme != SCHEME_AF):
            rec.delta_snr_db, rec.extrapolated = snr_improvement_conditioned(
                mse, h13, h23, snr)
        records.append(rec)
    return records


def _init_worker(cfg):
    global _WORKER_CFG
    _WORKER_CFG = cfg


def _worker_trial(task):
    return run_trial(_WORKER_CFG, *task)


def run_experiment(cfg: ExperimentConfig):
    """Execute the configured sweep; returns (records, summaries).

    Trials are the unit of parallelism; per-trial RNG streams are derived by
    counter from the master seed so the result is independent of worker
    count and execution order.
    """
    cfg.validate()
    tasks = [(ci, si, p)
             for ci in range(len(cfg.codes))
             for si in range(len(cfg.snr_db))
             for p in range(cfg.packets)]
    if cfg.workers > 1:
        with multiprocessing.get_context("fork").Pool(
                cfg.workers, initializer=_init_worker, initargs=(cfg,)) as pool:
            per_trial = pool.map(_worker_trial, tasks, chunksize=8)
    else:
        per_trial = [run_trial(cfg, *t) for t in tasks]
    records = [rec for trial in per_trial for rec in trial]

    curve = None
    if cfg.channel.kind == "fixed" and cfg.f1_samples > 0:
        curve = estimate_f1_curve(cfg.channel.h13, cfg.channel.h23,
                                  cfg.f1_grid(), cfg.f1_samples,
                                  rng=np.random.default_rng([cfg.seed, 3]))

    by_key: dict = {}
    for rec in records:
        by_key.setdefault((rec.code, rec.scheme, rec.snr_db), []).append(rec)

    summaries = []
    for code in cfg.codes:
        tag = code_tag(code)
        for scheme in cfg.schemes:
            for snr in cfg.snr_db:
                group = by_key[(tag, scheme, snr)]
                mean_mse = float(np.mean([rec.mse for rec in group]))
                mean_ber = float(np.mean([rec.ber for rec in group]))
                mean_rate = float(np.mean([rec.rate for rec in group]))
                delta = None
                flag = False
                if scheme != SCHEME_AF:
                    if curve is not None:
                        delta, flag = snr_improvement(mean_mse, curve, snr)
                    elif cfg.channel.kind == "rayleigh" and cfg.f1_samples > 0:
                        deltas = [rec.delta_snr_db for rec in group
                                  if rec.delta_snr_db is not None]
                        if deltas:
                            delta = float(np.mean(deltas))
                            flag = any(rec.extrapolated for rec in group)
                summaries.append(SummaryRecord(
                    scheme=scheme, code=tag, snr_db=snr, mean_mse=mean_mse,
                    mean_ber=mean_ber, delta_snr_db=delta,
                    prop1_bound_db=snr_gain_lower_bound(mean_rate),
                    extrapolation_flag=flag))
    return records, summaries


def _fmt(v):
    if v is None:
        return ""
    return format(v, ".12g")


def emit_csv(records, summaries, path):
    """Write detail rows then summary rows under one stable header."""
    if not records:
        raise ValueError("no records to write")
    header = ("row_type",) + DETAIL_COLUMNS + SUMMARY_COLUMNS
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for rec in records:
            w.writerow(["detail", _fmt(rec.snr_db), rec.scheme, rec.code,
                        rec.packet, _fmt(rec.mse), _fmt(rec.ber),
                        int(rec.decoded1), int(rec.decoded2), rec.iterations,
                        _fmt(rec.rate), _fmt(rec.h13.real), _fmt(rec.h13.imag),
                        _fmt(rec.h23.real), _fmt(rec.h23.imag),
                        "", "", "", "", ""])
        for s in summaries:
            w.writerow(["summary", _fmt(s.snr_db), s.scheme, s.code,
                        "", "", "", "", "", "", "", "", "", "", "",
                        _fmt(s.mean_mse), _fmt(s.mean_ber),
                        _fmt(s.delta_snr_db), _fmt(s.prop1_bound_db),
                        int(s.extrapolation_flag)])


def fig4_config(seed: int = 1, packets: int = 100, **overrides) -> ExperimentConfig:
    """Fixed unit gains, codes (1,2)/(2,4)/(3,6), -4..8 dB sweep."""
    cfg = ExperimentConfig(
        codes=((1, 2), (2, 4), (3, 6)),
        snr_db=tuple(float(s) for s in range(-4, 9)),
        packets=packets,
        channel=ChannelSpec.fixed(1, 1),
        seed=seed)
    return replace(cfg, **overrides) if overrides else cfg


def fig5_config(seed: int = 1, packets: int = 1000, **overrides) -> ExperimentConfig:
    """Same sweep as fig4 but with unit-variance Rayleigh coefficients."""
    cfg = fig4_config(seed=seed, packets=packets)
    cfg = replace(cfg, channel=ChannelSpec.rayleigh(1.0))
    return replace(cfg, **overrides) if overrides else cfg


PRESETS = {"fig4": fig4_config, "fig5": fig5_config}
