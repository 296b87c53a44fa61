"""Monte Carlo BER/BLER estimation and the experimental ML lower bound.

Every trial draws its information bits and its noise from its own
counter-based stream keyed by ``(seed, trial)``.  Trials are grouped into
fixed-size chunks that are the unit of parallel work, so results do not
depend on the number of workers.  The noise is drawn as ``N(0, 1)`` and
scaled by ``sigma``, which means all grid points and all list sizes of a
sweep see the same realizations.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Mapping, NamedTuple, Sequence

import numpy as np
from scipy.special import erfc

from rmlist.channel import ChannelParams, trial_rng
from rmlist.code_tree import CodeTree, ParameterError, code_id, tree_from_spec
from rmlist.decoder import ListSchedule, likelihood_of, list_decode
from rmlist.encoder import encode

CSV_COLUMNS = (
    "code_id", "n", "k_eff", "L", "snr_db", "ebno_db", "sigma", "trials", "bit_errors",
    "block_errors", "ml_dominance_count", "ber", "bler", "ml_lb_bler", "seed",
)

CONVENTIONS = ("ebno", "snr")


@dataclass
class SimConfig:
    """A sweep: one code, one list schedule, a grid of SNR points.

    ``grid`` is in dB, read as Eb/N0 (``convention="ebno"``) or Es/N0
    (``"snr"``).  ``trials`` caps the trials per point; with ``target_errors``
    a point stops at the first chunk boundary where that many block errors
    have been seen.
    """

    code: dict
    grid: list
    seed: int
    schedule: dict = field(default_factory=lambda: {"L": 1})
    convention: str = "ebno"
    trials: int = 10_000
    target_errors: int | None = 100
    chunk: int = 1000
    workers: int = 1
    all_zero: bool = False

    def __post_init__(self):
        self.grid = [float(x) for x in self.grid]
        if not self.grid:
            raise ParameterError("the SNR grid is empty")
        if self.convention not in CONVENTIONS:
            raise ParameterError(f"convention must be one of {CONVENTIONS}, got {self.convention!r}")
        if int(self.trials) < 1 or int(self.chunk) < 1 or int(self.workers) < 1:
            raise ParameterError("trials, chunk and workers must all be at least 1")
        if self.target_errors is not None and int(self.target_errors) < 1:
            raise ParameterError("target_errors must be at least 1 or null")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ParameterError("seed must be a non-negative integer")
        unknown = set(self.schedule) - {"L", "leaf_L", "full_leaf_factor", "variable"}
        if unknown:
            raise ParameterError(f"unknown decoder keys: {', '.join(sorted(unknown))}")
        self.tree = tree_from_spec(self.code)
        self.list_schedule = ListSchedule(**self.schedule)
        self.list_schedule.caps(self.tree)
        if self.convention == "ebno" and self.tree.k == 0:
            raise ParameterError("Eb/N0 is undefined for a code with no information bits; use convention 'snr'")

    @property
    def rate(self):
        return self.tree.k / self.tree.n

    def params(self, point_db) -> ChannelParams:
        if self.convention == "snr":
            return ChannelParams.from_snr_db(point_db)
        return ChannelParams.from_ebno_db(point_db, self.rate)

    @classmethod
    def from_mapping(cls, cfg: Mapping[str, Any]) -> "SimConfig":
        """Build from the config-file layout (``code``, ``decoder``, ``sim``, ``seed``, ``workers``)."""
        unknown = set(cfg) - {"code", "decoder", "sim", "seed", "workers"}
        if unknown:
            raise ParameterError(f"unknown config sections: {', '.join(sorted(unknown))}")
        sim = dict(cfg.get("sim") or {})
        allowed = {"grid", "convention", "trials", "target_errors", "chunk", "all_zero"}
        if set(sim) - allowed:
            raise ParameterError(f"unknown sim keys: {', '.join(sorted(set(sim) - allowed))}")
        if "grid" not in sim:
            raise ParameterError("config needs sim.grid")
        if "seed" not in cfg:
            raise ParameterError("config needs a seed")
        return cls(
            code=dict(cfg.get("code") or {}),
            schedule=dict(cfg.get("decoder") or {"L": 1}),
            seed=cfg["seed"],
            workers=cfg.get("workers", 1),
            **sim,
        )

    def to_mapping(self) -> dict:
        return {
            "code": dict(self.code),
            "decoder": dict(self.schedule),
            "sim": {
                "grid": list(self.grid),
                "convention": self.convention,
                "trials": self.trials,
                "target_errors": self.target_errors,
                "chunk": self.chunk,
                "all_zero": self.all_zero,
            },
            "seed": self.seed,
            "workers": self.workers,
        }


@dataclass
class SimRecord:
    code_id: str
    n: int
    k_eff: int
    L: int
    snr_db: float
    ebno_db: float
    sigma: float
    trials: int
    bit_errors: int
    block_errors: int
    ml_dominance_count: int
    seed: int
    wall_time: float = 0.0

    @property
    def ber(self):
        return self.bit_errors / (self.trials * self.k_eff) if self.k_eff else 0.0

    @property
    def bler(self):
        return self.block_errors / self.trials

    @property
    def ml_lb_bler(self):
        return self.ml_dominance_count / self.trials

    def row(self):
        values = asdict(self)
        values.update(ber=self.ber, bler=self.bler, ml_lb_bler=self.ml_lb_bler)
        return [values[c] for c in CSV_COLUMNS]


class _Counts(NamedTuple):
    trials: int
    bit_errors: int
    block_errors: int
    ml_dominance: int


def draw_trials(tree: CodeTree, seed: int, start: int, stop: int, all_zero: bool = False):
    """Information bits and unit-variance noise for trials ``start .. stop-1``."""
    count = stop - start
    info = np.zeros((count, tree.k), dtype=np.uint8)
    noise = np.empty((count, tree.n))
    for j, t in enumerate(range(start, stop)):
        rng = trial_rng(seed, t)
        if not all_zero:
            info[j] = rng.integers(0, 2, tree.k, dtype=np.uint8)
        noise[j] = rng.standard_normal(tree.n)
    return info, noise


def _run_chunk(tree, sched, sigma, seed, start, stop, all_zero) -> _Counts:
    info, noise = draw_trials(tree, seed, start, stop, all_zero)
    sent = encode(tree, info)
    y = 1.0 - 2.0 * sent + sigma * noise
    llr = 2.0 * y / sigma**2
    res = list_decode(tree, llr, sched, llr=True)
    wrong = (res.codeword != sent).any(axis=1)
    ml_better = res.cost > likelihood_of(sent, llr, llr=True)
    return _Counts(
        stop - start,
        int((res.info != info).sum()),
        int(wrong.sum()),
        int((wrong & ml_better).sum()),
    )


def _chunks(cfg: SimConfig):
    return [(s, min(s + cfg.chunk, cfg.trials)) for s in range(0, cfg.trials, cfg.chunk)]


def run_point(cfg: SimConfig, point_db: float, executor=None) -> SimRecord:
    """Simulate one grid point."""
    started = time.perf_counter()
    params = cfg.params(point_db)
    tree, sched = cfg.tree, cfg.list_schedule
    jobs = _chunks(cfg)
    wave = cfg.workers if executor is not None else 1
    total = _Counts(0, 0, 0, 0)
    for i in range(0, len(jobs), wave):
        batch = jobs[i : i + wave]
        args = [(tree, sched, params.sigma, cfg.seed, a, b, cfg.all_zero) for a, b in batch]
        if executor is None:
            results = [_run_chunk(*a) for a in args]
        else:
            results = list(executor.map(_run_chunk, *zip(*args)))
        stop = False
        for res in results:
            total = _Counts(*(x + y for x, y in zip(total, res)))
            if cfg.target_errors is not None and total.block_errors >= cfg.target_errors:
                stop = True
                break
        if stop:
            break
    return SimRecord(
        code_id=code_id(cfg.code, tree),
        n=tree.n,
        k_eff=tree.k,
        L=sched.L,
        snr_db=point_db if cfg.convention == "snr" else params.snr_db,
        ebno_db=point_db if cfg.convention == "ebno" else params.ebno_db(cfg.rate),
        sigma=params.sigma,
        trials=total.trials,
        bit_errors=total.bit_errors,
        block_errors=total.block_errors,
        ml_dominance_count=total.ml_dominance,
        seed=cfg.seed,
        wall_time=time.perf_counter() - started,
    )


def sweep(cfg: SimConfig, out=None) -> list[SimRecord]:
    """Run every grid point; optionally write the CSV to ``out`` (path or file)."""
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = [run_point(cfg, p, pool) for p in cfg.grid]
    else:
        records = [run_point(cfg, p) for p in cfg.grid]
    if out is not None:
        write_csv(records, out, cfg)
    return records


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def csv_text(records: Sequence[SimRecord], cfg: SimConfig | None = None) -> str:
    buf = io.StringIO()
    if cfg is not None:
        if cfg.target_errors is None:
            rule = f"fixed trials={cfg.trials}"
        else:
            rule = f"stop at first chunk with block_errors>={cfg.target_errors}; chunk={cfg.chunk}; max trials={cfg.trials}"
        buf.write(f"# seed={cfg.seed}\n")
        buf.write(f"# stopping: {rule}\n")
        buf.write("# snr_db is Es/N0 = 1/(2 sigma^2) in dB; ebno_db = snr_db - 10 log10(k_eff/n)\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        writer.writerow([_fmt(x) for x in rec.row()])
    return buf.getvalue()


def write_csv(records, out, cfg=None):
    text = csv_text(records, cfg)
    if hasattr(out, "write"):
        out.write(text)
        return
    try:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write CSV to {out}: {exc.strerror or exc}") from exc


class MLCheck(NamedTuple):
    sigma: float
    trials: int
    agree: int
    disagreements: list


def ml_agreement(tree: CodeTree, sigma: float, trials: int, seed: int, sched=None, chunk: int = 1000) -> MLCheck:
    """Compare the list decoder with the exhaustive oracle on shared noise.

    ``sched`` defaults to the unpruned list, for which the two must agree
    on every trial.  Each disagreement is ``(trial, decoder_info,
    oracle_info, decoder_cost, oracle_cost)``.
    """
    from rmlist.oracle import enumerate_codebook, ml_decode_exhaustive

    cb = enumerate_codebook(tree)
    sched = ListSchedule.unpruned(tree) if sched is None else sched
    agree, bad = 0, []
    for start in range(0, trials, chunk):
        stop = min(start + chunk, trials)
        info, noise = draw_trials(tree, seed, start, stop)
        llr = 2.0 * (1.0 - 2.0 * encode(tree, info) + sigma * noise) / sigma**2
        res = list_decode(tree, llr, sched, llr=True)
        cw, ml_info, ml_cost = ml_decode_exhaustive(cb, llr, llr=True)
        same = (res.codeword == cw).all(axis=1)
        agree += int(same.sum())
        for j in np.flatnonzero(~same):
            bad.append((start + int(j), res.info[j], ml_info[j], float(res.cost[j]), float(ml_cost[j])))
    return MLCheck(float(sigma), trials, agree, bad)


# ---------------------------------------------------------------------------
# asymptotic estimates


def q_function(x):
    """Gaussian tail probability ``Pr{N(0,1) > x}``."""
    out = 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


class FirstBitEstimates(NamedTuple):
    P1: float
    P2: float
    P_old: float


def theoretical_first_bits(m: int, r: int, sigma: float) -> FirstBitEstimates:
    """Asymptotic (m -> inf) bit error rates of the first decoded leaves.

    ``P1`` is the leftmost biorthogonal leaf, ``P2`` the next one, and
    ``P_old`` the rate of the single-path recursive decoders.  These are
    orders of growth for annotation, not fitted predictions.
    """
    if not 1 <= r <= m:
        raise ParameterError(f"need 1 <= r <= m, got m={m}, r={r}")
    if not sigma > 0:
        raise ParameterError("sigma must be positive")
    # arguments as powers of two so large r cannot overflow
    slope = -math.log2(sigma)
    return FirstBitEstimates(
        P1=q_function(_pow2((m - r) / 2 + 2 ** (r - 1) * slope)),
        P2=q_function(_pow2((m - r + 1) / 2 + 2 ** (r - 1) * slope)),
        P_old=q_function(_pow2((m - r) / 2 + 2**r * slope)),
    )


def _pow2(e):
    return math.inf if e > 1023 else 2.0**e
