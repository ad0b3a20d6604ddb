"""Experiment runners with replayable CSV output.

Every run emits a commented metadata header that echoes the full experiment
spec plus the RNG algorithm identifiers and package version; feeding that
header back through :func:`replay` regenerates the CSV bit-exactly (the
timestamp line is informational and excluded from the comparison).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .basic_codes import cartesian, make_small_code
from .channel import (NOISE_ALGORITHM, bpsk_capacity_ebn0_db, ebn0_to_sigma,
                      llr_demap)
from .encoder import (PERM_ALGORITHM, build_bmst, coupled_rate, encode_bmst,
                      rate_bmst)
from .exit_engine import (BracketError, ThresholdQuery,
                          genie_bound_ebn0_at_target, genie_lower_bound,
                          threshold_search)
from .window_decoder import DecoderConfig, decode_sequence

#: Codewords decoded per batch; recorded in metadata, fixed for determinism.
BATCH_CODEWORDS = 32


class SpecError(ValueError):
    """The experiment spec is invalid (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to replay one experiment bit-exactly."""

    command: str
    kind: str = "rc"
    n: int = 2
    cart: int = 100
    memories: tuple[int, ...] = (1,)
    lengths: tuple[int, ...] = (100,)
    delays: tuple[int, ...] = ()      # empty: command-specific default
    max_iters: int = 50
    seed: int = 1
    snr_lo: float = 0.0
    snr_hi: float = 6.0
    snr_step: float = 1.0
    targets: tuple[float, ...] = (1e-7,)
    max_bits: int = 100_000_000
    max_errors: int = 200
    out: str = ""

    def validate(self) -> None:
        if self.command not in ("ber", "threshold-vs-l", "threshold-vs-target",
                                "bound", "encode"):
            raise SpecError(f"unknown command {self.command!r}")
        if self.kind not in ("rc", "spc"):
            raise SpecError(f"code kind must be rc or spc, got {self.kind!r}")
        if self.n < 2:
            raise SpecError(f"small-code length must be at least 2, got {self.n}")
        if self.cart < 1:
            raise SpecError(f"Cartesian order must be positive, got {self.cart}")
        if not self.memories or any(m < 0 for m in self.memories):
            raise SpecError(f"memories must be non-negative, got {self.memories}")
        if not self.lengths or any(length < 1 for length in self.lengths):
            raise SpecError(f"lengths must be positive, got {self.lengths}")
        if any(d < 0 for d in self.delays):
            raise SpecError(f"delays must be non-negative, got {self.delays}")
        if self.max_iters < 1:
            raise SpecError(f"max_iters must be positive, got {self.max_iters}")
        if self.snr_step <= 0 or self.snr_hi < self.snr_lo:
            raise SpecError("need snr_lo <= snr_hi and snr_step > 0")
        if self.command.startswith("threshold") and self.snr_hi <= self.snr_lo:
            raise SpecError("threshold searches need snr_lo < snr_hi")
        if not self.targets or any(not 0.0 < t < 0.5 for t in self.targets):
            raise SpecError(f"targets must lie in (0, 0.5), got {self.targets}")
        if self.max_bits < 1 or self.max_errors < 1:
            raise SpecError("trial budget must be positive")

    @property
    def memory(self) -> int:
        return self.memories[0]

    @property
    def length(self) -> int:
        return self.lengths[0]

    def delay_for(self, memory: int) -> int:
        return self.delays[0] if self.delays else 3 * memory

    def snr_points(self) -> list[float]:
        pts = []
        g = self.snr_lo
        while g <= self.snr_hi + 1e-9:
            pts.append(round(g, 9))
            g += self.snr_step
        return pts


_INT_FIELDS = {"n", "cart", "max_iters", "seed", "max_bits", "max_errors"}
_FLOAT_FIELDS = {"snr_lo", "snr_hi", "snr_step"}
_INT_TUPLES = {"memories", "lengths", "delays"}
_FLOAT_TUPLES = {"targets"}


def spec_to_metadata(spec: ExperimentSpec) -> dict[str, str]:
    meta: dict[str, str] = {}
    for f in fields(spec):
        v = getattr(spec, f.name)
        if isinstance(v, tuple):
            meta[f.name] = ",".join(repr(x) if isinstance(x, float) else str(x)
                                    for x in v)
        elif isinstance(v, float):
            meta[f.name] = repr(v)
        else:
            meta[f.name] = str(v)
    return meta


def spec_from_metadata(meta: dict[str, str]) -> ExperimentSpec:
    kwargs = {}
    for f in fields(ExperimentSpec):
        if f.name not in meta:
            continue
        raw = meta[f.name]
        if f.name in _INT_FIELDS:
            kwargs[f.name] = int(raw)
        elif f.name in _FLOAT_FIELDS:
            kwargs[f.name] = float(raw)
        elif f.name in _INT_TUPLES:
            kwargs[f.name] = tuple(int(x) for x in raw.split(",")) if raw else ()
        elif f.name in _FLOAT_TUPLES:
            kwargs[f.name] = tuple(float(x) for x in raw.split(",")) if raw else ()
        else:
            kwargs[f.name] = raw
    return ExperimentSpec(**kwargs)


@dataclass(frozen=True)
class BerPoint:
    """One measured point of a BER sweep."""

    ebn0_db: float
    bits_simulated: int
    bit_errors: int
    ber: float
    lower_bound_ber: float
    standard_error: float


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(spec: ExperimentSpec, columns: list[str], rows: list[tuple],
              timestamp: str | None = None) -> str:
    lines = [f"# bmst-csv v1 package={__version__}"]
    for k, v in spec_to_metadata(spec).items():
        lines.append(f"# {k}={v}")
    lines.append(f"# rng=pcg64 perms={PERM_ALGORITHM.split('/')[0]} "
                 f"noise={NOISE_ALGORITHM.split('/')[0]} numpy={np.__version__}")
    lines.append(f"# batch_codewords={BATCH_CODEWORDS}")
    if timestamp is None:
        timestamp = datetime.now(timezone.utc).isoformat()
    lines.append(f"# timestamp={timestamp}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_metadata(text: str) -> dict[str, str]:
    meta: dict[str, str] = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            continue
        body = line[2:]
        if "=" in body and " " not in body.split("=", 1)[0]:
            key, value = body.split("=", 1)
            meta[key] = value
    return meta


def simulate_ber_point(spec: ExperimentSpec, ebn0_db: float,
                       point_index: int) -> BerPoint:
    """Monte Carlo BER at one SNR point under the window decoder.

    Info bits and noise for trial j come from a stream seeded by
    ``(seed, point_index, j)``, so the result does not depend on how trials
    are grouped into batches.
    """
    small = make_small_code(spec.kind, spec.n)
    basic = cartesian(small, spec.cart)
    code = build_bmst(basic, spec.memory, spec.length, spec.seed)
    rate = rate_bmst(code).value
    sigma = ebn0_to_sigma(ebn0_db, rate)
    config = DecoderConfig(delay=spec.delay_for(spec.memory),
                           max_iters=spec.max_iters)
    bits_done = 0
    errors = 0
    trial = 0
    while bits_done < spec.max_bits and errors < spec.max_errors:
        nb = BATCH_CODEWORDS
        info = np.empty((nb, code.info_bits), dtype=np.uint8)
        tx = np.empty((nb, code.coupling_len + code.memory, code.N), dtype=np.uint8)
        noise = np.empty(tx.shape)
        for j in range(nb):
            rng = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence((spec.seed, point_index, trial + j))))
            info[j] = rng.integers(0, 2, code.info_bits, dtype=np.uint8)
            tx[j] = encode_bmst(code, info[j])
            noise[j] = rng.standard_normal(tx[j].shape)
        y = (1.0 - 2.0 * tx) + sigma * noise
        dec = decode_sequence(code, llr_demap(y, sigma), config)
        errors += int((dec != info).sum())
        bits_done += info.size
        trial += nb
    ber = errors / bits_done if bits_done else 0.0
    se = math.sqrt(ber * (1.0 - ber) / bits_done) if bits_done else 0.0
    bound = genie_lower_bound(small, spec.memory, spec.length, ebn0_db,
                              seed=spec.seed).ber
    return BerPoint(ebn0_db, bits_done, errors, ber, bound, se)


def run_ber_sweep(spec: ExperimentSpec) -> str:
    """Window-decoder BER over the SNR sweep, with the genie bound column."""
    spec.validate()
    rows = []
    for idx, g in enumerate(spec.snr_points()):
        p = simulate_ber_point(spec, g, idx)
        rows.append((p.ebn0_db, p.bits_simulated, p.bit_errors, p.ber,
                     p.lower_bound_ber, p.standard_error))
    cols = ["ebn0_db", "bits_simulated", "bit_errors", "ber",
            "lower_bound_ber", "standard_error"]
    return _csv_text(spec, cols, rows)


def run_threshold_vs_l(spec: ExperimentSpec) -> tuple[str, int]:
    """One threshold search per (memory, length); emits both the noise-std
    and Eb/N0 views plus the BPSK capacity reference for each rate.

    Returns the CSV text and the count of bracket failures (rows with a
    non-bracketing interval are recorded and the run continues).
    """
    spec.validate()
    small = make_small_code(spec.kind, spec.n)
    rows = []
    failures = 0
    for m in spec.memories:
        for L in spec.lengths:
            rate = float(coupled_rate(small.k, small.n, m, L))
            cap = bpsk_capacity_ebn0_db(rate)
            d = spec.delay_for(m)
            try:
                query = ThresholdQuery(small, m, d, L, spec.targets[0],
                                       spec.snr_lo, spec.snr_hi,
                                       resolution_db=spec.snr_step,
                                       i_max=spec.max_iters)
                res = threshold_search(query)
                rows.append((spec.kind, m, L, d, rate, res.sigma_star,
                             res.ebn0_star_db, cap, res.ebn0_star_db - cap, "ok"))
            except BracketError as exc:
                failures += 1
                rows.append((spec.kind, m, L, d, rate, math.nan, math.nan,
                             cap, math.nan, f"no-bracket: {exc}"))
    cols = ["family", "memory", "length", "delay", "rate", "sigma_star",
            "ebn0_star_db", "capacity_ebn0_db", "gap_to_capacity_db", "status"]
    return _csv_text(spec, cols, rows), failures


def run_threshold_vs_target(spec: ExperimentSpec) -> tuple[str, int]:
    """Thresholds across target BERs, next to the Eb/N0 at which the
    genie-aided bound reaches each target.

    Without an explicit delay list, each memory m contributes rows for both
    d = m and d = 3m.
    """
    spec.validate()
    small = make_small_code(spec.kind, spec.n)
    L = spec.length
    rows = []
    failures = 0
    for m in spec.memories:
        delays = spec.delays if spec.delays else (m, 3 * m)
        for d in delays:
            for target in spec.targets:
                bound_db = genie_bound_ebn0_at_target(
                    small, m, L, target, seed=spec.seed)
                try:
                    query = ThresholdQuery(small, m, d, L, target,
                                           spec.snr_lo, spec.snr_hi,
                                           resolution_db=spec.snr_step,
                                           i_max=spec.max_iters)
                    res = threshold_search(query)
                    rows.append((spec.kind, m, d, L, target,
                                 res.ebn0_star_db, bound_db, "ok"))
                except BracketError as exc:
                    failures += 1
                    rows.append((spec.kind, m, d, L, target, math.nan,
                                 bound_db, f"no-bracket: {exc}"))
    cols = ["family", "memory", "delay", "length", "target_ber",
            "ebn0_star_db", "genie_bound_ebn0_db", "status"]
    return _csv_text(spec, cols, rows), failures


def run_lower_bound_table(spec: ExperimentSpec) -> str:
    """Genie-aided BER bound tabulated over the SNR sweep."""
    spec.validate()
    small = make_small_code(spec.kind, spec.n)
    rows = []
    for m in spec.memories:
        for L in spec.lengths:
            for g in spec.snr_points():
                b = genie_lower_bound(small, m, L, g, seed=spec.seed)
                rows.append((spec.kind, m, L, g, b.ber, b.std_error))
    cols = ["family", "memory", "length", "ebn0_db", "ber_bound",
            "bound_std_error"]
    return _csv_text(spec, cols, rows)


def run_encode_debug(spec: ExperimentSpec) -> str:
    """Encode one random info sequence and dump every block as a bit string."""
    spec.validate()
    small = make_small_code(spec.kind, spec.n)
    basic = cartesian(small, spec.cart)
    code = build_bmst(basic, spec.memory, spec.length, spec.seed)
    rng = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((spec.seed, 0, 0))))
    info = rng.integers(0, 2, code.info_bits, dtype=np.uint8)
    tx = encode_bmst(code, info)
    rows = [("info", -1, "".join(map(str, info)))]
    for t in range(tx.shape[0]):
        rows.append(("coded", t, "".join(map(str, tx[t]))))
    return _csv_text(spec, ["row_type", "index", "bits"], rows)


def run_spec(spec: ExperimentSpec) -> tuple[str, int]:
    """Dispatch a spec to its runner; returns (csv_text, bracket_failures)."""
    spec.validate()
    if spec.command == "ber":
        return run_ber_sweep(spec), 0
    if spec.command == "threshold-vs-l":
        return run_threshold_vs_l(spec)
    if spec.command == "threshold-vs-target":
        return run_threshold_vs_target(spec)
    if spec.command == "bound":
        return run_lower_bound_table(spec), 0
    return run_encode_debug(spec), 0


def strip_timestamp(text: str) -> str:
    return "\n".join(line for line in text.splitlines()
                     if not line.startswith("# timestamp=")) + "\n"


def replay(text: str) -> str:
    """Re-run the experiment recorded in a CSV's metadata header."""
    spec = spec_from_metadata(parse_metadata(text))
    out, _ = run_spec(spec)
    return out
