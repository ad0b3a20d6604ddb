"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  The heavy Monte Carlo and threshold-sweep criteria
finish in a few minutes each.
"""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

import bmst
from bmst import (DecoderConfig, ThresholdQuery, ber_basic, ber_estimate,
                  build_bmst, cartesian, decode_sequence, ebn0_to_sigma,
                  encode_bmst, exit_window_run, generator_matrix,
                  genie_bound_ebn0_at_target, genie_lower_bound, jfun,
                  jfun_quad, jinv, llr_demap, make_small_code, mi_ap,
                  rate_bmst, threshold_search, transmit)
from bmst.channel import bpsk_capacity_ebn0_db
from bmst.harness import (ExperimentSpec, replay, run_ber_sweep, run_spec,
                          simulate_ber_point, strip_timestamp)

RC2 = make_small_code("rc", 2)


def report(num: int, name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {num:02d} {name}: {status}" + (f" ({detail})" if detail else ""))
    assert ok, f"criterion {num} ({name}): {detail}"


def test_criterion_01_encoder_oracle_equivalence():
    t0 = time.perf_counter()
    checked = 0
    for m in (0, 1, 2):
        for L in (1, 2, 3):
            code = build_bmst(cartesian(RC2, 2), m, L, seed=101 + 7 * m + L)
            gm = generator_matrix(code).toarray().astype(np.int64)
            for bits in itertools.product((0, 1), repeat=code.info_bits):
                info = np.array(bits, dtype=np.uint8)
                if not np.array_equal(encode_bmst(code, info).ravel(),
                                      (info @ gm) & 1):
                    report(1, "encoder-oracle-equivalence", False,
                           f"mismatch at m={m} L={L} info={bits}")
                checked += 1
    # an SPC config with 12 info bits, still exhaustive
    code = build_bmst(cartesian(make_small_code("spc", 5), 1), 1, 3, seed=55)
    gm = generator_matrix(code).toarray().astype(np.int64)
    for bits in itertools.product((0, 1), repeat=code.info_bits):
        info = np.array(bits, dtype=np.uint8)
        if not np.array_equal(encode_bmst(code, info).ravel(), (info @ gm) & 1):
            report(1, "encoder-oracle-equivalence", False, f"spc {bits}")
        checked += 1
    elapsed = time.perf_counter() - t0
    report(1, "encoder-oracle-equivalence", elapsed < 1.0,
           f"{checked} encodings verified in {elapsed:.2f} s")


def test_criterion_02_rate_exactness():
    code = build_bmst(cartesian(RC2, 10), 2, 1000, seed=1)
    ok = rate_bmst(code).fraction == Fraction(1000, 2004)
    rng = np.random.default_rng(2024)
    for _ in range(100):
        kind = "rc" if rng.integers(2) else "spc"
        n = int(rng.integers(2, 10))
        B = int(rng.integers(1, 40))
        m = int(rng.integers(0, 10))
        L = int(rng.integers(1, 3000))
        basic = cartesian(make_small_code(kind, n), B)
        c = build_bmst(basic, m, L, seed=int(rng.integers(1 << 30)))
        if rate_bmst(c).fraction != Fraction(L * basic.K, (L + m) * basic.N):
            ok = False
            break
    report(2, "rate-exactness", ok, "1000/2004 example plus 100 random tuples")


def test_criterion_03_j_function_numerics():
    grid = np.linspace(1e-4, 1.0 - 1e-4, 1000)
    worst_rt = max(abs(jfun(jinv(float(x))) - float(x)) for x in grid)
    ok = worst_rt <= 1e-8
    worst_mc = 0.0
    sigmas = [0.2, 0.5, 0.8, 1.2, 1.7, 2.3, 3.0, 4.0, 5.5, 7.5]
    ln2 = math.log(2.0)
    for i, s in enumerate(sigmas):
        rng = np.random.default_rng(9000 + i)
        xi = 0.5 * s * s + s * rng.standard_normal(10_000_000)
        mc = 1.0 - float(np.mean(np.log1p(np.exp(-np.clip(xi, -700, 700))) / ln2))
        worst_mc = max(worst_mc, abs(jfun_quad(s) - mc))
    ok = ok and worst_mc < 1e-3
    report(3, "j-function-numerics", ok,
           f"round trip {worst_rt:.2e}, quad-vs-MC {worst_mc:.2e} at 10 points")


def test_criterion_04_mi_identities():
    ok = True
    for x in np.linspace(0.0, 1.0, 101):
        if abs(mi_ap(0.0, float(x)) - float(x)) > 1e-8:
            ok = False
        if mi_ap(1.0, float(x)) != 1.0:
            ok = False
    ok = ok and ber_estimate(1.0) == 0.0 and ber_estimate(0.0) == 0.5
    bs = [ber_estimate(float(x)) for x in np.linspace(0.0, 1.0, 301)]
    ok = ok and all(b < a for a, b in zip(bs, bs[1:]))
    ms = [mi_ap(float(x), 0.35) for x in np.linspace(0.0, 0.999, 301)]
    ok = ok and all(b > a for a, b in zip(ms, ms[1:]))
    report(4, "mi-ber-identities", ok,
           "mi_ap(0,x)=x, mi_ap(1,x)=1, ber(1)=0, ber(0)=0.5, strict monotone")


def test_criterion_05_noiseless_round_trip():
    t0 = time.perf_counter()
    ok = True
    for kind, n in (("rc", 2), ("spc", 4)):
        for m in (1, 2, 3):
            code = build_bmst(cartesian(make_small_code(kind, n), 5), m, 20,
                              seed=m * 31 + n)
            rng = np.random.default_rng(m + n)
            info = rng.integers(0, 2, code.info_bits, dtype=np.uint8)
            y = transmit(encode_bmst(code, info), 0.0, rng)
            dec = decode_sequence(code, llr_demap(y, 0.0),
                                  DecoderConfig(delay=3 * m, max_iters=10))
            if not np.array_equal(dec, info):
                ok = False
    report(5, "noiseless-round-trip", ok,
           f"rc and spc, m in 1..3, d=3m, L=20 in {time.perf_counter() - t0:.1f} s")


def test_criterion_06_genie_bound_respected():
    t0 = time.perf_counter()
    spec = ExperimentSpec(command="ber", kind="rc", n=2, cart=100,
                          memories=(1,), lengths=(100,), delays=(3,),
                          max_iters=50, seed=60, snr_lo=4.5, snr_hi=6.5,
                          snr_step=1.0, max_bits=20_000_000, max_errors=200)
    points = [simulate_ber_point(spec, g, i)
              for i, g in enumerate(spec.snr_points())]
    ok = True
    details = []
    for p in points:
        if p.ber < p.lower_bound_ber - 3.0 * p.standard_error:
            ok = False
        details.append(f"{p.ebn0_db}dB: ber={p.ber:.3g} bound={p.lower_bound_ber:.3g}")
    top = points[-1]
    ratio = top.ber / top.lower_bound_ber
    if not ratio < 3.0:
        ok = False
    report(6, "genie-bound-respected", ok,
           "; ".join(details) + f"; top ratio {ratio:.2f} "
           f"({time.perf_counter() - t0:.0f} s)")


def test_criterion_07_threshold_vs_coupling_length():
    results = {}
    for L in (10, 100, 1000):
        q = ThresholdQuery(RC2, 1, 3, L, 1e-7, 0.0, 14.0)
        results[L] = threshold_search(q)
    sigma_db = {L: -20.0 * math.log10(r.sigma_star) for L, r in results.items()}
    spread = max(sigma_db.values()) - min(sigma_db.values())
    ok = spread <= 0.0100001
    stars = [results[L].ebn0_star_db for L in (10, 100, 1000)]
    ok = ok and stars[0] > stars[1] > stars[2]
    gaps = [results[L].ebn0_star_db - bpsk_capacity_ebn0_db(results[L].rate)
            for L in (10, 100, 1000)]
    ok = ok and gaps[0] > gaps[1] > gaps[2]
    report(7, "threshold-vs-coupling-length", ok,
           f"sigma* spread {spread:.4f} dB-equivalent; ebn0* {stars}; gaps {gaps}")


TARGET_GRID = (3e-1, 2e-1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)


@pytest.fixture(scope="module")
def threshold_sweep():
    """Thresholds for RC m in {1,2,3}: d=3m over the target grid, d=m at 1e-7."""
    out = {}
    for m in (1, 2, 3):
        for target in TARGET_GRID:
            q = ThresholdQuery(RC2, m, 3 * m, 1000, target, -6.0, 14.0)
            out[(m, 3 * m, target)] = threshold_search(q).ebn0_star_db
        q = ThresholdQuery(RC2, m, m, 1000, 1e-7, -6.0, 14.0)
        out[(m, m, 1e-7)] = threshold_search(q).ebn0_star_db
    return out


def test_criterion_08a_flat_then_rapid_degradation(threshold_sweep):
    ok = True
    details = []
    for m in (1, 2, 3):
        th = [threshold_sweep[(m, 3 * m, t)] for t in TARGET_GRID]
        flat = th[1] - th[0] <= 0.3  # plateau across the two highest targets
        increments = [b - a for a, b in zip(th, th[1:])]
        rapid = max(increments) >= 1.0 and th[-1] - th[0] >= 3.0
        details.append(f"m={m}: plateau step {th[1] - th[0]:.3f} dB, "
                       f"max step {max(increments):.2f} dB")
        if not (flat and rapid):
            ok = False
    report(8, "fig3a-flat-then-rapid-degradation", ok, "; ".join(details))


def test_criterion_08b_error_propagation_at_1e2(threshold_sweep):
    th = [threshold_sweep[(m, 3 * m, 1e-2)] for m in (1, 2, 3)]
    ok = th[0] <= th[1] <= th[2]
    report(8, "fig3b-threshold-nondecreasing-in-m-at-1e-2", ok,
           f"thresholds at 1e-2: {[round(x, 3) for x in th]}")


def test_criterion_08c_small_delay_misses_bound(threshold_sweep):
    ok = True
    details = []
    for m in (1, 2, 3):
        star = threshold_sweep[(m, m, 1e-7)]
        bound = genie_bound_ebn0_at_target(RC2, m, 1000, 1e-7)
        details.append(f"m={m}: d=m star {star:.3f} vs bound {bound:.3f}")
        if not star > bound + 0.05:
            ok = False
    report(8, "fig3c-small-delay-above-bound", ok, "; ".join(details))


def test_criterion_08d_wide_delay_achieves_bound(threshold_sweep):
    ok = True
    details = []
    for m in (1, 2, 3):
        star = threshold_sweep[(m, 3 * m, 1e-7)]
        bound = genie_bound_ebn0_at_target(RC2, m, 1000, 1e-7)
        gap = star - bound
        details.append(f"m={m}: gap {gap:.4f} dB")
        if not abs(gap) <= 0.1:
            ok = False
    report(8, "fig3d-wide-delay-achieves-bound", ok, "; ".join(details))


def test_criterion_08e_floor_lowered_by_memory(threshold_sweep):
    th = [threshold_sweep[(m, 3 * m, 1e-7)] for m in (1, 2, 3)]
    ok = th[0] > th[1] > th[2]
    report(8, "fig3e-floor-lowered-by-memory", ok,
           f"thresholds at 1e-7: {[round(x, 3) for x in th]}")


def test_criterion_09_baseline_reduction():
    small = RC2
    code = build_bmst(cartesian(small, 50), 0, 40, seed=90)
    cfg = DecoderConfig(delay=0, max_iters=5)
    ok = True
    details = []
    for gi, g in enumerate((2.0, 4.0, 6.0)):
        sigma = ebn0_to_sigma(g, rate_bmst(code).value)
        rng = np.random.default_rng(4000 + gi)
        trials = 12 if g < 6.0 else 60
        info = rng.integers(0, 2, (trials, code.info_bits), dtype=np.uint8)
        tx = np.stack([encode_bmst(code, row) for row in info])
        y = transmit(tx, sigma, rng)
        dec = decode_sequence(code, llr_demap(y, sigma), cfg)
        bits = info.size
        p_hat = int((dec != info).sum()) / bits
        p_ref = ber_basic(small, g).ber
        se = math.sqrt(p_ref * (1.0 - p_ref) / bits)
        details.append(f"{g}dB: {p_hat:.4g} vs {p_ref:.4g}")
        if abs(p_hat - p_ref) >= 3.0 * se:
            ok = False
    report(9, "baseline-reduction-m0-d0", ok, "; ".join(details))


def test_criterion_10_replay_determinism():
    spec = ExperimentSpec(command="ber", kind="rc", n=2, cart=10,
                          memories=(1,), lengths=(12,), delays=(3,),
                          max_iters=12, seed=1234, snr_lo=3.0, snr_hi=5.0,
                          snr_step=1.0, max_bits=30_000, max_errors=100)
    first = run_ber_sweep(spec)
    again = replay(first)
    ok = strip_timestamp(first) == strip_timestamp(again)
    enc_spec = ExperimentSpec(command="encode", kind="spc", n=4, cart=4,
                              memories=(2,), lengths=(5,), seed=77)
    enc, _ = run_spec(enc_spec)
    ok = ok and strip_timestamp(replay(enc)) == strip_timestamp(enc)
    report(10, "replay-determinism", ok,
           "ber sweep and encode dump reproduce bit-exactly from metadata")
