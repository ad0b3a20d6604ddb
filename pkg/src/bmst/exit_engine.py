"""MI-domain convergence analysis of window decoding.

Instead of asking the a-posteriori MI to reach 1 (which superposition
coupling cannot deliver — the decided layers keep a residual uncertainty
floor), each target layer converts its a-priori/extrinsic MI pair into a
BER estimate and declares success when that estimate beats a preselected
target.  Thresholds are the smallest Eb/N0 at which every target layer in
the chain succeeds.

The recursion tracks one scalar MI per edge class under the consistent-
Gaussian assumption; interleavers are MI-transparent in the ensemble limit,
so the Cartesian order drops out and only the small-code family matters.
Decided layers keep (freeze) their final outgoing MI rather than being
forced to 1, which is what makes error propagation into later windows
visible at low SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basic_codes import (RC, BasicCode, BerEstimate, SmallCode, ber_basic,
                          exit_transfer_c)
from .channel import channel_mi, ebn0_to_sigma
from .encoder import coupled_rate
from .jfun import jfun, jinv, qfunc, qfunc_inv

_INF = math.inf


def mi_ap(i_a: float, i_e: float) -> float:
    """A-posteriori MI from an a-priori/extrinsic pair: the underlying
    Gaussian variances add."""
    _check_mi(i_a, "i_a")
    _check_mi(i_e, "i_e")
    return jfun(math.hypot(jinv(i_a), jinv(i_e)))


def ber_estimate(i_ap: float) -> float:
    """BER estimate of a bit whose a-posteriori MI is ``i_ap``.

    A consistent Gaussian LLR with std sigma mis-signs with probability
    Q(sigma/2); perfect knowledge gives 0, no knowledge gives Q(0) = 0.5.
    """
    _check_mi(i_ap, "i_ap")
    sigma = jinv(i_ap)
    if math.isinf(sigma):
        return 0.0
    return qfunc(0.5 * sigma)


def mi_node_plus(siblings, i_ch: float) -> float:
    """Parity-node MI update: extrinsic MI toward one edge given the MI of
    the m sibling edges and the channel half-edge (check-node duality)."""
    _check_mi(i_ch, "i_ch")
    total = jinv(1.0 - i_ch) ** 2
    for s in siblings:
        _check_mi(s, "sibling MI")
        if s == 0.0:
            return 0.0
        total += jinv(1.0 - s) ** 2
    return 1.0 - jfun(math.sqrt(total))


def mi_node_eq(siblings) -> float:
    """Equality-node MI update: variances of the sibling messages add."""
    total = 0.0
    for s in siblings:
        _check_mi(s, "sibling MI")
        if s == 1.0:
            return 1.0
        total += jinv(s) ** 2
    return jfun(math.sqrt(total))


@dataclass(frozen=True)
class ConvergenceCheck:
    passed: bool
    p_est: float


def convergence_check(i_a: float, i_e: float, target_ber: float) -> ConvergenceCheck:
    """Declare a local decoding success iff the BER estimate derived from
    the a-posteriori MI is strictly below the target."""
    p = ber_estimate(mi_ap(i_a, i_e))
    return ConvergenceCheck(p < target_ber, p)


def _check_mi(x: float, name: str) -> None:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")


@dataclass
class MiState:
    """Per-layer, per-offset scalar MI of the four edge classes.

    ``eq_to_plus[t][i]`` is the MI of the message from the equality node of
    layer t toward parity node t+i, ``plus_to_eq`` the reverse direction;
    ``eq_to_c``/``c_to_eq`` sit on the code-constraint edge.  Layers before
    time 0 or past the chain are known (MI 1); decided layers keep their
    frozen values inside these same arrays.
    """

    eq_to_plus: list[list[float]]
    plus_to_eq: list[list[float]]
    eq_to_c: list[float]
    c_to_eq: list[float]
    i_ch: float


@dataclass
class ExitRunResult:
    success: bool
    fail_layer: int | None
    p_est: np.ndarray
    ebn0_db: float
    rate: float
    i_ch: float
    windows_computed: int
    state: MiState | None = None


def exit_window_run(small: SmallCode, memory: int, delay: int,
                    coupling_len: int, ebn0_db: float, target_ber: float,
                    i_max: int = 1000, *, fixed_point_tol: float = 1e-14,
                    steady_state_shortcut: bool = True,
                    freeze_mode: str = "freeze",
                    keep_state: bool = False) -> ExitRunResult:
    """Slide the MI-domain window over all L target layers.

    All full-edge MI start at 0, channel half-edges at the channel MI of
    the coupled rate, source half-edges at 0.  Each window position runs up
    to ``i_max`` sweeps of the layer schedule (a sweep that no longer moves
    any message by more than ``fixed_point_tol`` is a fixed point and ends
    the window early), then applies the convergence check at the target
    layer.  On success the target layer's outgoing MI freeze at their final
    values (or snap to 1 with ``freeze_mode="perfect"``) and the window
    shifts; on failure the run stops.

    Mid-chain windows repeat verbatim once their frozen inputs stop
    changing; ``steady_state_shortcut`` detects that and skips ahead, which
    is an exact shortcut up to ``fixed_point_tol``.
    """
    if memory < 0 or coupling_len < 1 or delay < 0:
        raise ValueError("need memory >= 0, coupling_len >= 1, delay >= 0")
    if not 0.0 < target_ber < 0.5:
        raise ValueError(f"target BER must lie in (0, 0.5), got {target_ber}")
    if freeze_mode not in ("freeze", "perfect"):
        raise ValueError(f"unknown freeze mode {freeze_mode!r}")
    m, d, L = memory, delay, coupling_len
    rate = float(coupled_rate(small.k, small.n, m, L))
    i_ch = channel_mi(ebn0_db, rate)
    w_ch = jinv(1.0 - i_ch) ** 2

    q = m + 1
    epm = [[0.0] * q for _ in range(L)]
    w_epm = [[_INF] * q for _ in range(L)]
    ppm = [[0.0] * q for _ in range(L)]
    v_ppm = [[0.0] * q for _ in range(L)]
    eq_to_c = [0.0] * L
    c_to_eq = [0.0] * L
    p_trace = np.full(L, np.nan)

    def plus_node(s: int, t: int, t_end: int) -> None:
        ws = []
        n_inf = 0
        fin = 0.0
        for j in range(q):
            x = s - j
            if x < 0 or x >= L:
                wj = 0.0  # termination: known codeword, MI 1
            elif x > t_end:
                wj = _INF  # beyond the window: MI 0
            else:
                wj = w_epm[x][j]
            ws.append(wj)
            if wj == _INF:
                n_inf += 1
            else:
                fin += wj
        for j in range(q):
            x = s - j
            if not t <= x <= t_end:
                continue
            if ws[j] == _INF:
                others_inf = n_inf - 1
                others_fin = fin
            else:
                others_inf = n_inf
                others_fin = fin - ws[j]
            if others_inf:
                out = 0.0
            else:
                out = 1.0 - jfun(math.sqrt(max(w_ch + others_fin, 0.0)))
            ppm[x][j] = out
            v_ppm[x][j] = jinv(out) ** 2

    def eq_c_node(tp: int) -> None:
        v = v_ppm[tp]
        total = 0.0
        for vi in v:
            total += vi
        i_a = jfun(math.sqrt(total))
        i_e = exit_transfer_c(small, i_a)
        eq_to_c[tp] = i_a
        c_to_eq[tp] = i_e
        v_c = jinv(i_e) ** 2
        row = epm[tp]
        wrow = w_epm[tp]
        for i in range(q):
            val = jfun(math.sqrt(max(total - v[i] + v_c, 0.0)))
            row[i] = val
            wrow[i] = jinv(1.0 - val) ** 2

    def run_window(t: int) -> ConvergenceCheck:
        t_end = min(t + d, L - 1)
        tail = range(max(t_end + 1, L), min(t_end + m, L + m - 1) + 1)
        rows = range(t, t_end + 1)
        for _ in range(i_max):
            snap = [tuple(epm[x]) + tuple(ppm[x]) for x in rows]
            for tp in rows:
                plus_node(tp, t, t_end)
                eq_c_node(tp)
            for s in tail:
                plus_node(s, t, t_end)
            delta = 0.0
            for x, before in zip(rows, snap):
                after = tuple(epm[x]) + tuple(ppm[x])
                for a, b in zip(after, before):
                    diff = abs(a - b)
                    if diff > delta:
                        delta = diff
            if delta <= fixed_point_tol:
                break
        total = 0.0
        for vi in v_ppm[t]:
            total += vi
        i_a = jfun(math.sqrt(total))
        i_e = exit_transfer_c(small, i_a)
        eq_to_c[t] = i_a
        c_to_eq[t] = i_e
        return convergence_check(i_a, i_e, target_ber)

    def snapshot_band(t: int, t_end: int):
        band = []
        for x in range(t - m, t_end + 1):
            band.extend(epm[x])
        for x in range(t, t_end + 1):
            band.extend(ppm[x])
        return band

    last_mid = L - 1 - d - m  # last window whose references stay mid-chain
    prev_band = None
    prev_p = None
    windows = 0
    t = 0
    while t < L:
        check = run_window(t)
        windows += 1
        p_trace[t] = check.p_est
        if not check.passed:
            return ExitRunResult(False, t, p_trace, ebn0_db, rate, i_ch,
                                 windows, _collect_state(
                                     epm, ppm, eq_to_c, c_to_eq, i_ch,
                                     keep_state))
        if freeze_mode == "perfect":
            epm[t] = [1.0] * q
            w_epm[t] = [0.0] * q
        t_end = min(t + d, L - 1)
        mid_chain = m + 1 <= t <= last_mid and t_end == t + d
        if steady_state_shortcut and mid_chain:
            band = snapshot_band(t, t_end)
            if (prev_band is not None and prev_p is not None
                    and t + 1 <= last_mid
                    and abs(check.p_est - prev_p) <= fixed_point_tol
                    and len(band) == len(prev_band)
                    and all(abs(a - b) <= fixed_point_tol
                            for a, b in zip(band, prev_band))):
                # Every window up to last_mid will repeat this one verbatim.
                saved = [(list(epm[t + r]), list(w_epm[t + r]),
                          list(ppm[t + r]), list(v_ppm[t + r]))
                         for r in range(d + 1)]
                for x in range(t + 1, last_mid + 1):
                    p_trace[x] = check.p_est
                    epm[x] = list(epm[t])
                    w_epm[x] = list(w_epm[t])
                for r in range(d + 1):
                    epm[last_mid + r] = list(saved[r][0])
                    w_epm[last_mid + r] = list(saved[r][1])
                    ppm[last_mid + r] = list(saved[r][2])
                    v_ppm[last_mid + r] = list(saved[r][3])
                t = last_mid + 1
                prev_band = None
                prev_p = None
                continue
            prev_band = band
            prev_p = check.p_est
        t += 1
    return ExitRunResult(True, None, p_trace, ebn0_db, rate, i_ch, windows,
                         _collect_state(epm, ppm, eq_to_c, c_to_eq, i_ch,
                                        keep_state))


def _collect_state(epm, ppm, eq_to_c, c_to_eq, i_ch, keep: bool):
    if not keep:
        return None
    return MiState([list(r) for r in epm], [list(r) for r in ppm],
                   list(eq_to_c), list(c_to_eq), i_ch)


class BracketError(RuntimeError):
    """The search interval does not bracket the threshold."""


@dataclass
class ThresholdQuery:
    """One threshold question: family, coupling parameters, target, bracket."""

    small: SmallCode
    memory: int
    delay: int
    coupling_len: int
    target_ber: float
    lo_db: float
    hi_db: float
    resolution_db: float = 0.01
    i_max: int = 1000

    def __post_init__(self) -> None:
        if self.lo_db >= self.hi_db:
            raise ValueError("need lo_db < hi_db")
        if self.resolution_db <= 0.0:
            raise ValueError("resolution must be positive")
        if not 0.0 < self.target_ber < 0.5:
            raise ValueError("target BER must lie in (0, 0.5)")


@dataclass
class ThresholdResult:
    ebn0_star_db: float
    sigma_star: float
    rate: float
    query: ThresholdQuery
    evaluations: list[tuple[float, bool]] = field(default_factory=list)


def threshold_search(query: ThresholdQuery, **run_kwargs) -> ThresholdResult:
    """Bisect Eb/N0 to the query resolution; the returned value is the
    smallest tested point that succeeds.

    Raises :class:`BracketError` unless the run fails at ``lo_db`` and
    succeeds at ``hi_db``.  Success is asserted to be an up-set over the
    sampled points (all failures below all successes).
    """
    evals: list[tuple[float, bool]] = []

    def succeeds(db: float) -> bool:
        res = exit_window_run(query.small, query.memory, query.delay,
                              query.coupling_len, db, query.target_ber,
                              query.i_max, **run_kwargs)
        evals.append((db, res.success))
        return res.success

    if succeeds(query.lo_db):
        raise BracketError(
            f"analysis already succeeds at lo = {query.lo_db} dB; widen downward")
    if not succeeds(query.hi_db):
        raise BracketError(
            f"analysis still fails at hi = {query.hi_db} dB; widen upward")
    lo, hi = query.lo_db, query.hi_db
    while hi - lo > query.resolution_db:
        mid = 0.5 * (lo + hi)
        if succeeds(mid):
            hi = mid
        else:
            lo = mid
    worst_fail = max(db for db, ok in evals if not ok)
    best_pass = min(db for db, ok in evals if ok)
    if worst_fail >= best_pass:
        raise BracketError("success region is not an up-set over the sampled points")
    rate = float(coupled_rate(query.small.k, query.small.n,
                              query.memory, query.coupling_len))
    return ThresholdResult(hi, ebn0_to_sigma(hi, rate), rate, query, evals)


def genie_lower_bound(code: BasicCode | SmallCode, memory: int,
                      coupling_len: int, ebn0_db: float,
                      **ber_kwargs) -> BerEstimate:
    """BER lower bound of the coupled code from a genie-aided argument.

    A decoder told every other layer's bits sees the basic code repeated
    m+1 times (a 10*log10(m+1) dB energy gain) minus the termination rate
    loss 10*log10(1 + m/L); the bound evaluates the basic-code BER there.
    """
    if memory < 0 or coupling_len < 1:
        raise ValueError("need memory >= 0 and coupling_len >= 1")
    shifted = (ebn0_db + 10.0 * math.log10(memory + 1)
               - 10.0 * math.log10(1.0 + memory / coupling_len))
    return ber_basic(code, shifted, **ber_kwargs)


def genie_bound_ebn0_at_target(code: BasicCode | SmallCode, memory: int,
                               coupling_len: int, target_ber: float,
                               resolution_db: float = 0.01,
                               **ber_kwargs) -> float:
    """Eb/N0 (dB) at which the genie-aided bound equals the target BER."""
    if not 0.0 < target_ber < 0.5:
        raise ValueError("target BER must lie in (0, 0.5)")
    small = code.small if isinstance(code, BasicCode) else code
    correction = (10.0 * math.log10(memory + 1)
                  - 10.0 * math.log10(1.0 + memory / coupling_len))
    if small.kind == RC:
        # Closed form: Q(sqrt(2 x)) = target  =>  x = qinv^2 / 2.
        x = 0.5 * qfunc_inv(target_ber) ** 2
        return 10.0 * math.log10(x) - correction
    lo, hi = -10.0, 40.0
    while hi - lo > resolution_db:
        mid = 0.5 * (lo + hi)
        if genie_lower_bound(code, memory, coupling_len, mid, **ber_kwargs).ber > target_ber:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
