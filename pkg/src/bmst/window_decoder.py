"""Iterative sliding-window BP decoding on the coupled normal graph.

Layer t of the graph ties together the code-constraint node of basic
codeword v_t, the replication (equality) node that fans v_t out to the m+1
superposition (parity) nodes it participates in, and the parity node of
transmitted block c_t with its channel half-edge.  A window with delay d
spans layers t..t+d; the first layer is the target and is the only one
decided before the window shifts.

Messages referencing layers left of the window are saturated at the clip
magnitude according to decided (or known-zero termination) bits; messages
from layers right of the window are zero.  Parity nodes of the m tail
blocks past the last layer carry real channel observations and are
processed whenever the window reaches them.

All arrays accept leading batch axes, so many independent noise
realizations decode in lockstep through the same vectorized operations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basic_codes import encode_basic, siso_decode_basic
from .encoder import BmstCode
from .llr import LLR_CLIP, leave_one_out_boxplus, leave_one_out_sum


@dataclass
class DecoderConfig:
    """Knobs of the window decoder."""

    delay: int
    max_iters: int = 50
    llr_clip: float = LLR_CLIP
    early_stop: bool = False
    early_stop_threshold: float = 45.0
    sweep: str = "forward"  # or "forward-backward"
    fixed_point_exit: bool = True
    fixed_point_tol: float = 0.0

    def __post_init__(self) -> None:
        if self.delay < 0:
            raise ValueError(f"delay must be non-negative, got {self.delay}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")
        if self.sweep not in ("forward", "forward-backward"):
            raise ValueError(f"unknown sweep mode {self.sweep!r}")


def node_plus_update(incoming, channel_llr, clip: float = LLR_CLIP):
    """Parity-node update: extrinsic to edge i combines the channel LLR and
    every other incoming edge through boxplus."""
    outs = leave_one_out_boxplus([channel_llr, *incoming], clip)
    return outs[1:]


def node_eq_update(incoming, from_c, clip: float = LLR_CLIP):
    """Equality-node update: every outgoing message is the sum of all
    incoming messages except the one on its own edge.

    Returns ``(to_plus, to_c)`` where ``to_plus[i]`` answers the i-th parity
    edge and ``to_c`` the code-constraint edge.
    """
    louts = leave_one_out_sum([*incoming, from_c], clip)
    return louts[:len(incoming)], louts[len(incoming)]


@dataclass
class WindowState:
    """Messages and context of one window position.

    ``channel_llr`` holds the full received sequence; the window reads
    blocks ``position .. layer_end + m``.  ``feedback_llr`` carries the
    saturated codeword LLRs of already-decided layers (rows at or past
    ``position`` are ignored).  ``epm[w, i]`` is the message from the
    equality node of layer ``position + w`` toward parity node
    ``position + w + i``; ``ppm[w, i]`` flows the opposite way.  Both live
    in the codeword-bit (pre-permutation) domain.
    """

    position: int
    layer_end: int
    channel_llr: np.ndarray
    feedback_llr: np.ndarray
    epm: np.ndarray
    ppm: np.ndarray
    target_app: np.ndarray | None = None

    @classmethod
    def create(cls, code: BmstCode, config: DecoderConfig,
               channel_llr: np.ndarray, position: int,
               feedback_llr: np.ndarray | None = None) -> "WindowState":
        L, m, N = code.coupling_len, code.memory, code.N
        llr = np.asarray(channel_llr, dtype=float)
        if llr.shape[-1] != N or llr.shape[-2] != L + m:
            raise ValueError(
                f"expected channel LLRs shaped (..., {L + m}, {N}), got {llr.shape}")
        if not 0 <= position < L:
            raise ValueError(f"window position must lie in [0, {L}), got {position}")
        lead = llr.shape[:-2]
        if feedback_llr is None:
            feedback_llr = np.zeros(lead + (L, N))
        layer_end = min(position + config.delay, L - 1)
        w = layer_end - position + 1
        msg_shape = (w, m + 1) + lead + (N,)
        return cls(position, layer_end, llr, feedback_llr,
                   np.zeros(msg_shape), np.zeros(msg_shape))


def _edge_out(code: BmstCode, state: WindowState, x: int, i: int,
              clip: float):
    """Message from the equality node of layer x toward parity node x+i."""
    if x < 0 or x >= code.coupling_len:
        return clip  # termination: known all-zero codeword
    if x < state.position:
        return state.feedback_llr[..., x, :]
    if x > state.layer_end:
        return 0.0
    return state.epm[x - state.position, i]


def _plus_node(code: BmstCode, state: WindowState, s: int, clip: float) -> None:
    """Update parity node of block s; write extrinsics to in-window layers."""
    m = code.memory
    t, t_end = state.position, state.layer_end
    terms = [state.channel_llr[..., s, :]]
    receivers = []
    for j in range(m + 1):
        x = s - j
        val = _edge_out(code, state, x, j, clip)
        if isinstance(val, float):
            terms.append(val)
        else:
            terms.append(val[..., code.perms[j]])
        if t <= x <= t_end:
            receivers.append(j)
    if not receivers:
        return
    outs = leave_one_out_boxplus(terms, clip, needed=[j + 1 for j in receivers])
    for j in receivers:
        state.ppm[s - j - t, j] = outs[j + 1][..., code.perms_inv[j]]


def _eq_c_node(code: BmstCode, state: WindowState, tp: int, clip: float) -> None:
    """Equality and code-constraint updates of layer tp."""
    m = code.memory
    wi = tp - state.position
    inc = state.ppm[wi]
    total = inc.sum(axis=0)
    to_c = np.clip(total, -clip, clip)
    from_c, info_app = siso_decode_basic(code.basic, to_c, clip=clip,
                                         assume_clipped=True)
    for i in range(m + 1):
        state.epm[wi, i] = np.clip(total - inc[i] + from_c, -clip, clip)
    if tp == state.position:
        state.target_app = info_app


def _iterate(code: BmstCode, state: WindowState, config: DecoderConfig) -> None:
    L, m = code.coupling_len, code.memory
    clip = config.llr_clip
    layers = range(state.position, state.layer_end + 1)
    tail_plus = range(max(state.layer_end + 1, L),
                      min(state.layer_end + m, L + m - 1) + 1)
    for tp in layers:
        _plus_node(code, state, tp, clip)
        _eq_c_node(code, state, tp, clip)
    for s in tail_plus:
        _plus_node(code, state, s, clip)
    if config.sweep == "forward-backward":
        for tp in reversed(layers):
            _plus_node(code, state, tp, clip)
            _eq_c_node(code, state, tp, clip)


def decode_window(code: BmstCode, state: WindowState, config: DecoderConfig):
    """Run up to ``max_iters`` schedule sweeps and decide the target layer.

    Returns the hard decisions on the target layer's info bits and their APP
    LLRs.  Iteration stops early only at an exact message fixed point (a
    bit-identical state would make further sweeps no-ops) or, if enabled,
    once every target APP magnitude clears the early-stop threshold.
    """
    clip = config.llr_clip
    for _ in range(config.max_iters):
        if config.fixed_point_exit:
            prev_epm = state.epm.copy()
            prev_ppm = state.ppm.copy()
        _iterate(code, state, config)
        if config.early_stop and state.target_app is not None:
            if np.all(np.abs(state.target_app) >= config.early_stop_threshold):
                break
        if config.fixed_point_exit:
            d = max(np.max(np.abs(state.epm - prev_epm)),
                    np.max(np.abs(state.ppm - prev_ppm)))
            if d <= config.fixed_point_tol:
                break
    total = state.ppm[0].sum(axis=0)
    _, info_app = siso_decode_basic(code.basic, np.clip(total, -clip, clip),
                                    clip=clip, assume_clipped=True)
    bits = (info_app < 0).astype(np.uint8)
    return bits, info_app


def decode_sequence(code: BmstCode, channel_llrs: np.ndarray,
                    config: DecoderConfig) -> np.ndarray:
    """Window-decode a full received sequence into L*K info decisions.

    Accepts LLRs shaped ``(..., L+m, N)`` or flat ``((L+m)*N,)``.  Each
    window is decoded independently given the channel LLRs and the decision
    log; decided layers feed back their re-encoded codewords as saturated
    LLRs to all later windows.
    """
    L, m, N, K = code.coupling_len, code.memory, code.N, code.K
    llr = np.asarray(channel_llrs, dtype=float)
    flat_input = llr.ndim == 1
    if flat_input:
        if llr.size != (L + m) * N:
            raise ValueError(f"expected {(L + m) * N} LLRs, got {llr.size}")
        llr = llr.reshape(L + m, N)
    lead = llr.shape[:-2]
    feedback = np.zeros(lead + (L, N))
    decisions = np.zeros(lead + (L, K), dtype=np.uint8)
    for t in range(L):
        state = WindowState.create(code, config, llr, t, feedback)
        bits, _ = decode_window(code, state, config)
        decisions[..., t, :] = bits
        feedback[..., t, :] = config.llr_clip * (
            1.0 - 2.0 * encode_basic(code.basic, bits))
    return decisions.reshape(lead + (L * K,))
