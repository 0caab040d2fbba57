"""Closed-loop ADPCM encoder/decoder with per-frame predictor refitting.

Per sample: predict from reconstructed history, quantize the residual,
reconstruct, adapt the quantizer step. Predictors are refitted once per
frame, either from the previous decoded frame (backward: the decoder
re-derives them from its own output, nothing is transmitted) or from the
current original frame (forward: coefficients travel in the payload).
The hybrid mode runs a linear and a neural branch from the same state
snapshot, commits whichever reconstructs the frame with smaller squared
error, and spends one flag bit per frame to tell the decoder.

Reconstructed history is continuous across frame boundaries; predictor
training sets are not.
"""

from dataclasses import dataclass, field

import numpy as np

from . import lpc
from .audio import Signal, split_frames
from .bitstream import (
    Adaptation,
    Bitstream,
    BitstreamError,
    BitstreamHeader,
    FORWARD_COEFF_COUNT,
    FramePayload,
    PredictorKind,
)
from .mlp import MASK64, Mlp, TrainConfig, multistart_fit
from .quantizer import (
    AdaptiveQuantizer,
    DEFAULT_STEP_INIT,
    DEFAULT_STEP_MAX,
    DEFAULT_STEP_MIN,
    default_multipliers,
)

HISTORY_LEN = 25  # covers the largest predictor order

LPC_ORDER = {PredictorKind.LPC10: 10, PredictorKind.LPC25: 25}


class ZeroPredictor:
    """Predicts 0.0 regardless of history; the frame-0 backward bootstrap."""

    def predict(self, history) -> float:
        return 0.0


ZERO = ZeroPredictor()


@dataclass(frozen=True)
class CodecConfig:
    frame_len: int = 200
    bits: int = 4
    predictor_kind: PredictorKind = PredictorKind.LPC10
    adaptation: Adaptation = Adaptation.BACKWARD
    train: TrainConfig = field(default_factory=TrainConfig)
    step_init: float = DEFAULT_STEP_INIT
    step_min: float = DEFAULT_STEP_MIN
    step_max: float = DEFAULT_STEP_MAX
    multipliers: tuple = ()
    seed: int = 0

    def __post_init__(self):
        if not 2 <= self.bits <= 5:
            raise ValueError(f"bits must be in 2..5, got {self.bits}")
        if self.frame_len < 1:
            raise ValueError(f"frame_len must be >= 1, got {self.frame_len}")
        needs_mlp = self.predictor_kind in (PredictorKind.MLP, PredictorKind.HYBRID)
        if needs_mlp and self.frame_len < 11:
            raise ValueError(
                f"frame_len must be >= 11 for neural predictors, got {self.frame_len}"
            )
        if self.predictor_kind is PredictorKind.HYBRID and self.adaptation is not Adaptation.BACKWARD:
            raise ValueError("hybrid coding is defined for backward adaptation only")
        if not 0 < self.step_min <= self.step_init <= self.step_max:
            raise ValueError(
                f"need 0 < step_min <= step_init <= step_max, got "
                f"{self.step_min}, {self.step_init}, {self.step_max}"
            )
        if not self.multipliers:
            object.__setattr__(self, "multipliers", default_multipliers(self.bits))
        object.__setattr__(self, "multipliers", tuple(self.multipliers))
        object.__setattr__(self, "seed", self.seed & MASK64)

    def payload_bit_rate(self, sample_rate: int) -> float:
        """Payload bits/second: code bits plus the hybrid flag overhead.

        Forward coefficient overhead is excluded; forward mode is the
        unquantized reference configuration.
        """
        rate = float(self.bits * sample_rate)
        if self.predictor_kind is PredictorKind.HYBRID:
            rate += sample_rate / self.frame_len
        return rate


@dataclass(frozen=True)
class CodecState:
    """Reconstruction history (newest last), quantizer state, frame counter."""

    history: tuple
    quantizer: AdaptiveQuantizer
    frame_index: int = 0


def initial_state(config: CodecConfig) -> CodecState:
    quantizer = AdaptiveQuantizer(
        bits=config.bits,
        step=config.step_init,
        step_min=config.step_min,
        step_max=config.step_max,
        multipliers=config.multipliers,
    )
    return CodecState(history=(0.0,) * HISTORY_LEN, quantizer=quantizer, frame_index=0)


def fit_backward(prev_decoded, kind: PredictorKind, config: CodecConfig, frame_index: int):
    """Refit a predictor from the previous decoded frame (decoder-reproducible)."""
    if kind in LPC_ORDER:
        return lpc.fit(prev_decoded, LPC_ORDER[kind])
    if kind is PredictorKind.MLP:
        return multistart_fit(prev_decoded, config.train, (config.seed ^ frame_index) & MASK64)
    raise ValueError(f"cannot fit predictor kind {kind}")


def fit_forward(current_frame, kind: PredictorKind, config: CodecConfig, frame_index: int):
    """Fit a predictor on the current original frame (coefficients transmitted)."""
    return fit_backward(current_frame, kind, config, frame_index)


def forward_coeff_vector(predictor, kind: PredictorKind) -> tuple:
    """Coefficients emitted verbatim into a forward-mode frame payload."""
    if kind in LPC_ORDER:
        return tuple(float(c) for c in predictor.coeffs)
    if kind is PredictorKind.MLP:
        return tuple(float(v) for v in predictor.to_vector())
    raise ValueError(f"no coefficient layout for kind {kind}")


def predictor_from_coeffs(kind: PredictorKind, coeffs):
    """Rebuild the predictor a forward-mode payload describes."""
    expected = FORWARD_COEFF_COUNT[kind]
    if len(coeffs) != expected:
        raise ValueError(f"kind {kind.name} needs {expected} coefficients, got {len(coeffs)}")
    if kind in LPC_ORDER:
        return lpc.LpcModel.from_coeffs(coeffs)
    return Mlp.from_vector(np.asarray(coeffs, dtype=np.float64))


def encode_frame(state: CodecState, frame, predictor):
    """Run the closed loop over one frame.

    Returns (codes, new_state, reconstruction, sse) where sse is the
    frame's total squared reconstruction error.
    """
    hist = list(state.history)
    q = state.quantizer
    codes = []
    recon = np.empty(len(frame), dtype=np.float64)
    sse = 0.0
    for n, x in enumerate(frame):
        p = predictor.predict(hist)
        c = q.quantize(x - p)
        xr = p + q.dequantize(c)
        q = q.adapt(c)
        hist.append(xr)
        del hist[0]
        codes.append(c)
        recon[n] = xr
        d = x - xr
        sse += d * d
    new_state = CodecState(tuple(hist), q, state.frame_index + 1)
    return codes, new_state, recon, float(sse)


def decode_frame(state: CodecState, codes, predictor):
    """Mirror of encode_frame driven by received codes."""
    hist = list(state.history)
    q = state.quantizer
    recon = np.empty(len(codes), dtype=np.float64)
    for n, c in enumerate(codes):
        p = predictor.predict(hist)
        xr = p + q.dequantize(c)
        q = q.adapt(c)
        hist.append(xr)
        del hist[0]
        recon[n] = xr
    return recon, CodecState(tuple(hist), q, state.frame_index + 1)


def encode_frame_hybrid(state: CodecState, frame, linear_predictor, neural_predictor):
    """Try both predictor branches from the same state snapshot.

    The branch with the smaller reconstruction SSE wins and its end state
    is committed; ties go to the linear branch (flag 0).
    """
    codes_l, state_l, recon_l, sse_l = encode_frame(state, frame, linear_predictor)
    codes_n, state_n, recon_n, sse_n = encode_frame(state, frame, neural_predictor)
    if sse_n < sse_l:
        return 1, codes_n, state_n, recon_n, (sse_l, sse_n)
    return 0, codes_l, state_l, recon_l, (sse_l, sse_n)


@dataclass(frozen=True)
class FrameStat:
    """Per-frame encoder diagnostics."""

    sse: float
    hybrid_flag: int | None = None
    branch_sses: tuple | None = None  # (linear, neural) when hybrid


@dataclass(frozen=True)
class EncodeResult:
    bitstream: Bitstream
    reconstruction: Signal
    frame_stats: tuple


def _header_for(signal: Signal, config: CodecConfig) -> BitstreamHeader:
    return BitstreamHeader(
        sample_rate=signal.sample_rate,
        true_sample_count=len(signal),
        frame_len=config.frame_len,
        bits=config.bits,
        predictor_kind=config.predictor_kind,
        adaptation=config.adaptation,
        epochs=config.train.epochs,
        restarts=config.train.restarts,
        seed=config.seed,
        step_init=config.step_init,
        step_min=config.step_min,
        step_max=config.step_max,
        multipliers=config.multipliers,
        init_scale=config.train.init_scale,
        lambda_init=config.train.lambda_init,
        lambda_up=config.train.lambda_up,
        lambda_down=config.train.lambda_down,
    )


def encode(signal: Signal, config: CodecConfig) -> EncodeResult:
    """Encode a signal; returns the bitstream plus the encoder's own
    reconstruction (what a tracking decoder will reproduce exactly)."""
    if len(signal) == 0:
        raise ValueError("cannot encode an empty signal")
    frames, _ = split_frames(signal.samples, config.frame_len)
    kind = config.predictor_kind

    state = initial_state(config)
    prev_recon = None
    payloads = []
    stats = []
    recon_parts = []
    for idx in range(len(frames)):
        frame = frames[idx]
        if kind is PredictorKind.HYBRID:
            if idx == 0:
                codes, state, recon, sse = encode_frame(state, frame, ZERO)
                flag, branches = 0, None
            else:
                linear = fit_backward(prev_recon, PredictorKind.LPC10, config, idx)
                neural = fit_backward(prev_recon, PredictorKind.MLP, config, idx)
                flag, codes, state, recon, branches = encode_frame_hybrid(
                    state, frame, linear, neural
                )
                sse = branches[flag]
            payloads.append(FramePayload(codes=tuple(codes), hybrid_flag=flag))
            stats.append(FrameStat(sse=sse, hybrid_flag=flag, branch_sses=branches))
        elif config.adaptation is Adaptation.BACKWARD:
            predictor = ZERO if idx == 0 else fit_backward(prev_recon, kind, config, idx)
            codes, state, recon, sse = encode_frame(state, frame, predictor)
            payloads.append(FramePayload(codes=tuple(codes)))
            stats.append(FrameStat(sse=sse))
        else:
            predictor = fit_forward(frame, kind, config, idx)
            coeffs = forward_coeff_vector(predictor, kind)
            codes, state, recon, sse = encode_frame(state, frame, predictor)
            payloads.append(FramePayload(codes=tuple(codes), forward_coeffs=coeffs))
            stats.append(FrameStat(sse=sse))
        prev_recon = recon
        recon_parts.append(recon)

    reconstruction = np.concatenate(recon_parts)[: len(signal)]
    bitstream = Bitstream(header=_header_for(signal, config), payloads=tuple(payloads))
    return EncodeResult(
        bitstream=bitstream,
        reconstruction=Signal(reconstruction, signal.sample_rate),
        frame_stats=tuple(stats),
    )


def config_from_header(header: BitstreamHeader) -> CodecConfig:
    """The encoding configuration a bitstream header describes."""
    return CodecConfig(
        frame_len=header.frame_len,
        bits=header.bits,
        predictor_kind=header.predictor_kind,
        adaptation=header.adaptation,
        train=TrainConfig(
            epochs=header.epochs,
            restarts=header.restarts,
            lambda_init=header.lambda_init,
            lambda_up=header.lambda_up,
            lambda_down=header.lambda_down,
            init_scale=header.init_scale,
        ),
        step_init=header.step_init,
        step_min=header.step_min,
        step_max=header.step_max,
        multipliers=header.multipliers,
        seed=header.seed,
    )


def decode(bitstream: Bitstream) -> Signal:
    """Reconstruct the signal, re-deriving backward predictors from the
    decoder's own output frame by frame."""
    header = bitstream.header
    kind = header.predictor_kind
    try:
        config = config_from_header(header)
    except ValueError as exc:
        raise BitstreamError(f"invalid header: {exc}") from None
    if len(bitstream.payloads) != header.frame_count:
        raise BitstreamError(
            f"expected {header.frame_count} frames, got {len(bitstream.payloads)}"
        )

    state = initial_state(config)
    prev_recon = None
    parts = []
    for idx, payload in enumerate(bitstream.payloads):
        try:
            if kind is PredictorKind.HYBRID:
                if payload.hybrid_flag is None:
                    raise ValueError("hybrid stream frame lacks its flag bit")
                if idx == 0:
                    predictor = ZERO
                elif payload.hybrid_flag == 0:
                    predictor = fit_backward(prev_recon, PredictorKind.LPC10, config, idx)
                else:
                    predictor = fit_backward(prev_recon, PredictorKind.MLP, config, idx)
            elif config.adaptation is Adaptation.BACKWARD:
                predictor = ZERO if idx == 0 else fit_backward(prev_recon, kind, config, idx)
            else:
                if payload.forward_coeffs is None:
                    raise ValueError("forward stream frame lacks coefficients")
                predictor = predictor_from_coeffs(kind, payload.forward_coeffs)
            recon, state = decode_frame(state, payload.codes, predictor)
        except ValueError as exc:
            raise BitstreamError(str(exc), frame_index=idx) from None
        prev_recon = recon
        parts.append(recon)

    if not parts:
        raise BitstreamError("bitstream holds no frames")
    samples = np.concatenate(parts)[: header.true_sample_count]
    return Signal(samples, header.sample_rate)
