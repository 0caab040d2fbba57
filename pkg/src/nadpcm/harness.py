"""Experiment harness: method comparison tables, training sweeps, CSV export.

Method names pair an adaptation mode with a predictor: ADPCMF-* is
forward-adapted (coefficients transmitted), ADPCMB-* backward-adapted
(decoder refits), and ADPCMB-HYBRID is the per-frame linear/neural
switch. All runs are deterministic given (corpus, config, seed), so
repeated runs emit byte-identical CSVs.
"""

import csv
import io
from dataclasses import dataclass, replace

import numpy as np

from .audio import Signal, split_frames
from .bitstream import Adaptation, Bitstream, PredictorKind, parse, serialize
from .codec import CodecConfig, encode, decode, encode_frame, initial_state
from .metrics import mean_std, segsnr, segment_snr_db, z_score
from .mlp import MASK64, SplitMix64, build_training_set, init_mlp, lm_iterations

SIGNIFICANCE_THRESHOLD = 2.5
SEGSNR_WINDOW = 200  # metric window, independent of the coding frame length

METHODS = {
    "ADPCMF-LPC-10": (PredictorKind.LPC10, Adaptation.FORWARD),
    "ADPCMF-LPC-25": (PredictorKind.LPC25, Adaptation.FORWARD),
    "ADPCMF-MLP": (PredictorKind.MLP, Adaptation.FORWARD),
    "ADPCMB-LPC-10": (PredictorKind.LPC10, Adaptation.BACKWARD),
    "ADPCMB-LPC-25": (PredictorKind.LPC25, Adaptation.BACKWARD),
    "ADPCMB-MLP": (PredictorKind.MLP, Adaptation.BACKWARD),
    "ADPCMB-HYBRID": (PredictorKind.HYBRID, Adaptation.BACKWARD),
}

_NEEDS_MLP = {k for k, (kind, _) in METHODS.items()
              if kind in (PredictorKind.MLP, PredictorKind.HYBRID)}


@dataclass(frozen=True)
class MethodRow:
    method: str
    bits: int
    segsnr_mean: float
    segsnr_std: float
    frames_evaluated: int


@dataclass(frozen=True)
class SignificancePair:
    method_a: str
    method_b: str
    z: float
    significant: bool


@dataclass(frozen=True)
class SweepCurve:
    x_values: tuple
    y_train_db: tuple | None = None
    y_test_db: tuple | None = None

    def __post_init__(self):
        xs = self.x_values
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise ValueError("x_values must be strictly increasing")


def configured(base: CodecConfig, bits=None, kind=None, adaptation=None, frame_len=None):
    """Variant of a config; changing bits re-defaults the multiplier table."""
    changes = {}
    if bits is not None and bits != base.bits:
        changes["bits"] = bits
        changes["multipliers"] = ()
    if kind is not None:
        changes["predictor_kind"] = kind
    if adaptation is not None:
        changes["adaptation"] = adaptation
    if frame_len is not None:
        changes["frame_len"] = frame_len
    return replace(base, **changes) if changes else base


def _roundtrip(signal: Signal, config: CodecConfig) -> Signal:
    """Full encode -> serialize -> parse -> decode pipeline."""
    encoded = encode(signal, config)
    return decode(parse(serialize(encoded.bitstream)))


def evaluate_methods(corpus, bits_list, methods, base_config: CodecConfig):
    """Encode+decode every corpus signal per (method, bits) pair.

    Per-segment SNRs (segment length = coding frame length) are pooled
    across the corpus into one row per pair. Rows for all-silent corpora
    carry NaN means and zero frames.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("corpus must be non-empty")
    rows = []
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
        kind, adaptation = METHODS[method]
        for bits in bits_list:
            config = configured(base_config, bits=bits, kind=kind, adaptation=adaptation)
            pooled = []
            for index, signal in enumerate(corpus):
                try:
                    decoded = _roundtrip(signal, config)
                except Exception as exc:
                    raise RuntimeError(f"{method} Nq={bits} failed on corpus[{index}]: {exc}") from exc
                report = segsnr(signal, decoded, config.frame_len)
                pooled.extend(report.per_segment_db)
            if pooled:
                mean_db, std_db = mean_std(pooled)
            else:
                mean_db = std_db = float("nan")
            rows.append(MethodRow(method, bits, mean_db, std_db, len(pooled)))
    return rows


def significance_matrix(rows, n: int):
    """Pairwise z statistics between method rows sharing a bit depth.

    Pairs with z below 2.5 are marked not significant.
    """
    if len({row.bits for row in rows}) > 1:
        raise ValueError("significance_matrix needs rows at a single bit depth")
    pairs = []
    for i, a in enumerate(rows):
        for b in rows[i:]:
            z = z_score(a.segsnr_mean, a.segsnr_std, b.segsnr_mean, b.segsnr_std, n)
            pairs.append(SignificancePair(a.method, b.method, z, z >= SIGNIFICANCE_THRESHOLD))
    return pairs


def closed_loop_frame_snr(frame, predictor, config: CodecConfig):
    """SNR (dB) of coding one frame closed-loop from a fresh codec state."""
    state = initial_state(config)
    _, _, recon, _ = encode_frame(state, frame, predictor)
    return segment_snr_db(frame, frame - recon)


def epoch_sweep(signal: Signal, frame_pair_index: int, bits: int, max_epochs: int,
                restart_seed: int, base_config: CodecConfig | None = None) -> SweepCurve:
    """Trace SEGSNR against training epochs for one frame pair.

    One net is initialized from restart_seed and trained on the first
    frame of the pair; after every epoch its closed-loop SNR is measured
    on the training frame (forward-style) and on the following frame
    (backward-style). Overtraining shows up as the test curve peaking
    early and then declining.
    """
    base = base_config if base_config is not None else CodecConfig()
    config = configured(base, bits=bits)
    frames, _ = split_frames(signal.samples, config.frame_len)
    if frame_pair_index + 1 >= len(frames):
        raise ValueError(
            f"signal has {len(frames)} frames; pair index {frame_pair_index} needs two"
        )
    train_frame = frames[frame_pair_index]
    test_frame = frames[frame_pair_index + 1]
    if np.dot(train_frame, train_frame) < 1e-12 or np.dot(test_frame, test_frame) < 1e-12:
        raise ValueError(f"frame pair {frame_pair_index} contains silence; pick another")

    x, t = build_training_set(train_frame)
    if len(t) == 0:
        raise ValueError("training frame too short to form prediction pairs")
    net = init_mlp(SplitMix64(restart_seed & MASK64), config.train.init_scale)

    y_train = []
    y_test = []
    for net, _ in lm_iterations(net, x, t, config.train, max_epochs):
        y_train.append(closed_loop_frame_snr(train_frame, net, config))
        y_test.append(closed_loop_frame_snr(test_frame, net, config))
    return SweepCurve(
        x_values=tuple(range(1, max_epochs + 1)),
        y_train_db=tuple(y_train),
        y_test_db=tuple(y_test),
    )


def optimal_epoch_histogram(signal: Signal, bits: int, max_epochs: int,
                            config: CodecConfig):
    """Distribution of the per-frame optimal epoch count.

    For each consecutive frame pair, one net (seeded from the config seed
    XOR the frame index) is trained on the first frame; the optimum is
    the epoch count maximizing closed-loop SNR on the next frame (first
    maximum on ties). Returns {epoch: percent of frames}.
    """
    config = configured(config, bits=bits)
    frames, _ = split_frames(signal.samples, config.frame_len)
    if len(frames) < 2:
        raise ValueError("need at least two frames")

    counts = {}
    total = 0
    for k in range(len(frames) - 1):
        x, t = build_training_set(frames[k])
        if len(t) == 0:
            continue
        net = init_mlp(SplitMix64((config.seed ^ k) & MASK64), config.train.init_scale)
        best_epoch = None
        best_snr = None
        for epoch, (net, _) in enumerate(lm_iterations(net, x, t, config.train, max_epochs), 1):
            snr = closed_loop_frame_snr(frames[k + 1], net, config)
            if snr is None:
                continue
            if best_snr is None or snr > best_snr:
                best_epoch, best_snr = epoch, snr
        if best_epoch is None:
            continue
        counts[best_epoch] = counts.get(best_epoch, 0) + 1
        total += 1
    if total == 0:
        raise ValueError("no frame pair produced a measurable optimum")
    return {epoch: 100.0 * count / total for epoch, count in sorted(counts.items())}


def frame_length_sweep(signal: Signal, lengths, bits_list, methods,
                       base_config: CodecConfig | None = None):
    """Full encode/decode per (frame length, bits, method).

    SEGSNR always uses a 200-sample analysis window regardless of the
    coding frame length. Lengths too short for the neural predictor skip
    those methods; skips are returned alongside the records as
    (method, bits, length, reason) tuples.
    """
    base = base_config if base_config is not None else CodecConfig()
    records = []
    skipped = []
    for method in methods:
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {sorted(METHODS)}")
        kind, adaptation = METHODS[method]
        for bits in bits_list:
            for length in lengths:
                if length < 11 and method in _NEEDS_MLP:
                    skipped.append((method, bits, length, "frame too short for neural predictor"))
                    continue
                config = configured(base, bits=bits, kind=kind, adaptation=adaptation,
                                    frame_len=length)
                decoded = _roundtrip(signal, config)
                report = segsnr(signal, decoded, SEGSNR_WINDOW)
                records.append({
                    "method": method,
                    "bits": bits,
                    "frame_len": length,
                    "segsnr_mean": report.mean_db,
                    "segments": report.segments_used,
                })
    return records, skipped


def predictor_usage(bitstream: Bitstream):
    """Percentage of frames coded by each hybrid branch: (pct_mlp, pct_lpc)."""
    if bitstream.header.predictor_kind is not PredictorKind.HYBRID:
        raise ValueError("predictor usage is defined for hybrid bitstreams only")
    flags = [p.hybrid_flag for p in bitstream.payloads]
    n = len(flags)
    mlp_frames = sum(flags)
    return 100.0 * mlp_frames / n, 100.0 * (n - mlp_frames) / n


def export_csv(columns, rows) -> str:
    """Render rows as CSV with a header; reals use 6 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(v) for v in row])
    return buf.getvalue()


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (np.floating,)):
        return f"{float(value):.6g}"
    return str(value)


def method_rows_csv(rows) -> str:
    return export_csv(
        ["method", "bits", "segsnr_mean", "segsnr_std", "frames"],
        [(r.method, r.bits, r.segsnr_mean, r.segsnr_std, r.frames_evaluated) for r in rows],
    )


def segsnr_report_csv(report) -> str:
    """Per-segment SNR table with a trailing summary row."""
    rows = [(i, snr) for i, snr in enumerate(report.per_segment_db)]
    rows.append(("mean", report.mean_db))
    return export_csv(["segment_index", "snr_db"], rows)
