"""Adaptive uniform midrise quantizer for the prediction residual.

The step size is multiplied after every sample by a factor indexed by
the magnitude rank of the emitted code (small residual codes shrink the
step, overload codes grow it) and clamped to [step_min, step_max].
Encoder and decoder apply the identical rule, so feeding the decoder the
encoder's code sequence reproduces the step trajectory exactly.
"""

import math
from dataclasses import dataclass, replace

# Step multipliers per code magnitude rank, innermost first.
DEFAULT_MULTIPLIERS = {
    2: (0.8, 1.6),
    3: (0.9, 0.9, 1.25, 1.75),
    4: (0.9, 0.9, 0.9, 0.9, 1.2, 1.6, 2.0, 2.4),
    5: (0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9,
        1.2, 1.4, 1.6, 1.8, 2.0, 2.2, 2.4, 2.6),
}

DEFAULT_STEP_INIT = 0.02
DEFAULT_STEP_MIN = 2.0**-12
DEFAULT_STEP_MAX = 0.5


def default_multipliers(bits: int) -> tuple:
    if bits not in DEFAULT_MULTIPLIERS:
        raise ValueError(f"bits must be in 2..5, got {bits}")
    return DEFAULT_MULTIPLIERS[bits]


@dataclass(frozen=True)
class AdaptiveQuantizer:
    """Nq-bit midrise quantizer state; operations return new states."""

    bits: int
    step: float
    step_min: float = DEFAULT_STEP_MIN
    step_max: float = DEFAULT_STEP_MAX
    multipliers: tuple = ()

    def __post_init__(self):
        if not 2 <= self.bits <= 5:
            raise ValueError(f"bits must be in 2..5, got {self.bits}")
        if not self.multipliers:
            object.__setattr__(self, "multipliers", default_multipliers(self.bits))
        object.__setattr__(self, "multipliers", tuple(self.multipliers))
        if len(self.multipliers) != 2 ** (self.bits - 1):
            raise ValueError(
                f"need {2 ** (self.bits - 1)} multipliers for {self.bits} bits, "
                f"got {len(self.multipliers)}"
            )
        if any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be positive")
        if not self.step_min <= self.step <= self.step_max:
            raise ValueError(
                f"step {self.step} outside [{self.step_min}, {self.step_max}]"
            )

    @property
    def code_min(self) -> int:
        return -(2 ** (self.bits - 1))

    @property
    def code_max(self) -> int:
        return 2 ** (self.bits - 1) - 1

    def quantize(self, e: float) -> int:
        """Midrise code for residual e: floor(e/step) clamped to the code range.

        A value exactly on a cell boundary goes to the upper cell (floor
        convention), which keeps tie-breaking deterministic.
        """
        level = math.floor(e / self.step)
        if level < self.code_min:
            return self.code_min
        if level > self.code_max:
            return self.code_max
        return level

    def dequantize(self, code: int) -> float:
        """Cell midpoint (code + 0.5) * step."""
        if not self.code_min <= code <= self.code_max:
            raise ValueError(f"code {code} outside [{self.code_min}, {self.code_max}]")
        return (code + 0.5) * self.step

    def magnitude_rank(self, code: int) -> int:
        """Multiplier index: 0 for the innermost cells up to 2^(bits-1)-1."""
        return code if code >= 0 else -code - 1

    def adapt(self, code: int) -> "AdaptiveQuantizer":
        """Next state with the step multiplied and clamped; all else unchanged."""
        step = self.step * self.multipliers[self.magnitude_rank(code)]
        step = min(max(step, self.step_min), self.step_max)
        return replace(self, step=step)
