from enum import Enum
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Lane(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"


class QuantizedVector(BaseModel):
    """Signed integer operand with its real-valued scale"""

    model_config = ConfigDict(frozen=True)

    values: List[int] = Field(min_length=1)
    bits: int = Field(ge=1, le=8)
    scale: float = 1.0

    @model_validator(mode="after")
    def _check_range(self) -> "QuantizedVector":
        limit = 2 ** self.bits - 1
        bad = [v for v in self.values if abs(v) > limit]
        if bad:
            raise ValueError(f"values {bad[:5]} exceed ±{limit} for {self.bits} bits")
        return self

    def __len__(self) -> int:
        return len(self.values)


class OpticalSymbol(BaseModel):
    model_config = ConfigDict(frozen=True)

    power: float = Field(ge=0)
    lane: Lane


class AccumulatorState(BaseModel):
    """Charge integrated on the receiver capacitor"""

    charge: float = 0.0
    cycles_elapsed: int = Field(0, ge=0)
    capacity: float = Field(gt=0)


class TraceRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    cycle: int
    positive_sum: float
    negative_sum: float
    bpd_current: float
    charge: float


class DotProductResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    value: int
    analog: float
    expected: int
    required_adc_bits: int
    adc_bits: int
    cycles: int
    trace: List[TraceRow] = Field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.value == self.expected
