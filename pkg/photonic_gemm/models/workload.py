from enum import Enum
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator


class LayerKind(str, Enum):
    CONV = "conv"
    FC = "fc"
    POOL = "pool"
    ACTIVATION = "activation"


GEMM_KINDS = (LayerKind.CONV, LayerKind.FC)


class LayerSpec(BaseModel):
    """One CNN layer: input (h, w, c), kernel (r, s, k), stride, padding, groups"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: LayerKind
    name: str = Field(min_length=1)
    h: int = Field(1, ge=1)
    w: int = Field(1, ge=1)
    c: int = Field(ge=1)
    r: int = Field(1, ge=1)
    s: int = Field(1, ge=1)
    k: Optional[int] = Field(None, ge=1)
    stride: int = Field(1, ge=1)
    padding: int = Field(0, ge=0)
    groups: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check_shape(self) -> "LayerSpec":
        if self.kind in GEMM_KINDS and self.k is None:
            raise ValueError(f"{self.kind.value} layer needs k (output channels/features)")
        if self.kind is LayerKind.FC and self.groups != 1:
            raise ValueError("fc layers cannot be grouped")
        if self.c % self.groups or (self.k or self.c) % self.groups:
            raise ValueError(f"channels not divisible by groups={self.groups}")
        if self.h + 2 * self.padding < self.r or self.w + 2 * self.padding < self.s:
            raise ValueError("kernel larger than padded input")
        return self

    @property
    def is_gemm(self) -> bool:
        return self.kind in GEMM_KINDS

    @property
    def out_channels(self) -> int:
        return self.k if self.k is not None else self.c

    def output_hw(self) -> Tuple[int, int]:
        if self.kind is LayerKind.ACTIVATION:
            return self.h, self.w
        if self.kind is LayerKind.FC:
            return 1, 1
        p = (self.h + 2 * self.padding - self.r) // self.stride + 1
        q = (self.w + 2 * self.padding - self.s) // self.stride + 1
        return p, q

    def output_elements(self) -> int:
        p, q = self.output_hw()
        return p * q * self.out_channels


class GemmOp(BaseModel):
    """rows x inner times inner x cols; one per layer group"""

    model_config = ConfigDict(frozen=True)

    rows: int = Field(ge=1)
    inner: int = Field(ge=1)
    cols: int = Field(ge=1)
    source_layer: str
    group: int = Field(0, ge=0)

    @computed_field
    @property
    def mac_count(self) -> int:
        return self.rows * self.inner * self.cols

    @property
    def outputs(self) -> int:
        return self.rows * self.cols


class ModelDescription(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = 1
    name: str
    input: Optional[List[int]] = None
    layers: List[LayerSpec] = Field(min_length=1)


class WorkloadSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    macs: int
    gemm_count: int
    max_inner: int
    layer_count: int
