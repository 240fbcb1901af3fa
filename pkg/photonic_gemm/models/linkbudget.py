from typing import List

from pydantic import BaseModel, ConfigDict, Field

from photonic_gemm.models.params import PlatformId


class PrecisionQuery(BaseModel):
    model_config = ConfigDict(frozen=True)

    bits: int = Field(ge=1, le=8)
    dr_sps: float = Field(gt=0)


class ScalabilityResult(BaseModel):
    """Outcome of the tensor-core size search for one platform and query"""

    model_config = ConfigDict(frozen=True)

    n_opt: int
    pd_sensitivity_dbm: float
    p_output_dbm: float
    ef_db: float = Field(ge=0)
    platform_id: PlatformId
    query: PrecisionQuery
    capped: bool = False


class CalibrationTarget(BaseModel):
    model_config = ConfigDict(frozen=True)

    platform_id: PlatformId
    bits: int = Field(ge=1, le=8)
    dr_sps: float = Field(gt=0)
    expected_n: int = Field(ge=1)


class CalibrationResidual(BaseModel):
    model_config = ConfigDict(frozen=True)

    bits: int
    dr_sps: float
    expected_n: int
    n_opt: int
    residual: int


class CalibrationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    platform_id: PlatformId
    d_mrr_cm: float
    total_residual: int
    residuals: List[CalibrationResidual]
    plausible: bool
