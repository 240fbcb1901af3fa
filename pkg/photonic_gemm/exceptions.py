"""Error hierarchy shared by the services and the CLI.

Every error carries the process exit code the CLI reports for it, so the
classes partition failures into configuration (2), infeasible physics (3)
and artifact I/O (4).
"""

from typing import Any, Dict, List, Optional


class PhotonicGemmError(Exception):
    """Base class for all toolkit errors"""

    exit_code = 1
    kind = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_report(self) -> Dict[str, Any]:
        report = {
            "error": self.kind,
            "type": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
        }
        report.update(self.details)
        return report


class ConfigurationError(PhotonicGemmError):
    exit_code = 2
    kind = "invalid_config"


class UnknownParameterError(ConfigurationError):
    def __init__(self, keys: List[str], where: str):
        super().__init__(
            f"Unknown parameter(s) {', '.join(sorted(keys))} in {where}",
            keys=sorted(keys),
            where=where,
        )


class InvalidParameterError(ConfigurationError):
    pass


class OutOfRangeError(ConfigurationError, ValueError):
    pass


class MissingAdcRecordError(ConfigurationError):
    def __init__(self, dr_sps: float, available: List[float]):
        super().__init__(
            f"No ADC record for data rate {dr_sps:g} S/s "
            f"(available: {', '.join(f'{r:g}' for r in available)})",
            dr_sps=dr_sps,
            available=available,
        )


class MissingBaselineError(ConfigurationError):
    pass


class WorkloadSchemaError(ConfigurationError):
    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        diagnostics = diagnostics or []
        text = message
        if diagnostics:
            text = f"{message}: " + "; ".join(diagnostics)
        super().__init__(text, diagnostics=diagnostics)
        self.diagnostics = diagnostics


class InfeasibleError(PhotonicGemmError):
    exit_code = 3
    kind = "infeasible"


class PrecisionUnreachableError(InfeasibleError):
    pass


class InfeasibleConfigurationError(InfeasibleError):
    pass


class DeviceCapabilityError(InfeasibleError):
    def __init__(self, message: str, max_feasible_bits: int):
        super().__init__(message, max_feasible_bits=max_feasible_bits)
        self.max_feasible_bits = max_feasible_bits


class AccumulatorSaturationError(InfeasibleError):
    def __init__(self, cycle: int, charge: float, capacity: float):
        super().__init__(
            f"Accumulator saturated at cycle {cycle}: "
            f"|{charge:.6g}| > capacity {capacity:.6g}",
            cycle=cycle,
            charge=charge,
            capacity=capacity,
        )
        self.cycle = cycle


class ArtifactIOError(PhotonicGemmError):
    exit_code = 4
    kind = "io_failure"


class VerificationError(PhotonicGemmError):
    exit_code = 1
    kind = "verification_failed"
