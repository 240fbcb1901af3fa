import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import List, Optional, Sequence, Union

from pydantic import ValidationError

from photonic_gemm.config import settings
from photonic_gemm.exceptions import ArtifactIOError, InvalidParameterError, WorkloadSchemaError
from photonic_gemm.models.workload import (
    GemmOp,
    LayerKind,
    LayerSpec,
    ModelDescription,
    WorkloadSummary,
)

logger = logging.getLogger(__name__)

BUNDLED_MODELS = ("resnet50", "googlenet", "shufflenetv2")


def bundled_models() -> List[str]:
    return list(BUNDLED_MODELS)


def resolve_model_path(path_or_name: Union[str, Path]) -> Path:
    """Bundled model names map into the models directory; anything else is a path"""
    candidate = Path(path_or_name)
    if candidate.suffix.lower() in (".json", ".toml") or candidate.exists():
        return candidate
    for suffix in (".json", ".toml"):
        bundled = Path(settings.models_dir) / f"{path_or_name}{suffix}"
        if bundled.exists():
            return bundled
    raise ArtifactIOError(
        f"Model '{path_or_name}' is neither a file nor a bundled model "
        f"({', '.join(BUNDLED_MODELS)})",
        model=str(path_or_name),
    )


def _line_of(text: str, needle: str) -> Optional[int]:
    for number, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return number
    return None


def _diagnostics(error: ValidationError, raw: dict, text: str) -> List[str]:
    layers = raw.get("layers") if isinstance(raw, dict) else None
    messages = []
    for err in error.errors():
        loc = list(err["loc"])
        where = ".".join(str(p) for p in loc) or "<root>"
        message = err["msg"]
        if loc and loc[-1] == "kind" and "input" in err:
            message += f" (got {err['input']!r})"
        if len(loc) >= 2 and loc[0] == "layers" and isinstance(loc[1], int) and isinstance(layers, list):
            record = layers[loc[1]] if loc[1] < len(layers) else None
            name = record.get("name") if isinstance(record, dict) else None
            line = _line_of(text, f'"{name}"') if name else None
            if name:
                where += f" ({name}"
                where += f", line {line})" if line else ")"
        messages.append(f"{where}: {message}")
    return messages


def load_model_description(path_or_name: Union[str, Path]) -> ModelDescription:
    path = resolve_model_path(path_or_name)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ArtifactIOError(f"Model file not found: {path}", path=str(path))
    except OSError as e:
        logger.error(f"Error reading model {path}: {e}")
        raise ArtifactIOError(f"Cannot read {path}: {e}", path=str(path))

    try:
        if path.suffix.lower() == ".toml":
            raw = tomllib.loads(text)
        else:
            raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise WorkloadSchemaError(
            f"Malformed model file {path}", [f"line {e.lineno}, column {e.colno}: {e.msg}"]
        )
    except tomllib.TOMLDecodeError as e:
        raise WorkloadSchemaError(f"Malformed model file {path}", [str(e)])

    try:
        description = ModelDescription.model_validate(raw)
    except ValidationError as e:
        raise WorkloadSchemaError(f"Invalid model file {path}", _diagnostics(e, raw, text))

    logger.info(f"Loaded model {description.name} ({len(description.layers)} layers) from {path}")
    return description


def load_model(path_or_name: Union[str, Path]) -> List[LayerSpec]:
    """Layers of a model description, in execution order"""
    return list(load_model_description(path_or_name).layers)


def im2col(layer: LayerSpec, group: int = 0) -> GemmOp:
    """GEMM dimensions of one group of a conv or fc layer"""
    if not layer.is_gemm:
        raise InvalidParameterError(
            f"Layer {layer.name} of kind {layer.kind.value} has no GEMM"
        )
    if not 0 <= group < layer.groups:
        raise InvalidParameterError(f"Group {group} outside [0, {layer.groups}) for {layer.name}")

    if layer.kind is LayerKind.FC:
        return GemmOp(
            rows=layer.k,
            inner=layer.c * layer.h * layer.w,
            cols=1,
            source_layer=layer.name,
        )

    p, q = layer.output_hw()
    return GemmOp(
        rows=layer.k // layer.groups,
        inner=(layer.c // layer.groups) * layer.r * layer.s,
        cols=p * q,
        source_layer=layer.name,
        group=group,
    )


def lower_layer(layer: LayerSpec) -> List[GemmOp]:
    if not layer.is_gemm:
        return []
    return [im2col(layer, g) for g in range(layer.groups)]


def lower_model(layers: Sequence[LayerSpec]) -> List[GemmOp]:
    ops: List[GemmOp] = []
    for layer in layers:
        ops.extend(lower_layer(layer))
    return ops


def stack_groups(ops: Sequence[GemmOp]) -> GemmOp:
    """Merge the per-group ops of one layer into a single schedulable op"""
    if not ops:
        raise InvalidParameterError("No ops to stack")
    first = ops[0]
    for op in ops[1:]:
        if (op.source_layer, op.inner, op.cols) != (first.source_layer, first.inner, first.cols):
            raise InvalidParameterError(f"Cannot stack ops of {first.source_layer} and {op.source_layer}")
    return GemmOp(
        rows=sum(op.rows for op in ops),
        inner=first.inner,
        cols=first.cols,
        source_layer=first.source_layer,
    )


def workload_summary(layers: Sequence[LayerSpec], name: str = "") -> WorkloadSummary:
    ops = lower_model(layers)
    return WorkloadSummary(
        model=name,
        macs=sum(op.mac_count for op in ops),
        gemm_count=len(ops),
        max_inner=max((op.inner for op in ops), default=0),
        layer_count=len(layers),
    )
