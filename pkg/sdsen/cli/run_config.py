"""
Flat ``key=value`` run configuration.

One key per line, UTF-8, ``#`` starts a comment, blank lines are ignored. List values
are comma-separated, ``none`` clears an optional value. Keys are the fields of
ModelConfig and TrainConfig plus ``stages``, ``link``, ``variant``, ``manifest`` and
``log``. A ``variant`` key starts from a named preset; every other key overrides it.
Relative paths resolve against the config file's directory.
"""

import typing
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError
from pydantic.fields import FieldInfo

from ..errors import ConfigurationError
from ..models import ModelConfig, RefineConfig, get_variant
from ..training import TrainConfig

PathLike = Union[str, Path]

_REFINE_KEYS = ("stages", "link")


class RunPaths(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    manifest: Path = Field(
        Path("data/manifest.txt"), description="dataset manifest (train/val splits)"
    )
    log: Optional[Path] = Field(None, description="training log file, default <checkpoint>.log")
    variant: Optional[str] = Field(
        None, description="named ablation preset, e.g. S-DSEN or CNN+C4DA"
    )


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    paths: RunPaths = Field(default_factory=RunPaths)
    refine: RefineConfig = Field(default_factory=RefineConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)


def _sections() -> List[Tuple[str, Type[BaseModel], Dict[str, FieldInfo]]]:
    refine_fields = {k: RefineConfig.model_fields[k] for k in _REFINE_KEYS}
    return [
        ("paths", RunPaths, dict(RunPaths.model_fields)),
        ("refine", RefineConfig, refine_fields),
        ("model", ModelConfig, dict(ModelConfig.model_fields)),
        ("train", TrainConfig, dict(TrainConfig.model_fields)),
    ]


def _key_index() -> Dict[str, Tuple[str, FieldInfo]]:
    index: Dict[str, Tuple[str, FieldInfo]] = {}
    for section, _, fields in _sections():
        for key, info in fields.items():
            index[key] = (section, info)
    return index


def _is_sequence(annotation: Any) -> bool:
    origin = typing.get_origin(annotation)
    if origin is Union:
        args = [arg for arg in typing.get_args(annotation) if arg is not type(None)]
        return any(_is_sequence(arg) for arg in args)
    return origin in (list, tuple, List, Tuple)


def _accepts_none(annotation: Any) -> bool:
    return typing.get_origin(annotation) is Union and type(None) in typing.get_args(annotation)


def _coerce(info: FieldInfo, raw: str) -> Any:
    # "none" is also a valid enum value (augment, link); only optional fields clear
    if raw.lower() == "none" and _accepts_none(info.annotation):
        return None
    if _is_sequence(info.annotation):
        return [item.strip() for item in raw.split(",") if item.strip()]
    return raw


def read_pairs(text: str, source: str = "<config>") -> Dict[str, str]:
    index = _key_index()
    values: Dict[str, str] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigurationError(f"{source}:{number}: expected key=value, got {line!r}")
        if key not in index:
            raise ConfigurationError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigurationError(f"{source}:{number}: duplicate key {key!r}")
        values[key] = value
    return values


def build_run_config(values: Dict[str, str], base_dir: Optional[Path] = None) -> RunConfig:
    index = _key_index()
    sections: Dict[str, Dict[str, Any]] = {"paths": {}, "refine": {}, "model": {}, "train": {}}
    for key, raw in values.items():
        section, info = index[key]
        sections[section][key] = _coerce(info, raw)

    refine = RefineConfig()
    augment = None
    variant = sections["paths"].get("variant")
    if variant:
        preset = get_variant(variant)
        refine, augment = preset.refine, preset.augment
    if augment is not None:
        sections["train"].setdefault("augment", augment)

    try:
        model = ModelConfig(**{**refine.base.model_dump(), **sections["model"]})
        refine_values = {**refine.model_dump(exclude={"base"}), **sections["refine"]}
        refine = RefineConfig(**refine_values, base=model)
        train = TrainConfig(**sections["train"])
        paths = RunPaths(**sections["paths"])
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e

    if train.crop < model.kernel:
        raise ConfigurationError(f"crop {train.crop} is smaller than the kernel {model.kernel}")
    if base_dir is not None:
        update = {"manifest": base_dir / paths.manifest}
        if paths.log is not None:
            update["log"] = base_dir / paths.log
        paths = paths.model_copy(update=update)
    return RunConfig(paths=paths, refine=refine, train=train)


def parse_run_config(
    text: str, source: str = "<config>", base_dir: Optional[Path] = None
) -> RunConfig:
    return build_run_config(read_pairs(text, source), base_dir)


def load_run_config(path: PathLike) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e
    return parse_run_config(text, str(path), path.parent)


def _default_text(info: FieldInfo) -> str:
    if info.default_factory is not None:
        return "(preset)"
    value = info.default
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value).lower() if isinstance(value, bool) else str(value)


def describe_keys() -> str:
    """One line per key with its default, for ``--help``."""
    lines = []
    for section, _, fields in _sections():
        lines.append(f"[{section}]")
        for key, info in fields.items():
            lines.append(f"  {key}={_default_text(info)}  {info.description or ''}".rstrip())
    return "\n".join(lines)
