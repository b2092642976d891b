from __future__ import annotations

import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional, Type

from dotenv import load_dotenv  # type: ignore[import]
from pydantic import BaseModel  # type: ignore[import]

from app.models.schemas import RunConfig

logger = logging.getLogger(__name__)


# -----------------------------
# Project Paths
# -----------------------------
ROOT_DIR = Path(__file__).resolve().parents[1]
DATA_DIR = ROOT_DIR / "data"


# -----------------------------
# Process settings (env / .env)
# -----------------------------
def _env(name: str, default: str) -> str:
    load_dotenv()
    return os.getenv(name, default).strip()


def data_dir() -> Path:
    return Path(_env("ED_SIM_DATA_DIR", str(DATA_DIR)))


def log_level() -> str:
    return _env("ED_SIM_LOG_LEVEL", "INFO").upper()


def default_jobs() -> int:
    raw = _env("ED_SIM_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning("ignoring non-integer ED_SIM_JOBS=%r", raw)
        return 1


# -----------------------------
# Run configuration (TOML)
# -----------------------------
def load_run_config(path: Optional[str | Path] = None) -> RunConfig:
    """
    Reads a TOML file into a RunConfig. Missing keys take their defaults;
    unknown keys raise a pydantic ValidationError.
    """
    if path is None:
        return RunConfig()
    path = Path(path)
    with path.open("rb") as f:
        raw = tomllib.load(f)
    logger.info("loaded config %s", path)
    return RunConfig(**raw)


def toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    if isinstance(value, str):
        return '"' + value.replace('"', '\\"') + '"'
    if isinstance(value, list):
        return "[" + ", ".join(toml_value(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{ " + ", ".join(f'{k} = {toml_value(v)}' for k, v in value.items()) + " }"
    if value is None:
        return '""'
    raise TypeError(f"cannot render {type(value).__name__} as TOML")


def _render_section(model: BaseModel, prefix: str, out: List[str]) -> None:
    cls: Type[BaseModel] = type(model)
    scalars: List[str] = []
    nested: Dict[str, BaseModel] = {}
    for name, info in cls.model_fields.items():
        if info.exclude:
            continue
        value = getattr(model, name)
        if isinstance(value, BaseModel):
            nested[name] = value
            continue
        if info.description:
            scalars.append(f"# {info.description}")
        if isinstance(value, list) and value and isinstance(value[0], BaseModel):
            continue
        if value is None:
            scalars.append(f"# {name} = (unset)")
            continue
        scalars.append(f"{name} = {toml_value(value)}")
    if scalars:
        out.append(f"[{prefix}]")
        out.extend(scalars)
        out.append("")
    for name, sub in nested.items():
        _render_section(sub, f"{prefix}.{name}", out)


def render_reference(config: Optional[RunConfig] = None) -> str:
    """Every configurable key with its default, as a commented TOML document."""
    config = config or RunConfig()
    out: List[str] = ["# Configuration reference: every key with its default value.", ""]
    for name in type(config).model_fields:
        _render_section(getattr(config, name), name, out)
    return "\n".join(out)
