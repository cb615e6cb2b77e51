import datetime
import json
import os
import tempfile
import typing

from loguru import logger

from config import VERSION
from errors import InvalidParameterError
from models import GridSpec, pair

ENV_PREFIX = "CDLAB_"


@typing.overload
def get_env_var(name: str, required: typing.Literal[True]) -> str: ...


@typing.overload
def get_env_var(name: str, required: typing.Literal[False] = ...) -> str | None: ...


def get_env_var(name: str, required: bool = False) -> str | None:
    """Read the setting ``CDLAB_<name>``; blank values count as unset."""
    value = os.getenv(f"{ENV_PREFIX}{name}", "").strip()
    if value or not required:
        return value or None
    raise InvalidParameterError(f"Required setting {ENV_PREFIX}{name} is not set.")


def atomic_write(path: str, text: str) -> None:
    """Write text to a temporary file next to ``path`` and move it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise
    logger.debug(f"Wrote {path}")


def write_json(path: str, payload: typing.Any) -> None:
    atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def config_header(echo: dict[str, typing.Any]) -> str:
    """One-line ``config: {...}`` record for the comment header of a CSV output."""
    return f"config: {json.dumps(echo, sort_keys=True)}"


def write_meta(path: str) -> None:
    """Sidecar ``<name>.meta.json`` holding what must stay out of reproducible outputs."""
    base, _ = os.path.splitext(path)
    write_json(
        f"{base}.meta.json",
        {
            "output": os.path.basename(path),
            "version": VERSION,
            "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    )


def parse_complex(text: str) -> complex:
    """Parse ``1.6``, ``2i``, ``0.5+0.2j`` or ``[re, im]``."""
    text = text.strip()
    if text.startswith("["):
        re, im = json.loads(text)
        return complex(re, im)
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise ValueError(f"Not a complex number: '{text}'") from None


def parse_grid(text: str) -> GridSpec:
    """Parse ``center,radius,resolution`` where the center may be complex."""
    parts = [part.strip() for part in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"Grid must be 'center,radius,resolution', got '{text}'")
    return GridSpec(
        center=pair(parse_complex(parts[0])),
        radius=float(parts[1]),
        resolution=int(parts[2]),
    )
