"""ASCII run artifacts: versioned CSV tensors, plot tables and JSON reports."""

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from dualflow.config import CSV_SCHEMA_VERSION
from dualflow.errors import StructuralError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def _components(values: np.ndarray, labels=None):
    trailing = values.shape[2:]
    if len(trailing) == 1:
        names = list(labels) if labels else [str(i) for i in range(trailing[0])]
        return names, values
    if len(trailing) == 2:
        N = trailing[0]
        names = [f"{i}{j}" for i in range(N) for j in range(N)]
        return names, values.reshape(values.shape[:2] + (N * N,))
    if not trailing:
        return ["0"], values[..., None]
    raise StructuralError(f"cannot flatten tensor of shape {values.shape}")


def tensor_frame(t: np.ndarray, x: np.ndarray, values: np.ndarray, labels=None) -> pd.DataFrame:
    """
    Long table t, x, component, value of a field on the nodes.

    Args:
        t: Time nodes, length values.shape[0].
        x: Cell centers, length values.shape[1].
        values: Shape (len(t), len(x)), (len(t), len(x), n) or (len(t), len(x), N, N).
        labels: Component names of state vectors.
    """
    values = np.asarray(values, dtype=float)
    if values.shape[:2] != (len(t), len(x)):
        raise StructuralError(f"tensor {values.shape} does not match {len(t)} nodes x {len(x)} cells")
    names, flat = _components(values, labels)
    tt, xx, cc = np.meshgrid(np.asarray(t, float), np.asarray(x, float), np.arange(len(names)), indexing="ij")
    return pd.DataFrame(
        {
            "t": tt.ravel(),
            "x": xx.ravel(),
            "component": np.asarray(names, dtype=object)[cc.ravel()],
            "value": flat.ravel(),
        }
    )


def write_tensor_csv(path, name: str, t, x, values, labels=None) -> Path:
    """Write a tensor CSV whose first line names the schema version and field."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = tensor_frame(t, x, values, labels)
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write(f"# dualflow-csv schema={CSV_SCHEMA_VERSION} field={name}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("wrote %s (%d rows)", path, len(frame))
    return path


def read_tensor_csv(path) -> tuple:
    """
    Read a tensor CSV.

    Returns:
        Tuple (field name, DataFrame).

    Raises:
        StructuralError: If the header line is missing or has another schema.
    """
    with open(path, encoding="ascii") as handle:
        header = handle.readline().strip()
        tokens = dict(part.split("=", 1) for part in header.split()[2:] if "=" in part)
        if not header.startswith("# dualflow-csv") or tokens.get("schema") != str(CSV_SCHEMA_VERSION):
            raise StructuralError(f"{path}: not a dualflow CSV of schema {CSV_SCHEMA_VERSION}: {header!r}")
        return tokens.get("field", ""), pd.read_csv(handle)


def write_table(path, frame: pd.DataFrame) -> Path:
    """Plot-ready CSV without the tensor header."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path


def profiles_frame(x: np.ndarray, t: np.ndarray, fields: dict, fractions) -> pd.DataFrame:
    """
    Spatial profiles at the nodes nearest to the given fractions of the horizon.

    Args:
        x: Cell centers.
        t: Time nodes.
        fields: name -> array of shape (len(t), len(x)).
        fractions: Times as fractions of t[-1].
    """
    frames = []
    for fraction in fractions:
        k = int(round(fraction * (len(t) - 1)))
        frame = pd.DataFrame({"t": np.full(len(x), t[k]), "x": x})
        for name, values in fields.items():
            frame[name] = np.asarray(values)[k]
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def _plain(value):
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        # JSON has no inf/nan
        return value if np.isfinite(value) else str(value)
    return value


def write_report(path, report: dict) -> Path:
    """JSON report in insertion order, ASCII only, no timestamps."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_plain(report), indent=2, ensure_ascii=True)
    with open(path, "w", encoding="ascii", newline="\n") as handle:
        handle.write(text + "\n")
    logger.info("report written to %s", path)
    return path
