"""Serialization of models, spectra and sweep records (CSV / JSON)."""
from __future__ import annotations

import dataclasses
import io
import json
import math

import numpy as np

from . import __version__
from .dispersion import CouplingSpec, DesignWavelengths, SyntheticDispersion, TabulatedDispersion
from .profile import Cosine, Linear, Piecewise, Uniform
from .propagation import PropagationSettings

SIG_DIGITS = 12


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.{SIG_DIGITS}g}"
    return str(x)


def round_floats(obj):
    """Recursively round floats to 12 significant digits (for JSON output)."""
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{SIG_DIGITS}g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def describe(obj) -> dict:
    """JSON-ready description of a model, profile or settings object."""
    if isinstance(obj, SyntheticDispersion):
        d = dataclasses.asdict(obj)
        return {"type": "synthetic", **d}
    if isinstance(obj, TabulatedDispersion):
        return {
            "type": "tabulated",
            "w_um": obj.widths.tolist(),
            "n1": obj.n1.tolist(),
            "n2": obj.n2.tolist(),
            "n3": obj.n3.tolist(),
            "design": dataclasses.asdict(obj.design),
            "coupling": dataclasses.asdict(obj.coupling),
        }
    if isinstance(obj, (Uniform, Linear, Cosine)):
        return {"type": type(obj).__name__.lower(), **dataclasses.asdict(obj)}
    if isinstance(obj, Piecewise):
        return {"type": "piecewise", **obj.to_dict()}
    if isinstance(obj, PropagationSettings):
        return dataclasses.asdict(obj)
    raise TypeError(f"cannot describe {type(obj).__name__}")


def csv_text(header: list[str], rows, metadata: dict | None = None) -> str:
    """Comma-separated text with '#' metadata lines, '\\n' line endings."""
    buf = io.StringIO()
    buf.write(f"# taperconv {__version__}\n")
    if metadata is not None:
        # exact floats so the echoed config reparses identically
        buf.write("# config: " + json.dumps(metadata, sort_keys=True, separators=(",", ":")) + "\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def spectrum_csv(spectrum, config: dict | None = None) -> str:
    return csv_text(["lambda_nm", "eta"], zip(spectrum.lambdas, spectrum.etas), config)


def spectrum_json(spectrum, config: dict | None = None) -> str:
    doc = {
        "version": __version__,
        "config": config,
        "meta": spectrum.meta,
        "lambda_nm": round_floats(spectrum.lambdas.tolist()),
        "eta": round_floats(spectrum.etas.tolist()),
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def model_from_dict(d: dict):
    """Inverse of :func:`describe` for dispersion models."""
    d = dict(d)
    kind = d.pop("type")
    if kind == "synthetic":
        design = DesignWavelengths(**d.pop("design"))
        return SyntheticDispersion(design=design, **d)
    if kind == "tabulated":
        return TabulatedDispersion(
            np.array(d["w_um"]),
            np.array(d["n1"]),
            np.array(d["n2"]),
            np.array(d["n3"]),
            design=DesignWavelengths(**d["design"]),
            coupling=CouplingSpec(**d["coupling"]),
        )
    raise ValueError(f"unknown dispersion type {kind!r}")


def profile_from_dict(d: dict):
    d = dict(d)
    kind = d.pop("type")
    if kind == "piecewise":
        return Piecewise(np.array(d["z"]), np.array(d["w"]))
    cls = {"uniform": Uniform, "linear": Linear, "cosine": Cosine}.get(kind)
    if cls is None:
        raise ValueError(f"unknown profile type {kind!r}")
    return cls(**d)
