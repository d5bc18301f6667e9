"""Plain-text curve specification files.

One ``key = value`` pair per line; ``#`` starts a comment.  Either give the
profile by expressions in ``t``::

    name = horosphere_by_hand
    kappa = -1
    x1_expr = 1*t + 1
    x3_expr = 1
    t0 = 0

(optional: ``dx1_expr``, ``dx3_expr``, ``t_end``, ``s_max``) or refer to a
quadrature-defined builtin with ``catalog = NAME`` and ``param.KEY = VALUE``
lines.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np

from .catalog import ENTRIES, catalog
from .errors import CurveFileError, ExprError
from .expr import compile_expr
from .geometry import EndSpec, Kappa, ParamCurve, arc_reparam

DEFAULT_S_MAX = 100.0
_KEYS = {"name", "kappa", "x1_expr", "x3_expr", "dx1_expr", "dx3_expr", "t0", "t_end", "s_max",
         "tol", "catalog"}


def parse_curve_text(text: str) -> Tuple[Dict[str, str], Dict[str, str]]:
    """Split a curve file into (plain keys, catalog params)."""
    keys: Dict[str, str] = {}
    params: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CurveFileError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not value:
            raise CurveFileError(f"line {lineno}: empty value for {key!r}")
        if key.startswith("param."):
            target, key = params, key[len("param."):]
        elif key in _KEYS:
            target = keys
        else:
            raise CurveFileError(f"line {lineno}: unknown key {key!r}")
        if key in target:
            raise CurveFileError(f"line {lineno}: duplicate key {key!r}")
        target[key] = value
    return keys, params


def _number(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise CurveFileError(f"{key} must be a number, got {value!r}") from None


def _param_value(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def numeric_derivative(f, t0: float):
    """Central difference with h = 1e-6 max(1, |t|) and one Richardson step.

    Near the left end of the domain the stencil becomes the one-sided
    second-order formula.
    """
    def d(t):
        t = np.asarray(t, dtype=float)
        h = 1e-6 * np.maximum(1.0, np.abs(t))

        def central(step):
            return (f(t + step) - f(t - step)) / (2 * step)

        def forward(step):
            return (-3 * f(t) + 4 * f(t + step) - f(t + 2 * step)) / (2 * step)

        # both stencils are evaluated everywhere; the central one may step below t0
        with np.errstate(invalid="ignore", divide="ignore"):
            rich_c = (4 * central(h / 2) - central(h)) / 3
            rich_f = (4 * forward(h / 2) - forward(h)) / 3
        return np.where(t - h >= t0, rich_c, rich_f)
    return d


def load_curve(path, kappa: Optional[int] = None, s_max: Optional[float] = None,
               tol: float = 1e-10) -> EndSpec:
    """Read a curve file and build the arc-length parametrized end."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CurveFileError(f"cannot read {path}: {exc.strerror or exc}") from None
    keys, params = parse_curve_text(text)

    file_kappa = Kappa.parse(int(_number(keys["kappa"], "kappa"))) if "kappa" in keys else None
    if kappa is not None:
        kappa = Kappa.parse(kappa)
        if file_kappa is not None and file_kappa != kappa:
            raise CurveFileError(f"--kappa {int(kappa)} conflicts with kappa = {int(file_kappa)} in {path}")
    kappa = kappa if kappa is not None else file_kappa
    if s_max is None and "s_max" in keys:
        s_max = _number(keys["s_max"], "s_max")
    if "tol" in keys:
        tol = _number(keys["tol"], "tol")

    if "catalog" in keys:
        name = keys["catalog"]
        if name not in ENTRIES:
            raise CurveFileError(f"unknown catalog entry {name!r}")
        exprs = {"x1_expr", "x3_expr", "dx1_expr", "dx3_expr"} & set(keys)
        if exprs:
            raise CurveFileError(f"catalog curves take no expressions (found {', '.join(sorted(exprs))})")
        end = catalog(name, {k: _param_value(v) for k, v in params.items()}, s_max=s_max, tol=tol)
        if kappa is not None and kappa != end.kappa:
            raise CurveFileError(f"catalog entry {name} lives in kappa = {int(end.kappa)}")
        return end

    if params:
        raise CurveFileError("param.* lines need a catalog = NAME line")
    for req in ("x1_expr", "x3_expr"):
        if req not in keys:
            raise CurveFileError(f"missing required key {req!r}")
    if kappa is None:
        raise CurveFileError("kappa is not set in the file; pass it explicitly")
    if ("dx1_expr" in keys) != ("dx3_expr" in keys):
        raise CurveFileError("give both dx1_expr and dx3_expr or neither")
    try:
        fx1 = compile_expr(keys["x1_expr"])
        fx3 = compile_expr(keys["x3_expr"])
        derivs = None
        if "dx1_expr" in keys:
            derivs = compile_expr(keys["dx1_expr"]), compile_expr(keys["dx3_expr"])
    except ExprError as exc:
        raise CurveFileError(f"{path}: {exc}") from exc

    t0 = _number(keys.get("t0", "0"), "t0")
    t_end = _number(keys["t_end"], "t_end") if "t_end" in keys else math.inf
    if not t_end > t0:
        raise CurveFileError("t_end must exceed t0")
    name = keys.get("name", Path(path).stem)

    def ev(t):
        return fx1(t), fx3(t)

    if derivs is not None:
        dx1, dx3 = derivs
    else:
        dx1, dx3 = numeric_derivative(fx1, t0), numeric_derivative(fx3, t0)

    def dv(t):
        return dx1(t), dx3(t)

    curve = ParamCurve(ev, dv, t0, t_end, name)
    arc = arc_reparam(curve, kappa, DEFAULT_S_MAX if s_max is None else s_max, tol)
    return EndSpec(arc, kappa, name, None, {})
