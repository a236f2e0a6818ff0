"""Soft-margin linear SVM trained by SMO (Platt 1998 style, linear kernel).

The sweep kernel lives in a backend module: ``_smo_cy`` (Cython) when the
compiled extension is available, ``_smo_py`` otherwise.  Both produce
bit-identical models; ``ATTRFORGE_BACKEND=pure|compiled`` forces the
choice, ``auto`` (default) prefers compiled.

Training runs the sweeps at half the configured KKT tolerance, then
recomputes the bias as the mean over free support vectors.  The half
tolerance guarantees the bias shift cannot push any example past the
reported tolerance, so ``check_kkt`` at ``params.tol`` is clean on every
converged problem.
"""

from __future__ import annotations

import os
from array import array
from dataclasses import dataclass, field

from .features import SparseVector

_choice = os.environ.get("ATTRFORGE_BACKEND", "auto")
if _choice == "pure":
    from . import _smo_py as _smo

    BACKEND = "pure"
elif _choice in ("auto", "compiled"):
    try:
        from . import _smo_cy as _smo

        BACKEND = "compiled"
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _smo_py as _smo

        BACKEND = "pure"
else:
    raise RuntimeError(f"unknown ATTRFORGE_BACKEND {_choice!r}")


class SvmError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SvmParams:
    c: float = 1.0
    tol: float = 1e-3
    eps: float = 1e-8
    max_passes: int = 50

    def __post_init__(self):
        if self.c <= 0 or self.tol <= 0 or self.eps <= 0:
            raise SvmError("c, tol and eps must be positive")
        if self.max_passes < 1:
            raise SvmError("max_passes must be >= 1")


@dataclass(frozen=True)
class SvmModel:
    weights: tuple[float, ...]
    bias: float
    params: SvmParams = field(default_factory=SvmParams)
    n_support: int = 0
    # retained by train_binary for check_kkt; dropped by serialization
    alphas: tuple[float, ...] | None = None
    converged: bool = True


def _to_csr(xs: list[SparseVector]):
    indptr = array("i", [0])
    indices = array("i")
    data = array("d")
    for x in xs:
        for col, val in x.items():
            indices.append(col)
            data.append(val)
        indptr.append(len(indices))
    return indptr, indices, data


def train_binary(
    xs: list[SparseVector],
    ys: list[int],
    params: SvmParams | None = None,
    n_features: int | None = None,
) -> SvmModel:
    """Solve the dual soft-margin QP for one binary problem.

    ys are +-1; both labels must be present.  Deterministic: identical
    inputs give a bit-identical model.
    """
    params = params or SvmParams()
    if len(xs) != len(ys) or len(xs) < 2:
        raise SvmError("need at least 2 examples with matching labels")
    if any(y not in (1, -1) for y in ys):
        raise SvmError("labels must be +1 or -1")
    if len(set(ys)) < 2:
        raise SvmError("both labels must be present")
    if n_features is None:
        n_features = 1 + max(
            (x.columns[-1] for x in xs if x.columns), default=-1
        )
    if n_features <= 0:
        raise SvmError("empty feature space")
    for x in xs:
        if x.columns and x.columns[-1] >= n_features:
            raise SvmError("feature column out of range")

    indptr, indices, data = _to_csr(xs)
    y_arr = array("d", [float(v) for v in ys])
    # sweeps run at tol/2 so the bias recomputation below stays within tol
    alphas, w, run_b, converged = _smo.solve(
        indptr,
        indices,
        data,
        y_arr,
        n_features,
        params.c,
        params.tol * 0.5,
        params.eps,
        params.max_passes,
    )

    c = params.c
    free_g = []
    lower, upper = None, None
    for i, x in enumerate(xs):
        wx = sum(w[col] * val for col, val in x.items())
        g = ys[i] - wx
        a = alphas[i]
        if 0.0 < a < c:
            free_g.append(g)
        elif (a == 0.0 and ys[i] == 1) or (a == c and ys[i] == -1):
            # b >= y - w.x for these examples
            lower = g if lower is None or g > lower else lower
        else:
            upper = g if upper is None or g < upper else upper
    if free_g:
        bias = sum(free_g) / len(free_g)
    elif lower is not None and upper is not None:
        bias = (lower + upper) / 2.0
    elif lower is not None:
        bias = lower
    elif upper is not None:
        bias = upper
    else:
        bias = run_b

    return SvmModel(
        weights=tuple(w),
        bias=bias,
        params=params,
        n_support=sum(1 for a in alphas if a > 0.0),
        alphas=tuple(alphas),
        converged=converged,
    )


def decision_value(model: SvmModel, x: SparseVector) -> float:
    """w.x + b; sign is the predicted label, magnitude feeds voting."""
    n = len(model.weights)
    s = 0.0
    for col, val in x.items():
        if col >= n:
            raise SvmError(f"column {col} out of range (dim {n})")
        s += model.weights[col] * val
    return s + model.bias


@dataclass(frozen=True, slots=True)
class KktViolation:
    index: int
    alpha: float
    margin: float  # y_i * f(x_i)
    condition: str


def check_kkt(
    model: SvmModel,
    xs: list[SparseVector],
    ys: list[int],
    tol: float | None = None,
) -> list[KktViolation]:
    """Report every example violating the KKT optimality conditions."""
    if model.alphas is None:
        raise SvmError("model does not retain alphas (deserialized?)")
    if tol is None:
        tol = model.params.tol
    c = model.params.c
    out = []
    for i, (x, y) in enumerate(zip(xs, ys)):
        a = model.alphas[i]
        m = y * decision_value(model, x)
        if a == 0.0:
            if m < 1.0 - tol:
                out.append(KktViolation(i, a, m, "alpha=0 needs margin >= 1"))
        elif a == c:
            if m > 1.0 + tol:
                out.append(KktViolation(i, a, m, "alpha=C needs margin <= 1"))
        else:
            if m < 1.0 - tol or m > 1.0 + tol:
                out.append(KktViolation(i, a, m, "free alpha needs margin = 1"))
    return out
