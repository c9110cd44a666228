"""Dimension-generic linear algebra helpers.

The central object is the (n-1)-fold cross product in R^n: given row
vectors w_1, ..., w_{n-1}, the product W is the unique vector satisfying

    u . W = det([u; w_1; ...; w_{n-1}])   for every u in R^n,

whose components are signed maximal minors of the stacked rows,
W_i = (-1)^(1+i) det(M_i) with M_i the matrix obtained by deleting
column i.  For n = 3 this is the familiar cross product.

Finite-difference derivatives live here too.  They are deliberately
independent of any closed form they are used to cross-check: central
differences with a per-coordinate relative step.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = ["cross", "det", "numeric_jacobian", "numeric_gradient"]


def det(m: Sequence[Sequence[float]] | np.ndarray) -> float:
    """Determinant of a small square matrix.

    Sizes 1-3 are expanded directly; larger matrices go through LU with
    partial pivoting (``numpy.linalg.det``).  No cofactor recursion is
    attempted beyond the closed 3x3 rule.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    if n == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    if n == 3:
        return float(
            a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
            - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
            + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
        )
    return float(np.linalg.det(a))


def cross(*vectors: Sequence[float] | np.ndarray) -> np.ndarray:
    """Cross product of n-1 vectors in R^n (n >= 3).

    Parameters
    ----------
    *vectors
        Exactly n-1 vectors of length n.

    Returns
    -------
    numpy.ndarray
        The vector W with components W_i = (-1)^(1+i) det(M_i), where
        M_i deletes column i from the stacked rows.  W is orthogonal to
        every factor and anticommutes under swapping adjacent factors.
    """
    rows = np.asarray(vectors, dtype=float)
    if rows.ndim != 2:
        raise ValueError("cross expects a sequence of equal-length vectors")
    k, n = rows.shape
    if n < 3:
        raise ValueError(f"cross is defined for ambient dimension >= 3, got {n}")
    if k != n - 1:
        raise ValueError(f"need exactly {n - 1} vectors in R^{n}, got {k}")
    if not np.all(np.isfinite(rows)):
        raise ValueError("cross received non-finite entries")
    if n == 3:
        u, v = rows
        return np.array(
            [
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ]
        )
    out = np.empty(n)
    cols = np.arange(n)
    for i in range(n):
        minor = rows[:, cols != i]
        out[i] = (-1.0) ** i * det(minor)
    return out


def _central_step(
    f: Callable[[np.ndarray], np.ndarray | float],
    p: np.ndarray,
    j: int,
    step: float,
):
    """Evaluate f at p +/- step*e_j, annotating which probe failed."""
    for sign in (+1.0, -1.0):
        q = p.copy()
        q[j] += sign * step
        try:
            yield np.asarray(f(q), dtype=float)
        except Exception as exc:
            raise ValueError(
                f"finite-difference probe failed at coordinate {j} "
                f"({p[j]!r} {'+' if sign > 0 else '-'} {step!r}): {exc}"
            ) from exc


def numeric_jacobian(
    f: Callable[[np.ndarray], Sequence[float]],
    p: Sequence[float] | np.ndarray,
    h: float = 1e-5,
) -> np.ndarray:
    """Jacobian of a vector map by central differences.

    The step in coordinate j is ``h * max(1, |p_j|)``, so h is a relative
    step away from the unit box and an absolute one inside it.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ValueError("numeric_jacobian expects a single point")
    if h <= 0:
        raise ValueError("step h must be positive")
    cols = []
    for j in range(p.size):
        d = h * max(1.0, abs(p[j]))
        plus, minus = _central_step(f, p, j, d)
        cols.append((plus - minus) / (2.0 * d))
    return np.column_stack(cols)


def numeric_gradient(
    g: Callable[[np.ndarray], float],
    p: Sequence[float] | np.ndarray,
    h: float = 1e-5,
) -> np.ndarray:
    """Gradient of a scalar function by the same central-difference rule."""
    p = np.asarray(p, dtype=float)
    out = np.empty(p.size)
    for j in range(p.size):
        d = h * max(1.0, abs(p[j]))
        plus, minus = _central_step(g, p, j, d)
        out[j] = (plus - minus) / (2.0 * d)
    return out
