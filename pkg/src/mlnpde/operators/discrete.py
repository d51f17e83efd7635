"""
Discrete p-Laplacian, fractional p-Laplacian, norms and the nonlocal form.

Every operator returned here is volume weighted: it is the gradient of the
discrete energy (1/p)(‖∇u‖_p^p + ε[u]_{s,p}^p), so ``dot(apply(u), v)`` is
the discrete weak form tested against v.

The array-level functions (``*_action``, ``*_power_sum``) work on raw
interior value vectors and are what the solvers call in their inner loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from mlnpde.errors import GridMismatchError, ParameterError
from mlnpde.lattice.grid import Field, Grid
from mlnpde.lattice.params import ModelParams
from mlnpde.operators.kernel import KernelMatrix

LOCAL = 'local'
NONLOCAL = 'nonlocal'
MIXED = 'mixed'
MODES = (LOCAL, NONLOCAL, MIXED)

ROW_BLOCK = 512


def phi(t: np.ndarray, p: float) -> np.ndarray:
    """|t|^{p-2} t, zero at t = 0 for every p > 1."""
    if p == 2:
        return t
    return np.sign(t) * np.abs(t) ** (p - 1)


@dataclass(frozen=True)
class NormSet:
    grad_p: float
    gagliardo: float
    rho_eps: float


def local_action(values: np.ndarray, grid: Grid, p: float,
                 axis_weights: Optional[np.ndarray] = None) -> np.ndarray:
    n = values.size
    out = np.zeros(n)
    vol = grid.cell_volume
    for faces in grid.faces:
        h = faces.spacing
        c = vol / h if axis_weights is None else axis_weights[faces.axis] * vol / h
        if not c:
            continue
        grad = (values[faces.inner_right] - values[faces.inner_left]) / h
        flux = phi(grad, p) * c
        out += np.bincount(faces.inner_right, flux, minlength=n)
        out -= np.bincount(faces.inner_left, flux, minlength=n)
        edge_grad = -values[faces.edge_node] / faces.edge_distance
        out -= np.bincount(faces.edge_node, phi(edge_grad, p) * c, minlength=n)
    return out


def local_power_sum(values: np.ndarray, grid: Grid, p: float,
                    axis_weights: Optional[np.ndarray] = None) -> float:
    """
    ‖∇u‖_p^p as a sum over faces of |δu/d|^p times the dual face volume,
    each axis scaled by ``axis_weights`` when given.
    """
    vol = grid.cell_volume
    total = 0.0
    for faces in grid.faces:
        h = faces.spacing
        c = 1.0 if axis_weights is None else float(axis_weights[faces.axis])
        if not c:
            continue
        grad = (values[faces.inner_right] - values[faces.inner_left]) / h
        total += c * vol * float(np.sum(np.abs(grad) ** p))
        edge = values[faces.edge_node] / faces.edge_distance
        total += c * vol / h * float(np.sum(np.abs(edge) ** p * faces.edge_distance))
    return total


def nonlocal_action(values: np.ndarray, kernel: KernelMatrix, p: float) -> np.ndarray:
    tails = kernel.self_weights
    near = local_action(values, kernel.grid, p, kernel.near_field) if kernel.corrected else 0.0
    if p == 2:
        inner = kernel.row_sums * values - kernel.weights @ values
    else:
        inner = np.empty_like(values)
        for start in range(0, values.size, ROW_BLOCK):
            rows = slice(start, start + ROW_BLOCK)
            diff = values[rows, None] - values[None, :]
            inner[rows] = np.sum(kernel.weights[rows] * phi(diff, p), axis=1)
    return kernel.grid.cell_volume * (inner + 2.0 * tails * phi(values, p)) + near


def nonlocal_power_sum(values: np.ndarray, kernel: KernelMatrix, p: float) -> float:
    """[u]_{s,p}^p including the exterior contribution and the near-field terms."""
    vol = kernel.grid.cell_volume
    tails = kernel.self_weights
    near = local_power_sum(values, kernel.grid, p, kernel.near_field) if kernel.corrected else 0.0
    if p == 2:
        pairs = float(kernel.row_sums @ values ** 2 - values @ (kernel.weights @ values))
    else:
        pairs = 0.0
        for start in range(0, values.size, ROW_BLOCK):
            rows = slice(start, start + ROW_BLOCK)
            diff = values[rows, None] - values[None, :]
            pairs += 0.5 * float(np.sum(kernel.weights[rows] * np.abs(diff) ** p))
    return vol * (pairs + 2.0 * float(tails @ np.abs(values) ** p)) + near


def mixed_action(values: np.ndarray, kernel: KernelMatrix, params: ModelParams) -> np.ndarray:
    out = local_action(values, kernel.grid, params.p)
    if params.eps:
        out += params.eps * nonlocal_action(values, kernel, params.p)
    return out


def mixed_power_sum(values: np.ndarray, kernel: KernelMatrix, params: ModelParams) -> float:
    """ρ_ε(u)^p."""
    total = local_power_sum(values, kernel.grid, params.p)
    if params.eps:
        total += params.eps * nonlocal_power_sum(values, kernel, params.p)
    return total


def _checked(u: Field, kernel: KernelMatrix, params: ModelParams) -> np.ndarray:
    if u.grid is not kernel.grid:
        raise GridMismatchError('field and kernel live on different grids')
    if not params.p > 1:
        raise ParameterError(f'p must exceed 1, got {params.p}')
    kernel.check(params)
    return u.values


def apply_operator(u: Field, kernel: KernelMatrix, params: ModelParams, mode: str = MIXED) -> Field:
    values = _checked(u, kernel, params)
    if mode == LOCAL:
        out = local_action(values, kernel.grid, params.p)
    elif mode == NONLOCAL:
        out = nonlocal_action(values, kernel, params.p)
    elif mode == MIXED:
        out = mixed_action(values, kernel, params)
    else:
        raise ParameterError(f'unknown operator mode {mode!r}, expected one of {MODES}')
    return u.with_values(out)


def norms(u: Field, kernel: KernelMatrix, params: ModelParams) -> NormSet:
    values = _checked(u, kernel, params)
    p = params.p
    grad_pp = local_power_sum(values, kernel.grid, p)
    gag_pp = nonlocal_power_sum(values, kernel, p)
    return NormSet(
        grad_p=grad_pp ** (1.0 / p),
        gagliardo=gag_pp ** (1.0 / p),
        rho_eps=(grad_pp + params.eps * gag_pp) ** (1.0 / p),
    )


def form_A(u: Field, v: Field, kernel: KernelMatrix, params: ModelParams) -> float:
    """
    Nonlocal form 𝒜(u, v) = ∬ |u(x)-u(y)|^{p-2}(u(x)-u(y))(v(x)-v(y)) K(x-y)
    with v ≡ 0 outside Ω, evaluated as the discrete double sum plus the
    near-field terms of the kernel.
    """
    uv = _checked(u, kernel, params)
    vv = _checked(v, kernel, params)
    p = params.p
    pairs = 0.0
    for start in range(0, uv.size, ROW_BLOCK):
        rows = slice(start, start + ROW_BLOCK)
        du = uv[rows, None] - uv[None, :]
        dv = vv[rows, None] - vv[None, :]
        pairs += 0.5 * float(np.sum(kernel.weights[rows] * phi(du, p) * dv))
    exterior = 2.0 * float(np.sum(kernel.self_weights * phi(uv, p) * vv))
    near = float(local_action(uv, kernel.grid, p, kernel.near_field) @ vv) if kernel.corrected else 0.0
    return kernel.grid.cell_volume * (pairs + exterior) + near


def laplacian_matrix(grid: Grid, axis_weights: Optional[np.ndarray] = None) -> sparse.csr_matrix:
    """The local operator at p = 2 as a sparse symmetric M-matrix."""
    n = grid.n_interior
    rows, cols, vals = [], [], []
    for faces in grid.faces:
        scale = 1.0 if axis_weights is None else float(axis_weights[faces.axis])
        vol = scale * grid.cell_volume
        c = vol / faces.spacing ** 2
        left, right = faces.inner_left, faces.inner_right
        rows += [left, right, left, right]
        cols += [left, right, right, left]
        vals += [np.full(left.size, c)] * 2 + [np.full(left.size, -c)] * 2
        rows.append(faces.edge_node)
        cols.append(faces.edge_node)
        vals.append(vol / (faces.spacing * faces.edge_distance))
    matrix = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n))
    return matrix.tocsr()


def linearized_matrix(kernel: KernelMatrix, eps: float) -> np.ndarray:
    """Dense p = 2 mixed operator: local Laplacian plus ε times the nonlocal one."""
    matrix = laplacian_matrix(kernel.grid).toarray()
    if eps:
        vol = kernel.grid.cell_volume
        nonlocal_part = -kernel.weights * vol
        nonlocal_part[np.diag_indices_from(nonlocal_part)] += vol * (
            kernel.row_sums + 2.0 * kernel.self_weights)
        if kernel.corrected:
            nonlocal_part += laplacian_matrix(kernel.grid, kernel.near_field).toarray()
        matrix += eps * nonlocal_part
    return matrix
