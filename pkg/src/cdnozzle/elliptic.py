"""Divergence-form elliptic solver on a layer rectangle.

Discretizes  d/dyi ( a_ij d/dyj phi ) = d/dyi f_i  by a finite-volume
9-point stencil (5-point when a12 = 0) on a tensor-product, corner-graded
grid, with Dirichlet data on the left/bottom/top sides and the raw
derivative condition  d(phi)/dy1 (L, y2) = omega(y2)  on the right side,
imposed by second-order ghost elimination.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConsistencyError
from .fd import apply_d1, centered_d1_coeffs, edge_derivative

#: grids larger than this use the preconditioned Krylov path by default
DIRECT_SOLVER_LIMIT = 100_000

#: relative residual bound checked after every linear solve
RESIDUAL_TOL = 1e-11

CORNER_DATA_TOL = 1e-12


def tanh_nodes(n, lo, hi, beta):
    """n nodes on [lo, hi], tanh-clustered toward both ends (beta = 0: uniform)."""
    t = np.linspace(-1.0, 1.0, n)
    if beta == 0.0:
        s = t
    else:
        s = np.tanh(beta * t) / np.tanh(beta)
    x = lo + (hi - lo) * 0.5 * (1.0 + s)
    x[0], x[-1] = lo, hi
    return x


@dataclass(frozen=True)
class LayerGrid:
    """Tensor-product grid on [0, L] x [y2_lo, y2_hi]."""

    y1: np.ndarray
    y2: np.ndarray

    def __post_init__(self):
        for name, arr in (("y1", self.y1), ("y2", self.y2)):
            if np.any(np.diff(arr) <= 0.0):
                raise ConsistencyError(f"grid nodes {name} must be strictly increasing")

    @classmethod
    def make(cls, n1, n2, length, y2_lo, y2_hi, grading=1.5):
        """Corner-graded grid: tanh clustering toward all four edges."""
        return cls(
            y1=tanh_nodes(n1, 0.0, length, grading),
            y2=tanh_nodes(n2, y2_lo, y2_hi, grading),
        )

    @property
    def n1(self):
        return len(self.y1)

    @property
    def n2(self):
        return len(self.y2)

    @property
    def shape(self):
        return (self.n1, self.n2)

    @property
    def h_max(self):
        return max(float(np.max(np.diff(self.y1))), float(np.max(np.diff(self.y2))))


def harmonic_faces(node_values, axis):
    """Harmonic mean of adjacent node values along one axis."""
    v = np.moveaxis(np.asarray(node_values, dtype=float), axis, 0)
    face = 2.0 * v[:-1] * v[1:] / (v[:-1] + v[1:])
    return np.moveaxis(face, 0, axis)


def arithmetic_faces(node_values, axis):
    v = np.moveaxis(np.asarray(node_values, dtype=float), axis, 0)
    face = 0.5 * (v[:-1] + v[1:])
    return np.moveaxis(face, 0, axis)


@dataclass(frozen=True)
class CoefficientField:
    """Face/node storage of the coefficient matrix and the source fluxes."""

    a11_face: np.ndarray    # (n1-1, n2) vertical faces
    a22_face: np.ndarray    # (n1, n2-1) horizontal faces
    a12_node: np.ndarray    # (n1, n2)
    f1_face: np.ndarray     # (n1-1, n2)
    f2_face: np.ndarray     # (n1, n2-1)

    @classmethod
    def from_nodes(cls, grid, a11, a22, a12=None, f1=None, f2=None):
        """Average node-valued coefficients to faces (harmonic for the
        diagonal, arithmetic for the cross term and sources) and run the
        ellipticity check."""
        shape = grid.shape
        a11 = np.broadcast_to(np.asarray(a11, dtype=float), shape)
        a22 = np.broadcast_to(np.asarray(a22, dtype=float), shape)
        a12 = np.zeros(shape) if a12 is None else np.broadcast_to(np.asarray(a12, float), shape)
        f1 = np.zeros(shape) if f1 is None else np.broadcast_to(np.asarray(f1, float), shape)
        f2 = np.zeros(shape) if f2 is None else np.broadcast_to(np.asarray(f2, float), shape)
        det = a11 * a22 - a12**2
        bad = (a11 <= 0.0) | (a22 <= 0.0) | (det <= 0.0)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise ConsistencyError(
                f"non-elliptic coefficient at cell ({i}, {j}): "
                f"a11={a11[i, j]:.6g}, a22={a22[i, j]:.6g}, a12={a12[i, j]:.6g}"
            )
        return cls(
            a11_face=harmonic_faces(a11, axis=0),
            a22_face=harmonic_faces(a22, axis=1),
            a12_node=np.array(a12, dtype=float),
            f1_face=arithmetic_faces(f1, axis=0),
            f2_face=arithmetic_faces(f2, axis=1),
        )


@dataclass(frozen=True)
class MixedBvpSpec:
    """Dirichlet data on left/bottom/top, raw-derivative data on the right."""

    g_left: np.ndarray       # (n2,)
    g_bottom: np.ndarray     # (n1,)
    g_top: np.ndarray        # (n1,)
    neumann_right: np.ndarray  # (n2,)

    def __post_init__(self):
        pairs = (
            ("left/bottom", self.g_left[0], self.g_bottom[0]),
            ("left/top", self.g_left[-1], self.g_top[0]),
        )
        for tag, a, b in pairs:
            if abs(a - b) > CORNER_DATA_TOL:
                raise ConsistencyError(
                    f"incompatible Dirichlet corner data ({tag}): {a!r} vs {b!r}"
                )


@dataclass
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    grid: LayerGrid
    _splu: object = field(default=None, repr=False)


def assemble(grid, coeffs, bvp):
    """Assemble the mixed boundary value problem into a sparse linear system."""
    y1, y2 = grid.y1, grid.y2
    n1, n2 = grid.shape
    h1 = np.diff(y1)
    h2 = np.diff(y2)
    delta1 = np.zeros(n1)
    delta1[1:-1] = 0.5 * (y1[2:] - y1[:-2])
    delta1[-1] = h1[-1]
    delta2 = np.zeros(n2)
    delta2[1:-1] = 0.5 * (y2[2:] - y2[:-2])

    a11f, a22f = coeffs.a11_face, coeffs.a22_face
    a12f1 = arithmetic_faces(coeffs.a12_node, axis=0)   # (n1-1, n2)
    a12f2 = arithmetic_faces(coeffs.a12_node, axis=1)   # (n1, n2-1)
    f1f, f2f = coeffs.f1_face, coeffs.f2_face

    wm2, w02, wp2 = centered_d1_coeffs(y2)   # y2 node-derivative weights
    wm1, w01, wp1 = centered_d1_coeffs(y1)

    C = np.zeros((3, 3, n1, n2))
    rhs = np.zeros((n1, n2))

    # interior block i = 1..n1-2, j = 1..n2-2
    I, J = slice(1, n1 - 1), slice(1, n2 - 1)
    d2 = delta2[J][None, :]
    d1 = delta1[I][:, None]
    e_over_h = a11f[1:, J] / h1[1:, None]
    w_over_h = a11f[:-1, J] / h1[:-1, None]
    C[2, 1][I, J] += -e_over_h * d2
    C[0, 1][I, J] += -w_over_h * d2
    C[1, 1][I, J] += (e_over_h + w_over_h) * d2
    n_over_h = a22f[I, 1:] / h2[None, 1:]
    s_over_h = a22f[I, :-1] / h2[None, :-1]
    C[1, 2][I, J] += -n_over_h * d1
    C[1, 0][I, J] += -s_over_h * d1
    C[1, 1][I, J] += (n_over_h + s_over_h) * d1

    cross_e = a12f1[1:, J]
    cross_w = a12f1[:-1, J]
    for t, w2 in ((-1, wm2), (0, w02), (1, wp2)):
        wt = w2[J][None, :]
        C[2, t + 1][I, J] += -0.5 * d2 * cross_e * wt
        C[0, t + 1][I, J] += +0.5 * d2 * cross_w * wt
        C[1, t + 1][I, J] += -0.5 * d2 * (cross_e - cross_w) * wt
    cross_n = a12f2[I, 1:]
    cross_s = a12f2[I, :-1]
    for s, w1 in ((-1, wm1), (0, w01), (1, wp1)):
        ws = w1[I][:, None]
        C[s + 1, 2][I, J] += -0.5 * d1 * cross_n * ws
        C[s + 1, 0][I, J] += +0.5 * d1 * cross_s * ws
        C[s + 1, 1][I, J] += -0.5 * d1 * (cross_n - cross_s) * ws

    rhs[I, J] = (
        -(f1f[1:, J] - f1f[:-1, J]) * d2
        - (f2f[I, 1:] - f2f[I, :-1]) * d1
    )

    # Right edge i = n1-1: ghost node at L + hg with even-reflected coefficient
    # and source fields; the ghost value phi[N-1] + 2*hg*omega is eliminated.
    # The east/west cross fluxes cancel up to a pure data term A12*hg*omega',
    # and the reflected f1 flux difference vanishes.
    omega = np.asarray(bvp.neumann_right, dtype=float)
    domega = apply_d1(omega, y2)
    hg = h1[-1]
    N = n1 - 1
    jj = np.arange(1, n2 - 1)
    d2j = delta2[jj]
    edge_over_h = a11f[-1, jj] / hg
    C[0, 1][N, J] += -2.0 * edge_over_h * d2j
    C[1, 1][N, J] += 2.0 * edge_over_h * d2j
    n_edge = a22f[N, 1:] / h2[1:]
    s_edge = a22f[N, :-1] / h2[:-1]
    C[1, 2][N, J] += -n_edge * hg
    C[1, 0][N, J] += -s_edge * hg
    C[1, 1][N, J] += (n_edge + s_edge) * hg
    # data: ghost flux, exit cross flux (d(phi)/dy1 = omega on the edge), f2
    x_face = a12f2[N, :] * 0.5 * (omega[:-1] + omega[1:])   # (n2-1,)
    rhs[N, J] = (
        d2j * (a11f[-1, jj] * 2.0 * omega[jj] + a12f1[-1, jj] * hg * domega[jj])
        + hg * (x_face[1:] - x_face[:-1])
        - (f2f[N, 1:] - f2f[N, :-1]) * hg
    )

    rows, cols, vals = [], [], []
    ii_int, jj_int = np.meshgrid(np.arange(1, n1 - 1), np.arange(1, n2 - 1), indexing="ij")
    for s in (-1, 0, 1):
        for t in (-1, 0, 1):
            block = C[s + 1, t + 1][1:-1, 1:-1]
            rows.append((ii_int * n2 + jj_int).ravel())
            cols.append(((ii_int + s) * n2 + (jj_int + t)).ravel())
            vals.append(block.ravel())
    jj_edge = np.arange(1, n2 - 1)
    for s in (-1, 0):
        for t in (-1, 0, 1):
            block = C[s + 1, t + 1][N, 1:-1]
            rows.append(np.full(n2 - 2, N * n2) + jj_edge)
            cols.append((N + s) * n2 + jj_edge + t)
            vals.append(block)

    # Dirichlet rows: left column, bottom and top rows (Dirichlet wins corners)
    dir_idx = []
    dir_val = []
    bottom = np.asarray(bvp.g_bottom, dtype=float)
    top = np.asarray(bvp.g_top, dtype=float)
    left = np.asarray(bvp.g_left, dtype=float)
    all_i = np.arange(n1)
    dir_idx.append(all_i * n2)
    dir_val.append(bottom)
    dir_idx.append(all_i * n2 + (n2 - 1))
    dir_val.append(top)
    inner_j = np.arange(1, n2 - 1)
    dir_idx.append(inner_j)
    dir_val.append(left[1:-1])
    dir_idx = np.concatenate(dir_idx)
    dir_val = np.concatenate(dir_val)
    rows.append(dir_idx)
    cols.append(dir_idx)
    vals.append(np.ones_like(dir_val))
    flat_rhs = rhs.ravel().copy()
    flat_rhs[dir_idx] = dir_val

    n = n1 * n2
    matrix = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    return LinearSystem(matrix=matrix, rhs=flat_rhs, grid=grid)


def solve(system, method="auto"):
    """Solve the assembled system; direct sparse LU below DIRECT_SOLVER_LIMIT
    unknowns, ILU-preconditioned BiCGStab above.  The residual is always
    verified against RESIDUAL_TOL."""
    n = system.matrix.shape[0]
    if method == "auto":
        method = "direct" if n <= DIRECT_SOLVER_LIMIT else "iterative"
    if method == "direct":
        if system._splu is None:
            system._splu = spla.splu(system.matrix.tocsc())
        x = system._splu.solve(system.rhs)
    elif method == "iterative":
        ilu = spla.spilu(system.matrix.tocsc(), drop_tol=1e-6, fill_factor=20)
        precond = spla.LinearOperator(system.matrix.shape, ilu.solve)
        x, info = spla.bicgstab(
            system.matrix, system.rhs, rtol=1e-13, atol=1e-14, maxiter=2000, M=precond
        )
        if info != 0:
            raise ConsistencyError(f"iterative solver did not converge (info={info})")
    else:
        raise ValueError(f"unknown method {method!r}")
    residual = np.max(np.abs(system.matrix @ x - system.rhs))
    bound = RESIDUAL_TOL * (1.0 + np.max(np.abs(system.rhs)))
    if not residual <= bound:
        raise ConsistencyError(
            f"linear solve residual {residual:.3e} exceeds {bound:.3e}"
        )
    return x.reshape(system.grid.shape)


def neumann_trace(phi, grid, side, npoints=3):
    """One-sided boundary derivative samples along the requested side.

    Returns d(phi)/dy2 on 'bottom'/'top' and d(phi)/dy1 on 'left'/'right',
    evaluated at the edge nodes (npoints = 3: second order; 4: third order).
    """
    if side in ("bottom", "top"):
        return edge_derivative(phi, grid.y2, axis=1, side="lo" if side == "bottom" else "hi",
                               npoints=npoints)
    if side in ("left", "right"):
        return edge_derivative(phi, grid.y1, axis=0, side="lo" if side == "left" else "hi",
                               npoints=npoints)
    raise ValueError(f"unknown side {side!r}")
