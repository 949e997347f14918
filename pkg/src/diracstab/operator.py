"""Assembly of the dense transverse-stability matrices.

Two equivalent forms of the linearized problem are built on the mapped
Chebyshev grid: the original four-component first-order system, and the
block form that decouples into two 2x2 Dirac-type operators coupled only
through the transverse term.  Both are reduced to a standard eigenvalue
problem for lambda by left-multiplying with the constant involution that
carries the symplectic structure (its square is the identity), so the
stored matrix has the stability eigenvalues as ordinary eigenvalues.

Component layout: all grid samples of component 0 first, then component 1,
etc., so each differentiation block is contiguous.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .cheb import ChebGrid
from .soliton import ModelKind, SolitonProfile, eval_profile

# Pauli matrices entering the algebraic symmetry identities.
PAULI_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])
PAULI_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]])

# Involution used to reduce i*lambda*(structure)*V = H V to a standard
# eigenproblem; squares to the identity exactly.
REDUCTION_BLOCK = np.array([
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, -1.0, 0.0, 0.0],
])

# Structure matrix of the four-component form (diagonal signature).
SIGMA_DIAG = np.diag([1.0, -1.0, 1.0, -1.0])

# Orthogonal change of variables relating the two forms, stored
# unnormalized with integer entries: S = BLOCK_MIXING / sqrt(2) satisfies
# S S^t = I, and S (full form) S^t = (block form).  Keeping the integer
# matrix lets tests verify M M^t = 2 I exactly.
BLOCK_MIXING = np.array([
    [1.0, 0.0, 0.0, 1.0],
    [0.0, 1.0, 1.0, 0.0],
    [1.0, 0.0, 0.0, -1.0],
    [0.0, 1.0, -1.0, 0.0],
])


class OperatorForm(enum.Enum):
    """Which algebraic form of the linearization is assembled."""

    FULL_SYSTEM = "full"
    BLOCK_DIAGONALIZED = "block"


@dataclass(frozen=True)
class SpectralBands:
    """Continuous-spectrum bands: four half-lines on the imaginary axis.

    band_edges holds (edge, direction) pairs; the half-line is the set of
    points i*s with direction*(s - edge) >= 0.  gap_closed is true when
    the two innermost edges meet or cross at the origin.
    """

    model: ModelKind
    omega: float
    p: float
    band_edges: tuple
    gap_closed: bool

    @property
    def gap_width(self) -> float:
        """Length of the open interval between the innermost edges (0 if closed)."""
        inner = min(edge for edge, direction in self.band_edges if direction > 0)
        return max(0.0, 2.0 * inner)

    def distance(self, values) -> np.ndarray:
        """Distance from each complex value to the union of the four bands."""
        lam = np.atleast_1d(np.asarray(values, dtype=complex))
        dists = []
        for edge, direction in self.band_edges:
            on_ray = direction * (lam.imag - edge) >= 0.0
            d = np.where(on_ray, np.abs(lam.real), np.abs(lam - 1j * edge))
            dists.append(d)
        return np.min(dists, axis=0)


@dataclass(frozen=True)
class StabilityOperator:
    """Assembled dense stability matrix and the parameters that built it.

    matrix_a is 4(N+1) x 4(N+1) and already includes the reduction factor,
    so its eigenvalues are the stability eigenvalues directly.
    """

    model: ModelKind
    omega: float
    p: float
    grid: ChebGrid
    matrix_a: np.ndarray
    form: OperatorForm
    potential_zeroed: bool = False

    @property
    def dim(self) -> int:
        return self.matrix_a.shape[0]


def _potential_diagonals(model: ModelKind, omega: float, grid: ChebGrid,
                         zero_potential: bool):
    if zero_potential:
        u = np.zeros(grid.n + 1, dtype=complex)
    else:
        profile = SolitonProfile.create(model, omega)
        u = eval_profile(profile, grid.nodes_x)
    d_abs2 = np.diag(np.abs(u) ** 2).astype(complex)
    d_sq = np.diag(u ** 2)
    d_csq = np.diag(np.conj(u) ** 2)
    return d_abs2, d_sq, d_csq


def _assemble_block(model: ModelKind, omega: float, p: float, grid: ChebGrid,
                    zero_potential: bool) -> np.ndarray:
    m = grid.n + 1
    eye = np.eye(m, dtype=complex)
    zero = np.zeros((m, m), dtype=complex)
    deriv = -1j * grid.d_scaled.astype(complex)
    d_abs2, d_sq, d_csq = _potential_diagonals(model, omega, grid, zero_potential)
    diag_omega = omega * eye
    if model is ModelKind.MASSIVE_THIRRING:
        h = np.block([
            [diag_omega + deriv + 2.0 * d_abs2, -eye + d_sq, zero, zero],
            [-eye + d_csq, diag_omega - deriv + 2.0 * d_abs2, zero, zero],
            [zero, zero, diag_omega + deriv, eye - d_sq],
            [zero, zero, eye - d_csq, diag_omega - deriv],
        ])
        e_term = (p ** 2) * np.eye(4 * m, dtype=complex)
    else:
        h = np.block([
            [diag_omega + deriv + 2.0 * d_abs2, -eye + d_sq + 3.0 * d_csq, zero, zero],
            [-eye + d_csq + 3.0 * d_sq, diag_omega - deriv + 2.0 * d_abs2, zero, zero],
            [zero, zero, diag_omega + deriv, eye - d_sq - d_csq],
            [zero, zero, eye - d_sq - d_csq, diag_omega - deriv],
        ])
        e_term = 1j * p * np.block([
            [zero, zero, zero, eye],
            [zero, zero, eye, zero],
            [zero, -eye, zero, zero],
            [-eye, zero, zero, zero],
        ])
    front = np.kron(REDUCTION_BLOCK, np.eye(m))
    return -1j * front.astype(complex) @ (h + e_term)


def _assemble_full(model: ModelKind, omega: float, p: float, grid: ChebGrid,
                   zero_potential: bool) -> np.ndarray:
    m = grid.n + 1
    eye = np.eye(m, dtype=complex)
    zero = np.zeros((m, m), dtype=complex)
    deriv = -1j * grid.d_scaled.astype(complex)
    d_abs2, d_sq, d_csq = _potential_diagonals(model, omega, grid, zero_potential)
    diag_omega = omega * eye
    d_part = np.block([
        [deriv + diag_omega, zero, -eye, zero],
        [zero, -deriv + diag_omega, zero, -eye],
        [-eye, zero, -deriv + diag_omega, zero],
        [zero, -eye, zero, deriv + diag_omega],
    ])
    if model is ModelKind.MASSIVE_THIRRING:
        e_term = (p ** 2) * np.eye(4 * m, dtype=complex)
        w_part = np.block([
            [d_abs2, zero, d_sq, d_abs2],
            [zero, d_abs2, d_abs2, d_csq],
            [d_csq, d_abs2, d_abs2, zero],
            [d_abs2, d_sq, zero, d_abs2],
        ])
    else:
        e_term = -1j * p * np.block([
            [zero, zero, eye, zero],
            [zero, zero, zero, eye],
            [-eye, zero, zero, zero],
            [zero, -eye, zero, zero],
        ])
        w_part = np.block([
            [d_abs2, d_csq, d_sq + 2.0 * d_csq, d_abs2],
            [d_sq, d_abs2, d_abs2, 2.0 * d_sq + d_csq],
            [2.0 * d_sq + d_csq, d_abs2, d_abs2, d_sq],
            [d_abs2, d_sq + 2.0 * d_csq, d_csq, d_abs2],
        ])
    front = np.kron(SIGMA_DIAG, np.eye(m))
    return -1j * front.astype(complex) @ (d_part + e_term + w_part)


def assemble(model, omega: float, p: float, grid: ChebGrid,
             form: OperatorForm = OperatorForm.BLOCK_DIAGONALIZED,
             zero_potential: bool = False) -> StabilityOperator:
    """Build the dense stability matrix at transverse wavenumber p.

    zero_potential is a test hook that drops the soliton terms, leaving
    the constant-coefficient operator whose spectrum is purely the
    continuous bands.
    """
    model = ModelKind(model)
    if not isinstance(grid, ChebGrid):
        raise ValueError("grid must be a ChebGrid instance")
    form = OperatorForm(form)
    # omega admissibility is enforced by profile construction; the zero
    # potential hook still validates it for consistent error behavior
    SolitonProfile.create(model, omega)
    p = float(p)
    if form is OperatorForm.BLOCK_DIAGONALIZED:
        a = _assemble_block(model, omega, p, grid, zero_potential)
    else:
        a = _assemble_full(model, omega, p, grid, zero_potential)
    a.setflags(write=False)
    return StabilityOperator(model=model, omega=float(omega), p=p, grid=grid,
                             matrix_a=a, form=form,
                             potential_zeroed=bool(zero_potential))


def continuous_bands(model, omega: float, p: float) -> SpectralBands:
    """Band edges of the continuous spectrum at transverse wavenumber p."""
    model = ModelKind(model)
    SolitonProfile.create(model, omega)
    p = float(p)
    if model is ModelKind.MASSIVE_THIRRING:
        outer = 1.0 + omega + p ** 2
        inner = 1.0 - omega - p ** 2
        closed = inner <= 0.0
    else:
        root = float(np.hypot(1.0, p))
        outer = root + omega
        inner = root - omega
        closed = False
    edges = ((outer, 1), (-outer, -1), (inner, 1), (-inner, -1))
    return SpectralBands(model=model, omega=float(omega), p=p,
                         band_edges=edges, gap_closed=bool(closed))


def symmetry_residual(eigs, model) -> float:
    """Mismatch between the eigenvalue multiset and its symmetry reflections.

    Real-axis and imaginary-axis reflections apply to the first model;
    only the imaginary-axis reflection is guaranteed for the second.
    Returns the largest distance from any reflected eigenvalue to the
    nearest computed one.
    """
    model = ModelKind(model)
    values = np.asarray(getattr(eigs, "values", eigs), dtype=complex).ravel()
    if values.size == 0:
        raise ValueError("empty eigenvalue set")
    if model is ModelKind.MASSIVE_THIRRING:
        maps = (np.conj(values), -values, -np.conj(values))
    else:
        maps = (-np.conj(values),)
    worst = 0.0
    for reflected in maps:
        gaps = np.abs(reflected[:, None] - values[None, :]).min(axis=1)
        worst = max(worst, float(gaps.max()))
    return worst


def hermiticity_defect(op: StabilityOperator) -> float:
    """Deviation of the recovered operator from its predicted Hermitian defect.

    Undoing the reduction factor recovers the underlying operator; its
    anti-Hermitian part is exactly the derivative-block contribution
    (the scaled differentiation matrix is not antisymmetric).  Returns the
    largest interior-entry deviation from that prediction; boundary rows
    and columns are excluded per the assembly convention.
    """
    m = op.grid.n + 1
    if op.form is OperatorForm.BLOCK_DIAGONALIZED:
        front = REDUCTION_BLOCK
        factors = (-1j, 1j, -1j, 1j)
    else:
        front = SIGMA_DIAG
        factors = (-1j, 1j, 1j, -1j)
    h_total = 1j * np.kron(front, np.eye(m)).astype(complex) @ op.matrix_a
    delta = h_total - h_total.conj().T
    dt = op.grid.d_scaled
    sym = dt + dt.T
    predicted = np.zeros_like(delta)
    for c, f in enumerate(factors):
        predicted[c * m:(c + 1) * m, c * m:(c + 1) * m] = f * sym
    resid = np.abs(delta - predicted)
    boundary = [c * m for c in range(4)] + [c * m + op.grid.n for c in range(4)]
    resid[boundary, :] = 0.0
    resid[:, boundary] = 0.0
    return float(resid.max())


def dump_matrix(op: StabilityOperator, path) -> None:
    """Write the nonzero entries as CSV rows `row, col, re, im`."""
    a = op.matrix_a
    rows, cols = np.nonzero(a)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# model={op.model.value} omega={op.omega!r} p={op.p!r} "
                 f"n={op.grid.n} scale={op.grid.scale!r} form={op.form.value}\n")
        fh.write("row,col,re,im\n")
        for r, c in zip(rows, cols):
            v = a[r, c]
            fh.write(f"{r},{c},{float(v.real)!r},{float(v.imag)!r}\n")
