"""Single-junction double-well solver on an extended flux grid.

The inductive shunt makes the junction phase an extended variable, so the
Hamiltonian 4 E_CJ N^2 + (E_LJ/2) phi^2 + E_J cos(phi) is discretized on a
uniform grid with hard walls, central second differences for N = -i d/dphi,
and dense tridiagonal diagonalization.  The sweet-spot external flux is
already absorbed into the +cos sign, which places the wells near +-pi when
E_J dominates E_LJ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal


class FluxoniumError(ValueError):
    pass


class GridConvergenceError(RuntimeError):
    """Grid refinement moved the levels by more than the tolerance."""

    def __init__(self, shift: float, tol: float):
        super().__init__(
            f"level shift {shift:.3e} between grid refinements exceeds tol {tol:.3e}"
        )
        self.shift = shift
        self.tol = tol


@dataclass(frozen=True)
class FluxoniumSpec:
    """Junction energies plus the flux-grid layout.

    Energies share one unit system (any fixed angular-frequency unit).  The
    grid spans [-grid_half_width, +grid_half_width] with an odd point count so
    phi = 0 sits on a grid point.
    """

    E_J: float
    E_CJ: float
    E_LJ: float
    grid_half_width: float = 6.0 * np.pi
    grid_points: int = 801

    def __post_init__(self):
        if min(self.E_J, self.E_CJ, self.E_LJ) <= 0.0:
            raise FluxoniumError("E_J, E_CJ, E_LJ must be strictly positive")
        if self.grid_points < 201 or self.grid_points % 2 == 0:
            raise FluxoniumError("grid_points must be odd and at least 201")
        if self.grid_half_width < 4.0 * np.pi:
            raise FluxoniumError("grid_half_width must be at least 4*pi")


@dataclass(frozen=True)
class FluxoniumLevels:
    """Low-lying eigenpairs and the matrix elements the chain model needs.

    ``wavefunctions[i]`` is quadrature-normalized: sum |psi|^2 * dphi = 1.
    ``grid_shift`` is the worst level movement (relative to the level spread)
    when the grid is refined from M to 2M-1 points.
    """

    energies: np.ndarray
    phi01: float
    omega_F: float
    wavefunctions: np.ndarray
    phi_grid: np.ndarray
    grid_shift: float


@dataclass(frozen=True)
class TwoLevelReduction:
    omega_F: float
    phi01: float
    anharmonicity: float
    two_level_ok: bool


def _grid_eigensolve(spec: FluxoniumSpec, n_levels: int):
    phi = np.linspace(-spec.grid_half_width, spec.grid_half_width, spec.grid_points)
    dphi = phi[1] - phi[0]
    kinetic = 4.0 * spec.E_CJ / dphi**2
    diag = 2.0 * kinetic + 0.5 * spec.E_LJ * phi**2 + spec.E_J * np.cos(phi)
    off = np.full(spec.grid_points - 1, -kinetic)
    vals, vecs = eigh_tridiagonal(
        diag, off, select="i", select_range=(0, n_levels - 1)
    )
    return phi, dphi, vals, vecs


def solve_levels(spec: FluxoniumSpec, n_levels: int = 4,
                 convergence_tol: float = 1e-3) -> FluxoniumLevels:
    """Lowest eigenpairs of the double-well Hamiltonian.

    The solve is repeated on a 2M-1 point grid of the same extent; the
    relative level shift is reported in the result and a
    ``GridConvergenceError`` is raised if it exceeds ``convergence_tol``.
    """
    if n_levels < 2:
        raise FluxoniumError("need at least two levels")
    if n_levels >= spec.grid_points:
        raise FluxoniumError("n_levels must be far below grid_points")

    phi, dphi, vals, vecs = _grid_eigensolve(spec, n_levels)

    fine = FluxoniumSpec(
        E_J=spec.E_J, E_CJ=spec.E_CJ, E_LJ=spec.E_LJ,
        grid_half_width=spec.grid_half_width,
        grid_points=2 * spec.grid_points - 1,
    )
    _, _, vals_fine, _ = _grid_eigensolve(fine, n_levels)
    spread = max(vals[-1] - vals[0], abs(vals[-1]), abs(vals[0]))
    shift = float(np.max(np.abs(vals - vals_fine)) / spread)
    if shift > convergence_tol:
        raise GridConvergenceError(shift, convergence_tol)

    # quadrature normalization and a deterministic sign convention
    psis = vecs.T / np.sqrt(dphi)
    for i in range(n_levels):
        m = np.argmax(np.abs(psis[i]))
        if psis[i][m] < 0:
            psis[i] = -psis[i]

    phi01 = float(abs(np.sum(psis[0] * phi * psis[1]) * dphi))
    omega_f = float(vals[1] - vals[0])

    return FluxoniumLevels(
        energies=vals,
        phi01=phi01,
        omega_F=omega_f,
        wavefunctions=psis,
        phi_grid=phi,
        grid_shift=shift,
    )


def two_level_reduction(levels: FluxoniumLevels) -> TwoLevelReduction:
    """Project onto the lowest doublet and judge the truncation.

    The anharmonicity diagnostic is (E2-E1)/(E1-E0); below 2 the third level
    sits too close for a faithful two-level description and the flag is
    cleared.  A harmonic spectrum gives exactly 1.
    """
    if len(levels.energies) < 3:
        raise FluxoniumError("two_level_reduction needs at least three levels")
    e0, e1, e2 = levels.energies[:3]
    anh = float((e2 - e1) / (e1 - e0))
    return TwoLevelReduction(
        omega_F=levels.omega_F,
        phi01=levels.phi01,
        anharmonicity=anh,
        two_level_ok=anh >= 2.0,
    )


def harmonic_reference(e_cj: float, e_lj: float) -> tuple[float, float]:
    """(omega, phi01) of the E_J = 0 oscillator limit, handy for checks."""
    omega = np.sqrt(8.0 * e_cj * e_lj)
    phi01 = 2.0**0.25 * (e_cj / e_lj) ** 0.25
    return float(omega), float(phi01)
