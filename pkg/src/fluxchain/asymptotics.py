"""Closed-form ultrastrong-coupling results.

Deep in the coupled regime the chain Hamiltonian minus the atomic term is
diagonal in pseudospin configurations (each atom pinned along sx), and every
configuration drags its modes into coherent states.  The two ferromagnetic
configurations minimize the displacement energy; their product states are the
asymptotic vacua.  This module holds those states, the configuration-energy
minimizer, the analytic splitting formulas and the quadratic-in-N exponent of
the splitting decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .manybody import (
    BasisIndexer,
    ManyBodyError,
    ManyBodySpec,
    Wavefunction,
    collective_rabi_ratios,
    spatial_weights,
)


class CutoffError(ValueError):
    """A mode cutoff is too small to hold its coherent state."""

    def __init__(self, mode: int, cutoff: int, required: int):
        super().__init__(
            f"mode {mode}: cutoff {cutoff} keeps less than the required "
            f"coherent-state mass, need at least {required}"
        )
        self.mode = mode
        self.required = required


def coherent_amplitudes(n_atoms: int, n_modes: int, g: float) -> np.ndarray:
    """Per-mode coherent amplitudes of the + vacuum.

    alpha_k = g sqrt(2) i^k / (k^1.5 sin(pi/2N)) for odd k, exactly zero for
    even k (their spatial weights sum to zero over a uniform configuration).
    """
    if n_atoms < 2:
        raise ManyBodyError("need at least two atoms")
    if not 1 <= n_modes <= n_atoms:
        raise ManyBodyError("need 1 <= n_modes <= n_atoms")
    if g < 0:
        raise ManyBodyError("g must be non-negative")
    s = math.sin(math.pi / (2.0 * n_atoms))
    out = np.zeros(n_modes, dtype=complex)
    for k in range(1, n_modes + 1):
        if k % 2 == 1:
            out[k - 1] = g * math.sqrt(2.0) * (1j**k) / (k**1.5 * s)
    return out


def displaced_amplitudes(spec: ManyBodySpec, signs) -> np.ndarray:
    """Coherent amplitudes i (W_k / w_k) psi_k for a pseudospin configuration.

    ``signs`` is one +-1 per atom.  For the uniform + configuration of a
    ``from_coupling`` spec this reproduces ``coherent_amplitudes`` for every
    mode below the zone boundary.
    """
    mu = np.asarray(signs, dtype=float)
    if mu.shape != (spec.n_atoms,) or np.any(np.abs(mu) != 1.0):
        raise ManyBodyError("signs must be +-1 per atom")
    w = np.array(spec.weights)
    psi = math.sqrt(2.0 / spec.n_atoms) * (w @ mu)
    return 1j * np.array(spec.rabi) / np.array(spec.omega_modes) * psi


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Fock coefficients of |alpha> truncated at n = cutoff (not renormalized).

    The retained squared mass is the Poisson tail sum; callers renormalize.
    """
    n = np.arange(cutoff + 1)
    log_fact = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, cutoff + 1)))))
    if alpha == 0:
        out = np.zeros(cutoff + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -abs(alpha) ** 2 / 2.0 + n * math.log(abs(alpha)) - 0.5 * log_fact
    phase = np.exp(1j * n * np.angle(alpha))
    return np.exp(log_mag) * phase


def _required_cutoff(alpha: complex, min_mass: float) -> int:
    c = 0
    while True:
        mass = float(np.sum(np.abs(coherent_vector(alpha, c)) ** 2))
        if mass >= min_mass:
            return c
        c = max(c + 1, int(1.3 * c))


def asymptotic_vacuum(spec: ManyBodySpec, sign: int = +1,
                      min_mass: float = 0.999) -> Wavefunction:
    """Product-state vacuum: sx-polarized atoms times coherent modes.

    The atoms all point along ``sign`` on the x axis; each mode carries the
    configuration's coherent amplitude, truncated at that mode's cutoff and
    renormalized.  Raises ``CutoffError`` (with the needed cutoff) if any
    truncated mode keeps less than ``min_mass`` of its weight.
    """
    if sign not in (+1, -1):
        raise ManyBodyError("sign must be +1 or -1")
    amps = displaced_amplitudes(spec, [sign] * spec.n_atoms)

    mode_vecs = []
    for m, alpha in enumerate(amps):
        vec = coherent_vector(alpha, spec.cutoffs[m])
        mass = float(np.sum(np.abs(vec) ** 2))
        if mass < min_mass:
            raise CutoffError(m + 1, spec.cutoffs[m], _required_cutoff(alpha, min_mass))
        mode_vecs.append(vec / math.sqrt(mass))

    # spin amplitudes over bit patterns: <bits|prod_j (|1> + sign|0>)/sqrt(2)
    s = np.arange(spec.spin_dim)
    down = np.zeros(spec.spin_dim, dtype=np.int64)
    for j in range(spec.n_atoms):
        down += 1 - ((s >> j) & 1)
    spin = (float(sign) ** down) / math.sqrt(spec.spin_dim)

    full = spin.astype(complex)
    for vec in mode_vecs:  # mode 1 first: it varies fastest above the spins
        full = np.multiply.outer(vec, full).reshape(-1)
    return Wavefunction(BasisIndexer(spec, "full"), full)


@dataclass(frozen=True)
class OverlapResult:
    cosines: tuple[float, float]
    fidelity: float


def subspace_overlap(pair_a, pair_b) -> OverlapResult:
    """Two-dimensional subspace fidelity, basis independent.

    The cosines of the principal angles between span(pair_a) and span(pair_b)
    are the singular values of the overlap matrix between orthonormalized
    pairs; the combined fidelity is their product.  Invariant under any
    unitary remixing within either pair.
    """
    mats = []
    for pair in (pair_a, pair_b):
        cols = np.column_stack([w.data for w in pair])
        q, r = np.linalg.qr(cols)
        if np.min(np.abs(np.diag(r))) < 1e-12 * max(1.0, float(np.abs(r[0, 0]))):
            raise ManyBodyError("rank-deficient state pair")
        mats.append(q)
    sv = np.linalg.svd(mats[0].conj().T @ mats[1], compute_uv=False)
    sv = np.clip(sv, 0.0, 1.0)
    return OverlapResult(cosines=(float(sv[0]), float(sv[1])),
                         fidelity=float(sv[0] * sv[1]))


def configuration_energies(n_atoms: int, n_modes: int, g: float = 1.0,
                           omega_mode: float = 1.0, weights=None,
                           mode_ratios=None):
    """Displacement energy -2 g^2 w_1 mu^T Q mu of every pseudospin configuration.

    Q(j, j') = sum_k f_k(j) [(W_k/W_1)^2 / k] f_k(j').  Returns the array of
    2^N energies and the matching sign matrix (one row per configuration).
    """
    if n_atoms > 20:
        raise ManyBodyError("brute force over 2^N capped at N = 20")
    if weights is None:
        weights = spatial_weights(n_atoms, n_modes)
    w = np.array(weights, dtype=float)
    if mode_ratios is None:
        mode_ratios = collective_rabi_ratios(n_atoms, n_modes)
    r = np.asarray(mode_ratios, dtype=float)
    q = (w * (r**2 / np.arange(1, n_modes + 1))[:, None]).T @ w

    signs = np.array(list(product((1.0, -1.0), repeat=n_atoms)))
    quad = np.einsum("cj,jk,ck->c", signs, q, signs)
    return -2.0 * g * g * omega_mode * quad, signs.astype(int)


def minimize_pseudospin_config(n_atoms: int, n_modes: int, g: float = 1.0,
                               omega_mode: float = 1.0, weights=None,
                               mode_ratios=None, rel_tol: float = 1e-12):
    """All global minimizers of the configuration energy, plus that energy."""
    energies, signs = configuration_energies(
        n_atoms, n_modes, g, omega_mode, weights, mode_ratios
    )
    e_min = float(np.min(energies))
    span = float(np.max(energies) - e_min) or 1.0
    winners = np.flatnonzero(energies <= e_min + rel_tol * span)
    return [tuple(signs[i]) for i in winners], e_min


def analytic_splitting_n2(omega_atom: float, omega_mode: float, g: float) -> float:
    """Closed-form two-atom splitting (w_F^2 / 2 w_1) sqrt(pi/2g^2) e^(-8 g^2).

    Valid asymptotically for strong coupling; singular at g = 0, which is
    rejected.
    """
    if g <= 0:
        raise ManyBodyError("closed form requires g > 0")
    return (
        omega_atom**2 / (2.0 * omega_mode)
        * math.sqrt(math.pi / (2.0 * g * g))
        * math.exp(-8.0 * g * g)
    )


def beta_exponent(n_atoms: int, n_modes: int) -> float:
    """Decay exponent of the splitting: (4/sin^2(pi/2N)) sum_odd k<=N_m k^-3.

    Only displaced (odd) modes contribute an overlap factor, which is what
    makes the two-atom value exactly 8.  The result is asserted to lie inside
    (1.6 N^2, 2.1 N^2); violation means the implementation broke.
    """
    if n_atoms < 2:
        raise ManyBodyError("need at least two atoms")
    if not 1 <= n_modes <= n_atoms:
        raise ManyBodyError("need 1 <= n_modes <= n_atoms")
    s2 = math.sin(math.pi / (2.0 * n_atoms)) ** 2
    total = 4.0 / s2 * sum(1.0 / k**3 for k in range(1, n_modes + 1, 2))
    n2 = float(n_atoms * n_atoms)
    if not 1.6 * n2 < total < 2.1 * n2:
        raise AssertionError(
            f"beta exponent {total} escaped ({1.6 * n2}, {2.1 * n2})"
        )
    return total


def analytic_splitting_general(n_atoms: int, n_modes: int, g: float,
                               omega_atoms, omega_mode: float) -> float:
    """Dominant-order splitting estimate for any N.

    2 w_1 N! prod_j (wF_j / 2 w_1) exp(-beta g^2); keeps only the exponential
    order, so it is linear in every atomic frequency and signed when
    frequencies are (products of atomic frequencies are applied verbatim,
    negative samples included).
    """
    omega_atoms = np.asarray(omega_atoms, dtype=float)
    if omega_atoms.shape != (n_atoms,):
        raise ManyBodyError("omega_atoms must have one entry per atom")
    pref = 2.0 * omega_mode * math.factorial(n_atoms)
    pref *= float(np.prod(omega_atoms / (2.0 * omega_mode)))
    return pref * math.exp(-beta_exponent(n_atoms, n_modes) * g * g)
