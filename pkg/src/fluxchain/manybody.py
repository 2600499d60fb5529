"""Exact diagonalization of the N-spin, multimode spin-boson chain.

Hamiltonian (hbar = 1, one angular-frequency unit throughout):

    H = sum_k w_k a_k^dag a_k
      + sum_j (wF_j / 2) sz_j
      + sum_k sum_j i W_k sqrt(2/N) f_k(j) (a_k - a_k^dag) sx_j

with spatial weights f_k(j) fixed by the standing-wave gradients across the
cells (cosine pattern for odd k, sine for even k, the alternating
zone-boundary pattern at k = N).

Basis packing puts the N spin bits in the low bits of the index and the mode
occupations above them in mixed radix, mode 1 fastest.  The matvec never
materializes H: diagonal terms are a precomputed vector, off-diagonal terms
are generated from spin-bit XOR gathers plus occupation-shifted slice adds.
Parity sectors (product of sz times photon-number parity) are realized by
embedding sector vectors into the full space for the matvec and projecting
back, which keeps cross-sector leakage at exactly zero.

Ground-state splittings are always computed sector by sector; subtracting
two nearly equal full-space eigenvalues cannot reach the 1e-12 level that
the sector route resolves.  Splittings below ``NUMERICAL_FLOOR`` times the
atomic frequency are flagged as floor-limited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .krylov import EigenConvergenceError, lowest_eigenpairs

#: splittings below this (relative to omega_F) are numerically unresolvable
NUMERICAL_FLOOR = 1e-13

#: sector dimension at or below which the dense path is used automatically
DENSE_LIMIT = 4096

#: refuse to build spaces larger than this many basis states
DIMENSION_BUDGET = 6_000_000


class ManyBodyError(ValueError):
    pass


def spatial_weights(n_atoms: int, n_modes: int) -> tuple[tuple[float, ...], ...]:
    """Per-mode, per-site coupling weights f_k(j), k = 1..n_modes, j = 1..N."""
    if not 1 <= n_modes <= n_atoms:
        raise ManyBodyError("need 1 <= n_modes <= n_atoms")
    rows = []
    for k in range(1, n_modes + 1):
        row = []
        for j in range(1, n_atoms + 1):
            if k == n_atoms:
                row.append((-1.0) ** j / math.sqrt(2.0))
            elif k % 2 == 1:
                row.append(math.cos(k * math.pi * (j - (n_atoms + 1) / 2.0) / n_atoms))
            else:
                row.append(math.sin(k * math.pi * (j - (n_atoms + 1) / 2.0) / n_atoms))
        rows.append(tuple(row))
    return tuple(rows)


def collective_rabi_ratios(n_atoms: int, n_modes: int) -> np.ndarray:
    """W_k / W_1 at fixed circuit constants: sin(k pi/2N) / (sin(pi/2N) sqrt(k)).

    The same dispersion ratio is used for the zone-boundary mode k = N.  The
    continuum mode function overweights that mode by sqrt(2) on the N-cell
    lattice; carrying the sqrt(2) into W_N would make every N = 2 pseudospin
    configuration degenerate and no doublet would form, so the lattice
    normalization is used here.
    """
    s1 = math.sin(math.pi / (2.0 * n_atoms))
    return np.array(
        [math.sin(k * math.pi / (2.0 * n_atoms)) / (s1 * math.sqrt(k))
         for k in range(1, n_modes + 1)]
    )


def choose_cutoffs(n_atoms: int, n_modes: int, g: float, safety: float = 4.0,
                   even_floor: int = 4) -> tuple[int, ...]:
    """Per-mode Fock cutoffs sized from the ultrastrong-coupling amplitudes.

    Displaced (odd) modes get ceil(|alpha|^2 + safety |alpha| + safety^2);
    undisplaced modes keep the fixed floor.  Monotone in ``safety``.
    """
    if safety < 1.0:
        raise ManyBodyError("safety must be at least 1")
    from .asymptotics import coherent_amplitudes

    amps = np.abs(coherent_amplitudes(n_atoms, n_modes, g))
    cuts = []
    for a in amps:
        if a == 0.0:
            cuts.append(even_floor)
        else:
            cuts.append(max(even_floor, math.ceil(a * a + safety * a + safety * safety)))
    return tuple(int(c) for c in cuts)


@dataclass(frozen=True)
class ManyBodySpec:
    """Full truncated model: frequencies, couplings, weights and cutoffs.

    ``omega_atoms`` is per site from the outset so disorder costs nothing.
    ``rabi`` holds the collective coupling W_k of every retained mode.
    """

    n_atoms: int
    n_modes: int
    omega_atoms: tuple[float, ...]
    omega_modes: tuple[float, ...]
    rabi: tuple[float, ...]
    cutoffs: tuple[int, ...]
    weights: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if self.n_atoms < 1 or not 1 <= self.n_modes <= self.n_atoms:
            raise ManyBodyError("need n_atoms >= 1 and 1 <= n_modes <= n_atoms")
        if len(self.omega_atoms) != self.n_atoms:
            raise ManyBodyError("omega_atoms length mismatch")
        for name, seq in (("omega_modes", self.omega_modes),
                          ("rabi", self.rabi), ("cutoffs", self.cutoffs)):
            if len(seq) != self.n_modes:
                raise ManyBodyError(f"{name} length mismatch")
        if any(w <= 0 for w in self.omega_modes):
            raise ManyBodyError("mode frequencies must be positive")
        if any(w < 0 for w in self.rabi):
            raise ManyBodyError("rabi couplings must be non-negative")
        if any(c < 1 for c in self.cutoffs):
            raise ManyBodyError("cutoffs must be at least 1")
        if len(self.weights) != self.n_modes or any(
            len(r) != self.n_atoms for r in self.weights
        ):
            raise ManyBodyError("weights must be n_modes rows of n_atoms entries")
        if self.dimension > DIMENSION_BUDGET:
            raise ManyBodyError(
                f"dimension {self.dimension} exceeds budget {DIMENSION_BUDGET}"
            )

    @classmethod
    def from_coupling(cls, n_atoms: int, n_modes: int, g: float, *,
                      omega_mode: float = 1.0,
                      omega_atoms=None,
                      cutoffs=None, safety: float = 4.0,
                      even_floor: int = 4) -> "ManyBodySpec":
        """Build the standard resonant chain from the per-atom coupling g.

        Mode frequencies are k * omega_mode; couplings follow the dispersion
        ratios with W_1 = g sqrt(N) omega_mode; atomic frequencies default to
        resonance with mode 1.
        """
        if g < 0:
            raise ManyBodyError("g must be non-negative")
        if omega_atoms is None:
            omega_atoms = (omega_mode,) * n_atoms
        omega_atoms = tuple(float(w) for w in omega_atoms)
        omegas = tuple(k * omega_mode for k in range(1, n_modes + 1))
        rabi = tuple(
            g * math.sqrt(n_atoms) * omega_mode * r
            for r in collective_rabi_ratios(n_atoms, n_modes)
        )
        if cutoffs is None:
            cutoffs = choose_cutoffs(n_atoms, n_modes, g, safety=safety,
                                     even_floor=even_floor)
        return cls(
            n_atoms=n_atoms, n_modes=n_modes,
            omega_atoms=omega_atoms, omega_modes=omegas, rabi=rabi,
            cutoffs=tuple(int(c) for c in cutoffs),
            weights=spatial_weights(n_atoms, n_modes),
        )

    @property
    def g(self) -> float:
        """Per-atom dimensionless coupling W_1 / (sqrt(N) w_1)."""
        return self.rabi[0] / (math.sqrt(self.n_atoms) * self.omega_modes[0])

    @property
    def spin_dim(self) -> int:
        return 2**self.n_atoms

    @property
    def mode_dims(self) -> tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dimension(self) -> int:
        d = self.spin_dim
        for c in self.cutoffs:
            d *= c + 1
        return d

    def with_cutoffs(self, cutoffs) -> "ManyBodySpec":
        return replace(self, cutoffs=tuple(int(c) for c in cutoffs))

    def with_omega_atoms(self, omega_atoms) -> "ManyBodySpec":
        return replace(self, omega_atoms=tuple(float(w) for w in omega_atoms))


def _spin_parity_signs(n_atoms: int) -> np.ndarray:
    s = np.arange(2**n_atoms, dtype=np.int64)
    pop = np.zeros_like(s)
    for b in range(n_atoms):
        pop += (s >> b) & 1
    return np.where((n_atoms - pop) % 2 == 0, 1, -1).astype(np.int8)


def parity_signs(spec: ManyBodySpec) -> np.ndarray:
    """Eigenvalue of (prod_j sz_j) * (-1)^(total photons) per basis state."""
    signs = _spin_parity_signs(spec.n_atoms)
    bos = np.array([1], dtype=np.int8)
    for dim in reversed(spec.mode_dims):
        bos = np.kron(bos, np.where(np.arange(dim) % 2 == 0, 1, -1).astype(np.int8))
    return np.kron(bos, signs)


class BasisIndexer:
    """Bijection between packed indices and (spin bits, occupations).

    Index layout: bits of atom j in bit j-1, occupation of mode 1 in the
    lowest mixed-radix digit above the spin bits.  A sector restriction keeps
    an explicit sorted index list into the full space.
    """

    def __init__(self, spec: ManyBodySpec, sector: str | None = None):
        if sector not in (None, "full", "even", "odd"):
            raise ManyBodyError("sector must be None, 'full', 'even' or 'odd'")
        self.spec = spec
        self.sector = "full" if sector is None else sector
        self.full_dimension = spec.dimension
        if self.sector == "full":
            self.indices = None
            self.dimension = self.full_dimension
        else:
            signs = parity_signs(spec)
            want = 1 if self.sector == "even" else -1
            self.indices = np.flatnonzero(signs == want)
            self.dimension = int(self.indices.size)

    def index_of(self, bits, occupations) -> int:
        spec = self.spec
        if len(bits) != spec.n_atoms or len(occupations) != spec.n_modes:
            raise ManyBodyError("state shape mismatch")
        s = 0
        for j, b in enumerate(bits):
            if b not in (0, 1):
                raise ManyBodyError("bits must be 0 or 1")
            s |= int(b) << j
        f = 0
        stride = 1
        for n, dim in zip(occupations, spec.mode_dims):
            if not 0 <= n < dim:
                raise ManyBodyError("occupation outside cutoff")
            f += int(n) * stride
            stride *= dim
        full = f * spec.spin_dim + s
        if self.indices is None:
            return full
        pos = int(np.searchsorted(self.indices, full))
        if pos == self.dimension or self.indices[pos] != full:
            raise ManyBodyError("state not in this parity sector")
        return pos

    def state_of(self, index: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if not 0 <= index < self.dimension:
            raise ManyBodyError("index out of range")
        full = int(index if self.indices is None else self.indices[index])
        s = full & (self.spec.spin_dim - 1)
        f = full >> self.spec.n_atoms
        bits = tuple((s >> j) & 1 for j in range(self.spec.n_atoms))
        occ = []
        for dim in self.spec.mode_dims:
            occ.append(f % dim)
            f //= dim
        return bits, tuple(occ)


@dataclass
class Wavefunction:
    """Complex amplitudes over a BasisIndexer."""

    indexer: BasisIndexer
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        if self.data.shape != (self.indexer.dimension,):
            raise ManyBodyError("amplitude array does not match the indexer")
        if not np.all(np.isfinite(self.data)):
            raise ManyBodyError("non-finite amplitudes")

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def normalized(self) -> "Wavefunction":
        n = self.norm
        if n == 0.0:
            raise ManyBodyError("cannot normalize the zero vector")
        return Wavefunction(self.indexer, self.data / n)

    def inner(self, other: "Wavefunction") -> complex:
        if (other.indexer.spec != self.indexer.spec
                or other.indexer.sector != self.indexer.sector):
            raise ManyBodyError("wavefunctions live on different bases")
        return complex(np.vdot(self.data, other.data))


class HamiltonianEngine:
    """Cached arrays for the matrix-free matvec of one spec.

    Works on column-stacked batches: input shape (D,) or (D, b).  Internally
    vectors are viewed as (mode_Nm, ..., mode_1, spin, batch).
    """

    def __init__(self, spec: ManyBodySpec):
        self.spec = spec
        S = spec.spin_dim
        self._shape = tuple(reversed(spec.mode_dims)) + (S,)

        spin_e = np.zeros(S)
        s = np.arange(S)
        for j in range(spec.n_atoms):
            up = ((s >> j) & 1) * 2 - 1
            spin_e += 0.5 * spec.omega_atoms[j] * up
        diag = np.broadcast_to(spin_e, self._shape).astype(float).copy()
        for m, dim in enumerate(spec.mode_dims):
            term = spec.omega_modes[m] * np.arange(dim, dtype=float)
            shape = [1] * (spec.n_modes + 1)
            shape[spec.n_modes - 1 - m] = dim
            diag += term.reshape(shape)
        self.diagonal = np.ascontiguousarray(diag, dtype=float).reshape(-1)

        self._flip = [np.arange(S) ^ (1 << j) for j in range(spec.n_atoms)]
        self._sqrt = [np.sqrt(np.arange(1, dim, dtype=float)) for dim in spec.mode_dims]
        # coupling prefactor of (k, j): W_k sqrt(2/N) f_k(j)
        c = np.array(spec.weights) * (
            np.array(spec.rabi)[:, None] * math.sqrt(2.0 / spec.n_atoms)
        )
        self.couplings = c

    def matvec(self, x: np.ndarray) -> np.ndarray:
        spec = self.spec
        squeeze = x.ndim == 1
        if squeeze:
            x = x[:, None]
        b = x.shape[1]
        v = x.reshape(self._shape + (b,))
        out = self.diagonal[:, None] * x.reshape(-1, b)
        out = out.reshape(self._shape + (b,))

        for j in range(spec.n_atoms):
            if not np.any(self.couplings[:, j]):
                continue
            vf = v[..., self._flip[j], :]
            for m in range(spec.n_modes):
                w = self.couplings[m, j]
                if w == 0.0:
                    continue
                ax = spec.n_modes - 1 - m  # axis of mode m in the view
                sq = self._sqrt[m].reshape(
                    (-1,) + (1,) * (m + 2)  # broadcast over faster modes, spin, batch
                )
                lo = [slice(None)] * (spec.n_modes + 2)
                hi = [slice(None)] * (spec.n_modes + 2)
                lo[ax] = slice(None, -1)
                hi[ax] = slice(1, None)
                # <n| a |n+1> = sqrt(n+1):  out[n] += i w sqrt(n+1) vf[n+1]
                out[tuple(lo)] += (1j * w) * (sq * vf[tuple(hi)])
                # <n+1| -a^dag |n> = -sqrt(n+1):  out[n+1] -= i w sqrt(n+1) vf[n]
                out[tuple(hi)] -= (1j * w) * (sq * vf[tuple(lo)])
        out = out.reshape(-1, b)
        return out[:, 0] if squeeze else out


@lru_cache(maxsize=16)
def _engine(spec: ManyBodySpec) -> HamiltonianEngine:
    return HamiltonianEngine(spec)


def apply_hamiltonian(spec: ManyBodySpec, wf: Wavefunction) -> Wavefunction:
    """H applied to a wavefunction, full space or a parity sector.

    Sector vectors are scattered into the full space, multiplied and gathered
    back; the gather projects any numerical cross-sector leakage to zero.
    """
    eng = _engine(spec)
    idx = wf.indexer
    if idx.spec != spec:
        raise ManyBodyError("wavefunction belongs to a different spec")
    if idx.indices is None:
        return Wavefunction(idx, eng.matvec(wf.data))
    full = np.zeros(idx.full_dimension, dtype=complex)
    full[idx.indices] = wf.data
    return Wavefunction(idx, eng.matvec(full)[idx.indices])


def parity_apply(spec: ManyBodySpec, wf: Wavefunction) -> Wavefunction:
    """Apply the parity operator (prod_j sz_j) (-1)^(total photons)."""
    signs = parity_signs(spec)
    idx = wf.indexer
    if idx.indices is None:
        return Wavefunction(idx, wf.data * signs)
    return Wavefunction(idx, wf.data * signs[idx.indices])


def _sector_matvec(spec: ManyBodySpec, indexer: BasisIndexer):
    eng = _engine(spec)
    if indexer.indices is None:
        return eng.matvec
    idx = indexer.indices
    full_dim = indexer.full_dimension

    def mv(x):
        full = np.zeros(full_dim, dtype=complex)
        full[idx] = x
        return eng.matvec(full)[idx]

    return mv


def dense_matrix(spec: ManyBodySpec, sector: str = "full") -> np.ndarray:
    """Assemble the (sector-restricted) Hamiltonian densely via the matvec."""
    indexer = BasisIndexer(spec, sector)
    if indexer.dimension > DENSE_LIMIT:
        raise ManyBodyError(
            f"dense assembly refused at dimension {indexer.dimension}"
        )
    eng = _engine(spec)
    if indexer.indices is None:
        return eng.matvec(np.eye(indexer.dimension, dtype=complex))
    full = np.zeros((indexer.full_dimension, indexer.dimension), dtype=complex)
    full[indexer.indices, np.arange(indexer.dimension)] = 1.0
    return eng.matvec(full)[indexer.indices, :]


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    iterations: int
    sector: str
    method: str
    vectors: list[Wavefunction] | None = None


def _start_vector(indexer: BasisIndexer) -> np.ndarray:
    # documented deterministic start: uniform amplitude on the sector
    return np.ones(indexer.dimension, dtype=complex)


def _operator_scale(spec: ManyBodySpec) -> float:
    eng = _engine(spec)
    scale = float(np.max(np.abs(eng.diagonal)))
    scale += 2.0 * float(
        np.sum(np.abs(eng.couplings) * np.sqrt(np.array(spec.cutoffs))[:, None])
    )
    return max(scale, 1.0)


def lowest_spectrum(spec: ManyBodySpec, sector: str = "full", m: int = 1,
                    tol: float = 1e-11, method: str = "auto",
                    with_vectors: bool = False,
                    max_matvecs: int = 60000) -> SpectrumResult:
    """m lowest eigenpairs of H restricted to a parity sector.

    ``method='auto'`` uses dense diagonalization whenever the sector
    dimension is at most ``DENSE_LIMIT`` and Lanczos above it.  The full-space
    iterative spectrum is assembled by merging the two sector runs, which
    sidesteps cross-sector quasi-degeneracy entirely.
    """
    if m < 1:
        raise ManyBodyError("m must be at least 1")
    if tol <= 0:
        raise ManyBodyError("tol must be positive")
    indexer = BasisIndexer(spec, sector)
    if m > indexer.dimension:
        raise ManyBodyError("m exceeds the sector dimension")

    use_dense = method == "dense" or (
        method == "auto" and indexer.dimension <= DENSE_LIMIT
    )

    if use_dense:
        h = dense_matrix(spec, sector)
        vals, vecs = np.linalg.eigh(h)
        vals = vals[:m]
        mv = _sector_matvec(spec, indexer)
        residuals = np.array(
            [np.linalg.norm(mv(vecs[:, i]) - vals[i] * vecs[:, i]) for i in range(m)]
        )
        out_vecs = None
        if with_vectors:
            out_vecs = [Wavefunction(indexer, vecs[:, i].copy()) for i in range(m)]
        return SpectrumResult(vals.copy(), residuals, 0, indexer.sector, "dense",
                              out_vecs)

    if indexer.sector == "full":
        even = lowest_spectrum(spec, "even", m, tol, method, with_vectors,
                               max_matvecs)
        odd = lowest_spectrum(spec, "odd", m, tol, method, with_vectors,
                              max_matvecs)
        order = np.argsort(np.concatenate([even.eigenvalues, odd.eigenvalues]),
                           kind="stable")[:m]
        vals = np.concatenate([even.eigenvalues, odd.eigenvalues])[order]
        res = np.concatenate([even.residual_norms, odd.residual_norms])[order]
        vecs = None
        if with_vectors:
            pool = list(even.vectors) + list(odd.vectors)
            full_indexer = BasisIndexer(spec, "full")
            vecs = []
            for i in order:
                w = pool[i]
                fullvec = np.zeros(full_indexer.dimension, dtype=complex)
                fullvec[w.indexer.indices] = w.data
                vecs.append(Wavefunction(full_indexer, fullvec))
        return SpectrumResult(vals, res, even.iterations + odd.iterations,
                              "full", "lanczos-merged", vecs)

    mv = _sector_matvec(spec, indexer)
    try:
        res = lowest_eigenpairs(
            mv, indexer.dimension, m,
            v0=_start_vector(indexer), tol=tol, scale=_operator_scale(spec),
            max_matvecs=max_matvecs, with_vectors=with_vectors,
        )
    except EigenConvergenceError:
        raise
    out_vecs = None
    if with_vectors:
        out_vecs = [
            Wavefunction(indexer, res.eigenvectors[:, i].copy())
            for i in range(m)
        ]
    return SpectrumResult(res.eigenvalues, res.residuals, res.matvec_count,
                          indexer.sector, "lanczos", out_vecs)


@dataclass
class SplittingRecord:
    """One point of a splitting sweep; the unit of all scaling fits."""

    n_atoms: int
    n_modes: int
    g: float
    cutoffs: tuple[int, ...]
    e_even: float
    e_odd: float
    delta: float
    delta_over_omega_atom: float
    converged: bool
    below_floor: bool = False


def _sector_ground(spec: ManyBodySpec, sector: str, tol: float) -> float:
    return float(lowest_spectrum(spec, sector, 1, tol=tol).eigenvalues[0])


def _refined_cutoffs(cutoffs) -> tuple[int, ...]:
    return tuple(c + max(2, math.ceil(0.25 * c)) for c in cutoffs)


def ground_splitting(spec: ManyBodySpec, tol: float = 1e-3,
                     refine: bool = True, eig_tol: float = 1e-11) -> SplittingRecord:
    """|E0(even) - E0(odd)| with a cutoff-refinement convergence flag.

    ``tol`` is the relative change of delta under one cutoff refinement that
    still counts as converged; refinement is skipped (and the record marked
    unconverged) when ``refine`` is false.
    """
    e_even = _sector_ground(spec, "even", eig_tol)
    e_odd = _sector_ground(spec, "odd", eig_tol)
    delta = abs(e_even - e_odd)
    omega_ref = float(np.mean(np.abs(spec.omega_atoms))) or 1.0
    floor = NUMERICAL_FLOOR * omega_ref

    converged = False
    if refine:
        bumped = spec.with_cutoffs(_refined_cutoffs(spec.cutoffs))
        d2 = abs(_sector_ground(bumped, "even", eig_tol)
                 - _sector_ground(bumped, "odd", eig_tol))
        if delta < floor and d2 < floor:
            converged = True
        else:
            converged = abs(delta - d2) <= tol * max(abs(delta), abs(d2))

    return SplittingRecord(
        n_atoms=spec.n_atoms, n_modes=spec.n_modes, g=spec.g,
        cutoffs=spec.cutoffs, e_even=e_even, e_odd=e_odd, delta=delta,
        delta_over_omega_atom=delta / omega_ref,
        converged=converged, below_floor=delta < floor,
    )


def convergence_scan(spec: ManyBodySpec, cutoff_schedule,
                     rtol: float = 1e-3,
                     eig_tol: float = 1e-11) -> list[SplittingRecord]:
    """Splittings along an increasing cutoff schedule.

    Each record's flag states whether delta moved by less than ``rtol``
    relative to the previous level; the first record is never converged.
    """
    schedule = [tuple(int(c) for c in cuts) for cuts in cutoff_schedule]
    for prev, cur in zip(schedule, schedule[1:]):
        if len(prev) != len(cur) or any(b < a for a, b in zip(prev, cur)):
            raise ManyBodyError("cutoff schedule must be elementwise non-decreasing")
        if not any(b > a for a, b in zip(prev, cur)):
            raise ManyBodyError("cutoff schedule must strictly increase")
    records = []
    prev_delta = None
    for cuts in schedule:
        s = spec.with_cutoffs(cuts)
        rec = ground_splitting(s, refine=False, eig_tol=eig_tol)
        if prev_delta is not None:
            rec.converged = (
                abs(rec.delta - prev_delta)
                <= rtol * max(abs(rec.delta), abs(prev_delta), 1e-300)
            )
        records.append(rec)
        prev_delta = rec.delta
    return records
