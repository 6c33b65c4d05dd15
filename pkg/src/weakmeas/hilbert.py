"""Finite-dimensional Hilbert-space kernel.

Normalized kets, Hermitian observables with cached spectral decompositions,
the generated unitaries exp(iAx), and the standard state families (spin
matrices, spin-coherent states, truncated oscillator coherent states, random
states drawn from the unitarily invariant measure).  Everything is in natural
units, hbar = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimError, InvalidSpin, NotHermitian, TruncationError

NORM_TOL = 1e-12
HERM_TOL = 1e-12
EIGENVALUE_MERGE_TOL = 1e-9


def _phase_fix(amplitudes: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude amplitude is real positive."""
    k = int(np.argmax(np.abs(amplitudes)))
    z = amplitudes[k]
    if abs(z) == 0.0:
        return amplitudes
    return amplitudes * (np.conj(z) / abs(z))


@dataclass(frozen=True)
class KetVector:
    """Normalized state of the measured system.

    Complex dtypes are preserved (extended precision survives for
    cancellation-heavy overlaps such as opposite coherent states).
    """

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes)
        if not np.issubdtype(amp.dtype, np.complexfloating):
            amp = amp.astype(complex)
        if amp.ndim != 1 or amp.size < 1:
            raise DimError("state must be a 1-d array with dim >= 1")
        object.__setattr__(self, "amplitudes", amp)
        if abs(np.sum(np.abs(amp) ** 2) - 1.0) > 1e-10:
            raise ValueError("state is not normalized")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def from_amplitudes(cls, amplitudes, phase_fixed: bool = False) -> "KetVector":
        amp = np.asarray(amplitudes, dtype=complex)
        nrm = np.linalg.norm(amp)
        if nrm == 0.0:
            raise ValueError("cannot normalize the zero vector")
        amp = amp / nrm
        if phase_fixed:
            amp = _phase_fix(amp)
        return cls(amp)


def inner(bra: KetVector, ket: KetVector) -> complex:
    """<bra|ket>."""
    if bra.dim != ket.dim:
        raise DimError(f"dims differ: {bra.dim} vs {ket.dim}")
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted ascending, degeneracies merged, with projectors."""

    eigenvalues: np.ndarray
    projectors: list

    def reassemble(self) -> np.ndarray:
        out = np.zeros_like(self.projectors[0])
        for a, proj in zip(self.eigenvalues, self.projectors):
            out = out + a * proj
        return out


@dataclass
class HermitianObservable:
    """Hermitian operator with a lazily cached spectral decomposition."""

    matrix: np.ndarray
    _eig: Optional[tuple] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if not np.issubdtype(m.dtype, np.complexfloating):
            m = m.astype(complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimError("operator must be a square matrix")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise NotHermitian("matrix differs from its conjugate transpose")
        self.matrix = m

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eig(self):
        """Raw (eigenvalues, eigenvectors) from numpy.linalg.eigh, cached."""
        if self._eig is None:
            w, v = np.linalg.eigh(self.matrix)
            self._eig = (w, v)
        return self._eig

    def apply(self, psi: KetVector) -> np.ndarray:
        if psi.dim != self.dim:
            raise DimError(f"dims differ: {self.dim} vs {psi.dim}")
        return self.matrix @ psi.amplitudes

    def expectation(self, psi: KetVector) -> float:
        return float(np.real(np.vdot(psi.amplitudes, self.apply(psi))))

    def variance(self, psi: KetVector) -> float:
        a2 = float(np.real(np.vdot(psi.amplitudes, self.matrix @ self.apply(psi))))
        return a2 - self.expectation(psi) ** 2


def spectral(A: HermitianObservable, merge_tol: float = EIGENVALUE_MERGE_TOL) -> SpectralDecomposition:
    """Spectral decomposition with near-degenerate eigenvalues merged into one projector."""
    w, v = A.eig()
    eigenvalues = []
    projectors = []
    i = 0
    while i < len(w):
        j = i
        while j + 1 < len(w) and w[j + 1] - w[i] < merge_tol:
            j += 1
        block = v[:, i:j + 1]
        projectors.append(block @ block.conj().T)
        eigenvalues.append(float(np.mean(w[i:j + 1])))
        i = j + 1
    return SpectralDecomposition(np.array(eigenvalues), projectors)


def evolve(A: HermitianObservable, x: float, psi: KetVector) -> KetVector:
    """exp(iAx)|psi>, evaluated eigenvalue-wise (exact, norm preserving)."""
    if A.dim != psi.dim:
        raise DimError(f"dims differ: {A.dim} vs {psi.dim}")
    w, v = A.eig()
    coeff = v.conj().T @ psi.amplitudes
    out = v @ (np.exp(1j * w * x) * coeff)
    return KetVector(out)


# ---------------------------------------------------------------------------
# spin operators and spin-coherent states
# ---------------------------------------------------------------------------

def _check_spin(j: float) -> float:
    two_j = 2 * j
    if two_j < 0 or abs(two_j - round(two_j)) > 1e-12:
        raise InvalidSpin(f"j = {j} is not a non-negative half-integer")
    return round(two_j) / 2


def spin_operators(j: float):
    """(Sx, Sy, Sz) for spin j; Sz diagonal with m = j..-j down the diagonal."""
    j = _check_spin(j)
    d = int(round(2 * j)) + 1
    m = j - np.arange(d)
    sz = np.diag(m).astype(complex)
    sp = np.zeros((d, d), dtype=complex)
    for i in range(d - 1):
        mm = m[i + 1]
        sp[i, i + 1] = np.sqrt(j * (j + 1) - mm * (mm + 1))
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    return (HermitianObservable(sx), HermitianObservable(sy), HermitianObservable(sz))


def spin_component(j: float, direction) -> HermitianObservable:
    """n . S for a unit vector n = (nx, ny, nz)."""
    n = np.asarray(direction, dtype=float)
    n = n / np.linalg.norm(n)
    sx, sy, sz = spin_operators(j)
    return HermitianObservable(n[0] * sx.matrix + n[1] * sy.matrix + n[2] * sz.matrix)


def spin_coherent_state(j: float, polar: float, azimuth: float) -> KetVector:
    """Highest-weight eigenstate of n.S along (polar, azimuth), phase fixed."""
    j = _check_spin(j)
    n = (np.sin(polar) * np.cos(azimuth), np.sin(polar) * np.sin(azimuth), np.cos(polar))
    su = spin_component(j, n)
    w, v = su.eig()
    top = v[:, int(np.argmax(w))]
    return KetVector(_phase_fix(top))


# ---------------------------------------------------------------------------
# oscillator coherent states on a truncated Fock space
# ---------------------------------------------------------------------------

def coherent_truncation(lam: complex) -> int:
    """Minimum Fock cutoff keeping the Poisson tail below 1e-10 for |lam| <= 6."""
    r = abs(lam)
    return int(np.ceil(r * r + 10 * r + 10))


def coherent_state(lam: complex, n_max: int, extended: bool = False) -> KetVector:
    """Truncated coherent state, amplitudes prop. to lam^n / sqrt(n!).

    extended=True builds the amplitudes in clongdouble; overlaps between
    nearly opposite coherent states cancel ~e^(2|lam|^2)-fold, which double
    precision cannot always deliver at the tolerances of the worked examples.
    """
    if n_max < coherent_truncation(lam):
        raise TruncationError(
            f"n_max = {n_max} below the truncation rule {coherent_truncation(lam)} for |lam| = {abs(lam)}")
    dtype = np.clongdouble if extended else np.complex128
    amp = np.empty(n_max + 1, dtype=dtype)
    amp[0] = 1.0
    z = dtype(lam)
    # recursive product keeps full relative precision order by order
    for n in range(1, n_max + 1):
        amp[n] = amp[n - 1] * z / np.sqrt(np.real(dtype(n)))
    nrm2 = np.sum(np.abs(amp) ** 2)
    # tail estimate: unnormalized weight beyond the cutoff, Poisson(|lam|^2)
    from scipy import stats
    loss = float(stats.poisson.sf(n_max, abs(lam) ** 2))
    if loss > 1e-10:
        raise TruncationError(f"truncation loss {loss:.2e} exceeds 1e-10")
    return KetVector(amp / np.sqrt(nrm2))


def number_operator(n_max: int, extended: bool = False) -> HermitianObservable:
    """Occupation-number operator on the truncated Fock space."""
    dtype = np.clongdouble if extended else complex
    return HermitianObservable(np.diag(np.arange(n_max + 1)).astype(dtype))


# ---------------------------------------------------------------------------
# random states
# ---------------------------------------------------------------------------

def haar_random_state(dim: int, seed) -> KetVector:
    """State drawn from the unitarily invariant measure; deterministic per seed."""
    if dim < 1:
        raise DimError("dim must be >= 1")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return KetVector.from_amplitudes(z, phase_fixed=True)


def haar_random_batch(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, dim) array of invariant-measure states, rows normalized."""
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    z /= np.linalg.norm(z, axis=1)[:, None]
    return z
