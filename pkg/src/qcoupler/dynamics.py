"""Spatial dynamics: drift matrix, propagator, and state evolution.

The six mode operators and their conjugates are stacked into a 12-vector
in the interleaved order (S1, S1+, A1, A1+, V1, V1+, S2, ...).  The
linear equations of motion read dA/dz = i M A with a z-independent drift
matrix M, so the propagator is exp(i M z).  Its action on annihilation
operators defines the (U, V) pair of a Bogoliubov transform,

    A_j(z) = sum_k U[j,k] A_k(0) + V[j,k] A_k^+(0),

which preserves the bosonic commutators: U U^H - V V^H = I and
U V^T - V U^T = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import NumericalError
from .model import (
    EXCHANGE_PERMUTATION,
    GaussianState,
    N_MODES,
    ValidatedParams,
)

_DIM = 2 * N_MODES

# Condition-number gate for the cached eigendecomposition route; beyond
# this the generator is close to defective and scaling-and-squaring is
# used instead.
_EIG_COND_LIMIT = 1e8


def _guide_block(gs: complex, ga: complex) -> np.ndarray:
    """Intra-guide couplings over (S, S+, A, A+, V, V+)."""
    m = np.zeros((6, 6), dtype=complex)
    m[0, 5] = gs
    m[1, 4] = -np.conj(gs)
    m[2, 4] = ga
    m[3, 5] = -np.conj(ga)
    m[4, 1] = gs
    m[4, 2] = np.conj(ga)
    m[5, 0] = -np.conj(gs)
    m[5, 3] = -ga
    return m


def _cross_block(ks: complex, ka: complex) -> np.ndarray:
    """Evanescent guide-to-guide couplings; phonons do not cross over."""
    return np.diag([np.conj(ks), -ks, np.conj(ka), -ka, 0j, 0j])


@dataclass
class EvolutionMatrix:
    """The 12x12 drift matrix together with a cached spectral factorization."""

    matrix: np.ndarray
    _spectral: tuple | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.matrix = np.array(self.matrix, dtype=complex)
        if self.matrix.shape != (_DIM, _DIM):
            raise NumericalError(f"drift matrix must be {_DIM}x{_DIM}")
        self.matrix.setflags(write=False)

    def _factorize(self):
        if self._spectral is None:
            gen = 1j * self.matrix
            try:
                eigvals, eigvecs = np.linalg.eig(gen)
                cond = np.linalg.cond(eigvecs)
            except np.linalg.LinAlgError:
                eigvals, eigvecs, cond = None, None, np.inf
            if cond < _EIG_COND_LIMIT:
                self._spectral = (eigvals, eigvecs, np.linalg.inv(eigvecs))
            else:
                self._spectral = (None, None, None)
        return self._spectral

    def expm(self, z: float) -> np.ndarray:
        """exp(i M z), via the cached eigendecomposition when it is
        well-conditioned and scaling-and-squaring otherwise."""
        eigvals, eigvecs, inv = self._factorize()
        if eigvals is not None:
            out = (eigvecs * np.exp(eigvals * z)) @ inv
        else:
            out = scipy.linalg.expm(1j * self.matrix * z)
        if not np.all(np.isfinite(out)):
            raise NumericalError(
                f"matrix exponential produced non-finite entries at z={z}; "
                f"|M|={np.max(np.abs(self.matrix)):.3g}"
            )
        return out


def build_drift_matrix(params: ValidatedParams) -> EvolutionMatrix:
    """Assemble the block drift matrix from validated couplings.

    The lower-left cross block is the elementwise conjugate of the
    upper-right one, which realizes the guide-exchange symmetry.
    """
    m1 = _guide_block(params.gS1, params.gA1)
    m2 = _guide_block(params.gS2, params.gA2)
    m12 = _cross_block(params.kappaS, params.kappaA)
    full = np.block([[m1, m12], [m12.conj(), m2]])
    return EvolutionMatrix(full)


@dataclass(frozen=True)
class BogoliubovTransform:
    """The (U, V) blocks of the operator solution at propagation length z."""

    U: np.ndarray
    V: np.ndarray
    z: float

    def __post_init__(self):
        for name in ("U", "V"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (N_MODES, N_MODES):
                raise NumericalError(f"{name} must be {N_MODES}x{N_MODES}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def identity(cls) -> "BogoliubovTransform":
        return cls(U=np.eye(N_MODES, dtype=complex),
                   V=np.zeros((N_MODES, N_MODES), dtype=complex), z=0.0)

    @classmethod
    def from_doubled(cls, mat: np.ndarray, z: float) -> "BogoliubovTransform":
        """Extract (U, V) from a 12x12 propagator over the interleaved basis."""
        return cls(U=mat[0::2, 0::2], V=mat[0::2, 1::2], z=z)

    def doubled(self) -> np.ndarray:
        """Rebuild the full 12x12 propagator (creator rows by conjugation)."""
        out = np.zeros((_DIM, _DIM), dtype=complex)
        out[0::2, 0::2] = self.U
        out[0::2, 1::2] = self.V
        out[1::2, 0::2] = self.V.conj()
        out[1::2, 1::2] = self.U.conj()
        return out

    def compose(self, first: "BogoliubovTransform") -> "BogoliubovTransform":
        """The transform equivalent to applying ``first`` and then ``self``."""
        u = self.U @ first.U + self.V @ first.V.conj()
        v = self.U @ first.V + self.V @ first.U.conj()
        return BogoliubovTransform(U=u, V=v, z=self.z + first.z)

    def permuted(self, perm=EXCHANGE_PERMUTATION) -> "BogoliubovTransform":
        p = np.asarray(perm)
        return BogoliubovTransform(U=self.U[np.ix_(p, p)], V=self.V[np.ix_(p, p)], z=self.z)


def propagator(em: EvolutionMatrix, z: float) -> BogoliubovTransform:
    """Bogoliubov transform after propagation over length z."""
    if not np.isfinite(z):
        raise NumericalError(f"propagation length must be finite, got {z}")
    return BogoliubovTransform.from_doubled(em.expm(float(z)), float(z))


def rk4_propagator(em: EvolutionMatrix, z: float, h: float = 1e-4) -> BogoliubovTransform:
    """Fixed-step fourth-order integration of dE/dz = i M E from E(0) = I.

    Deliberately independent of the matrix-exponential route; used as a
    cross-check oracle.  The step is shrunk slightly if needed so the
    integration lands exactly on z.
    """
    gen = 1j * em.matrix
    steps = max(1, int(np.ceil(abs(z) / h - 1e-12)))
    step = z / steps
    e = np.eye(_DIM, dtype=complex)
    for _ in range(steps):
        k1 = gen @ e
        k2 = gen @ (e + 0.5 * step * k1)
        k3 = gen @ (e + 0.5 * step * k2)
        k4 = gen @ (e + step * k3)
        e = e + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return BogoliubovTransform.from_doubled(e, float(z))


def symplectic_residual(t: BogoliubovTransform) -> float:
    """Max-norm violation of the two Bogoliubov (commutator) identities."""
    u, v = t.U, t.V
    r1 = u @ u.conj().T - v @ v.conj().T - np.eye(N_MODES)
    r2 = u @ v.T - v @ u.T
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def evolve_state(t: BogoliubovTransform, s0: GaussianState) -> GaussianState:
    """Propagate a Gaussian state through a Bogoliubov transform.

    Means contract directly; the second moments transform by substituting
    dA(z) = U dA + V dA^+ into their definitions.  The input state may
    carry arbitrary cross-mode moments.
    """
    u, v = t.U, t.V
    xi = u @ s0.xi + v @ s0.xi.conj()
    n0 = s0.normal_moment_matrix()          # <dA^+ dA>
    m0 = s0.pair_moment_matrix()            # <dA dA>
    n0_anti = n0.T + np.eye(N_MODES)        # <dA dA^+>
    uc, vc = u.conj(), v.conj()
    n1 = uc @ n0 @ u.T + uc @ m0.conj() @ v.T + vc @ m0 @ u.T + vc @ n0_anti @ v.T
    m1 = u @ m0 @ u.T + u @ n0_anti @ v.T + v @ n0 @ u.T + v @ m0.conj() @ v.T
    # exact symmetries hold up to roundoff; restore them
    n1 = 0.5 * (n1 + n1.conj().T)
    m1 = 0.5 * (m1 + m1.T)
    b = np.real(np.diag(n1)).copy()
    c = np.diag(m1).copy()
    d = m1.copy()
    np.fill_diagonal(d, 0j)
    dbar = -n1
    np.fill_diagonal(dbar, 0j)
    return GaussianState(xi=xi, B=b, C=c, D=d, Dbar=dbar)


def photon_number_balance(state: GaussianState) -> float:
    """The conserved combination sum_j (<n_Vj> + <n_Aj> - <n_Sj>)."""
    n = state.mean_photon_numbers()
    return float(n[2] + n[5] + n[1] + n[4] - n[0] - n[3])


def conservation_residual(trajectory) -> float:
    """Max drift of the photon-number balance along a trajectory."""
    states = list(trajectory)
    if not states:
        return 0.0
    q0 = photon_number_balance(states[0])
    return max(abs(photon_number_balance(s) - q0) for s in states)
