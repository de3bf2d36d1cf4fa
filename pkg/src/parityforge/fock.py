"""States and operators of a single bosonic mode in a truncated Fock space.

Conventions used throughout the package: quadratures x = (a + a†)/2 and
p = -i(a - a†)/2, so [x, p] = i/2 and the vacuum variance is 1/4.  All
operators are dense complex matrices over the number basis |0>..|n_cut>.

Truncation necessarily corrupts operator algebra near the cutoff, so
unitarity/idempotence claims are only meaningful on the "protected"
subspace spanned by the lowest ~90% of levels; see
:func:`kind_defect`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import TailOverflow

__all__ = [
    "TruncationConfig",
    "PureState",
    "MixedState",
    "OperatorMatrix",
    "SqueezeParameter",
    "fock_state",
    "vacuum",
    "ladder_matrices",
    "coherent_state",
    "displacement_matrix",
    "displacement_matrix_expm",
    "combine_displacements",
    "squeeze_matrix",
    "squeezed_vacuum",
    "parity_projectors",
    "displaced_parity",
    "dispersive_projectors",
    "quadrature_matrix",
    "tail_mass",
    "kind_defect",
]


@dataclass(frozen=True)
class TruncationConfig:
    """Fock-space cutoff: levels 0..n_cut are retained (dimension n_cut+1).

    tail_tolerance bounds how much population may sit in the truncation
    tail before constructions raise :class:`TailOverflow`.
    """

    n_cut: int
    tail_tolerance: float = 1e-6

    def __post_init__(self):
        if self.n_cut < 2:
            raise ValueError(f"n_cut must be >= 2, got {self.n_cut}")
        if not 0.0 < self.tail_tolerance < 1.0:
            raise ValueError(f"tail_tolerance must lie in (0, 1), got {self.tail_tolerance}")

    @property
    def dim(self) -> int:
        return self.n_cut + 1

    @property
    def protected_dim(self) -> int:
        """Number of low-lying levels on which operator algebra is trusted
        (all but the top ~10%)."""
        return self.dim - int(np.ceil(0.1 * self.dim))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector c_n = <n|psi> over the truncated basis.

    States are immutable.  Unnormalized vectors are legal intermediates
    (post-projection states carry their branch weight in the norm); set
    ``normalized=True`` only when the norm is actually 1.
    """

    amplitudes: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ValueError("amplitudes must be a 1-d vector")
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "amplitudes", _freeze(amps))
        if self.normalized and abs(self.norm_squared - 1.0) > 1e-10:
            raise ValueError(
                f"state flagged normalized but |psi|^2 = {self.norm_squared!r}"
            )

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def unit(self) -> "PureState":
        """Return the normalized version of this state."""
        n = math.sqrt(self.norm_squared)
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return PureState(self.amplitudes / n, normalized=True)

    def density(self) -> "MixedState":
        """Projector |psi><psi| as a density matrix (state must be normalized)."""
        psi = self.unit().amplitudes
        return MixedState(np.outer(psi, psi.conj()))


@dataclass(frozen=True)
class MixedState:
    """Density matrix rho_mn over the truncated basis.

    Like :class:`PureState`, unnormalized matrices (trace < 1) are legal
    intermediates; :meth:`validate` checks the physical-state invariants.
    """

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("rho must be a square matrix")
        if not np.all(np.isfinite(rho.view(np.float64))):
            raise ValueError("rho must be finite")
        object.__setattr__(self, "rho", _freeze(rho))

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    def unit(self) -> "MixedState":
        t = self.trace
        if t <= 0.0:
            raise ValueError("cannot normalize a trace-<=0 matrix")
        return MixedState(self.rho / t)

    def validate(self, herm_tol: float = 1e-10, trace_tol: float = 1e-8,
                 eig_tol: float = -1e-8) -> None:
        """Assert Hermiticity, unit trace and positivity; raises ValueError."""
        herm = float(np.max(np.abs(self.rho - self.rho.conj().T)))
        if herm > herm_tol:
            raise ValueError(f"rho not Hermitian: max asymmetry {herm:.3e}")
        if abs(self.trace - 1.0) > trace_tol:
            raise ValueError(f"rho trace {self.trace!r} differs from 1")
        lo = float(np.linalg.eigvalsh(self.rho)[0])
        if lo < eig_tol:
            raise ValueError(f"rho has negative eigenvalue {lo:.3e}")


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex operator with a claimed algebraic kind.

    The kind tag is a claim about the untruncated operator; how well the
    truncated matrix honors it is measured by :func:`kind_defect`.
    """

    entries: np.ndarray
    kind: str = "general"

    _KINDS = ("unitary", "projector", "hermitian", "general")

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("entries must be a square matrix")
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        object.__setattr__(self, "entries", _freeze(m))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, kind=self.kind)


@dataclass(frozen=True)
class SqueezeParameter:
    """Squeezing xi = r * exp(i*phase), r >= 0, phase reduced mod 2*pi."""

    r: float
    phase: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.r) and np.isfinite(self.phase)):
            raise ValueError("squeeze parameter must be finite")
        if self.r < 0:
            raise ValueError(f"r must be >= 0, got {self.r}")
        object.__setattr__(self, "phase", float(self.phase) % (2 * np.pi))


def fock_state(n: int, trunc: TruncationConfig) -> PureState:
    """Number state |n>."""
    if not 0 <= n <= trunc.n_cut:
        raise ValueError(f"Fock index {n} outside 0..{trunc.n_cut}")
    amps = np.zeros(trunc.dim, dtype=complex)
    amps[n] = 1.0
    return PureState(amps, normalized=True)


def vacuum(trunc: TruncationConfig) -> PureState:
    return fock_state(0, trunc)


def tail_mass(state: PureState | MixedState | np.ndarray,
              trunc: TruncationConfig) -> float:
    """Fraction of the population sitting in the unprotected top levels."""
    if isinstance(state, MixedState):
        pops = state.populations()
    elif isinstance(state, PureState):
        pops = np.abs(state.amplitudes) ** 2
    else:
        pops = np.abs(np.asarray(state)) ** 2
    total = float(np.sum(pops))
    if total == 0.0:
        return 0.0
    return float(np.sum(pops[trunc.protected_dim:]) / total)


def ladder_matrices(trunc: TruncationConfig) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Annihilation and creation matrices: a|n> = sqrt(n)|n-1>, adag = a†."""
    a = np.diag(np.sqrt(np.arange(1, trunc.dim, dtype=float)), k=1).astype(complex)
    return OperatorMatrix(a), OperatorMatrix(a.conj().T)


def coherent_state(alpha: complex, trunc: TruncationConfig) -> PureState:
    """Coherent state c_n = exp(-|alpha|^2/2) alpha^n / sqrt(n!), renormalized
    on the truncated space.

    Raises TailOverflow when the truncation cuts off more than
    trunc.tail_tolerance of the (analytically unit) population.
    """
    alpha = complex(alpha)
    if alpha == 0:
        return vacuum(trunc)
    n = np.arange(trunc.dim)
    mag = np.abs(alpha)
    log_mod = -0.5 * mag**2 + n * np.log(mag) - 0.5 * gammaln(n + 1.0)
    amps = np.exp(log_mod) * np.exp(1j * n * np.angle(alpha))
    captured = float(np.sum(np.abs(amps) ** 2))
    missing = 1.0 - captured
    if missing > trunc.tail_tolerance:
        raise TailOverflow(missing, trunc.tail_tolerance, what=f"coherent({alpha})")
    return PureState(amps / math.sqrt(captured), normalized=True)


def displacement_matrix(alpha: complex, trunc: TruncationConfig) -> OperatorMatrix:
    """Displacement D(alpha) = exp(alpha a† - alpha* a) from its analytic
    matrix elements.

    <n+d|D|n> = sqrt(n!/(n+d)!) alpha^d e^{-|alpha|^2/2} L_n^{(d)}(|alpha|^2)
    evaluated through a prefactor-absorbing three-term recurrence in n, with
    the d-dependent seed taken in log space.  Stable to n_cut ~ 1000, unlike
    the naive factorial/Laguerre product.
    """
    alpha = complex(alpha)
    dim = trunc.dim
    if alpha == 0:
        return OperatorMatrix(np.eye(dim, dtype=complex), kind="unitary")

    x = abs(alpha) ** 2
    d = np.arange(dim, dtype=float)
    # T[n, d] = sqrt(n!/(n+d)!) |alpha|^d e^{-x/2} L_n^{(d)}(x)
    T = np.zeros((dim, dim))
    T[0] = np.exp(-0.5 * x + d * np.log(abs(alpha)) - 0.5 * gammaln(d + 1.0))
    if dim > 1:
        T[1] = (1.0 + d - x) / np.sqrt(1.0 + d) * T[0]
    for n in range(1, dim - 1):
        T[n + 1] = (
            (2.0 * n + 1.0 + d - x) * T[n] - np.sqrt(n * (n + d)) * T[n - 1]
        ) / np.sqrt((n + 1.0) * (n + 1.0 + d))

    phase = np.exp(1j * np.angle(alpha) * d)
    sign = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    D = np.zeros((dim, dim), dtype=complex)
    rows, cols = np.tril_indices(dim)
    dd = rows - cols
    D[rows, cols] = T[cols, dd] * phase[dd]                     # m = n + d
    D[cols, rows] = T[cols, dd] * sign[dd] * np.conj(phase[dd])  # <n|D|n+d>
    return OperatorMatrix(D, kind="unitary")


def displacement_matrix_expm(alpha: complex, trunc: TruncationConfig) -> OperatorMatrix:
    """D(alpha) via the matrix exponential of alpha a† - alpha* a.

    Test oracle for :func:`displacement_matrix`; slow at large n_cut.
    """
    a, adag = ladder_matrices(trunc)
    gen = alpha * adag.entries - np.conj(alpha) * a.entries
    return OperatorMatrix(expm(gen), kind="unitary")


def combine_displacements(alpha: complex, beta: complex) -> tuple[float, complex]:
    """Phase and total of D(alpha) D(beta) = e^{i phase} D(total)."""
    alpha, beta = complex(alpha), complex(beta)
    return float((alpha * beta.conjugate()).imag), alpha + beta


def squeeze_matrix(xi: SqueezeParameter, trunc: TruncationConfig) -> OperatorMatrix:
    """Squeezing operator S(xi) = exp((xi* a^2 - xi a†^2)/2).

    Raises TailOverflow when S(xi)|0> does not fit under the truncation.
    """
    # Tail feasibility is governed by the squeezed vacuum it produces.
    squeezed_vacuum(xi, trunc)
    a, adag = ladder_matrices(trunc)
    z = xi.r * np.exp(1j * xi.phase)
    gen = 0.5 * (np.conj(z) * (a.entries @ a.entries) - z * (adag.entries @ adag.entries))
    return OperatorMatrix(expm(gen), kind="unitary")


def _squeezed_amplitudes(r: float, phase: float, dim: int) -> np.ndarray:
    """Squeezed-vacuum amplitudes on dim levels, renormalized, no tail check."""
    amps = np.zeros(dim, dtype=complex)
    if r == 0.0:
        amps[0] = 1.0
        return amps
    n = np.arange((dim - 1) // 2 + 1)
    log_mod = (
        -0.5 * np.log(np.cosh(r))
        + 0.5 * gammaln(2.0 * n + 1.0)
        - n * np.log(2.0)
        - gammaln(n + 1.0)
        + n * np.log(np.tanh(r))
    )
    amps[2 * n] = np.exp(log_mod) * (-1.0) ** n * np.exp(1j * n * phase)
    return amps / np.sqrt(np.sum(np.abs(amps) ** 2))


def squeezed_vacuum(xi: SqueezeParameter, trunc: TruncationConfig) -> PureState:
    """Squeezed vacuum |xi> with amplitudes

    c_{2n} = (cosh r)^{-1/2} (-1)^n sqrt((2n)!)/(2^n n!) e^{i n phase} tanh^n r

    computed with log-gamma factorials; odd amplitudes are exactly zero.
    """
    if xi.r == 0.0:
        return vacuum(trunc)
    n = np.arange(trunc.n_cut // 2 + 1)
    log_mod = (
        -0.5 * np.log(np.cosh(xi.r))
        + 0.5 * gammaln(2.0 * n + 1.0)
        - n * np.log(2.0)
        - gammaln(n + 1.0)
        + n * np.log(np.tanh(xi.r))
    )
    captured = float(np.sum(np.exp(2.0 * log_mod)))
    missing = 1.0 - captured
    if missing > trunc.tail_tolerance:
        raise TailOverflow(missing, trunc.tail_tolerance,
                           what=f"squeezed_vacuum(r={xi.r}, phase={xi.phase})")
    amps = np.zeros(trunc.dim, dtype=complex)
    amps[2 * n] = np.exp(log_mod) * (-1.0) ** n * np.exp(1j * n * xi.phase)
    return PureState(amps / math.sqrt(captured), normalized=True)


def parity_projectors(trunc: TruncationConfig) -> tuple[OperatorMatrix, OperatorMatrix]:
    """(P+, P-): diagonal projectors onto even/odd Fock levels."""
    even = (np.arange(trunc.dim) % 2 == 0).astype(complex)
    p_plus = np.diag(even)
    p_minus = np.diag(1.0 - even)
    return (OperatorMatrix(p_plus, kind="projector"),
            OperatorMatrix(p_minus, kind="projector"))


def displaced_parity(sign: int, alpha: complex, trunc: TruncationConfig) -> OperatorMatrix:
    """Displaced parity projector P_sign(alpha) = D(alpha) P_sign D(-alpha)."""
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    p_plus, p_minus = parity_projectors(trunc)
    p = p_plus if sign == +1 else p_minus
    if alpha == 0:
        return p
    d = displacement_matrix(alpha, trunc).entries
    return OperatorMatrix(d @ p.entries @ d.conj().T, kind="projector")


def dispersive_projectors(tau: float, trunc: TruncationConfig) -> tuple[OperatorMatrix, OperatorMatrix]:
    """Qubit-readout measurement operators M+ = diag(cos n*tau),
    M- = diag(sin n*tau); M+^2 + M-^2 = I exactly."""
    n = np.arange(trunc.dim)
    m_plus = np.diag(np.cos(n * tau)).astype(complex)
    m_minus = np.diag(np.sin(n * tau)).astype(complex)
    return (OperatorMatrix(m_plus, kind="hermitian"),
            OperatorMatrix(m_minus, kind="hermitian"))


def quadrature_matrix(theta: float, trunc: TruncationConfig) -> OperatorMatrix:
    """Rotated quadrature x^(theta) = (a e^{-i theta} + a† e^{i theta})/2."""
    a, adag = ladder_matrices(trunc)
    m = 0.5 * (a.entries * np.exp(-1j * theta) + adag.entries * np.exp(1j * theta))
    return OperatorMatrix(m, kind="hermitian")


def kind_defect(op: OperatorMatrix, trunc: TruncationConfig) -> float:
    """Largest violation of the operator's claimed kind, measured on the
    protected subspace (truncation corrupts the top levels by design).

    unitary:   max |(U†U - I)_ij|      for i, j protected
    projector: max |(P^2 - P)_ij| and |(P - P†)_ij|, same block
    hermitian: max |(H - H†)_ij| over the full matrix
    """
    k = trunc.protected_dim
    m = op.entries
    if op.kind == "unitary":
        defect = m.conj().T @ m - np.eye(op.dim)
        return float(np.max(np.abs(defect[:k, :k])))
    if op.kind == "projector":
        idem = (m @ m - m)[:k, :k]
        herm = (m - m.conj().T)[:k, :k]
        return float(max(np.max(np.abs(idem)), np.max(np.abs(herm))))
    if op.kind == "hermitian":
        return float(np.max(np.abs(m - m.conj().T)))
    return 0.0
