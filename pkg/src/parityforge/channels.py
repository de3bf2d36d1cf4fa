"""Bosonic loss as a Kraus channel, projective measurements, and the lossy
displaced-parity measurement cycle.

One measurement step maps

    rho -> sum_k E_k P rho P† E_k† / Tr(P rho P†),

i.e. the even-parity projection happens first, the loss channel acts after
it, and the state is renormalized by the projection weight (the channel is
trace preserving, so pre- and post-loss traces coincide).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import ZeroProbability
from .fock import MixedState, OperatorMatrix, PureState, TruncationConfig, displaced_parity

__all__ = [
    "LossModel",
    "StepOutcome",
    "ZERO_PROBABILITY_THRESHOLD",
    "loss_kraus",
    "apply_loss",
    "measure_project",
    "measurement_cycle",
]

ZERO_PROBABILITY_THRESHOLD = 1e-12


@dataclass(frozen=True)
class LossModel:
    """Per-measurement loss: epsilon = 1 - eta is the probability that a
    boson is lost within one measurement step.

    k_max caps the Kraus index; None means n_cut, which makes the operator
    sum exact on the truncated space.
    """

    epsilon: float = 0.0
    k_max: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must lie in [0, 1), got {self.epsilon}")
        if self.k_max is not None and self.k_max < 0:
            raise ValueError(f"k_max must be >= 0, got {self.k_max}")

    @property
    def eta(self) -> float:
        return 1.0 - self.epsilon


@dataclass(frozen=True)
class StepOutcome:
    """Post-measurement state together with the branch probability."""

    state: PureState | MixedState
    success_probability: float

    def __post_init__(self):
        if not -1e-12 <= self.success_probability <= 1.0 + 1e-9:
            raise ValueError(
                f"success probability {self.success_probability} outside [0, 1]"
            )


def loss_kraus(eta: float, k: int, trunc: TruncationConfig) -> OperatorMatrix:
    """Kraus operator E_k = sqrt((1-eta)^k / k!) sqrt(eta)^(a†a) a^k.

    E_k maps |n> to sqrt(binom(n,k) (1-eta)^k eta^(n-k)) |n-k>; entries are
    assembled in log space so large n and k stay finite.
    """
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    dim = trunc.dim
    entries = np.zeros((dim, dim), dtype=complex)
    if k >= dim:
        return OperatorMatrix(entries)
    if eta == 1.0:
        if k == 0:
            entries[np.diag_indices(dim)] = 1.0
        return OperatorMatrix(entries)
    n = np.arange(k, dim, dtype=float)
    log_binom = gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)
    log_amp = 0.5 * (log_binom + k * np.log1p(-eta) + (n - k) * np.log(eta))
    entries[np.arange(dim - k), np.arange(k, dim)] = np.exp(log_amp)
    return OperatorMatrix(entries)


@lru_cache(maxsize=8)
def _kraus_bank(eta: float, k_max: int, n_cut: int) -> tuple[np.ndarray, ...]:
    trunc = TruncationConfig(n_cut)
    return tuple(loss_kraus(eta, k, trunc).entries for k in range(k_max + 1))


def apply_loss(rho: MixedState, loss: LossModel) -> MixedState:
    """Apply the loss channel sum_k E_k rho E_k† (trace preserving when
    k_max covers the truncated space)."""
    if loss.epsilon == 0.0:
        return rho
    n_cut = rho.dim - 1
    k_max = n_cut if loss.k_max is None else min(loss.k_max, n_cut)
    out = np.zeros_like(rho.rho)
    for ek in _kraus_bank(loss.eta, k_max, n_cut):
        out += ek @ rho.rho @ ek.conj().T
    return MixedState(out)


def measure_project(state: PureState | MixedState,
                    projector: OperatorMatrix) -> StepOutcome:
    """Project, renormalize, and report the branch probability
    p = <psi|P†P|psi> (pure) or Tr(P rho P†) (mixed).

    Raises ZeroProbability when the branch weight falls below 1e-12.
    """
    if isinstance(state, PureState):
        if state.dim != projector.dim:
            raise ValueError("state and projector dimensions differ")
        phi = projector.entries @ state.amplitudes
        p = float(np.vdot(phi, phi).real) / state.norm_squared
        if p < ZERO_PROBABILITY_THRESHOLD:
            raise ZeroProbability(p)
        return StepOutcome(PureState(phi).unit(), p)
    if state.dim != projector.dim:
        raise ValueError("state and projector dimensions differ")
    trace_in = state.trace
    sigma = projector.entries @ state.rho @ projector.entries.conj().T
    p = float(np.trace(sigma).real) / trace_in
    if p < ZERO_PROBABILITY_THRESHOLD:
        raise ZeroProbability(p)
    return StepOutcome(MixedState(sigma / (p * trace_in)), p)


def cycle_with_projector(rho: MixedState, projector: OperatorMatrix,
                         loss: LossModel) -> StepOutcome:
    """Project -> loss -> renormalize -> hermitize, for a prebuilt projector."""
    outcome = measure_project(rho, projector)
    assert isinstance(outcome.state, MixedState)
    out = apply_loss(outcome.state, loss).rho
    out = 0.5 * (out + out.conj().T)  # strip asymmetric rounding
    return StepOutcome(MixedState(out), outcome.success_probability)


def measurement_cycle(rho: MixedState, alpha: complex, loss: LossModel,
                      trunc: TruncationConfig) -> StepOutcome:
    """One lossy displaced-parity measurement step at measurement point
    alpha: project with P+(alpha), apply the loss channel, renormalize by
    the projection weight."""
    projector = displaced_parity(+1, alpha, trunc)
    return cycle_with_projector(rho, projector, loss)
