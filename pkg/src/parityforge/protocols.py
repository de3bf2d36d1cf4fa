"""Measurement-based preparation protocols: squeezing by displaced-parity
sequences, multi-component cat lattices, and the GKP comb built on top of a
squeezed stage.

All runners start from vacuum and post-select the all-even-outcome branch.
Step operators compose right to left: the entry with index m=1 acts first.
Outputs are defined up to a global phase; compare states by fidelity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channels import (
    LossModel,
    ZERO_PROBABILITY_THRESHOLD,
    cycle_with_projector,
    measurement_cycle,
)
from .errors import EvenM, TailOverflow, ZeroProbability
from .fock import (
    MixedState,
    PureState,
    TruncationConfig,
    coherent_state,
    displacement_matrix,
    parity_projectors,
    tail_mass,
    vacuum,
)

__all__ = [
    "DisplacementSequence",
    "CatSequence",
    "GkpSpec",
    "RunLog",
    "symmetric_sequence",
    "linear_sequence",
    "run_squeezing",
    "run_cat",
    "analytic_cat_m2",
    "cat_lattice_sequence",
    "point_reflect",
    "run_gkp",
]


@dataclass(frozen=True)
class DisplacementSequence:
    """Displaced-parity schedule: measurement m happens at
    alpha_m = i e^{i theta} t_m along the axis anti-squeezed for
    orientation theta."""

    theta: float
    times: tuple[float, ...]

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        if len(times) < 1:
            raise ValueError("need at least one measurement")
        if not all(np.isfinite(times)) or not np.isfinite(self.theta):
            raise ValueError("sequence entries must be finite")
        object.__setattr__(self, "times", times)

    @property
    def M(self) -> int:
        return len(self.times)

    def measurement_points(self) -> tuple[complex, ...]:
        phase = 1j * np.exp(1j * self.theta)
        return tuple(complex(phase * t) for t in self.times)


@dataclass(frozen=True)
class CatSequence:
    """Displacement schedule alpha_m for the displace-then-measure cat
    recipe."""

    alphas: tuple[complex, ...]

    def __post_init__(self):
        alphas = tuple(complex(a) for a in self.alphas)
        object.__setattr__(self, "alphas", alphas)

    @property
    def M(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class GkpSpec:
    """Squeezing stage followed by comb_steps rounds of P+ D(m*delta/2)."""

    squeeze_stage: DisplacementSequence
    delta: float
    comb_steps: int

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if self.comb_steps < 0:
            raise ValueError(f"comb_steps must be >= 0, got {self.comb_steps}")


@dataclass(frozen=True)
class RunLog:
    """Per-step conditional success probabilities and their product."""

    per_step_probabilities: tuple[float, ...]
    cumulative_probability: float
    checkpoints: tuple[PureState | MixedState, ...] | None = None

    def __post_init__(self):
        steps = tuple(float(p) for p in self.per_step_probabilities)
        object.__setattr__(self, "per_step_probabilities", steps)
        prod = float(np.prod(steps)) if steps else 1.0
        if abs(prod - self.cumulative_probability) > 1e-10:
            raise ValueError("cumulative probability is not the product of the steps")

    @classmethod
    def from_steps(cls, steps, checkpoints=None) -> "RunLog":
        steps = tuple(float(p) for p in steps)
        cumulative = float(np.prod(steps)) if steps else 1.0
        return cls(steps, cumulative, checkpoints)


def symmetric_sequence(M: int, t_max: float, theta: float = 0.0) -> DisplacementSequence:
    """Alternating-sign schedule t_m = (-1)^(m-1) t_max (1 - floor((m-1)/2)/floor((M-1)/2)),
    sweeping symmetrically inward so the final measurement sits at the origin.

    Only odd M is admissible; M=1 degenerates to a bare parity measurement.
    """
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if M % 2 == 0:
        raise EvenM(f"symmetric ansatz needs odd M, got {M}")
    if t_max < 0:
        raise ValueError(f"t_max must be >= 0, got {t_max}")
    if M == 1:
        return DisplacementSequence(theta, (0.0,))
    half = (M - 1) // 2
    times = tuple(
        (-1.0) ** (m - 1) * t_max * (1.0 - ((m - 1) // 2) / half)
        for m in range(1, M + 1)
    )
    return DisplacementSequence(theta, times)


def linear_sequence(M: int, t_max: float, theta: float = 0.0) -> DisplacementSequence:
    """Monotone schedule t_m = t_max (1 - (m-1)/(M-1)); ends at the origin."""
    if M < 2:
        raise ValueError(f"linear sequence needs M >= 2, got {M}")
    times = tuple(t_max * (1.0 - (m - 1) / (M - 1)) for m in range(1, M + 1))
    return DisplacementSequence(theta, times)


def _displace_pure_checked(psi: np.ndarray, alpha: complex,
                           trunc: TruncationConfig, what: str) -> np.ndarray:
    """D(alpha) psi, raising TailOverflow when the displacement pushes more
    than tail_tolerance of the norm past the cutoff (the component no
    longer fits in the truncated space)."""
    out = displacement_matrix(alpha, trunc).entries @ psi
    lost = 1.0 - float(np.vdot(out, out).real / np.vdot(psi, psi).real)
    if lost > trunc.tail_tolerance:
        raise TailOverflow(lost, trunc.tail_tolerance, what=what)
    return out


def _displace_mixed_checked(rho: MixedState, alpha: complex,
                            trunc: TruncationConfig, what: str) -> MixedState:
    d = displacement_matrix(alpha, trunc).entries
    out = d @ rho.rho @ d.conj().T
    lost = 1.0 - float(np.trace(out).real / rho.trace)
    if lost > trunc.tail_tolerance:
        raise TailOverflow(lost, trunc.tail_tolerance, what=what)
    return MixedState(out)


def _pure_parity_step(psi: np.ndarray, alpha: complex, even: np.ndarray,
                      trunc: TruncationConfig, step: int) -> tuple[np.ndarray, float]:
    """Apply P+(alpha) = D(alpha) P+ D(-alpha) by three matvecs.

    Displacement mass pushed past the cutoff is re-injected by the final
    renormalization; heavily truncation-limited runs (large t_max) stay
    legal here and merely under-report the attainable squeezing.
    """
    if alpha == 0:
        phi = np.where(even, psi, 0.0)
        p = float(np.vdot(phi, phi).real)
        if p < ZERO_PROBABILITY_THRESHOLD:
            raise ZeroProbability(p, step)
        return phi / math.sqrt(p), p
    d = displacement_matrix(alpha, trunc).entries
    phi = np.where(even, d.conj().T @ psi, 0.0)
    p = float(np.vdot(phi, phi).real)
    if p < ZERO_PROBABILITY_THRESHOLD:
        raise ZeroProbability(p, step)
    out = d @ phi
    return out / np.linalg.norm(out), p


def run_squeezing(seq: DisplacementSequence, loss: LossModel,
                  trunc: TruncationConfig, folded: bool = False,
                  keep_checkpoints: bool = False):
    """Apply the displaced-parity sequence P+(i e^{i theta} t_m), m = 1..M,
    to vacuum and return (state, RunLog).

    With epsilon = 0 the evolution is pure; otherwise each measurement is
    followed by the loss channel and the state is a density matrix.

    folded=True runs the equivalent displace-measure-displace decomposition
    built from the increments dt_m = t_m - t_{m-1} (one displacement per
    step plus a final recentering displacement); at epsilon = 0 it matches
    the unfolded runner up to a global phase.
    """
    if folded:
        return _run_squeezing_folded(seq, loss, trunc, keep_checkpoints)
    steps: list[float] = []
    checkpoints: list = []
    if loss.epsilon == 0.0:
        even = np.arange(trunc.dim) % 2 == 0
        psi = vacuum(trunc).amplitudes
        for m, alpha in enumerate(seq.measurement_points(), start=1):
            psi, p = _pure_parity_step(psi, alpha, even, trunc, m)
            steps.append(p)
            if keep_checkpoints:
                checkpoints.append(PureState(psi, normalized=True))
        state: PureState | MixedState = PureState(psi, normalized=True)
    else:
        rho = vacuum(trunc).density()
        for m, alpha in enumerate(seq.measurement_points(), start=1):
            try:
                outcome = measurement_cycle(rho, alpha, loss, trunc)
            except ZeroProbability as exc:
                raise ZeroProbability(exc.probability, m) from None
            rho = outcome.state
            steps.append(outcome.success_probability)
            if keep_checkpoints:
                checkpoints.append(rho)
        state = rho
    return state, RunLog.from_steps(steps, tuple(checkpoints) if keep_checkpoints else None)


def _run_squeezing_folded(seq, loss, trunc, keep_checkpoints):
    phase = 1j * np.exp(1j * seq.theta)
    increments = np.diff(np.concatenate(([0.0], seq.times)))
    steps: list[float] = []
    checkpoints: list = []
    p_plus, _ = parity_projectors(trunc)
    if loss.epsilon == 0.0:
        even = np.arange(trunc.dim) % 2 == 0
        psi = vacuum(trunc).amplitudes
        for m, dt in enumerate(increments, start=1):
            alpha = complex(-phase * dt)
            if alpha != 0:
                psi = displacement_matrix(alpha, trunc).entries @ psi
            phi = np.where(even, psi, 0.0)
            p = float(np.vdot(phi, phi).real) / float(np.vdot(psi, psi).real)
            if p < ZERO_PROBABILITY_THRESHOLD:
                raise ZeroProbability(p, m)
            steps.append(p)
            psi = phi / np.linalg.norm(phi)
            if keep_checkpoints:
                checkpoints.append(PureState(psi, normalized=True))
        recenter = complex(phase * seq.times[-1])
        if recenter != 0:
            psi = displacement_matrix(recenter, trunc).entries @ psi
            psi = psi / np.linalg.norm(psi)
        state: PureState | MixedState = PureState(psi, normalized=True)
    else:
        rho = vacuum(trunc).density()
        for m, dt in enumerate(increments, start=1):
            alpha = complex(-phase * dt)
            if alpha != 0:
                d = displacement_matrix(alpha, trunc).entries
                rho = MixedState(d @ rho.rho @ d.conj().T)
            try:
                outcome = cycle_with_projector(rho, p_plus, loss)
            except ZeroProbability as exc:
                raise ZeroProbability(exc.probability, m) from None
            rho = outcome.state
            steps.append(outcome.success_probability)
            if keep_checkpoints:
                checkpoints.append(rho)
        recenter = complex(phase * seq.times[-1])
        if recenter != 0:
            d = displacement_matrix(recenter, trunc).entries
            rho = MixedState(d @ rho.rho @ d.conj().T).unit()
        state = rho
    return state, RunLog.from_steps(steps, tuple(checkpoints) if keep_checkpoints else None)


def run_cat(seq: CatSequence, loss: LossModel, trunc: TruncationConfig,
            keep_checkpoints: bool = False):
    """Apply P+ D(alpha_m), m = 1..M, to vacuum: every parity measurement
    spawns the point reflection of the displaced state, growing a lattice
    of up to 2^M coherent components."""
    steps: list[float] = []
    checkpoints: list = []
    p_plus, _ = parity_projectors(trunc)
    if loss.epsilon == 0.0:
        even = np.arange(trunc.dim) % 2 == 0
        psi = vacuum(trunc).amplitudes
        for m, alpha in enumerate(seq.alphas, start=1):
            if alpha != 0:
                psi = _displace_pure_checked(psi, alpha, trunc, f"cat step {m}")
            phi = np.where(even, psi, 0.0)
            p = float(np.vdot(phi, phi).real) / float(np.vdot(psi, psi).real)
            if p < ZERO_PROBABILITY_THRESHOLD:
                raise ZeroProbability(p, m)
            steps.append(p)
            psi = phi / np.linalg.norm(phi)
            if keep_checkpoints:
                checkpoints.append(PureState(psi, normalized=True))
        state: PureState | MixedState = PureState(psi, normalized=True)
    else:
        rho = vacuum(trunc).density()
        for m, alpha in enumerate(seq.alphas, start=1):
            if alpha != 0:
                rho = _displace_mixed_checked(rho, alpha, trunc, f"cat step {m}")
            try:
                outcome = cycle_with_projector(rho, p_plus, loss)
            except ZeroProbability as exc:
                raise ZeroProbability(exc.probability, m) from None
            rho = outcome.state
            steps.append(outcome.success_probability)
            if keep_checkpoints:
                checkpoints.append(rho)
        state = rho
    return state, RunLog.from_steps(steps, tuple(checkpoints) if keep_checkpoints else None)


def analytic_cat_m2(alpha1: complex, alpha2: complex,
                    trunc: TruncationConfig) -> PureState:
    """Closed form of the M=2 cat recipe: the four-component superposition

        e^{i phi}|a1+a2> + e^{-i phi}|a1-a2> + e^{-i phi}|-a1+a2> + e^{i phi}|-a1-a2>

    with phi = Im(a2 a1*) the displacement-composition phase."""
    alpha1, alpha2 = complex(alpha1), complex(alpha2)
    phi = (alpha2 * alpha1.conjugate()).imag
    plus, minus = np.exp(1j * phi), np.exp(-1j * phi)
    v = (
        plus * coherent_state(alpha1 + alpha2, trunc).amplitudes
        + minus * coherent_state(alpha1 - alpha2, trunc).amplitudes
        + minus * coherent_state(-alpha1 + alpha2, trunc).amplitudes
        + plus * coherent_state(-alpha1 - alpha2, trunc).amplitudes
    )
    return PureState(v).unit()


def cat_lattice_sequence(M: int, delta: float) -> CatSequence:
    """Square-lattice schedule alpha_m = i^((1+(-1)^m)/2) 2^(floor((m-1)/2)-1) delta;
    every measurement doubles the lattice."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta}")
    alphas = tuple(
        1j ** ((1 + (-1) ** m) // 2) * 2.0 ** ((m - 1) // 2 - 1) * delta
        for m in range(1, M + 1)
    )
    return CatSequence(alphas)


def point_reflect(state: PureState) -> PureState:
    """Point reflection about the phase-space origin: c_n -> (-1)^n c_n."""
    signs = np.where(np.arange(state.dim) % 2 == 0, 1.0, -1.0)
    return PureState(signs * state.amplitudes, normalized=state.normalized)


def run_gkp(spec: GkpSpec, loss: LossModel, trunc: TruncationConfig,
            keep_checkpoints: bool = False):
    """Squeeze, then grow the comb: apply P+ D(m*delta/2) for
    m = 1..comb_steps.  Each comb measurement superposes the state with its
    point reflection, doubling the number of comb teeth."""
    state, log = run_squeezing(spec.squeeze_stage, loss, trunc,
                               keep_checkpoints=keep_checkpoints)
    if spec.comb_steps == 0:
        return state, log
    comb = CatSequence(tuple(m * spec.delta / 2.0 for m in range(1, spec.comb_steps + 1)))
    steps = list(log.per_step_probabilities)
    checkpoints = list(log.checkpoints) if log.checkpoints is not None else []
    p_plus, _ = parity_projectors(trunc)
    if isinstance(state, PureState):
        even = np.arange(trunc.dim) % 2 == 0
        psi = state.amplitudes
        for m, alpha in enumerate(comb.alphas, start=1):
            psi = _displace_pure_checked(psi, alpha, trunc, f"comb step {m}")
            phi = np.where(even, psi, 0.0)
            p = float(np.vdot(phi, phi).real) / float(np.vdot(psi, psi).real)
            if p < ZERO_PROBABILITY_THRESHOLD:
                raise ZeroProbability(p, spec.squeeze_stage.M + m)
            steps.append(p)
            psi = phi / np.linalg.norm(phi)
            if keep_checkpoints:
                checkpoints.append(PureState(psi, normalized=True))
        out: PureState | MixedState = PureState(psi, normalized=True)
    else:
        rho = state
        for m, alpha in enumerate(comb.alphas, start=1):
            rho = _displace_mixed_checked(rho, alpha, trunc, f"comb step {m}")
            outcome = cycle_with_projector(rho, p_plus, loss)
            rho = outcome.state
            steps.append(outcome.success_probability)
            if keep_checkpoints:
                checkpoints.append(rho)
        out = rho
    return out, RunLog.from_steps(steps, tuple(checkpoints) if keep_checkpoints else None)
