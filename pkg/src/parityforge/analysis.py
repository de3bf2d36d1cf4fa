"""State characterization: Wigner functions, quadrature statistics, dB
squeezing, fidelities, best-fit squeezed and GKP-envelope parameters, and
the parity-sum Hamiltonian whose ground space certifies the squeezing
protocol.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import minimize

from .errors import DimensionMismatch, NotHermitian, TailOverflow
from .fock import (
    MixedState,
    OperatorMatrix,
    PureState,
    SqueezeParameter,
    TruncationConfig,
    _squeezed_amplitudes,
    displaced_parity,
    displacement_matrix,
    quadrature_matrix,
    squeezed_vacuum,
)

__all__ = [
    "GridSpec",
    "WignerGrid",
    "SqueezingReport",
    "GkpFitReport",
    "wigner",
    "quadrature_variance",
    "covariance_matrix",
    "squeezing_db",
    "fidelity",
    "fit_squeezed",
    "approx_gkp_state",
    "fit_gkp",
    "parity_hamiltonian",
    "ground_state",
]

VACUUM_VARIANCE = 0.25


@dataclass(frozen=True)
class GridSpec:
    """Rectangular phase-space grid, `resolution` points per axis."""

    x_range: tuple[float, float] = (-6.0, 6.0)
    p_range: tuple[float, float] = (-6.0, 6.0)
    resolution: int = 241

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if self.x_range[0] >= self.x_range[1] or self.p_range[0] >= self.p_range[1]:
            raise ValueError("ranges must be increasing intervals")


@dataclass(frozen=True)
class WignerGrid:
    """W sampled on the grid; values[i, j] = W(x[i] + i*p[j])."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        p = np.asarray(self.p, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (x.size, p.size):
            raise ValueError("values shape does not match the axes")
        for arr in (x, p, v):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        """Trapezoidal integral of W over the grid (1 for a contained state)."""
        trapezoid = getattr(np, "trapezoid", None) or np.trapz
        return float(trapezoid(trapezoid(self.values, self.p, axis=1), self.x))


@dataclass(frozen=True)
class SqueezingReport:
    s_db: float
    theta_min: float
    var_min: float
    var_max: float
    best_fit_xi: SqueezeParameter | None = None
    best_fit_fidelity: float | None = None

    def __post_init__(self):
        if self.var_min > self.var_max:
            raise ValueError("var_min exceeds var_max")


@dataclass(frozen=True)
class GkpFitReport:
    r_opt: float
    sigma_env_opt: float
    fidelity: float

    def __post_init__(self):
        if not -1e-9 <= self.fidelity <= 1.0 + 1e-9:
            raise ValueError(f"fidelity {self.fidelity} outside [0, 1]")


def _as_trunc(state: PureState | MixedState) -> TruncationConfig:
    return TruncationConfig(state.dim - 1)


def wigner(state: PureState | MixedState, grid: GridSpec = GridSpec()) -> WignerGrid:
    """Wigner function W(alpha) = (2/pi) Tr[rho (P+(alpha) - P-(alpha))],
    evaluated as the parity expectation in the displaced frame:
    W = (2/pi) <D(-alpha)psi| Pi |D(-alpha)psi> with Pi = diag((-1)^n).

    D(-alpha) is split as D(-x) D(-i p) (the composition phase cancels in
    the expectation), so the grid reuses one displacement per axis value
    instead of one per point.
    """
    trunc = _as_trunc(state)
    dim = trunc.dim
    xs = np.linspace(grid.x_range[0], grid.x_range[1], grid.resolution)
    ps = np.linspace(grid.p_range[0], grid.p_range[1], grid.resolution)
    parity = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    values = np.empty((xs.size, ps.size))
    if isinstance(state, PureState):
        psi = state.unit().amplitudes
        chi = np.empty((dim, ps.size), dtype=complex)
        for j, pv in enumerate(ps):
            chi[:, j] = displacement_matrix(-1j * pv, trunc).entries @ psi
        for i, xv in enumerate(xs):
            phi = displacement_matrix(-xv, trunc).entries @ chi
            values[i] = (2.0 / np.pi) * (parity @ (np.abs(phi) ** 2))
    else:
        rho = state.unit().rho
        sigmas = np.empty((ps.size, dim, dim), dtype=complex)
        for j, pv in enumerate(ps):
            d = displacement_matrix(-1j * pv, trunc).entries
            sigmas[j] = d @ rho @ d.conj().T
        residue = 0.0
        for i, xv in enumerate(xs):
            d = displacement_matrix(-xv, trunc).entries
            k = d.conj().T @ (parity[:, None] * d)
            row = (2.0 / np.pi) * np.einsum("nm,pmn->p", k, sigmas)
            residue = max(residue, float(np.max(np.abs(row.imag))))
            values[i] = row.real
        if residue > 1e-9:
            raise ValueError(f"Wigner imaginary residue {residue:.2e} exceeds 1e-9")
    return WignerGrid(xs, ps, values)


def _expectation(state: PureState | MixedState, op: np.ndarray) -> float:
    if isinstance(state, PureState):
        psi = state.unit().amplitudes
        return float(np.vdot(psi, op @ psi).real)
    rho = state.unit().rho
    return float(np.trace(op @ rho).real)


def quadrature_variance(state: PureState | MixedState, theta: float) -> float:
    """Var(x^(theta)) = <x^2> - <x>^2 for the rotated quadrature."""
    trunc = _as_trunc(state)
    x = quadrature_matrix(theta, trunc).entries
    return _expectation(state, x @ x) - _expectation(state, x) ** 2


def covariance_matrix(state: PureState | MixedState) -> np.ndarray:
    """Symmetrized 2x2 covariance of (x, p)."""
    trunc = _as_trunc(state)
    x = quadrature_matrix(0.0, trunc).entries
    p = quadrature_matrix(np.pi / 2.0, trunc).entries
    ex, ep = _expectation(state, x), _expectation(state, p)
    vxx = _expectation(state, x @ x) - ex * ex
    vpp = _expectation(state, p @ p) - ep * ep
    vxp = _expectation(state, 0.5 * (x @ p + p @ x)) - ex * ep
    return np.array([[vxx, vxp], [vxp, vpp]])


def squeezing_db(state: PureState | MixedState, fit: bool = True) -> SqueezingReport:
    """Squeezing in decibels, S_dB = -10 log10(var_min / (1/4)).

    The minimizing quadrature is found analytically from the covariance
    eigenvectors (exact for the quadratic form, no angle scan).  With
    fit=True the report includes the best-fit squeezed vacuum along that
    orientation.
    """
    cov = covariance_matrix(state)
    evals, evecs = np.linalg.eigh(cov)
    var_min, var_max = float(evals[0]), float(evals[1])
    v = evecs[:, 0]
    theta_min = float(math.atan2(v[1], v[0]) % math.pi)
    s_db = -10.0 * math.log10(var_min / VACUUM_VARIANCE)
    if not fit:
        return SqueezingReport(s_db, theta_min, var_min, var_max)
    xi, f = fit_squeezed(state, theta_fixed=2.0 * theta_min)
    return SqueezingReport(s_db, theta_min, var_min, var_max, xi, f)


def fidelity(a: PureState | MixedState, b: PureState | MixedState) -> float:
    """|<a|b>|^2 for two pure states, <psi|rho|psi> for a pure/mixed pair."""
    if a.dim != b.dim:
        raise DimensionMismatch(f"dimensions differ: {a.dim} vs {b.dim}")
    if isinstance(a, MixedState) and isinstance(b, MixedState):
        raise TypeError("mixed-mixed fidelity is not supported")
    if isinstance(a, PureState) and isinstance(b, PureState):
        return float(
            abs(np.vdot(a.unit().amplitudes, b.unit().amplitudes)) ** 2
        )
    pure, mixed = (a, b) if isinstance(a, PureState) else (b, a)
    psi = pure.unit().amplitudes
    return float(np.vdot(psi, mixed.unit().rho @ psi).real)


def _golden_min(f, lo: float, hi: float, xtol: float) -> float:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_squeezed(state: PureState | MixedState, theta_fixed: float | None = None,
                 r_max: float = 4.0) -> tuple[SqueezeParameter, float]:
    """Best-fit squeezed vacuum: coarse scan of r (step 0.05) followed by a
    golden-section refinement to 1e-4.

    The squeeze phase is theta_fixed when given, otherwise twice the
    minimizing quadrature angle of the state.  Fit candidates are built on
    the truncated space without tail checking (large-r candidates are
    legitimate fit probes even when their untruncated tails spill over).
    """
    dim = state.dim
    if theta_fixed is None:
        theta = 2.0 * squeezing_db(state, fit=False).theta_min
    else:
        theta = float(theta_fixed)

    if isinstance(state, PureState):
        psi = state.unit().amplitudes

        def objective(r: float) -> float:
            return -abs(np.vdot(_squeezed_amplitudes(r, theta, dim), psi)) ** 2
    else:
        rho = state.unit().rho

        def objective(r: float) -> float:
            s = _squeezed_amplitudes(r, theta, dim)
            return -float(np.vdot(s, rho @ s).real)

    grid = np.arange(0.0, r_max + 1e-12, 0.05)
    best = min(grid, key=objective)
    lo, hi = max(0.0, best - 0.05), min(r_max, best + 0.05)
    r_opt = _golden_min(objective, lo, hi, xtol=1e-4)
    if objective(best) < objective(r_opt):
        r_opt = best
    return SqueezeParameter(r_opt, theta), -objective(r_opt)


def _comb_displacements(half_spacing: float, j_count: int,
                        trunc: TruncationConfig) -> list[tuple[np.ndarray, np.ndarray]]:
    """Displacement matrices for comb sites +-(2j+1)*half_spacing, j = 0..j_count-1."""
    out = []
    for j in range(j_count):
        x = (2 * j + 1) * half_spacing
        d_plus = displacement_matrix(x, trunc).entries
        d_minus = displacement_matrix(-x, trunc).entries
        out.append((d_plus, d_minus))
    return out


_ENVELOPE_CUTOFF = 1e-8


def _envelope_weights(sigma_env: float, half_spacing: float,
                      j_max: int | None) -> np.ndarray:
    ws = []
    j = 0
    while True:
        w = math.exp(-(((2 * j + 1) * half_spacing) ** 2) / (2.0 * sigma_env**2))
        if w < _ENVELOPE_CUTOFF and j > 0:
            break
        if j_max is not None and j > j_max:
            break
        ws.append(w)
        j += 1
        if j > 200:
            break
    return np.array(ws)


def approx_gkp_state(r: float, sigma_env: float, delta: float,
                     trunc: TruncationConfig, j_max: int | None = None,
                     strict: bool = True) -> PureState:
    """Gaussian-envelope comb of x-squeezed states,

        sum_j exp(-((2j+1) delta/2)^2 / (2 sigma_env^2)) D((2j+1) delta/2) S(r)|0>

    summed over both signs of j until the envelope weight drops below 1e-8
    (or |j| exceeds j_max), then normalized.  strict=True raises
    TailOverflow when the squeezed seed or a significantly weighted comb
    tooth does not fit under the truncation.
    """
    if sigma_env <= 0 or delta <= 0:
        raise ValueError("sigma_env and delta must be > 0")
    if strict:
        squeezed_vacuum(SqueezeParameter(r), trunc)  # raises on seed overflow
    h = 0.5 * delta
    weights = _envelope_weights(sigma_env, h, j_max)
    seed = _squeezed_amplitudes(r, 0.0, trunc.dim)
    v = np.zeros(trunc.dim, dtype=complex)
    lost_weighted = 0.0
    for j, w in enumerate(weights):
        for sign in (+1.0, -1.0):
            comp = displacement_matrix(sign * (2 * j + 1) * h, trunc).entries @ seed
            lost_weighted += w**2 * max(0.0, 1.0 - float(np.vdot(comp, comp).real))
            v += w * comp
    if strict:
        lost = lost_weighted / (2.0 * float(np.sum(weights**2)))
        if lost > trunc.tail_tolerance:
            raise TailOverflow(lost, trunc.tail_tolerance, what="gkp comb")
    return PureState(v).unit()


def _detect_comb_extent(state: PureState | MixedState, half_spacing: float,
                        trunc: TruncationConfig, rel_threshold: float = 1e-3) -> int:
    """Largest j whose comb site +-(2j+1)*half_spacing carries weight in the
    state, probed with a unit-squeezed test tooth."""
    probe = _squeezed_amplitudes(1.0, 0.0, trunc.dim)
    amps = []
    j = 0
    while ((2 * j + 1) * half_spacing) ** 2 + 3.0 <= trunc.n_cut:
        best = 0.0
        for sign in (+1.0, -1.0):
            tooth = displacement_matrix(sign * (2 * j + 1) * half_spacing, trunc).entries @ probe
            if isinstance(state, PureState):
                best = max(best, abs(np.vdot(tooth, state.unit().amplitudes)))
            else:
                best = max(best, math.sqrt(max(0.0, float(
                    np.vdot(tooth, state.unit().rho @ tooth).real))))
        amps.append(best)
        j += 1
    if not amps:
        return 0
    peak = max(amps)
    j_max = 0
    for j, a in enumerate(amps):
        if a >= rel_threshold * peak:
            j_max = j
    return j_max


def fit_gkp(state: PureState | MixedState, delta: float,
            j_max: int | None | str = "auto") -> GkpFitReport:
    """Best-fit (r, sigma_env) of the Gaussian-envelope comb against the
    state: coarse grid (r in [0.2, 3] step 0.1, sigma_env in [1, 12] step
    0.5) followed by Nelder-Mead refinements from the three best cells.

    j_max="auto" restricts the comb to the teeth the state actually
    populates, which is the family a finite measurement protocol can reach;
    pass j_max=None for the envelope-cutoff (quasi-infinite) comb, or an
    integer for an explicit extent.
    """
    trunc = _as_trunc(state)
    h = 0.5 * delta
    if j_max == "auto":
        extent: int | None = _detect_comb_extent(state, h, trunc)
    else:
        extent = j_max  # type: ignore[assignment]

    j_count = len(_envelope_weights(12.0, h, extent))
    pairs = _comb_displacements(h, j_count, trunc)
    seed_cache: dict[float, list[np.ndarray]] = {}

    def components(r: float) -> list[np.ndarray]:
        key = round(r, 6)
        if key not in seed_cache:
            seed = _squeezed_amplitudes(r, 0.0, trunc.dim)
            seed_cache[key] = [dp @ seed + dm @ seed for dp, dm in pairs]
        return seed_cache[key]

    if isinstance(state, PureState):
        psi = state.unit().amplitudes
    else:
        rho = state.unit().rho

    def fidelity_at(r: float, sigma_env: float) -> float:
        comps = components(r)
        ws = _envelope_weights(sigma_env, h, extent)
        v = np.zeros(trunc.dim, dtype=complex)
        for w, c in zip(ws, comps):
            v += w * c
        nrm = float(np.vdot(v, v).real)
        if nrm <= 0.0:
            return 0.0
        if isinstance(state, PureState):
            return float(abs(np.vdot(v, psi)) ** 2 / nrm)
        return float(np.vdot(v, rho @ v).real / nrm)

    r_grid = np.arange(0.2, 3.0 + 1e-12, 0.1)
    s_grid = np.arange(1.0, 12.0 + 1e-12, 0.5)
    scored = []
    for r in r_grid:
        for s in s_grid:
            scored.append((fidelity_at(r, s), float(r), float(s)))
    scored.sort(reverse=True)

    def objective(params) -> float:
        r = min(max(params[0], 0.05), 3.5)
        s = min(max(params[1], 0.3), 12.0)
        return -fidelity_at(r, s)

    best_f, best_r, best_s = scored[0]
    for f0, r0, s0 in scored[:3]:
        res = minimize(objective, x0=[r0, s0], method="Nelder-Mead",
                       options={"xatol": 1e-4, "fatol": 1e-10})
        r_cand = min(max(float(res.x[0]), 0.05), 3.5)
        s_cand = min(max(float(res.x[1]), 0.3), 12.0)
        f_cand = fidelity_at(r_cand, s_cand)
        if f_cand > best_f:
            best_f, best_r, best_s = f_cand, r_cand, s_cand
    return GkpFitReport(best_r, best_s, min(best_f, 1.0))


def parity_hamiltonian(points, trunc: TruncationConfig) -> OperatorMatrix:
    """H = -sum_n P+(alpha = i t_n): each displaced-parity term rewards
    invariance under the corresponding measurement, so maximally squeezed
    states sit at the bottom of the spectrum (contained in [-N, 0])."""
    points = tuple(float(t) for t in points)
    if len(points) < 1:
        raise ValueError("need at least one measurement point")
    h = np.zeros((trunc.dim, trunc.dim), dtype=complex)
    for t in points:
        h -= displaced_parity(+1, 1j * t, trunc).entries
    h = 0.5 * (h + h.conj().T)
    return OperatorMatrix(h, kind="hermitian")


def ground_state(hamiltonian: OperatorMatrix) -> tuple[float, PureState]:
    """Lowest eigenpair of a Hermitian operator via a dense eigensolve."""
    if hamiltonian.kind != "hermitian":
        raise NotHermitian(f"operator kind is {hamiltonian.kind!r}")
    m = hamiltonian.entries
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > 1e-9 * max(1.0, float(np.max(np.abs(m)))):
        raise NotHermitian(f"max asymmetry {asym:.3e}")
    evals, evecs = eigh(m)
    return float(evals[0]), PureState(evecs[:, 0], normalized=True)
