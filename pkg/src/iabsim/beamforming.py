"""Zero-forcing and hybrid analog/digital precoder design.

The hybrid precoder approximates the (Frobenius-normalised) fully digital
zero-forcing precoder ``F_zf`` by ``F_RF @ F_BB`` where ``F_RF`` holds
unit-modulus phase-shifter weights. The two factors are refined by alternating
least squares, starting from a truncated SVD of ``F_zf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import InfeasiblePowerError, RankDeficientChannelError, ZeroPrecoderError
from .scenario import ScenarioConfig

ZF_CONDITION_CAP = 1e12
GRAM_REGULARIZATION = 1e-12
DEFAULT_TARGET_RESIDUAL = 0.1
DEFAULT_IMPROVEMENT_TOL = 1e-4
DEFAULT_MAX_ITERS = 200


@dataclass(frozen=True)
class PowerAllocation:
    """Per-link transmit powers (W) of one tier."""

    per_link_powers: np.ndarray

    def __post_init__(self):
        p = np.array(self.per_link_powers, dtype=float).ravel()
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("link powers must be finite and non-negative")
        p.setflags(write=False)
        object.__setattr__(self, "per_link_powers", p)

    @classmethod
    def equal(cls, total: float, n_links: int) -> "PowerAllocation":
        return cls(np.full(n_links, total / n_links))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.per_link_powers)

    @property
    def total(self) -> float:
        return float(self.per_link_powers.sum())

    def __len__(self):
        return self.per_link_powers.size


def allocate_powers(config: ScenarioConfig) -> Tuple[PowerAllocation, PowerAllocation, float]:
    """Equal power split at both UAVs.

    Terrestrial links get ``P2 / I`` each. The backhaul gets the same share
    unless ``config.backhaul_power_w`` overrides it, and the donor's remaining
    budget is split evenly over the ``J - 1`` aerial users. The aerial
    allocation is ordered like the rows of ``H_a`` (backhaul last).

    Raises:
        InfeasiblePowerError: when nothing is left for the aerial users.
    """
    n_t = config.num_terrestrial_links
    n_users = config.num_aerial_users
    p_t = config.node_power_w / n_t
    p_b = p_t if config.backhaul_power_w is None else config.backhaul_power_w
    remaining = config.donor_power_w - p_b
    if remaining <= 0:
        raise InfeasiblePowerError(
            f"donor power {config.donor_power_w} W leaves {remaining} W after backhaul share {p_b} W")
    aerial = np.append(np.full(n_users, remaining / n_users), p_b)
    return PowerAllocation(aerial), PowerAllocation(np.full(n_t, p_t)), p_b


def zero_forcing(H: np.ndarray, condition_cap: float = ZF_CONDITION_CAP) -> np.ndarray:
    """Fully digital ZF precoder ``H^H (H H^H)^-1`` for an ``L x N`` channel.

    Raises:
        RankDeficientChannelError: if ``L > N`` or the Gram matrix condition
            number exceeds ``condition_cap`` (typically co-located users).
    """
    H = np.asarray(H)
    L, N = H.shape
    if L > N:
        raise RankDeficientChannelError(f"{L} links cannot be zero-forced with {N} antennas")
    gram = H @ H.conj().T
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > condition_cap:
        raise RankDeficientChannelError(f"channel Gram matrix condition number {cond:.3g} exceeds {condition_cap:.3g}")
    return H.conj().T @ np.linalg.solve(gram, np.eye(L))


def unit_modulus(F: np.ndarray) -> np.ndarray:
    """Project every entry onto the unit circle; zeros map to 1."""
    mag = np.abs(F)
    out = np.ones_like(F, dtype=complex)
    nz = mag > 0
    out[nz] = F[nz] / mag[nz]
    return out


def svd_initialize(F_zf: np.ndarray, n_rf: int, normalize: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Truncated-SVD starting point ``F_RF = U_m``, ``F_BB = S_m V_m^H``.

    With ``normalize`` the analog factor is projected to unit modulus. If
    ``n_rf`` exceeds the rank the extra left singular vectors come with zero
    singular values.
    """
    F_zf = np.asarray(F_zf, dtype=complex)
    if not np.all(np.isfinite(F_zf)):
        raise ValueError("F_zf has non-finite entries")
    N, L = F_zf.shape
    if not 1 <= n_rf <= N:
        raise ValueError(f"need 1 <= n_rf <= N={N}, got {n_rf}")
    U, s, Vh = np.linalg.svd(F_zf, full_matrices=True)
    m = n_rf
    sigma = np.zeros((m, L))
    k = min(m, s.size)
    sigma[np.arange(k), np.arange(k)] = s[:k]
    F_rf = U[:, :m]
    F_bb = sigma @ Vh
    if normalize:
        F_rf = unit_modulus(F_rf)
    return F_rf, F_bb


def _solve_rf(target, F_bb, eps):
    # min ||target - F_rf F_bb||: F_rf = target F_bb^H (F_bb F_bb^H + eps I)^-1
    G = F_bb @ F_bb.conj().T
    G = G + eps * np.eye(G.shape[0])
    return np.linalg.solve(G.T, (target @ F_bb.conj().T).T).T


def _solve_bb(target, F_rf, eps):
    G = F_rf.conj().T @ F_rf
    G = G + eps * np.eye(G.shape[0])
    return np.linalg.solve(G, F_rf.conj().T @ target)


def _residual(target, F_rf, F_bb) -> float:
    return float(np.linalg.norm(target - F_rf @ F_bb, "fro"))


@dataclass(frozen=True)
class HybridPrecoder:
    """Result of the alternating hybrid decomposition of one tier.

    ``F_RF @ F_BB`` approximates ``F_zf / ||F_zf||_F``; ``residual`` is the
    Frobenius error of that approximation. ``F_hyb`` is the power-scaled
    transmit precoder once powers are attached, otherwise the raw product.
    ``residual_trace[k]`` is the residual after iteration ``k`` (entry 0 is
    the initial point); ``rf_step_residuals[k-1]`` the residual right after
    the analog update of iteration ``k``.
    """

    F_RF: np.ndarray = field(repr=False)
    F_BB: np.ndarray = field(repr=False)
    F_hyb: np.ndarray = field(repr=False)
    residual: float
    iterations_used: int
    converged: bool
    residual_trace: Tuple[float, ...] = field(repr=False)
    rf_step_residuals: Tuple[float, ...] = field(repr=False, default=())
    init: str = "svd"
    history: Optional[List[Tuple[np.ndarray, np.ndarray]]] = field(repr=False, default=None, compare=False)

    def iterations_to(self, target: float) -> Optional[int]:
        """First iteration whose residual is ``<= target``, or None."""
        for k, r in enumerate(self.residual_trace):
            if r <= target:
                return k
        return None

    def with_powers(self, powers: PowerAllocation) -> "HybridPrecoder":
        from dataclasses import replace
        return replace(self, F_hyb=scale_to_power(self.F_RF, self.F_BB, powers))


def hybrid_decompose(F_zf: np.ndarray, n_rf: int,
                     target_residual: float = DEFAULT_TARGET_RESIDUAL,
                     max_iters: int = DEFAULT_MAX_ITERS,
                     improvement_tol: Optional[float] = DEFAULT_IMPROVEMENT_TOL,
                     init: str = "svd",
                     rng: Optional[np.random.Generator] = None,
                     normalize_target: bool = True,
                     refit_digital: bool = True,
                     keep_history: bool = False) -> HybridPrecoder:
    """Alternating-minimisation hybrid decomposition of a digital precoder.

    Each iteration solves the unconstrained least-squares problem for the
    analog factor, projects it to unit modulus, then solves least squares for
    the digital factor. Iteration stops as soon as the residual reaches
    ``target_residual``, the per-iteration improvement drops to
    ``improvement_tol`` (None disables it) or ``max_iters`` is hit; the last
    case is reported through ``converged=False`` rather than an exception.

    ``init`` selects the starting analog matrix: ``"svd"`` (truncated SVD of
    the target), ``"random"`` (uniform random phases) or ``"ones"``. The
    digital factor starts at its least-squares fit to that analog matrix;
    ``refit_digital=False`` keeps the raw ``S_m V_m^H`` of the SVD start, whose
    scale no longer matches the unit-modulus analog factor.
    """
    F_zf = np.asarray(F_zf, dtype=complex)
    if not np.all(np.isfinite(F_zf)):
        raise ValueError("F_zf has non-finite entries")
    if target_residual <= 0:
        raise ValueError("target_residual must be positive")
    target = F_zf
    if normalize_target:
        norm = np.linalg.norm(F_zf, "fro")
        if norm == 0:
            raise ZeroPrecoderError("cannot decompose an all-zero precoder")
        target = F_zf / norm
    N, L = target.shape
    eps = GRAM_REGULARIZATION

    if init == "svd":
        F_rf, F_bb = svd_initialize(target, n_rf)
    elif init == "random":
        rng = rng if rng is not None else np.random.default_rng()
        F_rf = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(N, n_rf)))
    elif init == "ones":
        F_rf = np.ones((N, n_rf), dtype=complex)
    else:
        raise ValueError(f"unknown init {init!r}")
    if init != "svd" or refit_digital:
        F_bb = _solve_bb(target, F_rf, eps)

    trace = [_residual(target, F_rf, F_bb)]
    rf_trace = []
    history = [(F_rf, F_bb)] if keep_history else None
    k = 0
    while trace[-1] > target_residual and k < max_iters:
        k += 1
        F_rf = unit_modulus(_solve_rf(target, F_bb, eps))
        rf_trace.append(_residual(target, F_rf, F_bb))
        F_bb = _solve_bb(target, F_rf, eps)
        trace.append(_residual(target, F_rf, F_bb))
        if keep_history:
            history.append((F_rf, F_bb))
        if improvement_tol is not None and trace[-2] - trace[-1] <= improvement_tol:
            break

    return HybridPrecoder(
        F_RF=F_rf, F_BB=F_bb, F_hyb=F_rf @ F_bb, residual=trace[-1], iterations_used=k,
        converged=trace[-1] <= target_residual, residual_trace=tuple(trace),
        rf_step_residuals=tuple(rf_trace), init=init, history=history)


def scale_to_power(F_RF: np.ndarray, F_BB: np.ndarray, powers: PowerAllocation) -> np.ndarray:
    """Give stream ``l`` of ``F_RF @ F_BB`` exactly the power ``p_l``.

    Every column is normalised to unit norm and weighted by ``sqrt(p_l)``, so
    ``trace(F^H F) = sum(p)``. For a single stream this is
    ``F / ||F||_F * sqrt(p)``. An all-zero column stays zero.

    Raises:
        ZeroPrecoderError: if the whole product is zero.
    """
    F = np.asarray(F_RF) @ np.asarray(F_BB)
    p = np.asarray(powers.per_link_powers if isinstance(powers, PowerAllocation) else powers, dtype=float)
    if p.size != F.shape[1]:
        raise ValueError(f"{p.size} powers for {F.shape[1]} links")
    norms = np.linalg.norm(F, axis=0)
    if not np.any(norms > 0):
        raise ZeroPrecoderError("precoder product is zero")
    scale = np.divide(np.sqrt(p), norms, out=np.zeros_like(norms), where=norms > 0)
    return F * scale[None, :]


def design_precoder(H: np.ndarray, powers: PowerAllocation, n_rf: Optional[int] = None,
                    mode: str = "hybrid", **hybrid_kwargs) -> Tuple[np.ndarray, Optional[HybridPrecoder]]:
    """Power-scaled transmit precoder for one tier.

    ``mode="digital"`` returns the scaled ZF precoder; ``mode="hybrid"``
    decomposes it first. Returns ``(F, hybrid_or_None)``.
    """
    F_zf = zero_forcing(H)
    if mode == "digital":
        return scale_to_power(F_zf, np.eye(F_zf.shape[1]), powers), None
    if mode != "hybrid":
        raise ValueError(f"unknown precoder mode {mode!r}")
    n_rf = H.shape[0] if n_rf is None else n_rf
    hp = hybrid_decompose(F_zf, n_rf, **hybrid_kwargs).with_powers(powers)
    return hp.F_hyb, hp
