"""
Macro-state amplitudes and photon-counting statistics of the
quantum-injected optical parametric amplifier.

A single photon injected with polarization |+> (or |->) is amplified into a
macro-state whose aligned mode carries 2i+1 photons and whose orthogonal
mode carries 2j photons with amplitude

    C^-2 (-G/2)^i (G/2)^j sqrt((2i+1)! (2j)!) / (i! j!)

where C = cosh g and G = tanh g. The amplitude factorises into an aligned
factor and an orthogonal factor, each of which is normalised on its own;
the table is stored in that factorised form.
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln

from ..conf import sim_setting
from ..exceptions import (
    InvalidParameterError,
    TruncationInfeasibleError,
    UnderTruncatedError,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

MIN_MOMENT_NORM = 0.999


@dataclass(frozen=True)
class GainParams:
    """Derived OPA quantities for a nonlinear gain g."""
    g: float
    big_c: float
    gamma: float
    m_bar: float


def gain_params(g: float) -> GainParams:
    """Return (C, G, m) = (cosh g, tanh g, sinh^2 g) for a gain g >= 0."""
    try:
        g = float(g)
    except (TypeError, ValueError):
        raise InvalidParameterError(f"Gain must be a number, got {g!r}")
    if not np.isfinite(g) or g < 0:
        raise InvalidParameterError(f"Gain must be finite and non-negative, got {g}")
    with np.errstate(over='ignore'):
        big_c, m_bar = np.cosh(g), np.sinh(g) ** 2
        overflow = not np.isfinite(4.0 * m_bar + 1.0)
    if overflow:
        raise InvalidParameterError(f"Gain {g} overflows the mean photon number")
    return GainParams(
        g=g,
        big_c=float(big_c),
        gamma=float(np.tanh(g)),
        m_bar=float(m_bar),
    )


def total_photons(params: GainParams) -> float:
    """Mean photon number summed over both polarization modes, 4m + 1."""
    return 4.0 * params.m_bar + 1.0


@dataclass(frozen=True)
class MacroStateAmplitudes:
    """
    Truncated amplitude table of a macro-state.

    ``aligned[i]`` is the factor of the |2i+1> ket in the injected mode,
    ``orthogonal[j]`` the factor of the |2j> ket in the other mode; the
    amplitude of (i, j) is their product.
    """
    params: GainParams
    aligned: np.ndarray
    orthogonal: np.ndarray
    captured_norm: float
    i_max: int = field(init=False)
    j_max: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'i_max', len(self.aligned) - 1)
        object.__setattr__(self, 'j_max', len(self.orthogonal) - 1)

    def amplitude(self, i: int, j: int) -> float:
        if i < 0 or j < 0:
            raise InvalidParameterError(f"Amplitude indices must be non-negative, got ({i}, {j})")
        if i > self.i_max or j > self.j_max:
            return 0.0
        return float(self.aligned[i] * self.orthogonal[j])

    def table(self) -> np.ndarray:
        """Dense (i_max+1, j_max+1) array of amplitudes."""
        return np.outer(self.aligned, self.orthogonal)

    def probabilities(self) -> np.ndarray:
        return self.table() ** 2

    def photon_counts(self) -> Tuple[np.ndarray, np.ndarray]:
        """Photon numbers (2i+1, 2j) carried by the stored kets."""
        i = np.arange(self.i_max + 1)
        j = np.arange(self.j_max + 1)
        return 2 * i + 1, 2 * j


def _log_factor_tables(params: GainParams, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Log-magnitudes of the aligned and orthogonal factors for indices < size."""
    k = np.arange(size, dtype=float)
    log_half_gamma = np.log(params.gamma / 2.0)
    log_c = np.log(params.big_c)
    log_aligned = (
        -1.5 * log_c + k * log_half_gamma
        + 0.5 * gammaln(2 * k + 2) - gammaln(k + 1)
    )
    log_orthogonal = (
        -0.5 * log_c + k * log_half_gamma
        + 0.5 * gammaln(2 * k + 1) - gammaln(k + 1)
    )
    return log_aligned, log_orthogonal


def _aligned_tails(prob: np.ndarray, gamma_sq: float) -> np.ndarray:
    """Upper bounds on the aligned-mode probability beyond each index.

    Successive probability ratios G^2 (1 + 1/(2(k+1))) fall towards G^2, so
    once a ratio is below one the remaining series is dominated by a
    geometric one. Elsewhere the exact marginal remainder is used.
    """
    exact = np.clip(1.0 - np.cumsum(prob), 0.0, None)
    nxt = np.append(prob[1:], 0.0)
    k = np.arange(len(prob), dtype=float)
    ratio = gamma_sq * (1.0 + 1.0 / (2.0 * (k + 2.0)))
    with np.errstate(divide='ignore'):
        geometric = nxt / (1.0 - ratio)
    return np.where(ratio < 1.0, geometric, exact)


def _orthogonal_tails(prob: np.ndarray, big_c: float) -> np.ndarray:
    """Upper bounds on the orthogonal-mode probability beyond each index.

    Ratios G^2 (1 - 1/(2(k+1))) rise towards G^2, so the tail after q_k is
    bounded by q_(k+1) / (1 - G^2) = q_(k+1) C^2.
    """
    nxt = np.append(prob[1:], 0.0)
    return nxt * big_c ** 2


def macro_amplitudes(params: GainParams,
                     tail_tolerance: Optional[float] = None) -> MacroStateAmplitudes:
    """
    Enumerate the macro-state amplitudes until at most ``tail_tolerance``
    probability is left outside the table.

    |Phi+> and |Phi-> share this table, each in its own aligned and
    orthogonal modes.
    """
    if tail_tolerance is None:
        tail_tolerance = sim_setting('TAIL_TOLERANCE')
    if not 0.0 < tail_tolerance < 1.0:
        raise InvalidParameterError(f"Tail tolerance must lie in (0, 1), got {tail_tolerance}")
    if params.g == 0.0:
        return MacroStateAmplitudes(params, np.ones(1), np.ones(1), 1.0)

    gain_cap = sim_setting('AMPLITUDE_GAIN_CAP')
    if params.g > gain_cap:
        raise TruncationInfeasibleError(
            f"Amplitude enumeration is limited to g <= {gain_cap}, got g = {params.g}",
            achieved_norm=0.0,
        )

    size = int(sim_setting('AMPLITUDE_INDEX_CAP')) + 1
    log_aligned, log_orthogonal = _log_factor_tables(params, size)
    prob_aligned = np.exp(2.0 * log_aligned)
    prob_orthogonal = np.exp(2.0 * log_orthogonal)
    tail_aligned = _aligned_tails(prob_aligned, params.gamma ** 2)
    tail_orthogonal = _orthogonal_tails(prob_orthogonal, params.big_c)

    i_max = j_max = 0
    while tail_aligned[i_max] + tail_orthogonal[j_max] > tail_tolerance:
        grow_aligned = tail_aligned[i_max] >= tail_orthogonal[j_max]
        if grow_aligned:
            i_max += 1
        else:
            j_max += 1
        if i_max >= size - 1 or j_max >= size - 1:
            achieved = float(prob_aligned[:i_max + 1].sum() * prob_orthogonal[:j_max + 1].sum())
            raise TruncationInfeasibleError(
                f"Truncation search hit the index cap {size - 1} at g = {params.g}",
                achieved_norm=achieved,
            )

    alternating = np.where(np.arange(i_max + 1) % 2 == 0, 1.0, -1.0)
    aligned = alternating * np.exp(log_aligned[:i_max + 1])
    orthogonal = np.exp(log_orthogonal[:j_max + 1])
    captured = float(np.sum(aligned ** 2) * np.sum(orthogonal ** 2))
    logger.debug(
        "Macro-state at g=%.6g truncated at i_max=%d, j_max=%d, norm=%.15f",
        params.g, i_max, j_max, captured,
    )
    return MacroStateAmplitudes(params, aligned, orthogonal, min(captured, 1.0))


def moments_from_amplitudes(amps: MacroStateAmplitudes) -> Tuple[float, float]:
    """Mean photon numbers (aligned, orthogonal) of a truncated table."""
    if not amps.captured_norm > MIN_MOMENT_NORM:
        raise UnderTruncatedError(amps.captured_norm)
    n_aligned_kets, n_orthogonal_kets = amps.photon_counts()
    p_aligned = amps.aligned ** 2
    p_orthogonal = amps.orthogonal ** 2
    n_aligned = float(np.dot(p_aligned, n_aligned_kets) / p_aligned.sum())
    n_orthogonal = float(np.dot(p_orthogonal, n_orthogonal_kets) / p_orthogonal.sum())
    return n_aligned, n_orthogonal


def _as_output(values: np.ndarray):
    return float(values) if np.ndim(values) == 0 else values


def photon_stats_closed(params: GainParams, phi: ArrayLike):
    """
    Mean photon numbers (N+, N-, N+ - N-) in the +/- basis for a trigger
    qubit of phase ``phi``. Scalars in, floats out; arrays in, arrays out.
    """
    cos_phi = np.cos(np.asarray(phi, dtype=float))
    coherent = 2.0 * params.m_bar + 1.0
    n_plus = params.m_bar + 0.5 * coherent * (1.0 + cos_phi)
    n_minus = params.m_bar + 0.5 * coherent * (1.0 - cos_phi)
    n_diff = coherent * cos_phi
    return _as_output(n_plus), _as_output(n_minus), _as_output(n_diff)


def visibility(params: GainParams) -> float:
    """
    Single-photon-trigger fringe visibility (2m + 1) / (4m + 1).

    Strictly above 1/2 for every finite gain, but in float64 the excess
    0.5 / (4m + 1) drops below half an ulp of 0.5 from g ~ 18.4 on, where the
    returned value is exactly 0.5.
    """
    # 1/2 + 1/2(4m+1), exactly 1 at m = 0
    return 0.5 + 0.5 / total_photons(params)


@dataclass(frozen=True)
class FringeCurve:
    phases: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray
    n_diff: np.ndarray
    degradation: float
    m_bar: float

    def __len__(self):
        return len(self.phases)

    def contrast(self) -> float:
        """Measured (max - min) / (max + min) of the n_plus samples."""
        if len(self.n_plus) == 0:
            return 0.0
        top = float(np.max(self.n_plus))
        bottom = float(np.min(self.n_plus))
        return (top - bottom) / (top + bottom)

    def opposed(self) -> 'FringeCurve':
        """The fringe of the opposite macro-state, shifted by pi in phase."""
        return FringeCurve(
            phases=self.phases,
            n_plus=self.n_minus,
            n_minus=self.n_plus,
            n_diff=-self.n_diff,
            degradation=self.degradation,
            m_bar=self.m_bar,
        )


def fringe_curve(params: GainParams,
                 phases: ArrayLike,
                 degradation: float = 1.0) -> FringeCurve:
    """
    Photon-number fringes versus trigger phase, with the contrast scaled by
    ``degradation``. The total n_plus + n_minus is held at 4m + 1.
    """
    if not 0.0 < degradation <= 1.0:
        raise InvalidParameterError(f"Degradation must lie in (0, 1], got {degradation}")
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    total = total_photons(params)
    n_diff = degradation * (2.0 * params.m_bar + 1.0) * np.cos(phases)
    return FringeCurve(
        phases=phases,
        n_plus=0.5 * (total + n_diff),
        n_minus=0.5 * (total - n_diff),
        n_diff=n_diff,
        degradation=float(degradation),
        m_bar=params.m_bar,
    )
