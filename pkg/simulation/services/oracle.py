"""
Brute-force Fock-space evolution under the OPA Hamiltonian.

Phase convention: the propagator is exp(g (a_H a_V - a_H^+ a_V^+)), i.e.
H = -i a_H^+ a_V^+ + i a_H a_V with chi t folded into g. The matrix element
<n+1, m+1|H|n, m> is therefore -i sqrt((n+1)(m+1)). With this choice an
injected |+> photon evolves into the |Phi+> macro-state with exactly the
signs of the closed-form amplitude table; |Phi-> agrees up to the mode
phase (-1)^(i+j), so it is compared by magnitude.

The Hamiltonian conserves n_H - n_V, so evolution is done sector by
sector with a Hermitian eigendecomposition of each block.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import linalg, sparse

from ..conf import sim_setting
from ..exceptions import (
    CutoffMismatchError,
    CutoffTooSmallError,
    EvolutionAccuracyError,
    InvalidParameterError,
)
from .fock_opa import gain_params, macro_amplitudes, photon_stats_closed

logger = logging.getLogger(__name__)

HV_BASIS = 'hv'
PM_BASIS = 'pm'

UNITARITY_TOLERANCE = 1e-12


@dataclass(frozen=True)
class TwoModeFockState:
    """
    Amplitudes on the (n_1, n_2) Fock grid, n_1, n_2 <= n_max.

    ``basis`` is 'hv' for the H/V polarization modes and 'pm' for the
    +/- modes. ``leakage`` is the probability found in the cutoff shell
    after the last evolution.
    """
    n_max: int
    amplitudes: np.ndarray
    leakage: float = 0.0
    basis: str = HV_BASIS

    @classmethod
    def vacuum(cls, n_max: int) -> 'TwoModeFockState':
        return cls.fock(n_max, 0, 0)

    @classmethod
    def fock(cls, n_max: int, n_1: int, n_2: int, basis: str = HV_BASIS) -> 'TwoModeFockState':
        _check_cutoff(n_max)
        if not (0 <= n_1 <= n_max and 0 <= n_2 <= n_max):
            raise InvalidParameterError(f"Fock state |{n_1}, {n_2}> outside cutoff {n_max}")
        amplitudes = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        amplitudes[n_1, n_2] = 1.0
        return cls(n_max, amplitudes, 0.0, basis)

    @classmethod
    def injected_qubit(cls, n_max: int, phi: float = 0.0) -> 'TwoModeFockState':
        """Single photon 2^-1/2 (|1_H, 0_V> + e^{i phi} |0_H, 1_V>)."""
        _check_cutoff(n_max)
        amplitudes = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        amplitudes[1, 0] = 1.0 / np.sqrt(2.0)
        amplitudes[0, 1] = np.exp(1j * phi) / np.sqrt(2.0)
        return cls(n_max, amplitudes, 0.0, HV_BASIS)

    @property
    def vector(self) -> np.ndarray:
        """Flat amplitude vector, index n_1 * (n_max + 1) + n_2."""
        return self.amplitudes.reshape(-1)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def shell_probability(self) -> float:
        """Probability with n_1 = n_max or n_2 = n_max."""
        prob = np.abs(self.amplitudes) ** 2
        return float(prob[-1, :].sum() + prob[:-1, -1].sum())


def _check_cutoff(n_max: int):
    if int(n_max) != n_max or n_max < 1:
        raise InvalidParameterError(f"Fock cutoff must be an integer >= 1, got {n_max}")


def _flat_index(n_max: int, n_1: int, n_2: int) -> int:
    return n_1 * (n_max + 1) + n_2


@dataclass(frozen=True)
class HamiltonianMatrix:
    n_max: int
    matrix: sparse.csr_matrix

    @property
    def dimension(self) -> int:
        return (self.n_max + 1) ** 2

    def hermiticity_residual(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def trace(self) -> complex:
        return complex(self.matrix.diagonal().sum())

    def difference_commutator_residual(self) -> float:
        """Largest entry of [H, N_H - N_V] on the truncated space."""
        n = np.arange(self.n_max + 1)
        difference = (n[:, None] - n[None, :]).reshape(-1).astype(float)
        d_op = sparse.diags(difference)
        commutator = self.matrix @ d_op - d_op @ self.matrix
        return float(abs(commutator).max()) if commutator.nnz else 0.0


def build_hamiltonian(n_max: int) -> HamiltonianMatrix:
    """Sparse OPA Hamiltonian on the (n_max + 1)^2 dimensional grid."""
    _check_cutoff(n_max)
    rows: List[int] = []
    cols: List[int] = []
    values: List[complex] = []
    for n_h in range(n_max):
        for n_v in range(n_max):
            weight = np.sqrt((n_h + 1) * (n_v + 1))
            lower = _flat_index(n_max, n_h, n_v)
            upper = _flat_index(n_max, n_h + 1, n_v + 1)
            rows += [upper, lower]
            cols += [lower, upper]
            values += [-1j * weight, 1j * weight]
    dim = (n_max + 1) ** 2
    matrix = sparse.csr_matrix((values, (rows, cols)), shape=(dim, dim), dtype=complex)
    return HamiltonianMatrix(n_max, matrix)


def _spectral_propagator(hermitian: np.ndarray, t: float) -> np.ndarray:
    """exp(-i t h) for a small dense Hermitian block, certified unitary."""
    eigenvalues, vectors = linalg.eigh(hermitian)
    propagator = (vectors * np.exp(-1j * t * eigenvalues)) @ vectors.conj().T
    residual = np.max(np.abs(propagator.conj().T @ propagator - np.eye(len(hermitian))))
    if residual > UNITARITY_TOLERANCE:
        raise EvolutionAccuracyError(f"Propagator unitarity residual {residual:.3e}")
    return propagator


@lru_cache(maxsize=16)
def _sector_blocks(n_max: int) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
    """Per n_H - n_V sector: the n_H values spanned and the Hamiltonian block."""
    blocks = {}
    for difference in range(-n_max, n_max + 1):
        n_h = np.arange(max(0, difference), min(n_max, n_max + difference) + 1)
        n_v = n_h - difference
        block = np.zeros((len(n_h), len(n_h)), dtype=complex)
        for k in range(len(n_h) - 1):
            weight = np.sqrt((n_h[k] + 1) * (n_v[k] + 1))
            block[k + 1, k] = -1j * weight
            block[k, k + 1] = 1j * weight
        blocks[difference] = (n_h, block)
    return blocks


def evolve(state: TwoModeFockState, g: float,
           leakage_threshold: Optional[float] = None) -> TwoModeFockState:
    """
    Apply exp(-i g H) to ``state``. Raises CutoffTooSmallError when the
    evolved state leaves more than ``leakage_threshold`` in the cutoff shell.
    """
    if state.basis != HV_BASIS:
        raise InvalidParameterError("Evolution is defined on the H/V mode basis")
    if not np.isfinite(g) or g < 0:
        raise InvalidParameterError(f"Gain must be finite and non-negative, got {g}")
    if leakage_threshold is None:
        leakage_threshold = sim_setting('LEAKAGE_THRESHOLD')
    if g == 0:
        return TwoModeFockState(state.n_max, state.amplitudes.copy(),
                                state.shell_probability(), HV_BASIS)

    evolved = np.zeros_like(state.amplitudes)
    for difference, (n_h, block) in _sector_blocks(state.n_max).items():
        n_v = n_h - difference
        segment = state.amplitudes[n_h, n_v]
        if not np.any(segment):
            continue
        evolved[n_h, n_v] = _spectral_propagator(block, g) @ segment

    result = TwoModeFockState(state.n_max, evolved, 0.0, HV_BASIS)
    leakage = result.shell_probability()
    logger.debug("Evolved to g=%.6g on n_max=%d, leakage %.3e", g, state.n_max, leakage)
    if leakage > leakage_threshold:
        raise CutoffTooSmallError(leakage, state.n_max)
    return TwoModeFockState(state.n_max, evolved, leakage, HV_BASIS)


@lru_cache(maxsize=256)
def _beam_splitter_block(total: int) -> np.ndarray:
    """
    50:50 rotation of the ``total``-photon subspace, index = photons in the
    first mode, followed by the (-1)^n phase on the second output mode so
    that a_H^+ -> (a_+^+ + a_-^+)/sqrt2 and a_V^+ -> (a_+^+ - a_-^+)/sqrt2.
    """
    k = np.arange(total + 1)
    generator = np.zeros((total + 1, total + 1))
    generator[k[:-1] + 1, k[:-1]] = np.sqrt((k[:-1] + 1) * (total - k[:-1]))
    generator[k[1:] - 1, k[1:]] = -np.sqrt(k[1:] * (total - k[1:] + 1))
    rotation = _spectral_propagator(1j * generator, np.pi / 4)
    second_mode_phase = np.where((total - k) % 2 == 0, 1.0, -1.0)
    return second_mode_phase[:, None] * rotation


def rotate_to_pm_basis(state: TwoModeFockState) -> TwoModeFockState:
    """
    Change of mode basis H/V -> +/-. The output grid has cutoff 2 n_max so
    that every photon-number block is mapped in full.
    """
    if state.basis != HV_BASIS:
        raise InvalidParameterError("State is already in the +/- basis")
    n_max = state.n_max
    out_max = 2 * n_max
    rotated = np.zeros((out_max + 1, out_max + 1), dtype=complex)
    for total in range(out_max + 1):
        k = np.arange(total + 1)
        inside = (k <= n_max) & (total - k <= n_max)
        block = np.zeros(total + 1, dtype=complex)
        block[inside] = state.amplitudes[k[inside], total - k[inside]]
        if not np.any(block):
            continue
        rotated[k, total - k] = _beam_splitter_block(total) @ block
    return TwoModeFockState(out_max, rotated, state.leakage, PM_BASIS)


def overlap(a: TwoModeFockState, b: TwoModeFockState) -> complex:
    """Inner product <a|b>."""
    if a.n_max != b.n_max:
        raise CutoffMismatchError(f"Cutoffs differ: {a.n_max} vs {b.n_max}")
    if a.basis != b.basis:
        raise InvalidParameterError(f"Mode bases differ: {a.basis} vs {b.basis}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def photon_number_moments(state: TwoModeFockState) -> Tuple[float, float]:
    """Mean photon numbers of the two modes, normalised by the state norm."""
    prob = np.abs(state.amplitudes) ** 2
    norm = prob.sum()
    n = np.arange(state.n_max + 1)
    return float(prob.sum(axis=1) @ n / norm), float(prob.sum(axis=0) @ n / norm)


def macro_state(g: float, sign: int = 1, n_max: Optional[int] = None) -> TwoModeFockState:
    """Evolve the injected |+> (sign=+1) or |-> (sign=-1) photon to gain g."""
    if sign not in (1, -1):
        raise InvalidParameterError(f"Macro-state sign must be +1 or -1, got {sign}")
    if n_max is None:
        n_max = sim_setting('DEFAULT_N_MAX')
    phi = 0.0 if sign == 1 else np.pi
    return evolve(TwoModeFockState.injected_qubit(n_max, phi), g)


def recommended_cutoff(m_bar: float) -> int:
    """Cutoff guidance n_max >= 12 m + 20."""
    return int(np.ceil(12.0 * m_bar + 20.0))


@dataclass(frozen=True)
class OracleComparison:
    g: float
    sign: int
    max_deviation: float
    selection_residual: float
    leakage: float
    captured_norm: float


def oracle_equivalence(g: float,
                       n_max: Optional[int] = None,
                       tail_tolerance: Optional[float] = None,
                       sign: int = 1) -> OracleComparison:
    """
    Compare the evolved and rotated macro-state with the closed-form table.

    Amplitudes are compared on the support of the truncated table, after
    aligning the evolved state by the phase of its largest shared
    component. For sign=-1 magnitudes are compared.
    ``selection_residual`` is the amplitude norm outside (odd, even) kets.
    """
    if n_max is None:
        n_max = sim_setting('DEFAULT_N_MAX')
    rotated = rotate_to_pm_basis(macro_state(g, sign, n_max))
    amps = macro_amplitudes(gain_params(g), tail_tolerance)

    size = rotated.n_max + 1
    expected = np.zeros((size, size))
    in_table = np.zeros((size, size), dtype=bool)
    aligned_n, orthogonal_n = amps.photon_counts()
    keep_i = aligned_n < size
    keep_j = orthogonal_n < size
    support = np.ix_(aligned_n[keep_i], orthogonal_n[keep_j])
    expected[support] = amps.table()[np.ix_(keep_i, keep_j)]
    in_table[support] = True

    observed = rotated.amplitudes
    if sign == -1:
        observed = observed.T

    n = np.arange(size)
    allowed = (n[:, None] % 2 == 1) & (n[None, :] % 2 == 0)
    selection_residual = float(np.sqrt(np.sum(np.abs(observed[~allowed]) ** 2)))

    if sign == 1:
        anchor = np.unravel_index(np.argmax(np.abs(expected)), expected.shape)
        phase = observed[anchor] / abs(observed[anchor]) * np.sign(expected[anchor])
        deviation = np.abs(observed * np.conj(phase) - expected)
    else:
        deviation = np.abs(np.abs(observed) - np.abs(expected))
    max_deviation = float(deviation[in_table].max())
    logger.info(
        "Oracle at g=%.6g (sign %+d): max deviation %.3e, selection residual %.3e",
        g, sign, max_deviation, selection_residual,
    )
    return OracleComparison(g, sign, max_deviation, selection_residual,
                            rotated.leakage, amps.captured_norm)


def phase_fringe_moments(g: float, phi: float,
                         n_max: Optional[int] = None) -> Tuple[float, float, float, float]:
    """
    Brute-force N+(phi), N-(phi) for a trigger qubit of phase ``phi``,
    returned with the closed-form values: (n_plus, n_minus, closed_plus,
    closed_minus).
    """
    if n_max is None:
        n_max = sim_setting('DEFAULT_N_MAX')
    evolved = evolve(TwoModeFockState.injected_qubit(n_max, phi), g)
    n_plus, n_minus = photon_number_moments(rotate_to_pm_basis(evolved))
    closed_plus, closed_minus, _ = photon_stats_closed(gain_params(g), phi)
    return n_plus, n_minus, closed_plus, closed_minus
