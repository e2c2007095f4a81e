from typing import Any, Dict

from django.conf import settings

DEFAULTS: Dict[str, Any] = {
    # Probability allowed outside the enumerated amplitude table
    'TAIL_TOLERANCE': 1e-10,
    # Largest gain for which the amplitude series is enumerated
    'AMPLITUDE_GAIN_CAP': 3.0,
    # Hard cap on either amplitude index during the truncation search
    'AMPLITUDE_INDEX_CAP': 4096,
    # Cutoff-shell probability above which an evolved state is rejected
    'LEAKAGE_THRESHOLD': 1e-8,
    'DEFAULT_N_MAX': 80,
    # Half-width of the masked resonance region, in atomic linewidths
    'RESONANCE_CUTOFF_LINEWIDTHS': 10.0,
    # Measured single-photon fringe visibility
    'EXPERIMENTAL_DEGRADATION': 0.13,
    'CSV_FLOAT_FORMAT': '%.17g',
    # Scan points per worker task in reflectivity spectra
    'SPECTRUM_CHUNK': 65536,
}


def sim_setting(name: str) -> Any:
    """Return a simulation setting, falling back to the packaged default."""
    if name not in DEFAULTS:
        raise KeyError(f"Unknown simulation setting: {name}")
    overrides = getattr(settings, 'SIMULATION', None) or {}
    return overrides.get(name, DEFAULTS[name])
