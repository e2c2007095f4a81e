import json
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

import numpy as np
import pandas as pd

from ..conf import sim_setting
from .bragg_stack import ReflectivitySpectrum
from .experiment import DisplacementFringe
from .fock_opa import FringeCurve

FRINGE_COLUMNS = ['phi_rad', 'n_plus', 'n_minus', 'n_diff']
SPECTRUM_COLUMNS = ['detuning_hz', 'wavelength_m', 'epsilon', 'reflectivity', 'masked']
DISPLACEMENT_COLUMNS = ['phi_rad', 'active_photons', 'displacement_m', 'feasible']

FORMATS = ('csv', 'json')


def fringe_frame(curve: FringeCurve) -> pd.DataFrame:
    return pd.DataFrame({
        'phi_rad': curve.phases,
        'n_plus': curve.n_plus,
        'n_minus': curve.n_minus,
        'n_diff': curve.n_diff,
    }, columns=FRINGE_COLUMNS)


def spectrum_frame(spectrum: ReflectivitySpectrum) -> pd.DataFrame:
    return pd.DataFrame({
        'detuning_hz': spectrum.detunings,
        'wavelength_m': spectrum.wavelengths,
        'epsilon': spectrum.epsilon,
        'reflectivity': spectrum.reflectivity,
        'masked': spectrum.masked.astype(bool),
    }, columns=SPECTRUM_COLUMNS)


def displacement_frame(fringe: DisplacementFringe) -> pd.DataFrame:
    return pd.DataFrame({
        'phi_rad': fringe.phases,
        'active_photons': fringe.active_photons,
        'displacement_m': fringe.displacement,
        'feasible': np.full(len(fringe.phases), fringe.feasible),
    }, columns=DISPLACEMENT_COLUMNS)


def frame_to_csv(frame: pd.DataFrame) -> str:
    """Fixed header, full-precision floats, empty cells for NaN."""
    return frame.to_csv(
        index=False,
        float_format=sim_setting('CSV_FLOAT_FORMAT'),
        lineterminator='\n',
    )


def _json_ready(value):
    if isinstance(value, dict):
        return {key: _json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def frame_records(frame: pd.DataFrame) -> List[Dict]:
    return _json_ready(frame.to_dict(orient='records'))


def frame_to_json(frame: pd.DataFrame, extra: Optional[Dict] = None) -> str:
    """Records under 'rows', plus any ``extra`` top-level entries."""
    payload = {'columns': list(frame.columns), 'rows': frame_records(frame)}
    if extra:
        payload.update(_json_ready(extra))
    return json.dumps(payload, indent=2, allow_nan=False) + '\n'


def render(frame: pd.DataFrame, fmt: str, extra: Optional[Dict] = None) -> str:
    if fmt == 'csv':
        return frame_to_csv(frame)
    if fmt == 'json':
        return frame_to_json(frame, extra)
    raise ValueError(f"Unsupported output format: {fmt}")


def write_output(text: str, out: Optional[Union[str, Path]], stream: Optional[TextIO] = None):
    """Write to ``out`` when given, otherwise to ``stream``."""
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
    elif stream is not None:
        stream.write(text)
