"""VMD-based EEG seizure classification.

Signals are decomposed into band-limited modes, four scalar features are
computed per mode, and a small sigmoid MLP (optionally three of them voting)
separates ictal from non-ictal recordings.
"""

from vmdeeg.features import (
    FeatureVector,
    average_amplitude,
    difference_points,
    ellipse_area,
    ellipse_params,
    extract,
    renyi_entropy,
)
from vmdeeg.signal_io import (
    Signal,
    SignalCollection,
    SplitSpec,
    load_bonn_set,
    load_signal,
    split,
    synth_multitone,
)
from vmdeeg.vmd import ModeSet, VmdConfig, decompose, mode_spectra

__version__ = "0.1.0"

__all__ = [
    "FeatureVector",
    "ModeSet",
    "Signal",
    "SignalCollection",
    "SplitSpec",
    "VmdConfig",
    "average_amplitude",
    "decompose",
    "difference_points",
    "ellipse_area",
    "ellipse_params",
    "extract",
    "load_bonn_set",
    "load_signal",
    "mode_spectra",
    "renyi_entropy",
    "split",
    "synth_multitone",
]
