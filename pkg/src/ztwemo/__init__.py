"""
Excitation-source speech analysis and emotion classification.

Voiced regions come from the phase of the zero-frequency-filtered signal,
epochs from zero-time-windowed group-delay spectra, and frame features
(epoch-source and MFCC) feed per-emotion HMMs scored by Gaussian mixtures
or a neural network.
"""

__version__ = "0.1.0"

from .errors import ZtwError
from .signal_core import Waveform

__all__ = ["Waveform", "ZtwError", "__version__"]
