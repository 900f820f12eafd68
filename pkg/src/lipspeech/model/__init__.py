from .encoder import VisualEncoder
from .conformer import Conformer, ConformerBlock, rel_positional_encoding
from .predictor import (SpectrogramPredictor, build_model, condition_on_speaker,
                        count_parameters)
from .losses import (LOSS_MODES, combined_loss, combined_loss_t, l1_loss,
                     l1_loss_t, spectral_convergence_loss, spectral_convergence_t)

__all__ = [
    "VisualEncoder", "Conformer", "ConformerBlock", "rel_positional_encoding",
    "SpectrogramPredictor", "build_model", "condition_on_speaker",
    "count_parameters", "LOSS_MODES", "combined_loss", "combined_loss_t",
    "l1_loss", "l1_loss_t", "spectral_convergence_loss", "spectral_convergence_t",
]
