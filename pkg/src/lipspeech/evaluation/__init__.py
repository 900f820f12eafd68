from .intelligibility import band_envelopes, estoi, remove_silent_frames, stoi
from .wer import corpus_wer, edit_distance, tokenize, wer
from .adapters import (AdapterError, AsrAdapter, ExternalVocoder,
                       GriffinLimVocoder, PesqAdapter)
from .harness import (MetricReport, UtteranceRow, VocoderBenchmark,
                      WerProtocolResult, benchmark_vocoder, evaluate_corpus,
                      hardware_description, wer_protocol)

__all__ = [
    "band_envelopes", "estoi", "remove_silent_frames", "stoi", "corpus_wer",
    "edit_distance", "tokenize", "wer", "AdapterError", "AsrAdapter",
    "ExternalVocoder", "GriffinLimVocoder", "PesqAdapter", "MetricReport",
    "UtteranceRow", "VocoderBenchmark", "WerProtocolResult",
    "benchmark_vocoder", "evaluate_corpus", "hardware_description",
    "wer_protocol",
]
