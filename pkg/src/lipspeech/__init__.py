"""Video-to-speech synthesis: predict mel spectrograms from silent lip
video and invert them to waveform audio."""

__version__ = "0.1.0"
