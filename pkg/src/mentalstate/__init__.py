"""EEG band-power mental-state classification (engaged / confused / relaxed)."""

__version__ = "0.1.0"
