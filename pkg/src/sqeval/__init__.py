"""Toolkit for crowdsourced subjective evaluation of noise-suppressed speech."""

__version__ = "0.1.0"
