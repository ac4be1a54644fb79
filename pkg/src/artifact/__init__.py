"""Multi-label visual-artifact detection pipeline for AI-generated video frames."""

__version__ = "0.1.0"
