"""Benchmark harness for sensor/weather-augmented behavior classification.

The pipeline: synthetic data generation (or ingest of parsed payloads),
missing-value imputation, Boruta feature selection, four classifiers over a
6x2x4x3 experiment grid, and a two-stage ANOVA over the results.
"""

from .provenance import VERSION as __version__

__all__ = ["__version__"]
