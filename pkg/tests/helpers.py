"""Shared oracle helpers for the test suite."""

import numpy as np

from sarmimo.quantizer import MsbMismatch, QuantizerSpec


def staircase_breakpoints(spec: QuantizerSpec) -> list[float]:
    """Every jump of the ideal mid-rise staircase: multiples of delta on [-1, 1]."""
    edges = np.arange(-(2 ** (spec.bits - 1)), 2 ** (spec.bits - 1) + 1) * spec.delta
    return list(edges)


def msb_model_breakpoints(m: MsbMismatch) -> list[float]:
    """Kinks and jumps of the MSB-shift clip model on the full line."""
    pts = {-1.0 - m.m2, -max(m.m2, 0.0), 0.0, max(m.m1, 0.0), 1.0 + m.m1}
    return sorted(pts)


def cell_breakpoints(cells) -> list[float]:
    """Interior thresholds of a realized cell table."""
    return [float(v) for v in cells.lower[1:]]
