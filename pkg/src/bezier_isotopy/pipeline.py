"""Subdivision driver: per-level certificates, curvature reports and convergence series."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bezier import as_points, classify_closedness, subdivide_grid
from .curvature import DEFAULT_QUAD_NODES, CurvatureReport, curvature_report
from .errors import GeometryError
from .intersect import (DEFAULT_EPSILON, Certificate, Verdict, assemble_certificate,
                        hausdorff_distance, level_verdicts)
from .mesh import level_knots, stack_to_grid, triangulate_grid

MAX_LEVEL_CEILING = 8
EXACT_ZERO = "exact-zero"


@dataclass(frozen=True)
class RunConfig:
    """Driver settings. ``epsilon`` is relative to the net's bounding-box diagonal."""

    max_level: int = 5
    quad_nodes: int = DEFAULT_QUAD_NODES
    samples: int = 32
    epsilon: float = DEFAULT_EPSILON
    stop_on_certify: bool = False

    def __post_init__(self):
        if not 0 <= self.max_level <= MAX_LEVEL_CEILING:
            raise ValueError(f"max_level must be in [0, {MAX_LEVEL_CEILING}], got {self.max_level}")
        if self.quad_nodes < 16:
            raise ValueError("quad_nodes must be at least 16")
        if self.samples < 32:
            raise ValueError("samples must be at least 32")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")


@dataclass(frozen=True)
class LevelRecord:
    level: int
    patch_count: int
    hausdorff: float
    max_cone_spans: tuple
    certificate: Certificate
    curvature: CurvatureReport


def run_level(points, level: int, config: RunConfig) -> LevelRecord:
    closedness = classify_closedness(points)
    stack = subdivide_grid(points, level)
    count = stack.shape[0]
    mesh = triangulate_grid(stack_to_grid(stack), closedness,
                            level_knots(count, points.shape[0] - 1), level_knots(count, points.shape[1] - 1))
    verdicts = level_verdicts(stack, closedness)
    spans = (max(v.theta_n for v in verdicts), max(v.theta_u for v in verdicts),
             max(v.theta_v for v in verdicts))
    hausdorff = hausdorff_distance(mesh, points, config.samples)
    cert = assemble_certificate(level, verdicts, mesh, closedness, hausdorff, config.epsilon)
    report = curvature_report(mesh, None if closedness.closed else points, config.quad_nodes)
    return LevelRecord(level, count * count, hausdorff, spans, cert, report)


def run(net, config: RunConfig | None = None) -> list:
    """Records for levels ``0..max_level``, or up to the first certified level."""
    config = config or RunConfig()
    points = as_points(net)
    records = []
    for level in range(config.max_level + 1):
        try:
            record = run_level(points, level, config)
        except GeometryError as exc:
            raise type(exc)(f"level {level}: {exc}") from exc
        records.append(record)
        if config.stop_on_certify and record.certificate.verdict is Verdict.CERTIFIED:
            break
    return records


def first_certified(records) -> int | None:
    for r in records:
        if r.certificate.verdict is Verdict.CERTIFIED:
            return r.level
    return None


@dataclass(frozen=True)
class ConvergenceSummary:
    """Per-series values, successive ratios and non-decreasing flags.

    A ratio whose denominator is exactly zero is reported as ``EXACT_ZERO``
    when the numerator is zero too, and as ``inf`` otherwise.
    """

    series: dict
    ratios: dict
    non_decreasing: list = field(default_factory=list)
    certified_level: int | None = None
    monotone_certification: bool = True


def _ratios(values):
    out = []
    for prev, cur in zip(values, values[1:]):
        if prev == 0.0:
            out.append(EXACT_ZERO if cur == 0.0 else math.inf)
        else:
            out.append(cur / prev)
    return out


def convergence_summary(records) -> ConvergenceSummary:
    if len(records) < 2:
        raise ValueError("need at least two records")
    series = {
        "hausdorff": [r.hausdorff for r in records],
        "theta_n": [r.max_cone_spans[0] for r in records],
        "theta_u": [r.max_cone_spans[1] for r in records],
        "theta_v": [r.max_cone_spans[2] for r in records],
    }
    residuals = [r.curvature.theorem2_residual for r in records]
    if all(x is not None for x in residuals):
        series["theorem2_residual"] = residuals
    ratios = {name: _ratios(values) for name, values in series.items()}
    flagged = []
    for name, values in series.items():
        # the residual is only expected to decrease from level 1 on
        tail = values[1:] if name == "theorem2_residual" else values
        if any(cur >= prev and prev > 0.0 for prev, cur in zip(tail, tail[1:])):
            flagged.append(name)
    k_star = first_certified(records)
    monotone = k_star is None or all(
        r.certificate.verdict is Verdict.CERTIFIED for r in records if r.level >= k_star)
    return ConvergenceSummary(series, ratios, flagged, k_star, monotone)
