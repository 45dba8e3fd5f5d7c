"""
Area-distortion metrics and the serialized run report.
"""
from __future__ import absolute_import

import csv
import json
import logging

import numpy as np

from .energy import evaluate_energies
from .exceptions import CollapsedImageError, DegenerateFaceError, MeshIOError
from .mesh import face_areas
from .sphere import detect_foldings

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
HISTOGRAM_BINS = 50

TRACE_COLUMNS = ("iteration", "E_spherical", "E_A", "alpha", "beta", "grad_inf", "folds")


def _points(map):
    return getattr(map, "points", map)


def area_ratios(mesh, map):
    """ Per-face |(|f(τ)|/|f(M)|) / (|τ|/|M|)|. """
    domain = mesh.areas
    if (domain <= 0).any():
        raise DegenerateFaceError(
            "face %d has zero area" % int(np.flatnonzero(domain <= 0)[0])
        )
    image = face_areas(_points(map), mesh.faces)
    image_total = float(np.sum(image))
    if not image_total > 0:
        raise CollapsedImageError("image area %r is not positive" % image_total)
    return np.abs((image / image_total) / (domain / mesh.total_area))


def area_ratio(mesh, map, face):
    return float(area_ratios(mesh, map)[face])


def ratio_histogram(ratios, bins=HISTOGRAM_BINS):
    """ Counts over ``bins`` uniform bins on [0, max(2, max ratio)]. """
    upper = max(2.0, float(np.max(ratios))) if len(ratios) else 2.0
    counts, edges = np.histogram(ratios, bins=bins, range=(0.0, upper))
    return edges, counts


class MetricsReport(object):
    """ Metrics of one map plus whatever is known about the run that made it.

    The area-ratio standard deviation is the population one (divisor m).
    """

    def __init__(
        self,
        energies,
        ratios,
        fold_count,
        iterations=0,
        wall_time=None,
        bins=HISTOGRAM_BINS,
    ):
        self.energies = energies
        self.E_A = energies.E_A
        self.E_S = energies.E_S
        self.E_spherical = energies.E_spherical
        self.volume = energies.volume
        self.ratio_mean = float(np.mean(ratios))
        self.ratio_sd = float(np.std(ratios))
        self.ratio_min = float(np.min(ratios))
        self.ratio_max = float(np.max(ratios))
        self.fold_count = int(fold_count)
        self.iterations = int(iterations)
        self.wall_time = None if wall_time is None else float(wall_time)
        self.histogram = ratio_histogram(ratios, bins)

        self.objective = None
        self.library_version = None
        self.folds_before_correction = None
        self.correction_rounds = 0
        self.fold_history = []
        self.skipped_folds = 0
        self.nonconvex_folds = 0
        self.solver = None
        self.wolfe_fraction = None
        self.timings = {}
        self.warnings = []

    def __repr__(self):
        return "%s(E_A=%r, sd=%r, fold_count=%d)" % (
            type(self).__name__,
            self.E_A,
            self.ratio_sd,
            self.fold_count,
        )

    def to_dict(self):
        edges, counts = self.histogram
        return {
            "schema": SCHEMA_VERSION,
            "library_version": self.library_version,
            "objective": self.objective,
            "E_A": self.E_A,
            "E_S": self.E_S,
            "E_spherical": self.E_spherical,
            "volume": self.volume,
            "area_ratio": {
                "mean": self.ratio_mean,
                "sd": self.ratio_sd,
                "min": self.ratio_min,
                "max": self.ratio_max,
            },
            "fold_count": self.fold_count,
            "folds_before_correction": self.folds_before_correction,
            "correction_rounds": self.correction_rounds,
            "fold_history": list(self.fold_history),
            "skipped_folds": self.skipped_folds,
            "nonconvex_folds": self.nonconvex_folds,
            "iterations": self.iterations,
            "solver": self.solver,
            "wolfe_fraction": self.wolfe_fraction,
            "wall_time": self.wall_time,
            "timings": dict(self.timings),
            "histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
            "warnings": list(self.warnings),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def write(self, path):
        _write_text(path, self.to_json() + "\n")
        log.info("Wrote report to %s", path)


def build_report(
    mesh,
    map,
    solver_state=None,
    timings=None,
    correction=None,
    objective=None,
    library_version=None,
    warnings=(),
):
    """ Collect the metrics of ``map`` and the run bookkeeping into a report.

    :param solver_state: :class:`~saem.solver.SolverState` of the solve, if any.
    :param timings: :class:`~saem.util.timer.StageTimings`. Left out, the
        report has no wall times (``wall_time`` is None, ``timings`` empty)
        and two identical runs produce identical reports.
    :param correction: :class:`~saem.correction.CorrectionResult`, if the
        correction ran.
    """
    ratios = area_ratios(mesh, map)
    report = MetricsReport(
        evaluate_energies(mesh, map),
        ratios,
        len(detect_foldings(mesh, map)),
        iterations=solver_state.iterations if solver_state is not None else 0,
        wall_time=timings.total if timings is not None else None,
    )
    report.objective = objective
    report.library_version = library_version
    report.warnings = [str(w) for w in warnings]
    if timings is not None:
        report.timings = timings.as_dict()

    if solver_state is not None:
        report.solver = {
            "converged": bool(solver_state.converged),
            "line_search_failed": bool(solver_state.line_search_failed),
            "restarts": int(solver_state.restarts),
            "preconditioner_fallback": bool(solver_state.preconditioner_fallback),
            "pole_rotations": int(solver_state.pole_rotations),
            "fixed": list(solver_state.fixed) if solver_state.fixed else None,
        }
        report.wolfe_fraction = solver_state.wolfe_fraction

    if correction is not None:
        report.folds_before_correction = correction.fold_history[0]
        report.correction_rounds = correction.rounds
        report.fold_history = list(correction.fold_history)
        report.skipped_folds = correction.skipped
        report.nonconvex_folds = correction.nonconvex
    else:
        report.folds_before_correction = report.fold_count
        report.fold_history = [report.fold_count]
    return report


def _write_text(path, text):
    try:
        with open(path, "w") as fp:
            fp.write(text)
    except (IOError, OSError) as e:
        raise MeshIOError(path, getattr(e, "strerror", None) or str(e))


def _write_rows(path, header, rows):
    try:
        with open(path, "w", newline="") as fp:
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except (IOError, OSError) as e:
        raise MeshIOError(path, getattr(e, "strerror", None) or str(e))


def write_histogram_csv(path, report):
    edges, counts = report.histogram
    rows = [
        (repr(float(lo)), repr(float(hi)), int(count))
        for lo, hi, count in zip(edges[:-1], edges[1:], counts)
    ]
    _write_rows(path, ("bin_lo", "bin_hi", "count"), rows)


def write_trace_csv(path, trace):
    """ One row per solver iteration; ``E_spherical`` is empty when undefined. """
    rows = []
    for record in trace:
        rows.append(["" if value is None else value for value in record])
    _write_rows(path, TRACE_COLUMNS, rows)
