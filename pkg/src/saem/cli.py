"""
Command-line driver: ``saem gen|param|metrics|correct``.

Exit codes: 0 success (residual folds only add a report warning), 1 file
I/O failure, 2 invalid input or options, 3 numerical failure of the pipeline.
"""
from __future__ import absolute_import, print_function

import argparse
import hashlib
import json
import logging
import os
import sys
import warnings

from . import __version__, add_stderr_logger
from . import generate
from .correction import CorrectionOptions, correct_foldings
from .exceptions import (
    BackendUnavailableError,
    CollapsedImageError,
    DegenerateFaceError,
    InitializationError,
    InvalidOptionError,
    MapMismatchError,
    MeshError,
    MeshIOError,
    NotOnSphereError,
    SAEMWarning,
    SolverAbortError,
)
from .initializer import InitOptions, fixed_point_warmup, initial_spherical_map
from .mesh import load_mesh, normalize_area, save_mesh
from .operators import build_mean_value_laplacian, build_stretch_laplacian, dump_matrix
from .report import build_report, write_histogram_csv, write_trace_csv
from .solver import SolverOptions, minimize
from .sphere import load_map, save_map
from .util import StageTimings, thread_count

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_NUMERIC = 3

_VERBOSITY = {0: logging.WARNING, 1: logging.INFO}


class RunConfig(object):
    """ Everything one ``param`` run depends on.

    Output paths must differ from each other and from the input.
    """

    HASHED = (
        "max_iters",
        "energy_tol",
        "fp_iters",
        "correct",
        "seed",
        "fixed",
        "objective",
        "backend",
        "check_wolfe",
    )

    def __init__(
        self,
        input,
        output,
        report,
        format="auto",
        hist=None,
        trace=None,
        max_iters=SolverOptions.DEFAULT_MAX_ITERS,
        energy_tol=SolverOptions.DEFAULT_ENERGY_TOL,
        fp_iters=InitOptions.DEFAULT_WARMUP_MAX_ITERS,
        correct=True,
        seed=0,
        fixed=None,
        objective="spherical",
        backend="auto",
        check_wolfe=False,
        dump_matrices=None,
        timings=False,
    ):
        self.input = input
        self.format = format
        self.output = output
        self.report = report
        self.hist = hist
        self.trace = trace
        self.max_iters = max_iters
        self.energy_tol = energy_tol
        self.fp_iters = fp_iters
        self.correct = correct
        self.seed = seed
        self.fixed = fixed
        self.objective = objective
        self.backend = backend
        self.check_wolfe = check_wolfe
        self.dump_matrices = dump_matrices
        self.timings = bool(timings)
        self._validate_paths()
        # Builds the option objects once so bad values fail before any work.
        self.init_options()
        self.solver_options()

    def _validate_paths(self):
        paths = [p for p in (self.input, self.output, self.report, self.hist, self.trace) if p]
        normalized = [os.path.abspath(str(p)) for p in paths]
        if len(set(normalized)) != len(normalized):
            raise InvalidOptionError("input and output paths must all be distinct")

    def init_options(self):
        return InitOptions(warmup_max_iters=self.fp_iters, seed=self.seed)

    def solver_options(self):
        return SolverOptions(
            max_iters=self.max_iters,
            energy_tol=self.energy_tol,
            objective=self.objective,
            seed=self.seed,
            fixed=self.fixed,
            backend=None if self.backend == "auto" else self.backend,
            check_wolfe=self.check_wolfe,
        )

    def config_hash(self):
        """ First 12 hex digits of the sha256 of the hashed options as sorted JSON. """
        options = dict((name, getattr(self, name)) for name in self.HASHED)
        if options["fixed"] is not None:
            options["fixed"] = list(options["fixed"])
        blob = json.dumps(options, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]

    def header(self):
        return ["saem %s" % __version__, "config %s" % self.config_hash()]

    def __repr__(self):
        return "%s(input=%r, output=%r, hash=%s)" % (
            type(self).__name__,
            self.input,
            self.output,
            self.config_hash(),
        )


def _vertex_pair(text):
    try:
        pair = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected two vertex ids as i,j, got %r" % text)
    if len(pair) != 2:
        raise argparse.ArgumentTypeError("expected two vertex ids as i,j, got %r" % text)
    return pair


def _axes(text):
    try:
        axes = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected three semi-axes as a,b,c, got %r" % text)
    if len(axes) != 3:
        raise argparse.ArgumentTypeError("expected three semi-axes as a,b,c, got %r" % text)
    return axes


def build_parser():
    parser = argparse.ArgumentParser(
        prog="saem", description="Bijective area-preserving spherical parameterization."
    )
    parser.add_argument("--version", action="version", version="saem %s" % __version__)
    parser.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging (repeatable)"
    )
    sub = parser.add_subparsers(dest="command")
    sub.required = True

    gen = sub.add_parser("gen", help="write a generated genus-zero test mesh")
    gen.add_argument(
        "--shape",
        choices=("icosphere", "ellipsoid", "bumpy", "icosahedron", "octahedron"),
        default="icosphere",
    )
    gen.add_argument("--level", type=int, default=3, help="subdivision level (0-7)")
    gen.add_argument("--axes", type=_axes, default=(1.0, 1.0, 1.5), help="ellipsoid a,b,c")
    gen.add_argument("--amplitude", type=float, default=0.3, help="bumpy modulation")
    gen.add_argument("--output", required=True)
    gen.set_defaults(handler=cmd_gen)

    param = sub.add_parser("param", help="compute a spherical map")
    _add_input_arguments(param)
    param.add_argument("--output", required=True, help="spherical map (OBJ/OFF)")
    param.add_argument("--report", required=True, help="JSON report")
    param.add_argument("--hist", help="area-ratio histogram CSV")
    param.add_argument("--trace", help="iteration trace CSV")
    param.add_argument("--max-iters", type=int, default=SolverOptions.DEFAULT_MAX_ITERS)
    param.add_argument("--tol", type=float, default=SolverOptions.DEFAULT_ENERGY_TOL)
    param.add_argument("--fp-iters", type=int, default=InitOptions.DEFAULT_WARMUP_MAX_ITERS)
    param.add_argument("--no-correct", dest="correct", action="store_false")
    param.add_argument("--seed", type=int, default=0)
    param.add_argument("--fix", type=_vertex_pair, default=None, metavar="I,J")
    param.add_argument("--objective", choices=("spherical", "authalic"), default="spherical")
    param.add_argument("--backend", choices=("auto", "cholmod", "superlu"), default="auto")
    param.add_argument("--check-wolfe", action="store_true")
    param.add_argument("--dump-matrices", metavar="DIR")
    param.add_argument(
        "--timings",
        action="store_true",
        help="record per-stage wall times in the report; reports then differ between runs",
    )
    param.set_defaults(handler=cmd_param)

    metrics = sub.add_parser("metrics", help="report the distortion of an existing map")
    _add_input_arguments(metrics)
    metrics.add_argument("--map", required=True)
    metrics.add_argument("--report", required=True)
    metrics.add_argument("--hist")
    metrics.set_defaults(handler=cmd_metrics)

    correct = sub.add_parser("correct", help="remove folds from an existing map")
    _add_input_arguments(correct)
    correct.add_argument("--map", required=True)
    correct.add_argument("--output", required=True)
    correct.add_argument("--report", required=True)
    correct.set_defaults(handler=cmd_correct)
    return parser


def _add_input_arguments(parser):
    parser.add_argument("--input", required=True, help="closed genus-zero mesh (OBJ/OFF)")
    parser.add_argument("--format", choices=("auto", "obj", "off"), default="auto")


def _load(path, format):
    mesh = load_mesh(path, format)
    log.info("Loaded %r from %s", mesh, path)
    return normalize_area(mesh)


def cmd_gen(args):
    if args.shape == "icosahedron":
        mesh = generate.icosahedron()
    elif args.shape == "octahedron":
        mesh = generate.octahedron()
    elif args.shape == "ellipsoid":
        mesh = generate.ellipsoid(args.level, args.axes)
    elif args.shape == "bumpy":
        mesh = generate.bumpy(args.level, args.amplitude)
    else:
        mesh = generate.icosphere(args.level)
    save_mesh(args.output, mesh, header=["saem %s %s" % (__version__, args.shape)])
    log.info("Wrote %r to %s", mesh, args.output)
    return EXIT_OK


def run_pipeline(config, recorded):
    """ load, normalize, initialize, warm up, minimize, correct, report. """
    timings = StageTimings()
    with timings.stage("load"):
        mesh = _load(config.input, config.format)
    with timings.stage("initialize"):
        map = initial_spherical_map(mesh, config.init_options())
    if config.dump_matrices:
        _makedirs(config.dump_matrices)
        dump_matrix(
            build_stretch_laplacian(mesh, map), os.path.join(config.dump_matrices, "stretch.mtx")
        )
    with timings.stage("warmup"):
        map = fixed_point_warmup(mesh, map, config.init_options())
    with timings.stage("solve"):
        map, state = minimize(mesh, map, config.solver_options())

    correction = None
    if config.correct:
        with timings.stage("correct"):
            correction = correct_foldings(mesh, map, CorrectionOptions())
        map = correction.map
    if config.dump_matrices:
        dump_matrix(
            build_mean_value_laplacian(mesh, map),
            os.path.join(config.dump_matrices, "mean_value.mtx"),
        )

    log.info(
        "Stage timings: %s",
        ", ".join("%s %.3fs" % item for item in sorted(timings.as_dict().items())),
    )
    save_map(config.output, mesh, map, header=config.header())
    report = build_report(
        mesh,
        map,
        solver_state=state,
        timings=timings if config.timings else None,
        correction=correction,
        objective=config.objective,
        library_version=__version__,
        warnings=_messages(recorded),
    )
    report.write(config.report)
    if config.hist:
        write_histogram_csv(config.hist, report)
    if config.trace:
        write_trace_csv(config.trace, state.trace)
    return report


def cmd_param(args):
    config = RunConfig(
        input=args.input,
        format=args.format,
        output=args.output,
        report=args.report,
        hist=args.hist,
        trace=args.trace,
        max_iters=args.max_iters,
        energy_tol=args.tol,
        fp_iters=args.fp_iters,
        correct=args.correct,
        seed=args.seed,
        fixed=args.fix,
        objective=args.objective,
        backend=args.backend,
        check_wolfe=args.check_wolfe,
        dump_matrices=args.dump_matrices,
        timings=args.timings,
    )
    log.info("Running %r", config)
    with _recording() as recorded:
        report = run_pipeline(config, recorded)
    log.info("Done: E_A=%.6g sd=%.6g folds=%d", report.E_A, report.ratio_sd, report.fold_count)
    return EXIT_OK


def cmd_metrics(args):
    with _recording() as recorded:
        mesh = _load(args.input, args.format)
        map = load_map(args.map, mesh)
        report = build_report(
            mesh, map, library_version=__version__, warnings=_messages(recorded)
        )
    report.write(args.report)
    if args.hist:
        write_histogram_csv(args.hist, report)
    return EXIT_OK


def cmd_correct(args):
    with _recording() as recorded:
        mesh = _load(args.input, args.format)
        map = load_map(args.map, mesh)
        correction = correct_foldings(mesh, map, CorrectionOptions())
        save_map(args.output, mesh, correction.map, header=["saem %s" % __version__])
        report = build_report(
            mesh,
            correction.map,
            correction=correction,
            library_version=__version__,
            warnings=_messages(recorded),
        )
    report.write(args.report)
    return EXIT_OK


class _recording(object):
    # Collects package warnings for the report and forwards them to the log.

    def __enter__(self):
        self._catcher = warnings.catch_warnings(record=True)
        self.recorded = self._catcher.__enter__()
        warnings.simplefilter("always", SAEMWarning)
        return self.recorded

    def __exit__(self, *exc_info):
        self._catcher.__exit__(*exc_info)
        for message in self.recorded:
            log.warning("%s: %s", message.category.__name__, message.message)
        return False


def _messages(recorded):
    return [
        "%s: %s" % (w.category.__name__, w.message)
        for w in recorded
        if issubclass(w.category, SAEMWarning)
    ]


def _makedirs(path):
    try:
        os.makedirs(path)
    except OSError:
        if not os.path.isdir(path):
            raise


def _fail(code, error):
    print("saem: error: %s" % error, file=sys.stderr)
    return code


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    level = _VERBOSITY.get(args.verbose, logging.DEBUG)
    package_log = logging.getLogger("saem")
    previous_level = package_log.level
    handler = add_stderr_logger(level)
    logging.captureWarnings(True)
    try:
        thread_count()
        return args.handler(args)
    except MeshIOError as e:
        return _fail(EXIT_IO, e)
    except (MeshError, MapMismatchError, NotOnSphereError, InvalidOptionError) as e:
        return _fail(EXIT_INVALID, e)
    except BackendUnavailableError as e:
        return _fail(EXIT_INVALID, e)
    except (SolverAbortError, InitializationError, CollapsedImageError, DegenerateFaceError) as e:
        return _fail(EXIT_NUMERIC, e)
    except (IOError, OSError) as e:
        return _fail(EXIT_IO, e)
    except ValueError as e:
        # Generator parameters out of range.
        return _fail(EXIT_INVALID, e)
    finally:
        logging.captureWarnings(False)
        package_log.removeHandler(handler)
        package_log.setLevel(previous_level)


if __name__ == "__main__":
    sys.exit(main())
