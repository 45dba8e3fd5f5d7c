"""
Preconditioned nonlinear conjugate gradients over spherical coordinates.

Two vertices stay pinned and the remaining (θ, φ) pairs are the variables.
Steps come from a quadratic-interpolation line search with an Armijo test.
Trial points whose enclosed volume is no longer positive count as infinitely
expensive, so accepted iterates never cross the pole of the spherical
authalic energy at 𝒱 = 0.
"""
from __future__ import absolute_import

import logging
import warnings
from collections import namedtuple

import numpy as np

from .energy import (
    OBJECTIVES,
    TRIAL_ENERGIES,
    VOLUME_TOLERANCE,
    evaluate_energies,
    volume_measure,
)
from .exceptions import (
    CollapsedImageError,
    DegenerateFaceError,
    IndefinitePreconditionerError,
    InvalidOptionError,
    LineSearchError,
    LineSearchWarning,
    NotDescentDirectionError,
    PreconditionerFallbackWarning,
    SolverAbortError,
)
from .mesh import face_areas
from .operators import build_preconditioner, build_stretch_laplacian
from .sphere import PoleGuard, POLE_MARGIN, detect_foldings, from_spherical, to_spherical

log = logging.getLogger(__name__)

# Steps below this are indistinguishable from no step.
MIN_STEP = 1e-16

# Cap on how far one quadratic interpolation may extrapolate past its sample.
MAX_EXTRAPOLATION = 10.0

# Relative energy change tolerated across a pole-guard rotation.
ROTATION_TOLERANCE = 1e-10


# Data structure for one solver iteration.
TraceRecord = namedtuple(
    "TraceRecord", ["iteration", "E_spherical", "E_A", "alpha", "beta", "grad_inf", "folds"]
)

WolfeRecord = namedtuple("WolfeRecord", ["iteration", "armijo", "curvature"])


class SolverOptions(object):
    """ Preconditioned nonlinear CG configuration.

    :param int max_iters:
        Maximum number of outer iterations. 0 returns the input map.

    :param float energy_tol:
        Stop once the energy decrease of one iteration falls below this.

    :param float initial_alpha:
        Sample point of the first line search. Later line searches start
        from the previous accepted step.

    :param float armijo_c1:
        Sufficient-decrease constant.

    :param float wolfe_c2:
        Curvature constant, only used for the Wolfe diagnostics. The pair
        must satisfy ``0 < armijo_c1 < wolfe_c2 < 0.5``.

    :param int max_interp_retries:
        Quadratic re-interpolations before the line search falls back to
        halving the step.

    :param bool check_wolfe:
        Evaluate both strong Wolfe conditions at every accepted step and
        record the outcome. Costs one extra energy and gradient evaluation
        per iteration.

    :param str objective:
        ``"spherical"`` minimizes the spherical authalic energy,
        ``"authalic"`` the plain authalic energy.

    :param bool refactorize:
        Rebuild the preconditioner from the current map every iteration
        instead of once at the start.

    :param float pole_margin:
        Colatitude margin; a free vertex closer than this to a pole triggers
        a rotation of the whole configuration.

    :param int seed:
        Seed for the pole-avoiding rotations.

    :param backend:
        Factorization backend name or :class:`~saem.backends.Backend`;
        None selects one automatically.

    :param fixed:
        Pair of vertex ids to pin instead of the automatic choice.
    """

    DEFAULT_MAX_ITERS = 100
    DEFAULT_ENERGY_TOL = 1e-5
    DEFAULT_INITIAL_ALPHA = 0.01

    def __init__(
        self,
        max_iters=DEFAULT_MAX_ITERS,
        energy_tol=DEFAULT_ENERGY_TOL,
        initial_alpha=DEFAULT_INITIAL_ALPHA,
        armijo_c1=1e-4,
        wolfe_c2=0.4,
        max_interp_retries=10,
        check_wolfe=False,
        objective="spherical",
        refactorize=False,
        pole_margin=1e-6,
        seed=0,
        backend=None,
        fixed=None,
    ):
        self.max_iters = self._validate_count(max_iters, "max_iters")
        self.energy_tol = self._validate_number(energy_tol, "energy_tol", allow_zero=True)
        self.initial_alpha = self._validate_number(initial_alpha, "initial_alpha")
        self.armijo_c1 = self._validate_number(armijo_c1, "armijo_c1")
        self.wolfe_c2 = self._validate_number(wolfe_c2, "wolfe_c2")
        if not self.armijo_c1 < self.wolfe_c2 < 0.5:
            raise InvalidOptionError(
                "armijo_c1=%r and wolfe_c2=%r must satisfy 0 < c1 < c2 < 0.5."
                % (armijo_c1, wolfe_c2)
            )
        self.max_interp_retries = self._validate_count(max_interp_retries, "max_interp_retries")
        self.check_wolfe = bool(check_wolfe)
        if objective not in OBJECTIVES:
            raise InvalidOptionError(
                "objective was %r, but it must be one of %s."
                % (objective, ", ".join(sorted(OBJECTIVES)))
            )
        self.objective = objective
        self.refactorize = bool(refactorize)
        self.pole_margin = self._validate_number(pole_margin, "pole_margin")
        if self.pole_margin >= np.pi / 2:
            raise InvalidOptionError(
                "pole_margin was %r, but it must be below pi/2." % pole_margin
            )
        self.seed = self._validate_count(seed, "seed")
        self.backend = backend
        self.fixed = self._validate_fixed(fixed)

    @classmethod
    def _validate_count(cls, value, name):
        if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
            raise InvalidOptionError("%s was %r, but it must be an integer." % (name, value))
        if value < 0:
            raise InvalidOptionError("%s was %d, but it cannot be negative." % (name, value))
        return int(value)

    @classmethod
    def _validate_number(cls, value, name, allow_zero=False):
        if isinstance(value, bool):
            raise InvalidOptionError("%s cannot be a boolean value." % name)
        try:
            value = float(value)
        except (TypeError, ValueError):
            raise InvalidOptionError("%s was %r, but it must be a number." % (name, value))
        if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
            raise InvalidOptionError(
                "%s was %r, but it must be %s."
                % (name, value, "non-negative" if allow_zero else "positive")
            )
        return value

    @classmethod
    def _validate_fixed(cls, fixed):
        if fixed is None:
            return None
        try:
            pair = tuple(int(v) for v in fixed)
        except (TypeError, ValueError):
            raise InvalidOptionError(
                "fixed was %r, but it must be a pair of vertex ids." % (fixed,)
            )
        if len(pair) != 2 or pair[0] == pair[1] or min(pair) < 0:
            raise InvalidOptionError(
                "fixed was %r, but it must be two distinct vertex ids." % (fixed,)
            )
        return pair

    def new(self, **kw):
        params = dict(
            max_iters=self.max_iters,
            energy_tol=self.energy_tol,
            initial_alpha=self.initial_alpha,
            armijo_c1=self.armijo_c1,
            wolfe_c2=self.wolfe_c2,
            max_interp_retries=self.max_interp_retries,
            check_wolfe=self.check_wolfe,
            objective=self.objective,
            refactorize=self.refactorize,
            pole_margin=self.pole_margin,
            seed=self.seed,
            backend=self.backend,
            fixed=self.fixed,
        )
        params.update(kw)
        return type(self)(**params)

    def __repr__(self):
        return (
            "{cls.__name__}(max_iters={self.max_iters}, energy_tol={self.energy_tol}, "
            "initial_alpha={self.initial_alpha}, objective={self.objective!r}, "
            "fixed={self.fixed})"
        ).format(cls=type(self), self=self)


class SolverState(object):
    """ Everything the solver knows at the end of a run.

    ``coords`` are in the solver's working frame; ``rotation`` maps input
    points into that frame (``p_working = rotation @ p_input``).
    """

    def __init__(self):
        self.coords = None
        self.fixed = None
        self.gradient = None
        self.previous_gradient = None
        self.direction = None
        self.preconditioned = None
        self.alpha = None
        self.beta = None
        self.energy_history = []
        self.iterations = 0
        self.converged = False
        self.line_search_failed = False
        self.restarts = 0
        self.preconditioner_fallback = False
        self.pole_rotations = 0
        self.rotation = np.eye(3)
        self.trace = []
        self.wolfe = []

    def __repr__(self):
        return "%s(iterations=%d, converged=%r, energy=%r)" % (
            type(self).__name__,
            self.iterations,
            self.converged,
            self.energy_history[-1] if self.energy_history else None,
        )

    @property
    def energy(self):
        return self.energy_history[-1] if self.energy_history else None

    @property
    def wolfe_fraction(self):
        if not self.wolfe:
            return None
        return sum(1 for w in self.wolfe if w.armijo and w.curvature) / float(len(self.wolfe))


def select_fixed_vertices(mesh, map):
    """ The two vertices whose 1-ring area ratio is closest to the mean ratio.

    Ties go to the lower vertex id.
    """
    n = mesh.n_vertices
    if n < 3:
        raise ValueError("need at least 3 vertices, got %d" % n)
    points = getattr(map, "points", map)
    corners = mesh.faces.ravel()
    image = np.bincount(corners, weights=np.repeat(face_areas(points, mesh.faces), 3), minlength=n)
    domain = np.bincount(corners, weights=np.repeat(mesh.areas, 3), minlength=n)
    ratio = image / domain
    order = np.argsort(np.abs(ratio - ratio.mean()), kind="stable")
    return int(order[0]), int(order[1])


def _safe_energy(energy_at, alpha):
    try:
        value = float(energy_at(alpha))
    except (CollapsedImageError, DegenerateFaceError, FloatingPointError):
        return np.inf
    return value if np.isfinite(value) else np.inf


def line_search(energy_at, phi0, dphi0, alpha_prev, opts=None):
    """ Quadratic-interpolation line search with an Armijo test.

    The energy along the direction is modelled by the quadratic through
    φ(0), φ'(0) and φ(α_prev); its minimizer is tried and, on failure,
    becomes the next sample. After ``opts.max_interp_retries`` failures the
    step is halved until it passes or drops below 1e−16.

    :return: ``(alpha, energy_at(alpha))``
    :raises saem.exceptions.NotDescentDirectionError: if ``dphi0 >= 0``.
    :raises saem.exceptions.LineSearchError: if no step passes.
    """
    opts = opts or SolverOptions()
    if not dphi0 < 0:
        raise NotDescentDirectionError(dphi0)
    if not alpha_prev > 0:
        raise ValueError("alpha_prev was %r, but it must be positive" % (alpha_prev,))
    c1 = opts.armijo_c1

    def armijo(alpha, phi):
        return phi <= phi0 + c1 * alpha * dphi0

    sample = float(alpha_prev)
    phi_sample = _safe_energy(energy_at, sample)
    for attempt in range(opts.max_interp_retries):
        if sample < MIN_STEP:
            raise LineSearchError("line search failed: step fell below %g" % MIN_STEP)
        if not np.isfinite(phi_sample):
            break
        curvature = (phi_sample - phi0 - sample * dphi0) / (sample * sample)
        if curvature <= 0:
            # No interior minimizer; the sample already beats the tangent line.
            if armijo(sample, phi_sample):
                return sample, phi_sample
            break
        alpha = min(-dphi0 / (2.0 * curvature), MAX_EXTRAPOLATION * sample)
        if alpha < MIN_STEP:
            raise LineSearchError("line search failed: step fell below %g" % MIN_STEP)
        phi = _safe_energy(energy_at, alpha)
        log.debug("Line search interpolation %d: alpha=%.6g phi=%.12g", attempt + 1, alpha, phi)
        if armijo(alpha, phi):
            return alpha, phi
        sample, phi_sample = alpha, phi

    alpha = sample
    while True:
        alpha *= 0.5
        if alpha < MIN_STEP:
            raise LineSearchError("line search failed: step fell below %g" % MIN_STEP)
        phi = _safe_energy(energy_at, alpha)
        if armijo(alpha, phi):
            log.debug("Line search backtracked to alpha=%.6g", alpha)
            return alpha, phi


def check_wolfe(phi0, dphi0, alpha, energy_at, slope_at, opts=None):
    """ Evaluate both strong Wolfe conditions at ``alpha``.

    :return: ``(armijo, curvature)`` booleans.
    """
    opts = opts or SolverOptions()
    if not alpha > 0:
        raise ValueError("alpha was %r, but it must be positive" % (alpha,))
    armijo = energy_at(alpha) - phi0 <= opts.armijo_c1 * alpha * dphi0
    curvature = abs(slope_at(alpha)) <= opts.wolfe_c2 * abs(dphi0)
    return bool(armijo), bool(curvature)


class _Preconditioner(object):
    """ Applies M⁻¹, dropping to the identity when M is not usable. """

    def __init__(self, mesh, fixed, backend):
        self.mesh = mesh
        self.fixed = fixed
        self.backend = backend
        self.factor = None

    def refresh(self, points):
        try:
            laplacian = build_stretch_laplacian(self.mesh, points)
            self.factor = build_preconditioner(laplacian, self.fixed, self.backend)
        except (IndefinitePreconditionerError, DegenerateFaceError) as e:
            warnings.warn(
                "falling back to unpreconditioned directions: %s" % e,
                PreconditionerFallbackWarning,
            )
            self.factor = None
        return self.factor is not None

    def __call__(self, g):
        if self.factor is None:
            return g.copy()
        return self.factor.solve(g)


def minimize(mesh, map, opts=None):
    """ Minimize the chosen authalic energy over the sphere.

    Nonlinear conjugate gradients in spherical coordinates with two pinned
    vertices, preconditioned by the pinned stretch Laplacian (factorized
    once from the starting map), directions 𝐩 = −M⁻¹𝐠 + β𝐩 with
    β = (𝐠ᵀM⁻¹𝐠)/(𝐠_prevᵀM⁻¹𝐠_prev), and the quadratic line search.

    :return: ``(SphericalMap, SolverState)``
    :raises saem.exceptions.SolverAbortError: on a non-finite energy or
        gradient.
    """
    opts = opts or SolverOptions()
    energy_fn, grad_fn = OBJECTIVES[opts.objective]
    trial_fn = TRIAL_ENERGIES[opts.objective]
    state = SolverState()

    def evaluate(coords):
        return trial_fn(mesh, from_spherical(coords))

    try:
        energy = energy_fn(mesh, map)
    except CollapsedImageError as e:
        raise SolverAbortError("initial energy undefined: %s" % e)
    if not np.isfinite(energy):
        raise SolverAbortError("initial energy is %r" % energy)
    if opts.objective == "spherical":
        volume = volume_measure(mesh, map)
        if not volume > VOLUME_TOLERANCE:
            raise SolverAbortError(
                "initial image volume %.6g is not positive; the map is inverted" % volume
            )
    state.energy_history.append(energy)
    if opts.max_iters == 0:
        state.fixed = opts.fixed
        state.coords = to_spherical(map, opts.fixed or ())
        return map, state

    guard = PoleGuard(opts.seed)
    points, rotation = guard.rotate_clear(map.points, POLE_MARGIN)
    if not np.array_equal(rotation, np.eye(3)):
        state.pole_rotations += 1
    state.rotation = rotation

    fixed = opts.fixed or select_fixed_vertices(mesh, points)
    if max(fixed) >= mesh.n_vertices:
        raise InvalidOptionError("fixed vertex out of range: %r" % (fixed,))
    state.fixed = fixed
    coords = to_spherical(points, fixed)
    log.info("Solver start: %s energy %.12g, fixed vertices %r", opts.objective, energy, fixed)

    precondition = _Preconditioner(mesh, fixed, opts.backend)
    if not precondition.refresh(points):
        state.preconditioner_fallback = True

    f = coords.vector()
    g = grad_fn(mesh, coords)
    h = precondition(g)
    p = -h
    alpha = opts.initial_alpha

    for iteration in range(1, opts.max_iters + 1):
        slope = float(p.dot(g))
        if not slope < 0:
            state.restarts += 1
            p = -h
            slope = float(p.dot(g))
            if not slope < 0:
                p = -g
                slope = float(p.dot(g))
                if not slope < 0:
                    log.info("Gradient vanished at iteration %d", iteration)
                    state.converged = True
                    break

        base, f_base, p_base = coords, f, p

        def energy_at(step, base=base, f_base=f_base, p_base=p_base):
            return evaluate(base.with_vector(f_base + step * p_base))

        try:
            alpha, new_energy = line_search(energy_at, energy, slope, alpha, opts)
        except LineSearchError as e:
            state.line_search_failed = True
            warnings.warn("solver stopped at iteration %d: %s" % (iteration, e), LineSearchWarning)
            break

        coords = base.with_vector(f_base + alpha * p_base)
        rotated = False
        free_theta = coords.theta[coords.free]
        if (free_theta < opts.pole_margin).any() or (free_theta > np.pi - opts.pole_margin).any():
            coords, new_energy = _rotate(mesh, coords, guard, evaluate, new_energy, state)
            rotated = True
        f = coords.vector()

        deficit = energy - new_energy
        energy = new_energy
        state.energy_history.append(energy)
        state.iterations = iteration

        gamma = float(h.dot(g))
        g_new = grad_fn(mesh, coords)
        if not np.all(np.isfinite(g_new)):
            raise SolverAbortError("non-finite gradient at iteration %d" % iteration)
        if opts.refactorize:
            precondition.refresh(from_spherical(coords).points)
        h_new = precondition(g_new)

        if opts.check_wolfe and not rotated:
            armijo, curvature = check_wolfe(
                state.energy_history[-2],
                slope,
                alpha,
                energy_at,
                lambda step: float(
                    grad_fn(mesh, base.with_vector(f_base + step * p_base)).dot(p_base)
                ),
                opts,
            )
            state.wolfe.append(WolfeRecord(iteration, armijo, curvature))

        beta = float(h_new.dot(g_new)) / gamma
        if rotated:
            # Directions from the old frame are meaningless after a rotation.
            p = -h_new
        else:
            p = -h_new + beta * p_base
        state.previous_gradient = g
        g, h = g_new, h_new
        state.alpha, state.beta = alpha, beta

        current = from_spherical(coords)
        breakdown = evaluate_energies(mesh, current)
        record = TraceRecord(
            iteration,
            breakdown.E_spherical,
            breakdown.E_A,
            alpha,
            beta,
            float(np.max(np.abs(g))) if len(g) else 0.0,
            int(len(detect_foldings(mesh, current))),
        )
        state.trace.append(record)
        log.debug(
            "Iteration %d: E=%.12g deficit=%.3g alpha=%.6g beta=%.6g |g|=%.3g folds=%d",
            iteration,
            energy,
            deficit,
            alpha,
            beta,
            record.grad_inf,
            record.folds,
        )

        if deficit < opts.energy_tol:
            state.converged = True
            break

    state.coords = coords
    state.gradient = g
    state.preconditioned = h
    state.direction = p
    if precondition.factor is None:
        state.preconditioner_fallback = True

    # Undo every rotation applied on the way.
    final = from_spherical(coords).rotated(state.rotation.T)
    log.info(
        "Solver finished after %d iteration(s): E=%.12g converged=%r",
        state.iterations,
        energy,
        state.converged,
    )
    return final, state


def _rotate(mesh, coords, guard, evaluate, energy, state):
    points = from_spherical(coords).points
    rotated, matrix = guard.rotate_clear(points, POLE_MARGIN)
    new_coords = to_spherical(rotated, coords.fixed)
    new_energy = evaluate(new_coords)
    if abs(new_energy - energy) > ROTATION_TOLERANCE * max(1.0, abs(energy)):
        log.warning(
            "Energy changed by %.3g across a pole rotation", abs(new_energy - energy)
        )
    state.rotation = matrix.dot(state.rotation)
    state.pole_rotations += 1
    log.debug("Rotated configuration off the poles (rotation %d)", state.pole_rotations)
    return new_coords, new_energy
