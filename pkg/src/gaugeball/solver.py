"""Multi-start projected subgradient solver, certification and uniqueness probe.

Each start runs projected subgradient descent on the minimax objective

    x_{k+1} = P_Omega(x_k - alpha_k g_k)

with Polyak steps toward the target level ``best - delta`` (``delta`` is
halved whenever progress stalls; once it is exhausted the method falls back
to diminishing steps ``c / sqrt(k)``).  The final point of every start is
then polished by solving the local epigraph model of the objective with
SLSQP, and the polished point is kept only if it is not worse.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import lsq_linear, minimize

from .errors import SceneError
from .gauge import gauge_subgradient, gauge_value, support
from .sets import EuclideanBall, AxisBox, Halfspace, HPolytopeSet, PointCloud, Sphere, VPolytope, \
    WholeSpace, constraint_violation
from .timefn import ACTIVE_RTOL, max_time, min_time, objective

STEP_RULES = ("polyak_with_estimate", "diminishing")
POLISH_HANDOFF = 1e-4   # relative gain per window at which descent hands over to the polish
HANDOFF_WINDOW = 30


@dataclass
class SolverConfig:
    max_iters: int = 5000
    starts: int = 16
    step_rule: str = "polyak_with_estimate"
    step_constant: float | None = None      # default: 1.0 x scene diameter
    tol_obj: float = 1e-8                   # relative
    tol_x: float = 1e-9                     # relative to the scene diameter
    seed: int = 0
    uniqueness_cluster_tol: float | None = None   # default: 1e-4 x scene diameter
    stall_iters: int = 20
    window: int = 100
    polish: bool = True

    def __post_init__(self):
        if self.step_rule not in STEP_RULES:
            raise ValueError(f"step_rule must be one of {STEP_RULES}")
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        for name in ("tol_obj", "tol_x"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("step_constant", "uniqueness_cluster_tol"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class StartResult:
    start: np.ndarray
    point: np.ndarray
    objective: float
    iterations: int
    converged: bool
    polished: bool
    best_history: np.ndarray
    iterates: np.ndarray


@dataclass
class CertificateReport:
    passed: bool
    tol: float
    per_target: list
    worst_violation: float
    center_violation: float
    center_feasible: bool

    def to_dict(self):
        return {"passed": self.passed, "tol": self.tol,
                "worst_violation": self.worst_violation,
                "center_violation": self.center_violation,
                "center_feasible": self.center_feasible,
                "per_target": self.per_target}


@dataclass
class Solution:
    center: np.ndarray
    radius: float
    active_indices: tuple
    per_start_results: list = field(default_factory=list)
    converged: bool = False
    certificate: CertificateReport | None = None


@dataclass
class UniquenessReport:
    minimizer_samples: np.ndarray
    diameter: float
    tolerance: float
    classification: str
    solution: Solution | None = None

    def to_dict(self):
        return {"classification": self.classification, "diameter": self.diameter,
                "tolerance": self.tolerance, "samples": len(self.minimizer_samples)}


# -- start points ------------------------------------------------------------------

def search_box(scene):
    """Cube around the scene's bounding box used for random starts."""
    lo, hi = scene.bounding_box()
    mid = 0.5 * (lo + hi)
    half = 0.5 * float(np.max(hi - lo))
    if half == 0:
        half = 0.5 * scene.diameter
    return mid - 1.5 * half, mid + 1.5 * half


def _anchor(Q):
    return Q.anchor()


def start_points(scene, config):
    rng = np.random.default_rng(config.seed)
    first = np.mean([_anchor(Q) for Q in scene.targets], axis=0)
    lo, hi = search_box(scene)
    rest = rng.uniform(lo, hi, size=(config.starts - 1, scene.dimension))
    pts = np.vstack([first[None, :], rest])
    return scene.constraint.project_many(pts)


# -- descent ------------------------------------------------------------------------

class _Evaluator:
    """Objective value and subgradient for the descent loop.

    Point clouds, polytope vertices, balls (Euclidean or polytope gauge) and
    halfspaces are evaluated as stacked arrays; any other target falls back to
    :mod:`timefn`.  The subgradient always comes from :mod:`timefn` for the
    lowest active target, so ties are broken exactly as in ``objective``.
    """

    def __init__(self, scene):
        self.scene = scene
        F = scene.gauge
        self.seb = scene.problem == "seb"
        n = len(scene.targets)
        self.n = n
        pts, owner, balls, bown, halves, hown, rest = [], [], [], [], [], [], []
        for i, Q in enumerate(scene.targets):
            if isinstance(Q, PointCloud) or (self.seb and isinstance(Q, VPolytope)):
                pts.append(Q.points)
                owner.extend([i] * len(Q.points))
            elif isinstance(Q, EuclideanBall) and (F.kind == "euclidean" or (self.seb and F.kind == "hpolytope")):
                balls.append(Q)
                bown.append(i)
            elif isinstance(Q, Halfspace):
                halves.append(Q)
                hown.append(i)
            else:
                rest.append(i)
        self.V = np.vstack(pts) if pts else None
        self.owner = np.array(owner, dtype=int)
        self.C = np.array([B.center for B in balls]) if balls else None
        self.r = np.array([B.radius for B in balls])
        self.bown = np.array(bown, dtype=int)
        self.A = np.array([H.normal for H in halves]) if halves else None
        self.b = np.array([H.offset for H in halves])
        self.hscale = np.array([support(F, -H.normal) for H in halves])
        self.hown = np.array(hown, dtype=int)
        self.rest = rest
        if F.kind == "hpolytope":
            self.rownorms = np.linalg.norm(F.rows, axis=1)

    def __call__(self, x):
        scene, F = self.scene, self.scene.gauge
        vals = np.full(self.n, -np.inf if self.seb else np.inf)
        if self.V is not None:
            rho = gauge_value(F, self.V - x)
            (np.maximum if self.seb else np.minimum).at(vals, self.owner, rho)
        if self.C is not None:
            diff = self.C - x
            if F.kind == "euclidean":
                dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
                vals[self.bown] = dist + self.r if self.seb else np.maximum(0.0, dist - self.r)
            else:
                scores = diff @ F.rows.T + self.r[:, None] * self.rownorms[None, :]
                vals[self.bown] = np.maximum(0.0, scores.max(axis=1))
        if self.A is not None:
            vals[self.hown] = np.maximum(0.0, self.A @ x - self.b) / self.hscale
        for i in self.rest:
            Q = scene.targets[i]
            vals[i] = (max_time if self.seb else min_time)(F, Q, x).value
        value = float(vals.max())
        i_star = int(np.argmax(vals >= value - ACTIVE_RTOL * (1.0 + value)))
        if not self.seb and value == 0.0:
            return value, np.zeros(scene.dimension)
        if self.V is not None and np.any(self.owner == i_star):
            idx = np.nonzero(self.owner == i_star)[0]
            j = idx[int(np.argmax(rho[idx]) if self.seb else np.argmin(rho[idx]))]
            return value, -gauge_subgradient(F, self.V[j] - x)
        if self.A is not None and np.any(self.hown == i_star):
            k = int(np.nonzero(self.hown == i_star)[0][0])
            return value, self.A[k] / self.hscale[k]
        tv = (max_time if self.seb else min_time)(F, scene.targets[i_star], x)
        return value, tv.subgradient


def _descend(scene, x0, config, c_step, tol, max_iters, evaluate=None, window=None):
    window = window or config.window
    evaluate = evaluate or _Evaluator(scene)
    omega = scene.constraint
    x = omega.project(x0)
    f, g = evaluate(x)
    best_f, best_x, best_g = f, x.copy(), g
    history, iterates = [best_f], [x.copy()]
    delta = 0.5 * best_f if best_f > 0 else 1.0
    diminishing = pure_diminishing = config.step_rule == "diminishing"
    tol_step = config.tol_x * scene.diameter
    k_dim = 0
    since = 0
    converged = False
    k = 0
    for k in range(1, max_iters + 1):
        gn2 = float(g @ g)
        if gn2 == 0.0:
            # 0 is a subgradient: global minimizer of the objective.
            converged = True
            break
        if diminishing:
            k_dim += 1
            alpha = c_step / (math.sqrt(k_dim) * math.sqrt(gn2))
        else:
            alpha = (f - best_f + delta) / gn2
        x_new = omega.project(x - alpha * g)
        x = x_new
        f, g = evaluate(x)
        if f < best_f:
            best_f, best_x, best_g = f, x.copy(), g
            since = 0
        else:
            since += 1
        history.append(best_f)
        iterates.append(x.copy())
        if best_f == 0.0:
            converged = True
            break
        if not diminishing and since >= config.stall_iters:
            delta *= 0.5
            since = 0
            x, f, g = best_x.copy(), best_f, best_g
            if delta < 1e-3 * tol * (1.0 + best_f):
                diminishing = True
        if k >= window:
            gain = history[-window - 1] - best_f
            converged = gain < tol * (1.0 + best_f)
            # Under the plain diminishing rule the best value can stall for a
            # window and still improve later, so wait until the steps are tiny.
            if converged and (not pure_diminishing or alpha * math.sqrt(gn2) <= tol_step):
                break
    return best_x, best_f, k, converged, np.array(history), np.array(iterates)


def _run_start(scene, x0, config, c_step, evaluate=None):
    evaluate = evaluate or _Evaluator(scene)
    if not config.polish:
        x, f, iters, converged, hist, its = _descend(scene, x0, config, c_step, config.tol_obj,
                                                     config.max_iters, evaluate)
        return StartResult(np.asarray(x0, dtype=float), x, f, iters, converged, False, hist, its)
    x, f, iters, _, hist, its = _descend(scene, x0, config, c_step, POLISH_HANDOFF, config.max_iters, evaluate,
                                         HANDOFF_WINDOW)
    polished = False
    try:
        xp = _polish(scene, x)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError):
        xp = None
    if xp is not None:
        xp = scene.constraint.project(xp)
        fp = objective(scene, xp).value
        if fp <= f:
            polished = fp < f
            x, f = xp, fp
    # Confirm with one window of descent at the requested tolerance.
    x, f, k2, converged, hist2, its2 = _descend(scene, x, config, c_step, config.tol_obj, config.window, evaluate)
    hist = np.concatenate([hist, hist2[1:]])
    its = np.vstack([its, its2[1:]])
    return StartResult(np.asarray(x0, dtype=float), x, f, iters + k2, converged, polished, hist, its)


def _existence_warnings(scene):
    if scene.problem == "sib":
        if not scene.constraint.bounded and not any(Q.bounded for Q in scene.targets):
            warnings.warn("no target and no constraint set is bounded: the intersecting-ball "
                          "minimum may not be attained", RuntimeWarning, stacklevel=3)


def solve(scene, config=None):
    """Minimize the SEB or SIB objective of ``scene`` over its constraint set."""
    config = config or SolverConfig()
    scene.validate()
    _existence_warnings(scene)
    c_step = config.step_constant or scene.diameter
    evaluate = _Evaluator(scene)
    results = [_run_start(scene, s, config, c_step, evaluate) for s in start_points(scene, config)]
    best = min(range(len(results)), key=lambda i: (results[i].objective, i))
    center = scene.constraint.project(results[best].point)
    obj = objective(scene, center)
    sol = Solution(center, obj.value, obj.active_indices, results, results[best].converged)
    sol.certificate = certify(scene, sol)
    return sol


# -- certification ---------------------------------------------------------------------

def certify(scene, sol, tol=1e-6):
    """Check geometrically that ``center + radius F`` encloses / meets every target."""
    center = np.asarray(sol.center, dtype=float)
    r = float(sol.radius)
    F = scene.gauge
    per_target = []
    worst = 0.0 if not scene.targets else -math.inf
    slack = tol * (1.0 + r)
    for i, Q in enumerate(scene.targets):
        if scene.problem == "seb":
            if isinstance(Q, (PointCloud, VPolytope)):
                value = float(np.max(gauge_value(F, Q.points - center)))
            else:
                value = max_time(F, Q, center).value
        else:
            value = min_time(F, Q, center).value
        violation = value - r
        worst = max(worst, violation)
        per_target.append({"index": i, "value": value, "passed": bool(violation <= slack)})
    cviol = constraint_violation(scene.constraint, center)
    cfeas = bool(cviol <= tol)
    passed = cfeas and all(t["passed"] for t in per_target)
    return CertificateReport(passed, tol, per_target, float(worst), float(cviol), cfeas)


# -- uniqueness ------------------------------------------------------------------------

def _max_pairwise(P):
    if len(P) < 2:
        return 0.0
    D = np.linalg.norm(P[:, None, :] - P[None, :, :], axis=-1)
    return float(D.max())


def uniqueness_probe(scene, config=None):
    """Empirically classify the minimizer set as a point or a continuum."""
    config = config or SolverConfig()
    cfg = replace(config, starts=max(32, config.starts))
    sol = solve(scene, cfg)
    best = sol.radius
    band = 10.0 * cfg.tol_obj * (1.0 + best)
    samples = np.array([r.point for r in sol.per_start_results if r.objective <= best + band])
    diameter = _max_pairwise(samples)
    tol = cfg.uniqueness_cluster_tol or 1e-4 * scene.diameter
    if diameter <= tol:
        label = "unique"
    elif diameter >= 100.0 * tol:
        label = "non_unique"
    else:
        label = "inconclusive"
    return UniquenessReport(samples, diameter, tol, label, sol)


def check_degeneracy(scene):
    """True when the targets and the constraint set share a point (radius 0)."""
    from .oracle import GridSpec, grid_minimize

    if scene.problem != "sib":
        raise SceneError("check_degeneracy applies to intersecting-ball scenes")
    if scene.dimension > 3:
        warnings.warn("check_degeneracy skipped: grid sweep supports dimension <= 3",
                      RuntimeWarning, stacklevel=2)
        return False
    lo, hi = search_box(scene)
    res = {1: 1001, 2: 201, 3: 41}[scene.dimension]
    _, value = grid_minimize(scene, GridSpec(lo, hi, resolution=res, refinement_rounds=3),
                             exact_final=False)
    return bool(value <= 1e-9)


# -- local polish ---------------------------------------------------------------------

class _Model:
    """Epigraph model ``min z[d]`` subject to vector-valued smooth constraints."""

    def __init__(self, n, d):
        self.n, self.d = n, d
        self.ineq, self.eq = [], []
        self.bounds = [(None, None)] * n

    def _stack(self, parts, z):
        vals, jacs = zip(*(p(z) for p in parts))
        return np.concatenate(vals), np.vstack(jacs)

    def solve(self, z0):
        cons = []
        if self.ineq:
            cons.append({"type": "ineq", "fun": lambda z: self._stack(self.ineq, z)[0],
                         "jac": lambda z: self._stack(self.ineq, z)[1]})
        if self.eq:
            cons.append({"type": "eq", "fun": lambda z: self._stack(self.eq, z)[0],
                         "jac": lambda z: self._stack(self.eq, z)[1]})
        e = np.zeros(self.n)
        e[self.d] = 1.0
        bounds = self.bounds if any(b != (None, None) for b in self.bounds) else None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            res = minimize(lambda z: z[self.d], z0, jac=lambda z: e, method="SLSQP",
                           constraints=cons, bounds=bounds,
                           options={"ftol": 1e-15, "maxiter": 500})
        if not np.all(np.isfinite(res.x)):
            return None
        return res.x


def _add_constraint_set(model, omega):
    d = model.d
    n = model.n
    if isinstance(omega, WholeSpace):
        return
    if isinstance(omega, AxisBox):
        for i in range(d):
            model.bounds[i] = (float(omega.lo[i]), float(omega.hi[i]))
        return
    if isinstance(omega, HPolytopeSet):
        G = np.zeros((len(omega.rows), n))
        G[:, :d] = -omega.rows
        b = omega.offsets
        model.ineq.append(lambda z: (b + G @ z, G))
        return
    c, r2 = omega.center, omega.radius ** 2

    def sq(z):
        y = z[:d]
        J = np.zeros((1, n))
        J[0, :d] = -2.0 * (y - c)
        return np.array([r2 - float((y - c) @ (y - c))]), J

    if isinstance(omega, EuclideanBall):
        model.ineq.append(sq)
    elif isinstance(omega, Sphere):
        model.eq.append(sq)


def _seb_model(scene, y0):
    F, d = scene.gauge, scene.dimension
    model = _Model(d + 1, d)
    verts = [Q.points for Q in scene.targets if isinstance(Q, (PointCloud, VPolytope))]
    V = np.vstack(verts) if verts else np.zeros((0, d))
    balls = [Q for Q in scene.targets if isinstance(Q, EuclideanBall)]
    if F.kind == "hpolytope":
        R = F.rows
        norms = np.linalg.norm(R, axis=1)
        rows, consts = [], []
        for w in V:
            rows.append(R)
            consts.append(-(R @ w))
        for B in balls:
            rows.append(R)
            consts.append(-(R @ B.center) - B.radius * norms)
        A = np.vstack(rows)
        G = np.hstack([A, np.ones((len(A), 1))])
        h = np.concatenate(consts)
        model.ineq.append(lambda z: (G @ z + h, G))
        model.bounds[d] = (0.0, None)
        t0 = max(0.0, float(np.max(G @ np.append(y0, 0.0) * -1.0 - h))) if len(G) else 0.0
        t0 = max(t0, float(np.max(-(G[:, :d] @ y0) - h)) if len(G) else 0.0)
        return model, np.append(y0, t0 * (1 + 1e-9))
    M = np.eye(d) if F.kind == "euclidean" else F.matrix

    if len(V):
        def vert(z):
            y, s = z[:d], z[d]
            diff = V - y
            MD = diff @ M
            J = np.zeros((len(V), d + 1))
            J[:, :d] = 2.0 * MD
            J[:, d] = 1.0
            return s - np.sum(diff * MD, axis=1), J
        model.ineq.append(vert)

    for B in balls:
        def ball(z, B=B):
            y, s = z[:d], z[d]
            tv = max_time(F, B, y)
            J = np.zeros((1, d + 1))
            J[0, :d] = -2.0 * tv.value * tv.subgradient
            J[0, d] = 1.0
            return np.array([s - tv.value ** 2]), J
        model.ineq.append(ball)
    s0 = objective(scene, y0).value ** 2
    return model, np.append(y0, s0 * (1 + 1e-9))


def _sib_model(scene, y0):
    F, d = scene.gauge, scene.dimension
    if F.kind == "euclidean":
        model = _Model(d + 1, d)
        for Q in scene.targets:
            def piece(z, Q=Q):
                y, s = z[:d], z[d]
                p = Q.project(y)
                diff = y - p
                J = np.zeros((1, d + 1))
                J[0, :d] = -2.0 * diff
                J[0, d] = 1.0
                return np.array([s - float(diff @ diff)]), J
            model.ineq.append(piece)
        s0 = objective(scene, y0).value ** 2
        return model, np.append(y0, s0 * (1 + 1e-9))

    # Lifted model: one witness variable per target, rho_F(q_i - y) <= t.
    blocks, z0 = [], [y0, [0.0]]
    n = d + 1
    for Q in scene.targets:
        w = min_time(F, Q, y0).witness
        if isinstance(Q, PointCloud):
            blocks.append(("fixed", Q, w, None))
        elif isinstance(Q, VPolytope):
            k = len(Q.points)
            big = 1e3
            E = np.vstack([Q.points.T, big * np.ones((1, k))])
            lam = lsq_linear(E, np.append(w, big), bounds=(0.0, np.inf), method="bvls").x
            lam = lam / lam.sum() if lam.sum() > 0 else np.full(k, 1.0 / k)
            blocks.append(("hull", Q, None, slice(n, n + k)))
            z0.append(lam)
            n += k
        else:
            blocks.append(("free", Q, None, slice(n, n + d)))
            z0.append(w)
            n += d
    model = _Model(n, d)
    z0 = np.concatenate([np.ravel(v) for v in z0])

    def witness(z, blk):
        kind, Q, w, sl = blk
        if kind == "fixed":
            return w
        if kind == "hull":
            return Q.points.T @ z[sl]
        return z[sl]

    def chain(blk, Jq):
        """Map a Jacobian w.r.t. the witness point onto the block variables."""
        kind, Q, _, sl = blk
        J = np.zeros((Jq.shape[0], n))
        if kind == "free":
            J[:, sl] = Jq
        elif kind == "hull":
            J[:, sl] = Jq @ Q.points.T
        return J

    for blk in blocks:
        kind, Q, _, sl = blk
        if F.kind == "hpolytope":
            R = F.rows

            def gpiece(z, blk=blk, R=R):
                y, t = z[:d], z[d]
                q = witness(z, blk)
                J = chain(blk, -R)
                J[:, :d] += R
                J[:, d] = 1.0
                return t - R @ (q - y), J
        else:
            A = F.matrix

            def gpiece(z, blk=blk, A=A):
                y, s = z[:d], z[d]
                q = witness(z, blk)
                Aq = A @ (q - y)
                J = chain(blk, -2.0 * Aq[None, :])
                J[0, :d] += 2.0 * Aq
                J[0, d] = 1.0
                return np.array([s - float((q - y) @ Aq)]), J
        model.ineq.append(gpiece)
        if kind == "hull":
            k = sl.stop - sl.start
            for i in range(sl.start, sl.stop):
                model.bounds[i] = (0.0, None)
            Je = np.zeros((1, n))
            Je[0, sl] = 1.0
            model.eq.append(lambda z, sl=sl, Je=Je: (np.array([z[sl].sum() - 1.0]), Je))
        elif kind == "free" and isinstance(Q, EuclideanBall):
            def member(z, sl=sl, c=Q.center, r2=Q.radius ** 2):
                q = z[sl]
                J = np.zeros((1, n))
                J[0, sl] = -2.0 * (q - c)
                return np.array([r2 - float((q - c) @ (q - c))]), J
            model.ineq.append(member)
        elif kind == "free" and isinstance(Q, Halfspace):
            Jh = np.zeros((1, n))
            Jh[0, sl] = -Q.normal
            model.ineq.append(lambda z, sl=sl, Q=Q, Jh=Jh: (np.array([Q.offset - float(Q.normal @ z[sl])]), Jh))
    val = objective(scene, y0).value
    z0[d] = (val if F.kind == "hpolytope" else val ** 2) * (1 + 1e-9)
    if F.kind == "hpolytope":
        model.bounds[d] = (0.0, None)
    return model, z0


def _polish(scene, x):
    lo, hi = scene.bounding_box()
    mid = 0.5 * (lo + hi)
    D = scene.diameter
    scaled = scene.scaled(1.0 / D, shift=mid)
    y0 = (x - mid) / D
    build = _seb_model if scene.problem == "seb" else _sib_model
    model, z0 = build(scaled, y0)
    _add_constraint_set(model, scaled.constraint)
    z = model.solve(z0)
    if z is None:
        return None
    return mid + D * z[:scene.dimension]
