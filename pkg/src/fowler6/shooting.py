"""Two-parameter shooting for the bounded periodic orbits.

The initial-condition plane (b1, b2) = (v''(0), v''''(0)) with prescribed
minimum v(0) = a0 splits into an escape-below set S1, an escape-above set S2
and their common boundary, on which the unique bounded orbit sits.  The seam
is localized by nested bisection and escape-time maximization; the orbit is
then refined with a damped Newton iteration.

Full half-period single shooting is exponentially ill-conditioned here (the
fastest rate amplifies initial perturbations by e^(mu_max * tau), about 1e5
already at a0 = 0.5), so the Newton core uses multiple shooting with segment
lengths capped near one time unit and the endpoint symmetry conditions
imposed structurally (odd derivatives vanish at both ends).  Where the
conditioning allows, a final polish on the literal three-unknown half-period
residual (v', v''', v''''')(tau) is attempted and adopted when it tightens
the result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import OperatorSpec, ProblemParams, equilibrium_amplitude
from .energy import hamiltonian_value, potential_well
from .integrator import (
    Guards,
    IntegrationError,
    Orbit,
    State,
    Tolerances,
    integrate,
    make_rhs,
    reflect_state,
)

__all__ = [
    "ShootParams",
    "Classification",
    "SeamBracket",
    "SeamSearchError",
    "NewtonError",
    "PeriodicSolution",
    "escape_radius",
    "classify",
    "seam_search",
    "solve_periodic",
    "sweep",
    "quotient_check",
    "linearized_frequency",
    "default_b_box",
]

_SEGMENT_LENGTH = 1.1  # max multiple-shooting segment, time units


class SeamSearchError(RuntimeError):
    def __init__(self, message, classification_map=None):
        super().__init__(message)
        self.classification_map = classification_map


class NewtonError(RuntimeError):
    pass


@dataclass(frozen=True)
class ShootParams:
    """Initial data (a0, 0, b1, 0, b2, 0), classification horizon and radius."""

    a0: float
    b: tuple[float, float]
    horizon: float
    escape_radius: float

    def initial_state(self) -> State:
        b1, b2 = self.b
        return State(0.0, np.array([self.a0, 0.0, b1, 0.0, b2, 0.0]))


@dataclass(frozen=True)
class Classification:
    kind: str  # 'S1' | 'S2' | 'undecided'
    t_exit: float
    orbit: Orbit


@dataclass(frozen=True)
class SeamBracket:
    a0: float
    b1_lo: float
    b1_hi: float
    b2: float
    escape_time: float
    n_classified: int

    @property
    def b_center(self) -> tuple[float, float]:
        return (0.5 * (self.b1_lo + self.b1_hi), self.b2)


@dataclass
class PeriodicSolution:
    """A converged bounded orbit with its one-period evaluator."""

    a0: float
    a2: float
    a4: float
    period: float
    max_value: float
    energy: float
    newton_residual: float
    samples: list[State]
    orbit: Orbit = field(repr=False)
    method: str = "continuation"
    _v5_modes: np.ndarray = field(repr=False, default=None)
    _v5_freqs: np.ndarray = field(repr=False, default=None)
    _half: Orbit = field(repr=False, default=None)
    _tau: float = field(repr=False, default=0.0)

    def state_at(self, t) -> np.ndarray:
        """Phase point by periodic extension; the second half of each period
        is the even reflection of the dense first half about the maximum."""
        tm = float(np.mod(t, self.period))
        if tm <= self._tau:
            return self._half.y_at(tm)
        return reflect_state(self._half.y_at(self.period - tm))

    def sixth_derivative(self, t) -> float:
        """v^(6) by spectral differentiation of the sampled fifth derivative.

        Independent of the equation's right-hand side: uses only the
        integrated samples, so residual checks downstream stay honest.
        """
        om = 2.0 * math.pi / self.period
        phase = np.exp(1j * self._v5_freqs * om * np.mod(t, self.period))
        return float(np.real(np.sum(self._v5_modes * 1j * self._v5_freqs * om * phase)))

    def derivatives(self, t, order: int = 6) -> np.ndarray:
        y = self.state_at(t)
        if order <= 5:
            return y[: order + 1]
        if order > 6:
            raise ValueError("derivatives available up to order 6")
        return np.concatenate([y, [self.sixth_derivative(t)]])


def linearized_frequency(params: ProblemParams, spec: OperatorSpec) -> float:
    """Real oscillation frequency at the constant solution.

    Root omega of omega^6 + K4 omega^4 + K2 omega^2 = (p-1) K0 (m = 3).
    """
    if spec.m != 3:
        raise ValueError("linearized frequency implemented for m = 3")
    K0, K2, K4 = spec.K[0], spec.K[1], spec.K[2]
    roots = np.roots([1.0, K4, K2, -(params.p - 1.0) * K0])
    real_pos = [r.real for r in roots if abs(r.imag) < 1e-9 * abs(r) + 1e-12 and r.real > 0]
    if len(real_pos) != 1:
        raise ArithmeticError("expected exactly one positive squared frequency")
    return math.sqrt(real_pos[0])


def default_b_box(params: ProblemParams, spec: OperatorSpec) -> float:
    """Half-width of the shooting box, from the largest root of
    K4 x^2 - K2 x + K0 = 0 in x = beta^2 (m = 3)."""
    K0, K2, K4 = spec.K[0], spec.K[1], spec.K[2]
    disc = K2 * K2 - 4.0 * K4 * K0
    if disc <= 0:
        return 4.0 * equilibrium_amplitude(params, spec)
    return math.sqrt((K2 + math.sqrt(disc)) / (2.0 * K4))


def escape_radius(
    params: ProblemParams,
    spec: OperatorSpec,
    a0: float,
    b_box: float | None = None,
    safety: float = 2.0,
) -> float:
    """Radius beyond which bounded orbits from the b-box cannot pass.

    Solves G(R) = C(a0) for R above the equilibrium amplitude, where C(a0)
    is the maximal initial energy over the box; the result is scaled by the
    safety factor.
    """
    from scipy.optimize import brentq

    if b_box is None:
        b_box = default_b_box(params, spec)
    K4 = spec.K[2]
    g_a0 = float(potential_well(params, spec, a0))
    corners = [
        -b1 * b2 + 0.5 * K4 * b1 * b1 + g_a0
        for b1 in (0.0, b_box)
        for b2 in (-b_box, b_box)
    ]
    C = max(corners)
    a_star = equilibrium_amplitude(params, spec)
    hi = 2.0 * a_star
    while float(potential_well(params, spec, hi)) < C:
        hi *= 2.0
        if hi > 1e6:
            raise ArithmeticError("escape radius search diverged")
    lo = a_star
    if float(potential_well(params, spec, lo)) >= C:
        return safety * a_star * 1.5
    root = brentq(lambda r: float(potential_well(params, spec, r)) - C, lo, hi, xtol=1e-10)
    return safety * root


def classify(
    params: ProblemParams,
    spec: OperatorSpec,
    shoot: ShootParams,
    tol: Tolerances = Tolerances(rel=1e-10, abs=1e-12),
) -> Classification:
    """S1 if v crosses below zero first, S2 if it crosses the escape radius
    while positive, undecided if the horizon elapses inside the strip."""
    a_star = equilibrium_amplitude(params, spec)
    guards = Guards(v_max=shoot.escape_radius, v_min=-1e-3 * a_star)
    orbit = integrate(
        params,
        spec,
        shoot.initial_state(),
        shoot.horizon,
        tol=tol,
        guards=guards,
        detect_events=False,
    )
    if orbit.status == "left-domain":
        return Classification("S1", orbit.status_t, orbit)
    if orbit.status == "blew-up":
        return Classification("S2", orbit.status_t, orbit)
    return Classification("undecided", shoot.horizon, orbit)


# ---------------------------------------------------------------------------
# seam search


def _classify_b(params, spec, a0, b1, b2, horizon, radius, tol):
    sp = ShootParams(a0=a0, b=(b1, b2), horizon=horizon, escape_radius=radius)
    return classify(params, spec, sp, tol=tol)


def seam_search(
    params: ProblemParams,
    spec: OperatorSpec,
    a0: float,
    n_b2: int = 11,
    n_scan: int = 9,
    b1_tol: float = 1e-3,
    grid_offset: float = 0.0,
    b2_tol: float = 1e-3,
    horizon: float | None = None,
    escape_safety: float = 2.0,
    tol: Tolerances = Tolerances(rel=1e-9, abs=1e-12),
) -> SeamBracket:
    """Localize the S1/S2 boundary point of maximal escape time.

    For each b2 on a coarse grid the b1 axis is scanned for classification
    flips and each flip bisected to ``b1_tol``; the candidate whose midpoint
    survives longest seeds refinement rounds that shrink the b2 grid
    geometrically around the running argmax until its spacing drops under
    ``b2_tol``.  ``grid_offset`` (in units of the b2 spacing) shifts the
    initial grid, giving an independent second bracket.  If no flip is found
    the box is widened twice before giving up with the classification map
    attached.
    """
    a_star = equilibrium_amplitude(params, spec)
    if not 0.0 < a0 < a_star:
        raise ValueError(f"a0 must lie in (0, {a_star:.6f})")
    box = default_b_box(params, spec)
    radius = escape_radius(params, spec, a0, b_box=box, safety=escape_safety)
    if horizon is None:
        horizon = 60.0
    n_classified = 0
    cls_map: list[tuple[float, float, str]] = []

    def kind_at(b1, b2, hz=horizon):
        nonlocal n_classified
        n_classified += 1
        c = _classify_b(params, spec, a0, b1, b2, hz, radius, tol)
        cls_map.append((b1, b2, c.kind))
        return c

    deep_tol = 1e-7

    def bisect_line(b2, lo, hi, k_lo):
        """Bisect a flip to deep_tol; the score is the longest survival seen.

        On the sheet through the bounded orbit the escape time keeps growing
        as the bracket tightens, while on spurious boundary sheets (grazing
        orbits) it saturates; scoring at depth separates the two.
        """
        t_best = 0.0
        while hi - lo > deep_tol:
            mid = 0.5 * (lo + hi)
            c = kind_at(mid, b2)
            if c.kind == "undecided":
                return mid - 0.5 * deep_tol, mid + 0.5 * deep_tol, horizon
            t_best = max(t_best, c.t_exit)
            if c.kind == k_lo:
                lo = mid
            else:
                hi = mid
        return lo, hi, t_best

    def scan_line(b2, b1_values):
        """Best seam candidate on one b2 line, scanning for flips."""
        kinds = [kind_at(b1, b2).kind for b1 in b1_values]
        cand = None
        for i in range(len(b1_values) - 1):
            ka, kb = kinds[i], kinds[i + 1]
            if ka == "undecided":
                c = (b1_values[i] - b1_tol, b1_values[i] + b1_tol, b2, horizon)
                if cand is None or c[3] > cand[3]:
                    cand = c
                continue
            if kb == "undecided" or ka == kb:
                continue
            lo, hi, t_exit = bisect_line(b2, b1_values[i], b1_values[i + 1], ka)
            if cand is None or t_exit > cand[3]:
                cand = (lo, hi, b2, t_exit)
        return cand

    best = None
    for widen in range(3):
        scale = 1.05 * box * 2.0**widen
        spacing = 2.0 * scale / (n_b2 - 1)
        b2_values = -scale + spacing * (np.arange(n_b2) + grid_offset)
        for b2 in b2_values:
            cand = scan_line(b2, np.linspace(0.0, scale, n_scan))
            if cand is not None and (best is None or cand[3] > best[3]):
                best = cand
        if best is not None:
            break
    else:
        raise SeamSearchError(
            "no S1/S2 flip found on the widened grid", classification_map=cls_map
        )

    # geometric b2 refinement around the running argmax
    while spacing > b2_tol:
        lo, hi, b2c, _ = best
        b2_values = np.linspace(b2c - spacing, b2c + spacing, 7)
        spacing = b2_values[1] - b2_values[0]
        b1c = 0.5 * (lo + hi)
        width = max(12.0 * b1_tol, 1.5 * spacing, 0.25 * (hi - lo) + 0.02)
        for b2 in b2_values:
            b1_lo, b1_hi = max(0.0, b1c - width), b1c + width
            cand = scan_line(b2, np.linspace(b1_lo, b1_hi, 5))
            if cand is not None and cand[3] > best[3]:
                best = cand

    lo, hi, b2c, t_exit = best
    return SeamBracket(
        a0=a0, b1_lo=lo, b1_hi=hi, b2=b2c, escape_time=t_exit, n_classified=n_classified
    )


# ---------------------------------------------------------------------------
# multiple-shooting Newton


def _segment_count(tau: float) -> int:
    return max(2, int(math.ceil(tau / _SEGMENT_LENGTH)))


def _flow(params, spec, y0, T, tol):
    orb = integrate(
        params, spec, State(0.0, y0), T, tol=tol, detect_events=False
    )
    return orb.ys[-1]


def _pack(a0, nodes, tau):
    """Unknown vector [b1, b2, interior nodes..., m, c1, c2, tau]."""
    inner = nodes[1:-1]
    head = [nodes[0][2], nodes[0][4]]
    tail = [nodes[-1][0], nodes[-1][2], nodes[-1][4]]
    return np.concatenate([head, np.ravel(inner), tail, [tau]])


def _unpack(X, a0, S):
    b1, b2 = X[0], X[1]
    nodes = [np.array([a0, 0.0, b1, 0.0, b2, 0.0])]
    inner = X[2 : 2 + 6 * (S - 1)].reshape(S - 1, 6)
    nodes.extend(np.array(row) for row in inner)
    mval, c1, c2 = X[-4], X[-3], X[-2]
    nodes.append(np.array([mval, 0.0, c1, 0.0, c2, 0.0]))
    return nodes, X[-1]


def _ms_residual(params, spec, a0, X, S, tol):
    nodes, tau = _unpack(X, a0, S)
    if tau <= 0:
        raise NewtonError("non-positive half period")
    h = tau / S
    R = np.empty(6 * S)
    ends = []
    for k in range(S):
        yk = _flow(params, spec, nodes[k], h, tol)
        ends.append(yk)
        R[6 * k : 6 * k + 6] = yk - nodes[k + 1]
    return R, ends, nodes, h


def _ms_newton(
    params,
    spec,
    a0,
    X0,
    S,
    tol_flow: Tolerances,
    newton_tol: float,
    fd_step: float,
    itmax: int = 40,
):
    """Damped Newton on the multiple-shooting system; returns (X, |R|_inf)."""
    f = make_rhs(params, spec)
    X = np.asarray(X0, dtype=float).copy()
    R, ends, nodes, h = _ms_residual(params, spec, a0, X, S, tol_flow)
    nR = float(np.max(np.abs(R)))
    nvar = len(X)
    # column -> segment whose start node holds that unknown
    col_owner = {0: 0, 1: 0}
    for k in range(1, S):
        for j in range(6):
            col_owner[2 + 6 * (k - 1) + j] = k
    for _ in range(itmax):
        if nR < newton_tol:
            return X, nR
        J = np.zeros((6 * S, nvar))
        # identity couplings to downstream nodes
        for k in range(S - 1):
            J[6 * k : 6 * k + 6, 2 + 6 * k : 8 + 6 * k] = -np.eye(6)
        J[6 * (S - 1) + 0, nvar - 4] = -1.0
        J[6 * (S - 1) + 2, nvar - 3] = -1.0
        J[6 * (S - 1) + 4, nvar - 2] = -1.0
        # flow sensitivities by forward differences, one segment per column;
        # the endpoint unknowns (m, c1, c2) enter only through the identity
        for j, k in col_owner.items():
            hstep = fd_step * max(1.0, abs(X[j]))
            Xp = X.copy()
            Xp[j] += hstep
            nodes_p, tau_p = _unpack(Xp, a0, S)
            yk = _flow(params, spec, nodes_p[k], tau_p / S, tol_flow)
            J[6 * k : 6 * k + 6, j] += (yk - ends[k]) / hstep
        # analytic tau column: d/dtau F_{tau/S}(y_k) = f(end_k)/S
        for k in range(S):
            J[6 * k : 6 * k + 6, nvar - 1] = f(ends[k]) / S
        try:
            step = np.linalg.solve(J, R)
        except np.linalg.LinAlgError as exc:
            raise NewtonError(f"singular multiple-shooting Jacobian: {exc}")
        if abs(step[-1]) > 0.15 * X[-1]:
            step *= 0.15 * X[-1] / abs(step[-1])
        lam, accepted = 1.0, False
        while lam > 1e-7:
            Xn = X - lam * step
            if Xn[-1] > 0:
                try:
                    Rn, ends_n, _, _ = _ms_residual(params, spec, a0, Xn, S, tol_flow)
                except (IntegrationError, NewtonError):
                    lam *= 0.5
                    continue
                nRn = float(np.max(np.abs(Rn)))
                if nRn < nR:
                    X, R, ends, nR = Xn, Rn, ends_n, nRn
                    accepted = True
                    break
            lam *= 0.5
        if not accepted:
            break  # stalled, usually at the integrator noise floor
    return X, nR


def _polish_single_shooting(params, spec, a0, b1, b2, tau, tol, newton_tol, itmax=12):
    """Newton on the literal residual (v', v''', v''''')(tau), three unknowns.

    Only attempted when e^(mu_max tau) stays well below 1/eps; returns
    (b1, b2, tau, residual) or None when it cannot improve.
    """
    f = make_rhs(params, spec)

    def phi(x):
        y = _flow(params, spec, np.array([a0, 0, x[0], 0, x[1], 0]), x[2], tol)
        return np.array([y[1], y[3], y[5]]), y

    x = np.array([b1, b2, tau])
    P, y_end = phi(x)
    nP = float(np.max(np.abs(P)))
    best = (x.copy(), nP)
    for _ in range(itmax):
        if nP < newton_tol:
            break
        J = np.zeros((3, 3))
        for j in range(2):
            h = 1e-8 * max(1.0, abs(x[j]))
            xp = x.copy()
            xp[j] += h
            Pp, _ = phi(xp)
            J[:, j] = (Pp - P) / h
        dy = f(y_end)
        J[:, 2] = [y_end[2], y_end[4], dy[5]]
        try:
            step = np.linalg.solve(J, P)
        except np.linalg.LinAlgError:
            break
        if abs(step[2]) > 0.1 * x[2]:
            step *= 0.1 * x[2] / abs(step[2])
        lam, accepted = 1.0, False
        while lam > 1e-5:
            xn = x - lam * step
            if xn[2] > 0:
                try:
                    Pn, yn = phi(xn)
                except IntegrationError:
                    lam *= 0.5
                    continue
                nPn = float(np.max(np.abs(Pn)))
                if nPn < nP:
                    x, P, y_end, nP = xn, Pn, yn, nPn
                    accepted = True
                    if nP < best[1]:
                        best = (x.copy(), nP)
                    break
            lam *= 0.5
        if not accepted:
            break
    return best


def _lyapunov_seed(params, spec, eps, S):
    """Linearized small orbit v = a* - eps cos(omega t) as a node chain."""
    a_star = equilibrium_amplitude(params, spec)
    om = linearized_frequency(params, spec)
    tau = math.pi / om
    nodes = []
    for k in range(S + 1):
        t = tau * k / S
        c, s = math.cos(om * t), math.sin(om * t)
        nodes.append(
            np.array(
                [
                    a_star - eps * c,
                    eps * om * s,
                    eps * om**2 * c,
                    -eps * om**3 * s,
                    -eps * om**4 * c,
                    eps * om**5 * s,
                ]
            )
        )
    nodes[0][1::2] = 0.0
    nodes[-1][1::2] = 0.0
    return _pack(a_star - eps, nodes, tau)


def _integrate_chain(params, spec, nodes, h, tol) -> Orbit:
    """Dense orbit over [0, S*h] stitched from per-node segment runs.

    Long uninterrupted runs depart the orbit through its unstable Floquet
    direction; integrating each segment from its own converged node keeps
    every sample at the Newton-residual level.
    """
    from .integrator import Event

    S = len(nodes) - 1
    ts_parts, ys_parts, events = [], [], []
    seg_t0, seg_h, seg_y0, seg_Q = [], [], [], []
    for k in range(S):
        orb = integrate(params, spec, State(0.0, nodes[k]), h, tol=tol)
        off = k * h
        sl = slice(0 if k == 0 else 1, None)
        ts_parts.append(orb.ts[sl] + off)
        ys_parts.append(orb.ys[sl])
        for e in orb.events:
            if e.t > 1e-12:
                events.append(Event(e.kind, e.t + off, State(e.t + off, e.state.y)))
        seg_t0.append(orb._seg_t0 + off)
        seg_h.append(orb._seg_h)
        seg_y0.append(orb._seg_y0)
        seg_Q.append(orb._seg_Q)
    return Orbit(
        ts=np.concatenate(ts_parts),
        ys=np.vstack(ys_parts),
        events=events,
        status="completed",
        status_t=S * h,
        _seg_t0=np.concatenate(seg_t0),
        _seg_h=np.concatenate(seg_h),
        _seg_y0=np.vstack(seg_y0),
        _seg_Q=np.concatenate(seg_Q, axis=0),
    )


def _nodes_from_orbit(y_at, tau, S, a0, b1, b2):
    nodes = [np.array([a0, 0.0, b1, 0.0, b2, 0.0])]
    for k in range(1, S):
        nodes.append(np.array(y_at(tau * k / S)))
    y_end = np.array(y_at(tau))
    y_end[1::2] = 0.0
    nodes.append(y_end)
    return nodes


def _seed_from_bracket(params, spec, a0, bracket: SeamBracket, tol):
    """Integrate the bracket center to its first maximum and cut node chain.

    Only maxima strictly inside the strip (above the equilibrium amplitude,
    below the escape radius) qualify; spurious turning points of an already
    escaping trajectory are rejected.
    """
    b1, b2 = bracket.b_center
    a_star = equilibrium_amplitude(params, spec)
    radius = escape_radius(params, spec, a0)
    guards = Guards(v_max=4.0 * radius, v_min=-0.5 * a0)
    orbit = integrate(
        params,
        spec,
        State(0.0, np.array([a0, 0, b1, 0, b2, 0])),
        min(bracket.escape_time + 1.0, 40.0),
        tol=tol,
        guards=guards,
    )
    tau0 = None
    for e in orbit.events:
        if (
            e.kind == "v1-zero"
            and e.t > 1e-6
            and a_star < e.state.y[0] < radius
            and e.state.y[2] < 0
        ):
            tau0 = e.t
            break
    if tau0 is None:
        raise NewtonError("bracket orbit shows no maximum inside the strip")
    S = _segment_count(tau0)
    nodes = _nodes_from_orbit(orbit.y_at, tau0, S, a0, b1, b2)
    return _pack(a0, nodes, tau0), S


_COARSE_FLOW = Tolerances(rel=1e-9, abs=1e-12)


def _converge(params, spec, a0, X, S, tol: Tolerances, newton_tol: float):
    """Coarse then fine multiple-shooting passes."""
    X, _ = _ms_newton(
        params, spec, a0, X, S, _COARSE_FLOW, max(1e-7, 100 * newton_tol), fd_step=1e-6
    )
    X, nR = _ms_newton(params, spec, a0, X, S, tol, newton_tol, fd_step=1e-7)
    return X, nR


def _assemble_solution(
    params, spec, a0, X, S, nR, tol: Tolerances, method: str, n_samples: int = 512
) -> PeriodicSolution:
    nodes, tau = _unpack(X, a0, S)
    b1, b2 = nodes[0][2], nodes[0][4]
    residual = nR

    # literal half-period polish, adopted only when it tightens the residual
    mu_max = spec.mu[-1]
    if mu_max * tau < math.log(1e7):
        (pb1, pb2, ptau), p_res = _polish_single_shooting(
            params, spec, a0, b1, b2, tau, tol, newton_tol=tol.newton
        )
        if p_res < min(residual, 1e-10):
            b1, b2, tau, residual = pb1, pb2, ptau, p_res

    # dense half period stitched from the converged node chain, full period
    # by even reflection about the maximum
    period = 2.0 * tau
    y0 = np.array([a0, 0.0, b1, 0.0, b2, 0.0])
    half = _integrate_chain(params, spec, nodes, tau / S, tol)
    mirror_ts = period - half.ts[::-1]
    mirror_ys = half.ys[::-1] * np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
    m_events = [
        type(e)(e.kind, period - e.t, State(period - e.t, reflect_state(e.state.y)))
        for e in reversed(half.events)
    ]
    from .integrator import Event

    y_max = half.ys[-1].copy()
    y_max[1::2] = 0.0
    extrema = [
        Event("v1-zero", tau, State(tau, y_max)),  # the unique maximum
        Event("v1-zero", period, State(period, y0)),  # the minimum, one period on
    ]
    merged = sorted(half.events + m_events + extrema, key=lambda e: (e.kind, e.t))
    deduped = [
        e
        for i, e in enumerate(merged)
        if i == 0 or e.kind != merged[i - 1].kind or e.t - merged[i - 1].t > 1e-6
    ]
    full = Orbit(
        ts=np.concatenate([half.ts, mirror_ts[1:]]),
        ys=np.vstack([half.ys, mirror_ys[1:]]),
        events=sorted(deduped, key=lambda e: e.t),
        status="completed",
        status_t=period,
        _seg_t0=half._seg_t0,
        _seg_h=half._seg_h,
        _seg_y0=half._seg_y0,
        _seg_Q=half._seg_Q,
    )

    def state_at_local(t):
        tm = float(np.mod(t, period))
        if tm <= tau:
            return half.y_at(tm)
        return reflect_state(half.y_at(period - tm))

    ts = np.linspace(0.0, period, n_samples, endpoint=False)
    ys = np.array([state_at_local(t) for t in ts])
    samples = [State(float(t), y) for t, y in zip(ts, ys)]

    modes = np.fft.rfft(ys[:, 5])
    floor = 1e-13 * np.max(np.abs(modes))
    modes[np.abs(modes) < floor] = 0.0
    if n_samples % 2 == 0:
        modes[-1] = 0.0  # drop the Nyquist mode from derivative use
    freqs = np.arange(len(modes), dtype=float)
    scale = np.full(len(modes), 2.0 / n_samples)
    scale[0] = 1.0 / n_samples

    sol = PeriodicSolution(
        a0=a0,
        a2=float(b1),
        a4=float(b2),
        period=float(period),
        max_value=float(half.ys[-1, 0]),
        energy=hamiltonian_value(params, spec, y0),
        newton_residual=float(residual),
        samples=samples,
        orbit=full,
        method=method,
        _v5_modes=modes * scale,
        _v5_freqs=freqs,
        _half=half,
        _tau=float(tau),
    )
    return sol


def _solve_by_continuation(params, spec, a0_target, tol, newton_tol, cache=None):
    """Walk the orbit family down from the constant solution.

    The family is continued geometrically in the distance to the equilibrium
    amplitude with a secant predictor; ``cache`` (dict keyed by rounded a0)
    collects every converged unknown vector for warm starts.
    """
    a_star = equilibrium_amplitude(params, spec)
    if not 0.0 < a0_target < a_star:
        raise ValueError(f"a0 must lie in (0, {a_star:.6f})")

    if cache is None:
        cache = {}
    full_hist: list[tuple[float, np.ndarray, int]] = cache.get("_hist", [])
    eps_target = a_star - a0_target
    # walk from the deepest cached point not past the target
    hist = [entry for entry in full_hist if entry[0] <= eps_target + 1e-14]

    def solve_at(eps, X, S):
        X, nR = _converge(params, spec, a_star - eps, X, S, tol, newton_tol)
        if nR > max(200 * newton_tol, 1e-8):
            return None
        return X, nR

    if not hist:
        eps0 = min(5e-4, 0.5 * (a_star - a0_target))
        S0 = _segment_count(math.pi / linearized_frequency(params, spec))
        got = solve_at(eps0, _lyapunov_seed(params, spec, eps0, S0), S0)
        if got is None:
            raise NewtonError("seed solve near the equilibrium failed")
        hist.append((eps0, got[0], S0))

    def predict(eps_new, S_new):
        eps2, X2, S2 = hist[-1]
        nodes2, tau2 = _unpack(X2, a_star - eps2, S2)
        if len(hist) >= 2 and hist[-2][2] == S2 == S_new:
            eps1, X1, _ = hist[-2]
            return X2 + (X2 - X1) * (eps_new - eps2) / (eps2 - eps1)
        # rebuild the node chain at the new segment count from the last orbit
        b1, b2 = nodes2[0][2], nodes2[0][4]
        sol_orbit = integrate(
            params,
            spec,
            State(0.0, nodes2[0]),
            tau2,
            tol=_COARSE_FLOW,
            detect_events=False,
        )
        nodes = _nodes_from_orbit(sol_orbit.y_at, tau2, S_new, a_star - eps_new, b1, b2)
        return _pack(a_star - eps_new, nodes, tau2)

    while hist[-1][0] < eps_target - 1e-14:
        eps = hist[-1][0]
        advanced = False
        for fac in (1.6, 1.25, 1.1, 1.03):
            eps_new = min(eps * fac, eps + 0.06, eps_target)
            tau_est = hist[-1][1][-1]
            S_new = _segment_count(tau_est * (1.0 + 0.5 * (eps_new - eps)))
            got = solve_at(eps_new, predict(eps_new, S_new), S_new)
            if got is not None:
                hist.append((eps_new, got[0], S_new))
                advanced = True
                break
        if not advanced:
            raise NewtonError(f"continuation stalled at a0={a_star - eps:.6f}")
    if not full_hist or hist[-1][0] > full_hist[-1][0]:
        cache["_hist"] = hist
    eps, X, S = hist[-1]
    X, nR = _ms_newton(params, spec, a0_target, X, S, tol, newton_tol, fd_step=1e-7)
    return X, S, nR


def solve_periodic(
    params: ProblemParams,
    spec: OperatorSpec,
    a0: float,
    method: str = "auto",
    seam_bracket: SeamBracket | None = None,
    tol: Tolerances = Tolerances(),
    newton_tol: float | None = None,
    grid_offset: float = 0.0,
    horizon_mult: float = 1.0,
    escape_safety: float = 2.0,
    _cache: dict | None = None,
) -> PeriodicSolution:
    """Construct the bounded orbit with minimum a0.

    method 'seam' goes through the S1/S2 boundary search; 'continuation'
    walks down from the constant solution; 'auto' prefers continuation and
    falls back to the seam route.  Raises NewtonError on non-convergence.
    """
    if spec.m != 3:
        raise ValueError("shooting is validated for m = 3 only")
    if newton_tol is None:
        newton_tol = tol.newton
    a_star = equilibrium_amplitude(params, spec)
    if not 0.0 < a0 < a_star:
        raise ValueError(f"a0={a0} outside (0, a*={a_star:.6f})")

    if method not in ("auto", "seam", "continuation"):
        raise ValueError(f"unknown method {method!r}")

    def _seam_solve():
        bracket = seam_bracket
        if bracket is None:
            bracket = seam_search(
                params,
                spec,
                a0,
                grid_offset=grid_offset,
                horizon=60.0 * horizon_mult,
                escape_safety=escape_safety,
            )
        X, S = _seed_from_bracket(params, spec, a0, bracket, _COARSE_FLOW)
        X, nR = _converge(params, spec, a0, X, S, tol, newton_tol)
        if nR > max(200 * newton_tol, 1e-8):
            raise NewtonError(f"seam-seeded Newton stalled at |R|={nR:.3e}")
        return _assemble_solution(params, spec, a0, X, S, nR, tol, "seam")

    if method == "seam":
        return _seam_solve()

    try:
        X, S, nR = _solve_by_continuation(
            params, spec, a0, tol, newton_tol, cache=_cache
        )
        if nR > max(200 * newton_tol, 1e-8):
            raise NewtonError(f"continuation end solve stalled at |R|={nR:.3e}")
        return _assemble_solution(params, spec, a0, X, S, nR, tol, "continuation")
    except NewtonError:
        if method == "continuation":
            raise
        return _seam_solve()


def sweep(
    params: ProblemParams,
    spec: OperatorSpec,
    a0_grid,
    tol: Tolerances = Tolerances(),
    newton_tol: float | None = None,
) -> list[PeriodicSolution | None]:
    """One solution per grid point, continuation-accelerated.

    Points are solved in descending a0 order so each warm-starts the next;
    failures are recorded as None and the sweep continues.
    """
    grid = list(a0_grid)
    order = sorted(range(len(grid)), key=lambda i: -grid[i])
    out: list[PeriodicSolution | None] = [None] * len(grid)
    cache: dict = {}
    for i in order:
        try:
            out[i] = solve_periodic(
                params,
                spec,
                grid[i],
                method="continuation",
                tol=tol,
                newton_tol=newton_tol,
                _cache=cache,
            )
        except (NewtonError, SeamSearchError, IntegrationError, ValueError):
            out[i] = None
    return out


def conservation_drift(
    params: ProblemParams,
    spec: OperatorSpec,
    sol: PeriodicSolution,
    n_periods: int = 10,
    tol: Tolerances = Tolerances(),
    arc_length: float = 5.0,
) -> float:
    """Accumulated energy drift while following the orbit for n periods.

    The orbit's unstable Floquet multiplier amplifies the float64 rounding
    of the initial data past order one within roughly ten time units, so a
    single uninterrupted run necessarily departs (and then blows up in
    finite time).  The orbit is therefore followed in arcs of at most
    ``arc_length``, each re-anchored on the stored dense trajectory, and
    the per-arc drifts accumulate over the full n-period span.
    """
    from .energy import hamiltonian_array

    n_arcs = max(1, int(math.ceil(sol.period / arc_length)))
    h = sol.period / n_arcs
    total = 0.0
    for _ in range(n_periods):
        for k in range(n_arcs):
            y_k = sol.state_at(k * h)
            orb = integrate(
                params, spec, State(0.0, y_k), h, tol=tol, detect_events=False
            )
            H = hamiltonian_array(params, spec, orb.ys)
            total += float(np.max(np.abs(H - H[0])))
    return total


def quotient_check(
    params: ProblemParams,
    spec: OperatorSpec,
    orbit,
    zero_thresh: float = 1e-12,
) -> dict:
    """Factor-chain signs and the logarithmic-derivative barrier.

    Verifies w = v'/v < mu_1 on a positive orbit and Phi_1 = v'' - lam_1 v < 0.
    The second composition Phi_2 = (d^2 - lam_2)(Phi_1) is evaluated against
    both sign claims: the quoted one (negative) and the one the bounded-orbit
    maximum principle actually yields (positive); violations are reported,
    not raised.
    """
    ys = orbit.ys if hasattr(orbit, "ys") else np.asarray(orbit)
    v = ys[:, 0]
    if np.min(v) <= zero_thresh:
        raise ValueError("quotient check requires a strictly positive orbit")
    lam1, lam2 = spec.lam[0], spec.lam[1]
    mu1 = spec.mu[0]
    w = ys[:, 1] / v
    phi1 = ys[:, 2] - lam1 * v
    phi2 = ys[:, 4] - (lam1 + lam2) * ys[:, 2] + lam1 * lam2 * v
    # both compositions decay along connecting tails; allow rounding slack
    slack1 = 1e-12 * max(1.0, float(np.max(np.abs(phi1))))
    slack2 = 1e-12 * max(1.0, float(np.max(np.abs(phi2))))
    report = {
        "w_max": float(np.max(w)),
        "mu1": mu1,
        "w_margin": float(mu1 - np.max(w)),
        "phi1_max": float(np.max(phi1)),
        "phi2_min": float(np.min(phi2)),
        "phi2_max": float(np.max(phi2)),
        "phi2_sign_quoted_negative_holds": bool(np.max(phi2) < slack2),
        "phi2_sign_derived_positive_holds": bool(np.min(phi2) > -slack2),
        "violations": [],
    }
    if report["w_margin"] <= 0:
        report["violations"].append("w = v'/v reaches the slow rate mu_1")
    if report["phi1_max"] >= slack1:
        report["violations"].append("Phi_1 fails to stay negative")
    if not report["phi2_sign_derived_positive_holds"]:
        report["violations"].append("Phi_2 fails to stay positive")
    return report
