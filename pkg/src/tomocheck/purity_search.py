"""Minimal state purity needed to expose a measurement error.

A systematic error is visible only if some true state with purity at most
p yields a non-physical erroneous estimate. For one qubit that threshold
has a closed form. For two qubits it comes from maximizing each positivity
polynomial zeta_l of the erroneous Bloch data over purity-bounded states
(``maximize_xl``); the smallest purity where a maximum turns positive is
p_min.

Optimizer
---------
The two-qubit search works on the 15 Bloch coordinates x = (u, v, R).

* The purity cap Tr(rho^2) <= p is the ball |x|^2 <= 4p - 1, handled by
  exact projection.
* zeta_2, zeta_3 <= 0 (and epsilon_2, epsilon_3 <= 0 for the separable
  search) enter as quadratic penalties whose weight grows by 10x per round.
* Inner steps are projected gradient ascent with a per-restart adaptive
  step. Gradients are analytic.
* Each final point is pulled back along the ray to the maximally mixed
  state until every constraint holds exactly (the feasible set is convex
  and contains x = 0), so a reported violation is always witnessed by a
  genuine state.
* All restarts, grid points and indices l run as one numpy batch. A
  running maximum over the ascending grid makes the curves monotone; a
  maximizer at a lower purity is feasible for every higher cap.
"""
from dataclasses import dataclass, field
import itertools

import numpy as np
from scipy.optimize import minimize

from .errors import MeasurementError, Misalignment, MisalignmentMatrix, error_matrices, general_error
from .linalg import eig_hermitian, eigvalsh_batch, singular_values_3x3
from .positivity import cofactor, det3, zeta1_single, zetas_arrays
from .states import BlochMatrix, pauli_basis, state_from_bloch

@dataclass
class SearchConfig:
    purity_grid: np.ndarray = field(default_factory=lambda: np.round(np.arange(0.25, 1.0001, 0.01), 10))
    restarts: int = 50
    max_iters: int = 2000
    step_tolerance: float = 1e-8
    penalty_weights: tuple = (10.0, 1e2, 1e3, 1e4, 1e5)
    constraint_tolerance: float = 1e-7
    seed: int = 0

    def __post_init__(self):
        g = np.asarray(self.purity_grid, dtype=float)
        if g.ndim != 1 or len(g) == 0:
            raise ValueError("purity grid must be a non-empty vector")
        if np.any(np.diff(g) <= 0):
            raise ValueError("purity grid must be strictly ascending")
        self.purity_grid = g


@dataclass
class PuritySearchResult:
    p_min: float | None
    x_values: dict           # purity -> (x1, x2, x3)
    witness: np.ndarray | None = None
    binding: int | None = None   # l of the first constraint to turn positive

    def curve(self):
        """Rows (purity, x1, x2, x3) in grid order."""
        return [(p, *self.x_values[p]) for p in sorted(self.x_values)]


# -- single qubit -----------------------------------------------------------

def p_min_single_closed_form(m):
    """1/2 (1 + 1/sigma_max^2); None when the error is undetectable.

    Here u_max in the threshold formula is read as the squared Bloch norm
    |u|^2 of the state on the violation boundary, which is what makes
    p = (1 + |u|^2)/2 consistent.
    """
    mat = m.m if isinstance(m, MisalignmentMatrix) else np.asarray(m, dtype=float)
    smax = singular_values_3x3(mat)[0]
    if smax ** 2 <= 1.0 + 1e-12:
        return None
    return float(np.clip(0.5 * (1.0 + 1.0 / smax ** 2), 0.5, 1.0))


def maximize_x1_single(m, purity):
    """Single-qubit x_1: max of zeta_1(M u) over |u|^2 <= 2 purity - 1.

    |M u|^2 is a convex quadratic, so the maximum sits on the sphere along
    the top eigenvector of M^T M. Returns (x1, u).
    """
    if not 0.5 <= purity <= 1.0:
        raise ValueError(f"single-qubit purity must lie in [0.5, 1], got {purity}")
    mat = m.m if isinstance(m, MisalignmentMatrix) else np.asarray(m, dtype=float)
    _, vecs = eig_hermitian(mat.T @ mat)
    d = np.real(vecs[:, 0])
    d = d * np.sign(d[np.argmax(np.abs(d))])
    u = np.sqrt(2.0 * purity - 1.0) * d
    return float(zeta1_single(mat @ u)), u


# -- two-qubit objective and gradients -----------------------------------------

def _cross(a):
    """K with (K w) = w x a, i.e. K[p, q] = sum_i eps[p, q, i] a[i]."""
    z = np.zeros(a.shape[:-1])
    x, y, w = a[..., 0], a[..., 1], a[..., 2]
    return np.stack([
        np.stack([z, w, -y], -1),
        np.stack([-w, z, x], -1),
        np.stack([y, -x, z], -1),
    ], -2)


def _mv(m, v):
    return (m @ v[..., None])[..., 0]


def _values_and_grads(u, v, R):
    """zeta_1..3, epsilon_2..3 and their gradients in (u, v, R).

    Returns vals (..., 5), gu (..., 5, 3), gv (..., 5, 3), gR (..., 5, 3, 3).
    """
    C = cofactor(R)
    d = det3(R)
    Rt = np.swapaxes(R, -1, -2)
    RtR = Rt @ R
    uu = np.sum(u * u, -1)
    vv = np.sum(v * v, -1)
    rr = np.trace(RtR, axis1=-2, axis2=-1)
    n2 = 1.0 + uu + vv + rr
    Rv = _mv(R, v)
    uR = _mv(Rt, u)
    Cv = _mv(C, v)
    uC = _mv(np.swapaxes(C, -1, -2), u)
    A = np.sum(u * Rv, -1)
    B = np.sum(u * Cv, -1)
    CC = 0.5 * (rr ** 2 - np.sum(RtR * RtR, (-2, -1)))
    Q = uu * vv + np.sum(uR * uR, -1) + np.sum(Rv * Rv, -1) + CC

    outer = lambda a, b: a[..., :, None] * b[..., None, :]
    dn_u, dn_v, dn_R = 2 * u, 2 * v, 2 * R
    dA_u, dA_v, dA_R = Rv, uR, outer(u, v)
    dB_u, dB_v = Cv, uC
    # d(u^T cof(R) v)/dR = K(u) R K(v)^T;  d|cof R|^2/dR = 2 (|R|^2 R - R R^T R)
    dB_R = _cross(u) @ R @ np.swapaxes(_cross(v), -1, -2)
    dQ_u = 2 * u * vv[..., None] + 2 * _mv(R, uR)
    dQ_v = 2 * v * uu[..., None] + 2 * _mv(Rt, Rv)
    dQ_R = 2 * outer(u, uR) + 2 * outer(Rv, v) + 2 * (rr[..., None, None] * R - R @ RtR)
    m2 = (n2 - 2.0)[..., None]

    vals = np.stack([
        n2 - 4.0,
        n2 - 2.0 - 2 * A + 2 * d,
        -8 * A + 8 * d - (n2 - 2.0) ** 2 - 8 * B + 4 * Q,
        n2 - 2.0 - 2 * A - 2 * d,
        -8 * A - 8 * d - (n2 - 2.0) ** 2 + 8 * B + 4 * Q,
    ], -1)
    gu = np.stack([
        dn_u, dn_u - 2 * dA_u,
        -8 * dA_u - 2 * m2 * dn_u - 8 * dB_u + 4 * dQ_u,
        dn_u - 2 * dA_u,
        -8 * dA_u - 2 * m2 * dn_u + 8 * dB_u + 4 * dQ_u,
    ], -2)
    gv = np.stack([
        dn_v, dn_v - 2 * dA_v,
        -8 * dA_v - 2 * m2 * dn_v - 8 * dB_v + 4 * dQ_v,
        dn_v - 2 * dA_v,
        -8 * dA_v - 2 * m2 * dn_v + 8 * dB_v + 4 * dQ_v,
    ], -2)
    m2R = m2[..., None]
    gR = np.stack([
        dn_R, dn_R - 2 * dA_R + 2 * C,
        -8 * dA_R + 8 * C - 2 * m2R * dn_R - 8 * dB_R + 4 * dQ_R,
        dn_R - 2 * dA_R - 2 * C,
        -8 * dA_R - 8 * C - 2 * m2R * dn_R + 8 * dB_R + 4 * dQ_R,
    ], -3)
    return vals, gu, gv, gR


def _split(x):
    return x[..., :3], x[..., 3:6], x[..., 6:].reshape(x.shape[:-1] + (3, 3))


def _flat_grad(gu, gv, gR):
    return np.concatenate([gu, gv, gR.reshape(gR.shape[:-2] + (9,))], -1)


def constraint_values_x(x):
    """(zeta_1, zeta_2, zeta_3, eps_2, eps_3) for a batch of Bloch coordinate vectors."""
    u, v, R = _split(np.asarray(x, dtype=float))
    return _values_and_grads(u, v, R)[0]


def erroneous_x(x, m1, m2):
    u, v, R = _split(x)
    Rt = np.einsum("ij,...jk,lk->...il", m1, R, m2)
    return np.concatenate([u @ m1.T, v @ m2.T, Rt.reshape(Rt.shape[:-2] + (9,))], -1)


class _Problem:
    """Batched penalized objective for fixed error matrices."""

    def __init__(self, m1, m2, ls, radius2, separable):
        self.m1, self.m2 = m1, m2
        self.ls = ls                     # (B,) index into zeta_1..3 (0-based)
        self.radius2 = radius2           # (B,)
        self.separable = separable
        self.cons = [1, 2, 3, 4] if separable else [1, 2]

    def sub(self, sel):
        return _Problem(self.m1, self.m2, self.ls[sel], self.radius2[sel], self.separable)

    def objective(self, x):
        vals, gu, gv, gR = _values_and_grads(*_split(erroneous_x(x, self.m1, self.m2)))
        idx = self.ls[:, None]
        f = np.take_along_axis(vals, idx, -1)[:, 0]
        gu = np.take_along_axis(gu, idx[..., None], 1)[:, 0] @ self.m1
        gv = np.take_along_axis(gv, idx[..., None], 1)[:, 0] @ self.m2
        gR = np.take_along_axis(gR, idx[..., None, None], 1)[:, 0]
        gR = np.einsum("ji,...jk,kl->...il", self.m1, gR, self.m2)
        return f, _flat_grad(gu, gv, gR)

    def penalty(self, x):
        vals, gu, gv, gR = _values_and_grads(*_split(x))
        g = np.maximum(vals[:, self.cons], 0.0)
        grad = _flat_grad(gu[:, self.cons], gv[:, self.cons], gR[:, self.cons])
        return np.sum(g * g, -1), 2.0 * np.einsum("bc,bcj->bj", g, grad)

    def project(self, x):
        n2 = np.sum(x * x, -1)
        scale = np.where(n2 > self.radius2, np.sqrt(self.radius2 / np.maximum(n2, 1e-300)), 1.0)
        return x * scale[:, None]

    def feasible(self, x, tol=0.0):
        return np.all(constraint_values_x(x)[:, self.cons] <= tol, -1)

    def restore(self, x, iters=60):
        """Largest s in [0, 1] with s*x feasible (bisection along the ray to 0)."""
        lo = np.zeros(len(x))
        hi = np.ones(len(x))
        ok = self.feasible(x)
        lo[ok] = 1.0
        for _ in range(iters):
            todo = lo < hi
            if not np.any(todo):
                break
            mid = 0.5 * (lo + hi)
            f = self.feasible(x * mid[:, None])
            lo = np.where(todo & f, mid, lo)
            hi = np.where(todo & ~f, mid, hi)
        return x * lo[:, None]


def _random_starts(rng, radius2, count, separable):
    """Starting Bloch coordinates: noisy pure states, products, and random mixed states."""
    out = np.empty((count, 15))
    basis = pauli_basis(2)
    for i in range(count):
        kind = i % 3
        if kind == 0 and not separable:
            psi = rng.normal(size=4) + 1j * rng.normal(size=4)
        else:
            a = rng.normal(size=2) + 1j * rng.normal(size=2)
            b = rng.normal(size=2) + 1j * rng.normal(size=2)
            psi = np.kron(a, b)
        if kind == 2:
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = g @ g.conj().T
        else:
            rho = np.outer(psi, psi.conj())
        rho = rho / np.trace(rho).real
        r = np.einsum("ij,kji->k", rho, basis).real
        out[i] = BlochMatrix.from_coefficients(r.reshape(4, 4)).to_vector()
    # shrink into the purity ball
    n2 = np.sum(out * out, -1)
    return out * np.sqrt(np.minimum(1.0, radius2 / np.maximum(n2, 1e-300)))[:, None]


MAX_STEP = 4.0


def _optimize(problem, x0, config):
    x = problem.project(x0)
    for w in config.penalty_weights:
        def total(prob, z):
            f, g = prob.objective(z)
            p, gp = prob.penalty(z)
            return f - w * p, g - w * gp

        step = np.full(len(x), 0.05)
        F, G = total(problem, x)
        active = np.arange(len(x))
        for _ in range(config.max_iters):
            if active.size == 0:
                break
            prob = problem.sub(active)
            xa, Ga = x[active], G[active]
            gn = np.linalg.norm(Ga, axis=-1)
            direction = Ga / np.where(gn > 0, gn, 1.0)[:, None]
            x_new = prob.project(xa + step[active, None] * direction)
            F_new, G_new = total(prob, x_new)
            acc = F_new > F[active]
            x[active] = np.where(acc[:, None], x_new, xa)
            F[active] = np.where(acc, F_new, F[active])
            G[active] = np.where(acc[:, None], G_new, Ga)
            step[active] = np.where(acc, np.minimum(step[active] * 1.5, MAX_STEP), step[active] * 0.5)
            active = active[step[active] >= config.step_tolerance]
    return problem.restore(x)


# -- penalty-free search over parametrized states ----------------------------------
#
# General states: rho = A A^dag / Tr(A A^dag). Separable states: a mixture of
# K = 16 product pure states (enough by Caratheodory in 15 dimensions). The
# purity cap is met by shrinking the Bloch coordinates towards the maximally
# mixed state, which keeps both sets closed. Every iterate is feasible, so
# these candidates never need restoration.

_BLOCH_INDEX = [4, 8, 12, 1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15]
N_PRODUCTS = 16


class _Factored:
    def __init__(self, m1, m2, ls, radius2, separable):
        self.inner = _Problem(m1, m2, ls, radius2, separable)
        self.radius2 = radius2
        self.separable = separable
        self.paulis = pauli_basis(2)[_BLOCH_INDEX]

    @property
    def size(self):
        return 7 * N_PRODUCTS if self.separable else 32

    def sub(self, sel):
        out = object.__new__(_Factored)
        out.inner = self.inner.sub(sel)
        out.radius2 = self.radius2[sel]
        out.separable = self.separable
        out.paulis = self.paulis
        return out

    def _general(self, p):
        A = (p[:, :16] + 1j * p[:, 16:]).reshape(-1, 4, 4)
        M = A @ np.conj(np.swapaxes(A, -1, -2))
        t = np.trace(M, axis1=-2, axis2=-1).real
        rho = M / t[:, None, None]
        x = np.einsum("bij,kji->bk", rho, self.paulis).real

        def back(gx):
            G = np.einsum("bk,kij->bij", gx, self.paulis)
            c = np.einsum("bij,bji->b", G, rho).real
            H = G - c[:, None, None] * np.eye(4)
            gam = (2.0 / t)[:, None, None] * (H @ A)
            return np.concatenate([gam.real.reshape(-1, 16), gam.imag.reshape(-1, 16)], -1)
        return x, back

    def _separable(self, p):
        K = N_PRODUCTS
        al = p[:, :3 * K].reshape(-1, K, 3)
        be = p[:, 3 * K:6 * K].reshape(-1, K, 3)
        th = p[:, 6 * K:]
        na = np.linalg.norm(al, axis=-1, keepdims=True)
        nb = np.linalg.norm(be, axis=-1, keepdims=True)
        a, b = al / na, be / nb
        w = np.exp(th - th.max(-1, keepdims=True))
        w /= w.sum(-1, keepdims=True)
        u = np.einsum("bk,bki->bi", w, a)
        v = np.einsum("bk,bki->bi", w, b)
        R = np.einsum("bk,bki,bkj->bij", w, a, b)
        x = np.concatenate([u, v, R.reshape(-1, 9)], -1)

        def back(gx):
            gu, gv, gR = _split(gx)
            gRb = np.einsum("bij,bkj->bki", gR, b)
            gRa = np.einsum("bij,bki->bkj", gR, a)
            h = np.einsum("bi,bki->bk", gu, a) + np.einsum("bi,bki->bk", gv, b) + np.sum(a * gRb, -1)
            gth = w * (h - np.sum(w * h, -1, keepdims=True))
            ga = w[..., None] * (gu[:, None, :] + gRb)
            gb = w[..., None] * (gv[:, None, :] + gRa)
            gal = (ga - a * np.sum(a * ga, -1, keepdims=True)) / na
            gbe = (gb - b * np.sum(b * gb, -1, keepdims=True)) / nb
            return np.concatenate([gal.reshape(-1, 3 * K), gbe.reshape(-1, 3 * K), gth], -1)
        return x, back

    def state(self, p):
        """Bloch coordinates after the purity shrink, with the backward map."""
        x, back = (self._separable if self.separable else self._general)(p)
        n2 = np.sum(x * x, -1)
        big = n2 > self.radius2
        s = np.where(big, np.sqrt(self.radius2 / np.maximum(n2, 1e-300)), 1.0)
        y = x * s[:, None]

        def back_y(gy):
            xh = x / np.sqrt(np.maximum(n2, 1e-300))[:, None]
            proj = gy - xh * np.sum(xh * gy, -1, keepdims=True)
            gx = np.where(big[:, None], s[:, None] * proj, gy)
            return back(gx)
        return y, back_y

    def __call__(self, p):
        y, back = self.state(p)
        f, gy = self.inner.objective(y)
        return f, back(gy)

    def starts(self, rng, count):
        if self.separable:
            return rng.normal(size=(count, self.size))
        p = rng.normal(size=(count, 32))
        # every other start is close to a pure state
        mask = np.ones((4, 4))
        mask[:, 1:] = 0.05
        p[::2] *= np.tile(mask.ravel(), 2)
        return p


def _ascend(fun, p, config, max_step=1.0):
    """Adaptive normalized gradient ascent for a batch of unconstrained problems."""
    F, G = fun(p)
    step = np.full(len(p), 0.1)
    active = np.arange(len(p))
    for _ in range(config.max_iters):
        if active.size == 0:
            break
        sub = fun.sub(active)
        pa, Ga = p[active], G[active]
        gn = np.linalg.norm(Ga, axis=-1)
        p_new = pa + (step[active] / np.where(gn > 0, gn, 1.0))[:, None] * Ga
        F_new, G_new = sub(p_new)
        acc = F_new > F[active]
        p[active] = np.where(acc[:, None], p_new, pa)
        F[active] = np.where(acc, F_new, F[active])
        G[active] = np.where(acc[:, None], G_new, Ga)
        step[active] = np.where(acc, np.minimum(step[active] * 1.5, max_step), step[active] * 0.5)
        active = active[step[active] >= config.step_tolerance]
    return p


def _as_error(error):
    if isinstance(error, MisalignmentMatrix):
        return MeasurementError.on_qubit(Misalignment(error), 0, 2)
    return error


def _candidates(m1, m2, purities, ls, separable, config, restarts):
    """Optimized values f (P, L, c) and points (P, L, c, 15) from both families."""
    P, L = len(purities), len(ls)
    rng = np.random.Generator(np.random.PCG64([config.seed, int(separable)]))
    radius2 = np.repeat(4.0 * purities - 1.0, L * restarts)
    l_idx = np.tile(np.repeat(np.asarray(ls), restarts), P)
    # one set of starting directions per restart, reused across grid points and l
    base = _random_starts(rng, np.full(restarts, 3.0), restarts, separable)
    prob = _Problem(m1, m2, l_idx, radius2, separable)
    x = _optimize(prob, np.tile(base, (P * L, 1)), config)
    fac = _Factored(m1, m2, l_idx, radius2, separable)
    y = fac.state(_ascend(fac, np.tile(fac.starts(rng, restarts), (P * L, 1)), config))[0]
    f = np.concatenate([prob.objective(z)[0].reshape(P, L, restarts) for z in (x, y)], -1)
    pts = np.concatenate([x.reshape(P, L, restarts, 15), y.reshape(P, L, restarts, 15)], 2)
    return f, pts


def _search(error, purities, ls, separable, config, restarts=None):
    """Batch-maximize zeta_l over every (purity, l, restart). Returns x (P, L) and witnesses.

    The general search also keeps the separable candidates: they are valid
    general states, which makes separable <= general hold by construction.
    """
    error = _as_error(error)
    m1, m2 = error_matrices(error, 2)
    purities = np.asarray(purities, dtype=float)
    if np.any(purities < 0.25 - 1e-12) or np.any(purities > 1.0 + 1e-12):
        raise ValueError("two-qubit purity caps must lie in [0.25, 1]")
    restarts = config.restarts if restarts is None else restarts
    families = [True] if separable else [False, True]
    parts = [_candidates(m1, m2, purities, ls, sep, config, restarts) for sep in families]
    f = np.concatenate([a for a, _ in parts], -1)
    x = np.concatenate([b for _, b in parts], 2)
    best = np.argmax(f, -1)
    xs = np.take_along_axis(f, best[..., None], -1)[..., 0]
    wit = np.take_along_axis(x, best[..., None, None], 2)[:, :, 0]
    # running max over ascending purity keeps witnesses valid at higher caps
    for i in range(1, len(purities)):
        better = xs[i - 1] > xs[i]
        xs[i] = np.where(better, xs[i - 1], xs[i])
        wit[i] = np.where(better[:, None], wit[i - 1], wit[i])
    return xs, wit


def x_to_state(x):
    return state_from_bloch(BlochMatrix.from_vector(x))


def maximize_xl(error, purity_cap, separable_only=False, l=3, config=None):
    """Best found max of zeta_l on the erroneous Bloch data over states with purity <= cap."""
    config = config or SearchConfig()
    if purity_cap < 0.25 or purity_cap > 1.0:
        raise ValueError(f"purity cap {purity_cap} outside [0.25, 1]")
    if l not in (1, 2, 3):
        raise ValueError(f"l must be 1, 2 or 3, got {l}")
    xs, _ = _search(error, [purity_cap], [l - 1], separable_only, config)
    return float(xs[0, 0])


def find_p_min(error, separable_only=False, config=None):
    """Sweep the purity grid; p_min is the first purity with some x_l above tolerance."""
    config = config or SearchConfig()
    grid = config.purity_grid
    xs, wit = _search(error, grid, [0, 1, 2], separable_only, config)
    tol = config.constraint_tolerance
    x_values = {float(p): tuple(float(a) for a in xs[i]) for i, p in enumerate(grid)}
    hits = np.flatnonzero(np.any(xs > tol, -1))
    if len(hits) == 0:
        return PuritySearchResult(None, x_values)
    i = hits[0]
    over = np.where(xs[i] > tol, xs[i], -np.inf)
    l = int(np.argmax(over))
    return PuritySearchResult(float(grid[i]), x_values, x_to_state(wit[i, l]), l + 1)


# -- probe-state approximation --------------------------------------------------

def _error_superoperator(error, n):
    """Matrix L with vec(rho_err) = L vec(rho), vec in row-major order."""
    mats = error_matrices(error, n)
    basis = pauli_basis(n).reshape(4 ** n, -1)
    T = np.ones((1, 1))
    for m in mats:
        ext = np.eye(4)
        ext[1:, 1:] = m
        T = np.kron(T, ext)
    # rho = 2^-n sum_k r_k P_k, r_k = Tr(rho P_k) = vec(P_k^T) . vec(rho)
    to_r = basis.reshape(4 ** n, 2 ** n, 2 ** n).transpose(0, 2, 1).reshape(4 ** n, -1)
    return (basis.T @ T @ to_r) / 2 ** n


@dataclass
class ProbeResult:
    probe: np.ndarray
    lambda_min: float
    min_eig_curve: dict
    p_min_appr: float | None


def probe_state_search(error, num_qubits, config=None, restarts=None, tolerance=None):
    """Pure probe state maximizing the negativity of the erroneous estimate.

    The erroneous estimate is linear in rho and leaves the identity part
    alone, so under white noise its smallest eigenvalue is
    (1 - eps) lambda + eps / d. The crossing of -tolerance is located on
    that line and reported as a purity of the noisy probe.
    """
    config = config or SearchConfig()
    tol = config.constraint_tolerance if tolerance is None else tolerance
    n = num_qubits
    if n not in (1, 2, 3):
        raise ValueError(f"probe search supports 1 to 3 qubits, got {n}")
    if isinstance(error, MisalignmentMatrix):
        error = MeasurementError.on_qubit(Misalignment(error), 0, n)
    d = 2 ** n
    L = _error_superoperator(error, n)
    restarts = restarts or (100 if n == 3 else 30)
    rng = np.random.Generator(np.random.PCG64(config.seed))

    def lam(a):
        psi = a[:d] + 1j * a[d:]
        psi = psi / np.linalg.norm(psi)
        rho_e = (L @ np.outer(psi, psi.conj()).ravel()).reshape(d, d)
        return np.linalg.eigvalsh(0.5 * (rho_e + rho_e.conj().T))[0]

    best_val, best_a = np.inf, None
    for _ in range(restarts):
        a0 = rng.normal(size=2 * d)
        res = minimize(lam, a0, method="Nelder-Mead",
                       options={"maxiter": 4000 * d, "xatol": 1e-9, "fatol": 1e-12})
        if res.fun < best_val:
            best_val, best_a = res.fun, res.x
    psi = best_a[:d] + 1j * best_a[d:]
    psi = psi / np.linalg.norm(psi)
    probe = np.outer(psi, psi.conj())

    def noisy_purity(eps):
        return (1 - eps) ** 2 * (1 - 1 / d) + 1 / d

    eps_grid = np.linspace(0.0, 1.0, 101)
    curve = {float(noisy_purity(e)): float((1 - e) * best_val + e / d) for e in eps_grid}
    if best_val >= -tol:
        return ProbeResult(probe, float(best_val), curve, None)
    eps_star = (-tol - best_val) / (1.0 / d - best_val)
    return ProbeResult(probe, float(best_val), curve, float(noisy_purity(eps_star)))


# -- angle grid ---------------------------------------------------------------

GRID_ANGLES = tuple(k * np.pi / 8 for k in range(5))


def angle_tuples(angles=GRID_ANGLES):
    return list(itertools.product(angles, repeat=4))


def is_identity_tuple(t, atol=1e-12):
    return np.allclose(general_error(*t).m, np.eye(3), atol=atol)


def angle_grid_survey(angles=GRID_ANGLES, config=None, tuples=None, separable=False):
    """p_min per (alpha, beta, gamma, delta); identity tuples are flagged and skipped."""
    config = config or SearchConfig(purity_grid=np.round(np.arange(0.25, 0.4001, 0.01), 10))
    rows = []
    for t in (tuples if tuples is not None else angle_tuples(angles)):
        row = {"alpha": t[0], "beta": t[1], "gamma": t[2], "delta": t[3],
               "identity": is_identity_tuple(t)}
        if not row["identity"]:
            err = MeasurementError.on_qubit(Misalignment(general_error(*t)), 0, 2)
            res = find_p_min(err, False, config)
            row.update(p_min_entangled=res.p_min, binding=res.binding)
            if separable:
                row["p_min_separable"] = find_p_min(err, True, config).p_min
        rows.append(row)
    return rows


# -- product states with ancillas -------------------------------------------------

COMPANIONS = ("identity-pad", "true-copy", "erroneous-copy", "pauli-eigenstate")


def ancilla_product_check(single_error, base_u, companion, pauli_axis=0):
    """zeta values of rho_err (x) companion, where rho_err is the erroneous one-qubit state.

    `identity-pad` is the bare single-qubit case and returns zeta_1 only.
    """
    m = single_error.m if isinstance(single_error, MisalignmentMatrix) else np.asarray(single_error)
    u = np.asarray(base_u, dtype=float)
    ue = m @ u
    if companion == "identity-pad":
        return np.atleast_1d(zeta1_single(ue))
    if companion == "true-copy":
        v = u
    elif companion == "erroneous-copy":
        v = ue
    elif companion == "pauli-eigenstate":
        v = np.eye(3)[pauli_axis]
    else:
        raise ValueError(f"unknown companion {companion!r}; choose from {COMPANIONS}")
    return zetas_arrays(ue, v, np.outer(ue, v))
