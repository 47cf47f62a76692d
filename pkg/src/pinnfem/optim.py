"""Deterministic full-batch minimisers: Adam and L-BFGS.

Both take ``loss_grad(theta) -> (loss, grad)`` and return the final
parameters with a :class:`TrainTrace`. Nothing here draws random numbers,
so reruns with the same inputs are bitwise identical.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .net import NonFiniteLossError

log = logging.getLogger(__name__)

CONVERGED_GRAD = "converged-grad"
CONVERGED_STEP = "converged-step"
MAX_ITER = "max-iter"
LINE_SEARCH_FAILURE = "line-search-failure"
NON_FINITE = "non-finite"


@dataclass(frozen=True)
class OptimConfig:
    method: str = "lbfgs"
    learning_rate: float = 1e-4
    max_iterations: int = 500
    gradient_tolerance: float = 1e-8
    step_tolerance: float = 1e-12
    lbfgs_memory: int = 10
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    max_line_search: int = 25
    line_search_refine: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("adam", "lbfgs"):
            raise ValueError("method must be 'adam' or 'lbfgs', got %r" % self.method)
        if not 0.0 < self.wolfe_c1 < self.wolfe_c2 < 1.0:
            raise ValueError("need 0 < c1 < c2 < 1, got c1=%r c2=%r" % (self.wolfe_c1, self.wolfe_c2))
        if self.lbfgs_memory < 1:
            raise ValueError("lbfgs_memory must be >= 1")
        if self.gradient_tolerance <= 0 or self.step_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass
class TrainTrace:
    iterations: list = field(default_factory=list)
    losses: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    status: str = ""
    n_evaluations: int = 0

    def record(self, it, loss, gnorm, step):
        self.iterations.append(int(it))
        self.losses.append(float(loss))
        self.grad_norms.append(float(gnorm))
        self.steps.append(float(step))

    def __len__(self):
        return len(self.iterations)

    @property
    def final_loss(self):
        return self.losses[-1] if self.losses else float("nan")

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "loss", "grad_norm", "step"])
        for row in zip(self.iterations, self.losses, self.grad_norms, self.steps):
            w.writerow([row[0]] + [repr(v) for v in row[1:]])
        return buf.getvalue()

    def summary(self):
        return {"status": self.status, "iterations": len(self) - 1 if len(self) else 0,
                "evaluations": self.n_evaluations, "final_loss": self.final_loss,
                "final_grad_norm": self.grad_norms[-1] if self.grad_norms else float("nan")}


def run_adam(loss_grad, theta0, cfg):
    theta = np.array(theta0, dtype=np.float64)
    m = np.zeros_like(theta)
    v = np.zeros_like(theta)
    b1, b2, eps, lr = cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps, cfg.learning_rate
    trace = TrainTrace()
    best = theta.copy()
    for it in range(cfg.max_iterations + 1):
        try:
            f, g = loss_grad(theta)
        except NonFiniteLossError:
            f, g = np.nan, None
        trace.n_evaluations += 1
        if not np.isfinite(f) or g is None or not np.all(np.isfinite(g)):
            trace.status = NON_FINITE
            log.warning("adam: non-finite loss at iteration %d", it)
            return best, trace
        gnorm = float(np.linalg.norm(g))
        trace.record(it, f, gnorm, 0.0 if it == 0 else step)
        best = theta.copy()
        if gnorm < cfg.gradient_tolerance:
            trace.status = CONVERGED_GRAD
            return theta, trace
        if it == cfg.max_iterations:
            break
        t = it + 1
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        mhat = m / (1.0 - b1 ** t)
        vhat = v / (1.0 - b2 ** t)
        delta = lr * mhat / (np.sqrt(vhat) + eps)
        theta = theta - delta
        step = float(np.linalg.norm(delta))
    trace.status = MAX_ITER
    return theta, trace


# ---------------------------------------------------------------------------
# L-BFGS
# ---------------------------------------------------------------------------

def _cubic_min(a, fa, da, b, fb, db):
    """Minimiser of the cubic interpolating (a, fa, da) and (b, fb, db), or None."""
    d1 = da + db - 3.0 * (fa - fb) / (a - b)
    disc = d1 * d1 - da * db
    if disc < 0:
        return None
    d2 = np.sign(b - a) * np.sqrt(disc)
    denom = db - da + 2.0 * d2
    if denom == 0:
        return None
    x = b - (b - a) * (db + d2 - d1) / denom
    return x if np.isfinite(x) else None


class _LineSearch:
    """Strong-Wolfe search along a direction with cubic interpolation
    (bracketing phase followed by zoom)."""

    def __init__(self, loss_grad, x, d, f0, g0, c1, c2, max_evals):
        self.loss_grad = loss_grad
        self.x, self.d = x, d
        self.f0, self.dphi0 = f0, float(g0 @ d)
        self.c1, self.c2 = c1, c2
        self.max_evals = max_evals
        self.evals = 0

    def phi(self, a):
        self.evals += 1
        x = self.x + a * self.d
        try:
            f, g = self.loss_grad(x)
        except NonFiniteLossError:
            return np.inf, np.inf, None
        if not np.isfinite(f) or not np.all(np.isfinite(g)):
            return np.inf, np.inf, None
        return float(f), float(g @ self.d), g

    def _armijo_ok(self, a, fa, da=None):
        if fa <= self.f0 + self.c1 * a * self.dphi0:
            return True
        # once f only moves at rounding level, judge decrease by the slope
        # (approximate Wolfe condition); the loss still may not go up
        if da is not None and np.isfinite(da) and self.f0 - 1e-12 * (abs(self.f0) + 1e-300) <= fa <= self.f0:
            return da <= (2.0 * self.c1 - 1.0) * self.dphi0
        return False

    def _curv_ok(self, da):
        return abs(da) <= -self.c2 * self.dphi0

    def _nudge(self, a, fa, da):
        """At rounding level a good step can look a few ulps worse than the
        start. Probe a few neighbouring steps for one that is not."""
        if not (np.isfinite(da) and 0.0 < fa - self.f0 <= 1e-12 * abs(self.f0)
                and da <= (2.0 * self.c1 - 1.0) * self.dphi0 and self._curv_ok(da)):
            return None
        for rel in (1e-3, -1e-3, 3e-3, -3e-3, 1e-2, -1e-2):
            if self.evals >= self.max_evals:
                break
            b = a * (1.0 + rel)
            fb, db, gb = self.phi(b)
            if np.isfinite(fb) and fb <= self.f0 and self._armijo_ok(b, fb, db) and self._curv_ok(db):
                return b, fb, gb
        return None

    def search(self, a1, refine=0.0, max_refine=3):
        res = self._search(a1)
        if res is None or refine <= 0.0:
            return res
        # a few extra interpolation steps towards the minimiser along d;
        # each is kept only if it is lower and still a strong-Wolfe point
        prev = (0.0, self.f0, self.dphi0)
        for _ in range(max_refine):
            a, fa, ga = res
            da = float(ga @ self.d)
            if abs(da) <= refine * abs(self.dphi0) or self.evals >= self.max_evals:
                break
            b = _cubic_min(prev[0], prev[1], prev[2], a, fa, da)
            if b is None or b <= 0.0 or abs(b - a) <= 1e-3 * a:
                break
            fb, db, gb = self.phi(b)
            if not (np.isfinite(fb) and fb < fa and self._armijo_ok(b, fb, db) and self._curv_ok(db)):
                break
            prev = (a, fa, da)
            res = (b, fb, gb)
        return res

    def _search(self, a1):
        a_prev, f_prev, d_prev = 0.0, self.f0, self.dphi0
        a = a1
        first = True
        while self.evals < self.max_evals:
            fa, da, ga = self.phi(a)
            if not np.isfinite(fa):
                # overshoot into a non-finite region: treat as a bracket end
                return self._zoom(a_prev, f_prev, d_prev, a, np.inf, np.nan)
            if not self._armijo_ok(a, fa, da) or (not first and fa > f_prev):
                res = self._nudge(a, fa, da) if first else None
                return res if res is not None else self._zoom(a_prev, f_prev, d_prev, a, fa, da)
            if self._curv_ok(da):
                return a, fa, ga
            if da >= 0:
                return self._zoom(a, fa, da, a_prev, f_prev, d_prev)
            a_prev, f_prev, d_prev = a, fa, da
            a = 2.0 * a
            first = False
        return None

    def _zoom(self, lo, flo, dlo, hi, fhi, dhi):
        while self.evals < self.max_evals:
            a = None
            if np.isfinite(fhi) and np.isfinite(dhi):
                a = _cubic_min(lo, flo, dlo, hi, fhi, dhi)
            left, right = min(lo, hi), max(lo, hi)
            width = right - left
            if a is None or not (left + 0.1 * width <= a <= right - 0.1 * width):
                a = 0.5 * (lo + hi)
            if width <= 1e-16 * max(1.0, abs(right)):
                return None
            fa, da, ga = self.phi(a)
            if not np.isfinite(fa) or not self._armijo_ok(a, fa, da) or fa > flo:
                hi, fhi, dhi = a, fa, da
                continue
            if self._curv_ok(da):
                return a, fa, ga
            if da * (hi - lo) >= 0:
                hi, fhi, dhi = lo, flo, dlo
            lo, flo, dlo = a, fa, da
        return None


def _two_loop(g, s_hist, y_hist, rho_hist):
    q = g.copy()
    alphas = []
    for s, y, rho in zip(reversed(s_hist), reversed(y_hist), reversed(rho_hist)):
        a = rho * (s @ q)
        alphas.append(a)
        q -= a * y
    if s_hist:
        s, y = s_hist[-1], y_hist[-1]
        q *= (s @ y) / (y @ y)
    for (s, y, rho), a in zip(zip(s_hist, y_hist, rho_hist), reversed(alphas)):
        b = rho * (y @ q)
        q += (a - b) * s
    return -q


def run_lbfgs(loss_grad, theta0, cfg):
    x = np.array(theta0, dtype=np.float64)
    trace = TrainTrace()
    try:
        f, g = loss_grad(x)
    except NonFiniteLossError:
        f, g = np.nan, None
    trace.n_evaluations += 1
    if not np.isfinite(f) or g is None or not np.all(np.isfinite(g)):
        trace.status = NON_FINITE
        return x, trace
    f = float(f)
    gnorm = float(np.linalg.norm(g))
    trace.record(0, f, gnorm, 0.0)
    s_hist, y_hist, rho_hist = [], [], []
    restarted = False
    it = 0
    while True:
        if gnorm < cfg.gradient_tolerance:
            trace.status = CONVERGED_GRAD
            break
        if it >= cfg.max_iterations:
            trace.status = MAX_ITER
            break
        d = _two_loop(g, s_hist, y_hist, rho_hist)
        if not s_hist or g @ d >= 0:
            d = -g
            a0 = min(1.0, 1.0 / max(np.abs(g).sum(), 1e-300))
        else:
            a0 = 1.0
        ls = _LineSearch(loss_grad, x, d, f, g, cfg.wolfe_c1, cfg.wolfe_c2, cfg.max_line_search)
        res = ls.search(a0, cfg.line_search_refine)
        trace.n_evaluations += ls.evals
        if res is None:
            if restarted or not s_hist:
                trace.status = LINE_SEARCH_FAILURE
                log.info("lbfgs: line search failed at iteration %d", it)
                break
            # one retry along steepest descent with a cleared memory
            s_hist, y_hist, rho_hist = [], [], []
            restarted = True
            continue
        restarted = False
        a, f_new, g_new = res
        s = a * d
        y = g_new - g
        x = x + s
        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            s_hist.append(s)
            y_hist.append(y)
            rho_hist.append(1.0 / sy)
            if len(s_hist) > cfg.lbfgs_memory:
                s_hist.pop(0)
                y_hist.pop(0)
                rho_hist.pop(0)
        f, g = f_new, g_new
        gnorm = float(np.linalg.norm(g))
        it += 1
        step = float(np.linalg.norm(s))
        trace.record(it, f, gnorm, step)
        if step < cfg.step_tolerance:
            trace.status = CONVERGED_STEP
            break
    return x, trace


def minimize(loss_grad, theta0, cfg):
    if cfg.method == "adam":
        return run_adam(loss_grad, theta0, cfg)
    return run_lbfgs(loss_grad, theta0, cfg)
