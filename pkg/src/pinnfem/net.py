"""Fully connected tanh network mapping coordinates to displacements.

Parameters live in one flat float64 vector laid out layer by layer as
``W_0 (row-major, fan_in x fan_out), b_0, W_1, b_1, ...``. Every evaluation
function accepts either a plain ndarray (pure numpy evaluation) or a
:class:`~pinnfem.tape.Var` (recorded on that Var's tape, so that
:func:`loss_gradient` can differentiate through it, including through the
spatial Jacobian).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .tape import Tape, Var, concat, tanh, value_of


class NonFiniteLossError(FloatingPointError):
    """Raised when a loss evaluates to nan/inf.

    ``point`` is the first evaluation point whose network output was
    non-finite, or None if every recorded network output was finite.
    """

    def __init__(self, message, point=None, index=None):
        super().__init__(message)
        self.point = point
        self.index = index


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths plus a fixed affine map on the inputs and a fixed output
    scale: ``u = s * N((x - center) * scale)``. The defaults are the identity."""
    layer_widths: tuple
    input_center: tuple = ()
    input_scale: tuple = ()
    output_scale: float = 1.0

    def __post_init__(self):
        widths = tuple(int(w) for w in self.layer_widths)
        object.__setattr__(self, "layer_widths", widths)
        d = widths[0] if widths else 0
        center = tuple(float(v) for v in self.input_center) or (0.0,) * d
        scale = tuple(float(v) for v in self.input_scale) or (1.0,) * d
        object.__setattr__(self, "input_center", center)
        object.__setattr__(self, "input_scale", scale)
        object.__setattr__(self, "output_scale", float(self.output_scale))
        if len(center) != d or len(scale) != d:
            raise ValueError("input_center/input_scale need %d entries" % d)
        if not all(v > 0 for v in scale) or not self.output_scale > 0:
            raise ValueError("input and output scales must be positive")
        if len(widths) < 3:
            raise ValueError("an MLP needs at least one hidden layer, got widths %s" % (widths,))
        if any(w < 1 for w in widths):
            raise ValueError("layer widths must be positive: %s" % (widths,))

    @classmethod
    def uniform(cls, n_in, n_out, hidden, depth, **kw):
        return cls((n_in,) + (hidden,) * depth + (n_out,), **kw)

    def with_bounds(self, lo, hi):
        """Same network with inputs mapped from the box [lo, hi] onto [-1, 1]."""
        lo, hi = np.asarray(lo, dtype=np.float64), np.asarray(hi, dtype=np.float64)
        return MlpSpec(self.layer_widths, tuple(0.5 * (lo + hi)), tuple(2.0 / (hi - lo)), self.output_scale)

    def to_dict(self):
        return {"layer_widths": list(self.layer_widths), "input_center": list(self.input_center),
                "input_scale": list(self.input_scale), "output_scale": self.output_scale}

    @classmethod
    def from_dict(cls, d):
        return cls(tuple(d["layer_widths"]), tuple(d.get("input_center", ())),
                   tuple(d.get("input_scale", ())), d.get("output_scale", 1.0))

    @property
    def n_in(self):
        return self.layer_widths[0]

    @property
    def n_out(self):
        return self.layer_widths[-1]

    @property
    def n_params(self):
        w = self.layer_widths
        return sum(a * b + b for a, b in zip(w[:-1], w[1:]))

    def layer_slices(self):
        """(weight slice, weight shape, bias slice) for every layer."""
        out = []
        k = 0
        for a, b in zip(self.layer_widths[:-1], self.layer_widths[1:]):
            w = slice(k, k + a * b)
            k += a * b
            bias = slice(k, k + b)
            k += b
            out.append((w, (a, b), bias))
        return out


def init_params(spec, seed):
    """Glorot-uniform weights and zero biases from a seeded PCG64 stream."""
    rng = np.random.default_rng(seed)
    theta = np.zeros(spec.n_params)
    for w, (a, b), _ in spec.layer_slices():
        bound = np.sqrt(6.0 / (a + b))
        theta[w] = rng.uniform(-bound, bound, size=a * b)
    return theta


def _layers(spec, theta):
    for w, shape, b in spec.layer_slices():
        yield theta[w].reshape(*shape), theta[b]


def _as_batch(spec, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim <= 1
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        x = x.reshape(1, -1) if x.shape[0] == spec.n_in else x.reshape(-1, 1)
    if x.shape[1] != spec.n_in:
        raise ValueError("expected %d input coordinates, got array of shape %s" % (spec.n_in, x.shape))
    return x, single


def _log(theta, x, u):
    if isinstance(theta, Var):
        theta.tape.evaluations.append((x, value_of(u)))


def forward(spec, theta, x):
    """Network output at ``x``: one point (shape (n_in,)) or a batch (n, n_in)."""
    xb, single = _as_batch(spec, x)
    layers = list(_layers(spec, theta))
    a = (xb - np.asarray(spec.input_center)) * np.asarray(spec.input_scale)
    for W, b in layers[:-1]:
        a = tanh(a @ W + b)
    W, b = layers[-1]
    u = a @ W + b
    if spec.output_scale != 1.0:
        u = u * spec.output_scale
    _log(theta, xb, u)
    return u[0] if single else u


def forward_with_jacobian(spec, theta, x):
    """Output and exact spatial Jacobian ``J[..., i, j] = du_i/dx_j``.

    Input tangents are pushed forward alongside the activations, one sweep
    per input coordinate, using tanh' = 1 - tanh^2.
    """
    xb, single = _as_batch(spec, x)
    n, d = xb.shape
    layers = list(_layers(spec, theta))
    a = (xb - np.asarray(spec.input_center)) * np.asarray(spec.input_scale)
    tangents = [np.broadcast_to(np.eye(d)[j] * spec.input_scale[j], (n, d)) for j in range(d)]
    for W, b in layers[:-1]:
        a = tanh(a @ W + b)
        slope = 1.0 - a * a
        tangents = [slope * (t @ W) for t in tangents]
    W, b = layers[-1]
    u = a @ W + b
    cols = [t @ W for t in tangents]
    if spec.output_scale != 1.0:
        u = u * spec.output_scale
        cols = [c * spec.output_scale for c in cols]
    _log(theta, xb, u)
    # J[:, i, j] = cols[j][:, i]; stacked via reshape so Var inputs stay on the tape
    if isinstance(theta, Var):
        J = concat([c.reshape(n, spec.n_out, 1) for c in cols], axis=2)
    else:
        J = np.stack(cols, axis=2)
    if single:
        return u[0], J[0]
    return u, J


def loss_gradient(loss, theta):
    """Value and exact gradient of ``loss(theta_var)`` with respect to theta.

    ``loss`` receives theta as a Var and must return a scalar Var built from
    :func:`forward`, :func:`forward_with_jacobian` and Var arithmetic. A fresh
    tape is created per call, so concurrent calls never share state.
    """
    tape = Tape()
    th = tape.leaf(np.asarray(theta, dtype=np.float64))
    out = loss(th)
    if not isinstance(out, Var):
        value = float(np.asarray(out))
        if not np.isfinite(value):
            raise NonFiniteLossError("loss is %r" % value)
        return value, np.zeros_like(th.value)
    value = float(out.value)
    if not np.isfinite(value):
        point, index = _first_bad_point(tape)
        raise NonFiniteLossError("loss is %r (first non-finite network output at %s)" % (value, point),
                                 point=point, index=index)
    tape.backward(out)
    grad = th.grad if th.grad is not None else np.zeros_like(th.value)
    return value, grad


def _first_bad_point(tape):
    for pts, outs in tape.evaluations:
        bad = ~np.all(np.isfinite(outs), axis=-1)
        if np.any(bad):
            i = int(np.argmax(bad))
            return pts[i].copy(), i
    return None, None


def save_checkpoint(path, spec, theta, seed=None, **extra):
    """Write theta as little-endian float64 to ``path`` plus a ``.json`` sidecar."""
    path = Path(path)
    np.asarray(theta, dtype="<f8").tofile(path)
    meta = dict(spec.to_dict(), seed=seed, n_params=spec.n_params)
    meta.update(extra)
    path.with_suffix(path.suffix + ".json").write_text(json.dumps(meta, indent=2, sort_keys=True))


def load_checkpoint(path):
    path = Path(path)
    meta = json.loads(path.with_suffix(path.suffix + ".json").read_text())
    spec = MlpSpec.from_dict(meta)
    theta = np.fromfile(path, dtype="<f8").astype(np.float64)
    if theta.size != spec.n_params:
        raise ValueError("checkpoint %s holds %d values, spec needs %d" % (path, theta.size, spec.n_params))
    return spec, theta, meta
