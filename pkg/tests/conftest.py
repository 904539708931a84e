"""Shared test helpers: the central finite-difference oracle and
well-conditioned parameter randomization for gradient checks."""

import numpy as np

from crossnli import autodiff as ad


def numeric_gradient(make_loss, param, h=1e-5):
    """Central finite differences of a scalar loss w.r.t. one tensor."""
    flat = param.data.reshape(-1)
    grad = np.zeros_like(flat)
    for i in range(flat.size):
        original = flat[i]
        flat[i] = original + h
        with ad.no_grad():
            plus = make_loss().item()
        flat[i] = original - h
        with ad.no_grad():
            minus = make_loss().item()
        flat[i] = original
        grad[i] = (plus - minus) / (2.0 * h)
    return grad.reshape(param.data.shape)


def gradcheck(make_loss, params, h=1e-5, floor=1e-5):
    """Worst per-tensor relative error between analytic and numeric grads.

    The error is measured against the gradient's own max magnitude with a
    small floor: parameters whose true gradient is exactly zero (e.g. the
    attention key bias, which softmax shift-invariance makes inert) would
    otherwise compare pure float roundoff in the numerical estimate
    (~1e-11 for h=1e-5) against zero.
    """
    for p in params:
        p.grad = None
    loss = make_loss()
    ad.backward(loss)
    worst = 0.0
    for p in params:
        analytic = p.grad if p.grad is not None else np.zeros_like(p.data)
        numeric = numeric_gradient(make_loss, p, h)
        scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), floor)
        worst = max(worst, float(np.max(np.abs(analytic - numeric)) / scale))
        p.grad = None
    return worst


def rerandomize(named_params, rng):
    """Re-draw parameters at a healthy scale for finite-difference checks.

    The training initialization (std 0.02) shrinks activations so far
    through six GELU layers that true gradients fall below what central
    differences at h=1e-5 can resolve; checks run at a generic
    well-conditioned point instead.
    """
    for name, p in named_params.items():
        if p.data.ndim == 2:
            p.data = rng.normal(0.0, 1.0 / np.sqrt(p.data.shape[0]), size=p.data.shape)
        elif name.endswith("gain"):
            p.data = rng.uniform(0.8, 1.2, size=p.data.shape)
        else:
            p.data = rng.normal(0.0, 0.1, size=p.data.shape)
