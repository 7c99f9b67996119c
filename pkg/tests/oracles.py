"""Independent scalar-loop reference implementations.

Everything here is written with plain Python loops and math only, straight
from the definitions, so the vectorized library paths can be checked
against an implementation that shares none of their code.
"""

import math

EPS = 1e-8


def _act(kind, v):
    if kind == "relu":
        return v if v > 0.0 else 0.0
    if kind == "identity":
        return v
    if kind == "sigmoid":
        if v >= 0:
            return 1.0 / (1.0 + math.exp(-v))
        e = math.exp(v)
        return e / (1.0 + e)
    raise ValueError(kind)


def scalar_forward(net, x):
    """Unrolled forward pass of a two-hidden-layer net, one scalar at a time."""
    rows = len(x)
    out = []
    for i in range(rows):
        h1 = []
        for j in range(net.w1.shape[1]):
            acc = net.b1[j]
            for k in range(net.w1.shape[0]):
                acc += x[i][k] * net.w1[k, j]
            h1.append(_act(net.hidden_activation, acc))
        h2 = []
        for j in range(net.w2.shape[1]):
            acc = net.b2[j]
            for k in range(net.w2.shape[0]):
                acc += h1[k] * net.w2[k, j]
            h2.append(_act(net.hidden_activation, acc))
        row = []
        for j in range(net.w3.shape[1]):
            acc = net.b3[j]
            for k in range(net.w3.shape[0]):
                acc += h2[k] * net.w3[k, j]
            row.append(_act(net.output_activation, acc))
        out.append(row)
    return out


def _clamp(p):
    return min(max(p, EPS), 1.0 - EPS)


def scalar_loss_d(m_hat, mask, b):
    """Cross entropy over the hinted-out (b=0) cells, averaged over rows."""
    n, d = len(mask), len(mask[0])
    total = 0.0
    for i in range(n):
        for j in range(d):
            if b[i][j] == 0:
                p = _clamp(m_hat[i][j])
                total += mask[i][j] * math.log(p) + (1 - mask[i][j]) * math.log(1 - p)
    return -total / n


def scalar_loss_g_parts(m_hat, mask, b, x_bar, x_tilde, kinds, sign="gain"):
    """(adversarial, reconstruction) generator loss parts, cell by cell."""
    n, d = len(mask), len(mask[0])
    adv = 0.0
    for i in range(n):
        for j in range(d):
            if b[i][j] == 0:
                adv += (1 - mask[i][j]) * math.log(_clamp(m_hat[i][j]))
    adv /= n
    if sign == "gain":
        adv = -adv
    recon = 0.0
    for i in range(n):
        for j in range(d):
            if mask[i][j] == 1:
                if kinds[j] == "binary":
                    recon += -x_tilde[i][j] * math.log(_clamp(x_bar[i][j]))
                else:
                    recon += (x_bar[i][j] - x_tilde[i][j]) ** 2
    recon /= n
    return adv, recon


def scalar_loss_g(m_hat, mask, b, x_bar, x_tilde, kinds, alpha, sign="gain"):
    adv, recon = scalar_loss_g_parts(m_hat, mask, b, x_bar, x_tilde, kinds, sign)
    return adv + alpha * recon


def scalar_recombine(x_tilde, x_bar, mask):
    """Cellwise merge: observed from x_tilde, missing from x_bar."""
    n, d = len(mask), len(mask[0])
    return [[mask[i][j] * x_tilde[i][j] + (1 - mask[i][j]) * x_bar[i][j]
             for j in range(d)] for i in range(n)]


def scalar_rmse(truth, imputed, mask, classes=None):
    """Missing-cell RMSE; with classes, also per-class values and counts."""
    n, d = len(mask), len(mask[0])
    total, count = 0.0, 0
    by_class = {}
    for i in range(n):
        for j in range(d):
            if mask[i][j] == 0:
                sq = (truth[i][j] - imputed[i][j]) ** 2
                total += sq
                count += 1
                if classes is not None:
                    s, c = by_class.get(classes[i], (0.0, 0))
                    by_class[classes[i]] = (s + sq, c + 1)
    overall = math.sqrt(total / count)
    if classes is None:
        return overall, count
    per_class = {k: (math.sqrt(s / c), c) for k, (s, c) in by_class.items()}
    return overall, count, per_class
