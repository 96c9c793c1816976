"""Independent reference computations used to freeze expected values.

None of these call into the analytic module.
"""

import numpy as np
from scipy.stats import poisson


def uniform_mean(n: int) -> float:
    """Mean of the uniform distribution on {1 .. n}, by enumeration."""
    return float(np.arange(1, n + 1).mean())


def grid_argmin(fn, lo, hi, step):
    xs = np.arange(lo, hi + step / 2, step)
    xs = xs[xs > 0]
    ys = fn(xs)
    i = int(np.argmin(ys))
    return float(xs[i]), float(ys[i])


def compound_poisson_variance(rate: float, x_pmf: dict, tail: float = 1e-15) -> float:
    """Exact variance of sum_{j<N} X_j, N ~ Poisson(rate), by convolving the pmf of X.

    ``x_pmf`` maps integer outcomes to probabilities.
    """
    hi = max(x_pmf)
    base = np.zeros(hi + 1)
    for k, p in x_pmf.items():
        base[k] = p
    n_max = int(poisson.isf(tail, rate)) + 1
    total_pmf = np.zeros(hi * n_max + 1)
    conv = np.array([1.0])
    for n in range(n_max + 1):
        w = poisson.pmf(n, rate)
        total_pmf[: len(conv)] += w * conv
        conv = np.convolve(conv, base)
    support = np.arange(len(total_pmf))
    mean = float((support * total_pmf).sum())
    return float((support**2 * total_pmf).sum() - mean**2)


def paoi_mixed_direct(e_f, e_p, e_r, e_i, d, v, h):
    """PAoI = E[Y] + E[S] assembled term by term from the cycle composition."""
    k = e_p / h
    e_l = (k + d + 1) / 2
    e_y = e_i + e_f * (e_l + e_r + v) + h * k + d * h
    return e_y + (e_y - e_i)
