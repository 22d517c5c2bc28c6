import numpy as np
from scipy import optimize, stats


def equiprobable_edges(cdf, hi, bins):
    """Radii splitting ``[0, hi]`` into ``bins`` cells of equal mass under ``cdf``."""
    total = cdf(hi)
    edges = [0.0]
    for k in range(1, bins):
        target = total * k / bins
        edges.append(optimize.brentq(lambda x: cdf(x) - target, edges[-1], hi, xtol=1e-14))
    edges.append(hi)
    return np.array(edges)


def radial_chi2(radii, cdf, hi, bins=50):
    """Chi-square goodness of fit of sampled radii in ``[0, hi)`` against ``cdf``.

    ``cdf`` may be unnormalised; expected counts use ``cdf / cdf(hi)``.
    """
    edges = equiprobable_edges(cdf, hi, bins)
    observed, _ = np.histogram(radii, bins=edges)
    probs = np.diff([cdf(e) for e in edges]) / cdf(hi)
    expected = probs * len(radii)
    return stats.chisquare(observed, expected)


def binomial_ci(k, n, confidence=0.99):
    lo = stats.beta.ppf((1 - confidence) / 2, k, n - k + 1) if k > 0 else 0.0
    hi = stats.beta.ppf(1 - (1 - confidence) / 2, k + 1, n - k) if k < n else 1.0
    return lo, hi
