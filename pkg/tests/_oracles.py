"""Brute-force reference implementations used only by the tests.

These deliberately avoid the package's algebra: click probabilities
are obtained by literal enumeration of every photon routing/detection
outcome, so agreement with the closed forms is a genuine two-route
check.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np


def hbt_enumerate(probs) -> tuple[float, float, float]:
    """(p0, p1, p2) by enumerating all 2^n equally likely routings of n
    photons onto two saturable detectors (unit efficiency)."""
    p00 = p10 = p01 = p11 = 0.0
    for n, pn in enumerate(probs):
        if pn == 0.0:
            continue
        if n == 0:
            p00 += pn
            continue
        w = pn * 0.5**n
        for routing in product((0, 1), repeat=n):
            a = 0 in routing
            b = 1 in routing
            if a and b:
                p11 += w
            elif a:
                p10 += w
            elif b:
                p01 += w
            else:
                p00 += w
    return p00, p10 + p01, p11


def joint_enumerate(
    s: int, eta1: float, eta2: float, gamma: float = 0.0
) -> tuple[float, float, float]:
    """(p0, p1, p2) for s emitters, each photon ending as a channel-A
    click (prob eta1/2), a channel-B click (prob eta2/2) or nothing,
    plus per-channel Poissonian background clicks with means
    gamma*eta1/2 and gamma*eta2/2.  Pure enumeration over 3^s photon
    outcomes and the four background click/no-click combinations."""
    pa, pb = eta1 / 2.0, eta2 / 2.0
    pn = 1.0 - pa - pb
    emitter = {(False, False): 0.0, (True, False): 0.0,
               (False, True): 0.0, (True, True): 0.0}
    for outcome in product((0, 1, 2), repeat=s):
        w = 1.0
        for o in outcome:
            w *= (pa, pb, pn)[o]
        emitter[(0 in outcome, 1 in outcome)] += w
    bg_a0 = math.exp(-gamma * eta1 / 2.0)
    bg_b0 = math.exp(-gamma * eta2 / 2.0)
    p00 = p10 = p01 = p11 = 0.0
    for (ea, eb), w in emitter.items():
        for ba, wa in ((False, bg_a0), (True, 1.0 - bg_a0)):
            for bb, wb in ((False, bg_b0), (True, 1.0 - bg_b0)):
                a, b = ea or ba, eb or bb
                ww = w * wa * wb
                if a and b:
                    p11 += ww
                elif a:
                    p10 += ww
                elif b:
                    p01 += ww
                else:
                    p00 += ww
    return p00, p10 + p01, p11


def poisson_joint_enumerate(
    mu: float, eta1: float, eta2: float, n_max: int = 12
) -> tuple[float, float, float]:
    """Like joint_enumerate but with Poisson(mu) photons per pulse,
    truncated at n_max and renormalized (keep mu small)."""
    pa, pb = eta1 / 2.0, eta2 / 2.0
    pn = 1.0 - pa - pb
    pois = np.array([math.exp(-mu) * mu**n / math.factorial(n) for n in range(n_max + 1)])
    pois /= pois.sum()
    p00 = p10 = p01 = p11 = 0.0
    for n, w_n in enumerate(pois):
        for outcome in product((0, 1, 2), repeat=n):
            w = float(w_n)
            for o in outcome:
                w *= (pa, pb, pn)[o]
            a, b = 0 in outcome, 1 in outcome
            if a and b:
                p11 += w
            elif a:
                p10 += w
            elif b:
                p01 += w
            else:
                p00 += w
    return p00, p10 + p01, p11


def convolve_bernoulli_poisson(eta: float, lam: float, n_max: int = 24) -> np.ndarray:
    """Number distribution of one Bernoulli(eta) photon plus
    Poisson(lam) background photons (truncated; tail left off)."""
    pois = np.array([math.exp(-lam) * lam**n / math.factorial(n) for n in range(n_max)])
    return np.convolve(np.array([1.0 - eta, eta]), pois)
