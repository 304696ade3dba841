"""Single-emitter recognition from one set of click statistics.

The test exploits that a saturable two-detector stage bounds what any
pair (or larger group) of emitters can produce.  For a fixed mean click
number mean_n, the *least* distinguishable multi-emitter system is two
identical emitters, each detected with the boundary efficiency

    eta* = 2 - sqrt(4 - 2 mean_n)        (so that 2 eta* - eta*^2/2 = mean_n)

Any system of two or more emitters with this mean satisfies

    P(1) <= p1_bound = mean_n - eta*^2
    P(2) >= p2_bound = eta*^2 / 2

so measuring P(1) *above* p1_bound certifies a single emitter.  The two
bounds are complementary: p1_bound + 2 p2_bound = mean_n.

Background blurs the test.  A single emitter over background with
signal-to-background ratio below a threshold SBR0(mean_n) lands on the
wrong side of the boundary no matter what, so such a measurement is
declared indeterminate rather than "not single".  SBR0 runs from
1 + sqrt(2) (mean_n -> 0) down to about 1.63 (mean_n = 1).

Channel imbalance and finite sampling shift the critical values:

    P1_critical = p1_bound - delta_p1 + var_p1
    P2_critical = p2_bound - delta_p2 - var_p2

with the systematic deviations of ``deviations`` (delta_p1 <= 0, so the
one-click threshold moves up) and the sampling variance p(1-p)/M.  One
standard deviation is also reported for error bars.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analytic import sbr_from_stats
from .deviations import sampling_fluctuation, systematic_deviation
from .model import (
    ClickCounts,
    ConvergenceError,
    Decision,
    DetectionParams,
    PhotonStats,
    RangeError,
    SbrNotApplicable,
    Verdict,
    stats_from_counts,
)

_BISECTION_STEPS = 200
_CONSISTENCY_TOL = 1e-9


def boundary_eta(mean_n: float) -> float:
    """Efficiency eta* at which two ideal emitters produce the given
    mean click number; computed as mean_n / (1 + sqrt(1 - mean_n/2)),
    which is exact and avoids cancellation for small means."""
    if not 0.0 <= mean_n <= 1.0:
        raise RangeError(f"mean_n must be in [0, 1], got {mean_n!r}")
    return mean_n / (1.0 + math.sqrt(1.0 - mean_n / 2.0))


def uncorrected_bounds(mean_n: float) -> tuple[float, float]:
    """(p1_bound, p2_bound) of the two-emitter boundary system at the
    given mean; p1_bound + 2 p2_bound = mean_n."""
    eta_sq = boundary_eta(mean_n) ** 2
    return mean_n - eta_sq, 0.5 * eta_sq


def sbr_threshold(mean_n: float) -> float:
    """Signal-to-background ratio below which a true single emitter is
    indistinguishable from the two-emitter boundary at this mean.

    Solved by bisection on the detected background level b in
    (0, mean_n]: the two-click probability (b/2)(mean_n - b/2) of the
    signal+background model grows monotonically in b, and the threshold
    is where it reaches p2_bound.
    """
    if not 0.0 < mean_n <= 1.0:
        raise RangeError(f"mean_n must be in (0, 1], got {mean_n!r}")
    _, p2_bound = uncorrected_bounds(mean_n)

    def excess(b: float) -> float:
        return (b / 2.0) * (mean_n - b / 2.0) - p2_bound

    lo, hi = 0.0, mean_n
    if excess(hi) < 0.0:
        raise ConvergenceError(f"no root bracketed for mean_n={mean_n!r}")
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    b = 0.5 * (lo + hi)
    if b <= 0.0:
        raise ConvergenceError(f"degenerate root for mean_n={mean_n!r}")
    s = (mean_n - b) / (1.0 - b / 2.0)
    return s / b


def setup_sbr(params: DetectionParams) -> float:
    """Signal-to-background ratio implied by the calibration: signal
    eta against detected background 2 (1 - e^(-eta gamma / 2)).
    Infinite when there is no background, zero when there is no
    signal."""
    b = -2.0 * math.expm1(-params.eta * params.gamma / 2.0)
    if b == 0.0:
        return math.inf
    return params.eta / b


@dataclass(frozen=True)
class CriticalValues:
    """Critical one- and two-click probabilities at one mean click
    number, uncorrected and corrected for imbalance + finite sampling.

    stat_* are the sampling variances actually added to the bounds;
    sigma_* are the corresponding one-standard-deviation values for
    error bars.
    """

    p1_bound: float
    p2_bound: float
    p1_corrected: float
    p2_corrected: float
    delta_p1: float
    delta_p2: float
    stat_p1: float
    stat_p2: float
    sigma_p1: float
    sigma_p2: float


def corrected_critical_values(mean_n: float, params: DetectionParams) -> CriticalValues:
    """Critical values at mean_n, corrected for the calibration's
    channel imbalance and for sampling over params.cycles pulses."""
    p1_bound, p2_bound = uncorrected_bounds(mean_n)
    d1, d2 = systematic_deviation(params)
    var1, sig1 = sampling_fluctuation(p1_bound, params.cycles)
    var2, sig2 = sampling_fluctuation(p2_bound, params.cycles)
    return CriticalValues(
        p1_bound=p1_bound,
        p2_bound=p2_bound,
        p1_corrected=p1_bound - d1 + var1,
        p2_corrected=p2_bound - d2 - var2,
        delta_p1=d1,
        delta_p2=d2,
        stat_p1=var1,
        stat_p2=var2,
        sigma_p1=sig1,
        sigma_p2=sig2,
    )


def _measured_sbr(stats: PhotonStats) -> float | None:
    try:
        return sbr_from_stats(stats)
    except SbrNotApplicable:
        return None


def _indeterminate(reason: str, **fields) -> Verdict:
    defaults = dict(
        p1_critical=math.nan,
        p2_critical=math.nan,
        sbr0=math.nan,
        measured_sbr=None,
        setup_sbr=math.nan,
        margin_p1=math.nan,
    )
    defaults.update(fields)
    return Verdict(decision=Decision.INDETERMINATE, reason=reason, **defaults)


def classify(
    stats: PhotonStats,
    counts: ClickCounts | None,
    params: DetectionParams,
) -> Verdict:
    """Decide single / not-single / indeterminate for one measurement.

    The decision is gated on the *setup* signal-to-background ratio
    from the calibration params: below sbr_threshold(mean_n) no
    verdict is possible.  The data-driven estimate (measured_sbr) is
    reported alongside but does not gate a calibrated measurement.
    When counts are supplied they must reproduce stats.
    """
    if counts is not None:
        empirical = stats_from_counts(counts)
        for name, a, b in (
            ("p0", empirical.p0, stats.p0),
            ("p1", empirical.p1, stats.p1),
            ("p2", empirical.p2, stats.p2),
        ):
            if abs(a - b) > _CONSISTENCY_TOL:
                raise RangeError(
                    f"counts give {name}={a!r}, inconsistent with stats {name}={b!r}"
                )

    mean_n = stats.mean_n
    if mean_n <= 0.0:
        return _indeterminate("no clicks observed; statistics carry no information")
    if mean_n > 1.0:
        return _indeterminate(
            f"mean click number {mean_n!r} exceeds 1; outside the test's domain"
        )

    crit = corrected_critical_values(mean_n, params)
    sbr0 = sbr_threshold(mean_n)
    measured = _measured_sbr(stats)
    setup = setup_sbr(params)
    margin = stats.p1 - crit.p1_corrected
    common = dict(
        p1_critical=crit.p1_corrected,
        p2_critical=crit.p2_corrected,
        sbr0=sbr0,
        measured_sbr=measured,
        setup_sbr=setup,
        margin_p1=margin,
    )

    if measured is None:
        return _indeterminate(
            "two-click rate too high for the signal+background model; "
            "measured SBR undefined",
            **common,
        )
    if setup < sbr0:
        return _indeterminate(
            f"setup SBR {setup:.3f} below threshold {sbr0:.3f}; "
            "background too strong for a verdict",
            **common,
        )
    decision = Decision.SINGLE if margin > 0.0 else Decision.NOT_SINGLE
    return Verdict(decision=decision, reason=None, **common)


def classify_counts(
    counts: ClickCounts,
    *,
    eta: float | None = None,
    delta: float = 0.0,
    gamma: float | None = None,
    cycles: int | None = None,
) -> Verdict:
    """Classify raw tallies, filling in calibration defaults.

    Without an explicit eta the boundary efficiency at the measured
    mean is assumed.  Without an explicit gamma the background level is
    back-solved from the measured SBR, which makes the applicability
    gate act on the data-driven SBR itself — the conservative,
    uncalibrated reading.  Pass the real calibration to override.
    """
    stats = stats_from_counts(counts)
    mean_n = stats.mean_n
    in_range = 0.0 < mean_n <= 1.0

    eta_eff = eta if eta is not None else (boundary_eta(mean_n) if in_range else 0.0)
    if gamma is not None:
        gamma_eff = gamma
    else:
        gamma_eff = 0.0
        measured = _measured_sbr(stats)
        if in_range and eta_eff > 0.0 and measured is not None and math.isfinite(measured):
            # invert b = 2 (1 - e^(-eta gamma / 2)) at b = eta / SBR,
            # capped away from the b = 2 pole for pathological inputs
            b = min(eta_eff / measured, 1.99)
            gamma_eff = -2.0 * math.log1p(-b / 2.0) / eta_eff
    params = DetectionParams(
        eta=eta_eff,
        delta=delta,
        gamma=gamma_eff,
        cycles=cycles if cycles is not None else counts.n_all,
    )
    return classify(stats, counts, params)
