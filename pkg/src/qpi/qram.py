"""Closed-form QRAM feasibility estimates.

Relates four quantities for a bucket-brigade-style memory serving an
N-dimensional data-upload problem at target fidelity F:

    infidelity      1 - F = (1/4) eps log(N)^2      (query depth T = log N)
    hardware error  eps   = (kappa+gamma) c_d pi / (2 g_d) + (g_d / nu)^2

Logs are base 2 by default (qubit addressing depth); a switch to natural
log is provided for sensitivity checks.  Rates are carried as plain
cycle rates (the "2 pi x" in hardware specs is notation): eps only ever
sees ratios of rates, so the convention cancels everywhere except in
the decoherence budget, which is then reported in the same cycle-rate
unit as g_d.
"""

import math
from dataclasses import dataclass

ROUND_TRIP_TOL = 1e-12


class InfeasibleTargetError(ValueError):
    """The coupling-induced error floor alone exceeds the target."""


@dataclass
class QramHardwareParams:
    """Couplings and the gate-depth constant of the hybrid memory stack."""

    g_d: float = 1e3        # direct coupling (cycle rate; spec'd as 1 kHz x 2pi)
    nu: float = 1e7         # free spectral range (10 MHz x 2pi)
    c_d: float = 4.5        # mean gate depth constant of the CZ/SWAP stages
    kappa_plus_gamma: float = 0.0   # combined phonon + transmon decoherence rate

    def __post_init__(self):
        if self.g_d <= 0 or self.nu <= 0 or self.c_d <= 0:
            raise ValueError("hardware parameters must be positive")
        if self.kappa_plus_gamma < 0:
            raise ValueError("decoherence rate must be non-negative")
        if self.g_d >= self.nu:
            raise ValueError("direct coupling must stay below the free spectral range")

    @property
    def error_floor(self):
        """(g_d / nu)^2, the error left at zero decoherence."""
        return (self.g_d / self.nu) ** 2


def _log(n, base):
    if base == 2:
        return math.log2(n)
    if base in ("e", math.e):
        return math.log(n)
    raise ValueError("log base must be 2 or 'e'")


def infidelity(eps, n_data, log_base=2):
    """1 - F = (1/4) eps log(N)^2."""
    if eps < 0:
        raise ValueError("error rate must be non-negative")
    if n_data < 2:
        raise ValueError("data size must be at least 2")
    return 0.25 * eps * _log(n_data, log_base) ** 2


def epsilon_bound(one_minus_f, n_data, log_base=2):
    """Largest per-operation error rate compatible with the fidelity target."""
    if not 0 < one_minus_f < 1:
        raise ValueError("target infidelity must lie in (0, 1)")
    if n_data < 2:
        raise ValueError("data size must be at least 2")
    return 4.0 * one_minus_f / _log(n_data, log_base) ** 2


def epsilon_from_hardware(hw):
    """eps = (kappa+gamma) c_d pi / (2 g_d) + (g_d/nu)^2."""
    return hw.kappa_plus_gamma * hw.c_d * math.pi / (2.0 * hw.g_d) + hw.error_floor


def decoherence_budget(eps_target, hw):
    """Largest kappa+gamma keeping the hardware error within eps_target."""
    if eps_target <= 0:
        raise ValueError("target error rate must be positive")
    floor = hw.error_floor
    if floor > eps_target:
        raise InfeasibleTargetError(
            f"coupling floor {floor:.3e} exceeds target {eps_target:.3e}")
    return (eps_target - floor) * 2.0 * hw.g_d / (hw.c_d * math.pi)


@dataclass
class FeasibilityCell:
    n_data: float
    one_minus_f: float
    epsilon: float
    kappa_plus_gamma: float   # nan when infeasible
    feasible: bool
    target_regime: bool       # the highlighted N ~ 1e3, 1-F ~ 1e-3 band


def feasibility_grid(n_values, f_values, hw=None, log_base=2):
    """Cells of (N, 1-F) -> required eps and decoherence budget.

    Cells within a factor-of-sqrt(10) band of N = 1e3, 1-F = 1e-3 are
    flagged as the highlighted operating regime.
    """
    hw = hw or QramHardwareParams()
    if len(n_values) == 0 or len(f_values) == 0:
        raise ValueError("ranges must be non-empty")
    cells = []
    for n in n_values:
        for omf in f_values:
            eps = epsilon_bound(omf, n, log_base)
            try:
                budget = decoherence_budget(eps, hw)
                feasible = True
            except InfeasibleTargetError:
                budget = math.nan
                feasible = False
            regime = (1e3 / math.sqrt(10) <= n <= 1e3 * math.sqrt(10)
                      and 1e-3 / math.sqrt(10) <= omf <= 1e-3 * math.sqrt(10))
            cells.append(FeasibilityCell(n, omf, eps, budget, feasible, regime))
    return cells


def grid_csv_lines(cells):
    yield "N,one_minus_F,epsilon,kappa_plus_gamma,feasible,target_regime"
    for c in cells:
        budget = "" if math.isnan(c.kappa_plus_gamma) else repr(c.kappa_plus_gamma)
        yield (f"{c.n_data!r},{c.one_minus_f!r},{c.epsilon!r},{budget},"
               f"{int(c.feasible)},{int(c.target_regime)}")
