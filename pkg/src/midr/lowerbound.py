"""The hard restricted-auction family I_k used as regression inputs.

Bidder u is worth almost nothing until it holds ``k`` items, bidder v until
it holds ``m - k``; the unique way to get welfare ``C`` is the split
``(k, m - k)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .range_core import is_power_of_two
from .valuations import Instance, as_fraction, step_list


@dataclass(frozen=True)
class LowerBoundInstance:
    instance: Instance
    k: int
    sigma: Fraction
    C: Fraction
    eta: Fraction

    @property
    def optimum(self) -> tuple:
        """Known optimal allocation and its welfare."""
        m = self.instance.m
        return (self.k, m - self.k), self.C

    @property
    def strict(self) -> bool:
        return self.eta > 0


def _ramp(m, threshold, sigma, C, eta):
    low = sigma * C / (2 * m)
    steps = [(t, low * t) for t in range(1, threshold)]
    steps += [(t, C / 2 + eta * (t - threshold)) for t in range(threshold, m + 1)]
    return step_list(m, steps)


def gen_lb_instance(m: int, k: int, sigma, C, eta=0) -> LowerBoundInstance:
    """Build I_k = (u_k, v_k).

    ``u_k(t) = sigma*C/(2m) * t`` for ``t < k`` and ``C/2`` from ``k`` on; v_k
    is the same with threshold ``m - k``.  A positive ``eta`` adds
    ``eta * (t - threshold)`` on the flat part so both valuations become
    strictly increasing.

    >>> lb = gen_lb_instance(8, 3, "1/100", 1)
    >>> [str(lb.instance.bidders[0](t)) for t in (1, 2, 3, 8)]
    ['1/1600', '1/800', '1/2', '1/2']
    """
    sigma, C, eta = as_fraction(sigma), as_fraction(C), as_fraction(eta)
    if not is_power_of_two(m) or m < 2:
        raise ValueError(f"m must be a power of two >= 2, got {m}")
    if not 1 <= k <= m - 1:
        raise ValueError(f"k must lie in 1..{m - 1}, got {k}")
    if not 0 < sigma < 1:
        raise ValueError("sigma must lie in (0, 1)")
    if C <= 0:
        raise ValueError("C must be positive")
    if eta < 0:
        raise ValueError("eta must be nonnegative")
    # keep (k, m - k) the optimum: flat-part growth must stay below the gap
    if eta * m >= (1 - sigma) * C / 2:
        raise ValueError("eta too large: (k, m-k) would stop being optimal")
    u = _ramp(m, k, sigma, C, eta)
    v = _ramp(m, m - k, sigma, C, eta)
    return LowerBoundInstance(Instance(m, [u, v], strictly_increasing=eta > 0),
                              k, sigma, C, eta)
