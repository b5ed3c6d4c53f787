"""Certifiers for the Gronwall-type bound and the geometric iteration of the
epsilon-regularity argument.

Gronwall bound: if ``f(t) <= a + b int_0^t (f + f^m) ds`` then ``f <= 2a`` up to
``T = min(T1, c / (b (1 + a^(m-1))))``.  The extremal case is the ODE
``f' = b (f + f^m)``, ``f(0) = a``; the largest admissible ``c`` is
``T_hit b (1 + a^(m-1))`` where ``f(T_hit) = 2a``.

Iteration: with ``r_n = kappa^n r0`` the scaled quantity obeys

    O_{n+1} <= O_n / 4 + C kappa^-15 O_n^(3/2) + r_n^((9/4)(-1/2 + 5/tau0))

and stays below ``eps_star`` when ``C kappa^-15 sqrt(eps_star) <= 1/4`` and the
additive term is at most ``eps_star / 2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp


@dataclass
class GronwallCert:
    a: float
    b: float
    m: float
    T1: float
    c_univ: float
    horizon: float
    passed: bool
    c_max: float  # largest c for which f <= 2a holds on the whole horizon
    t_hit: float  # time at which the extremal solution reaches 2a (inf if never)
    witness_t: np.ndarray = field(repr=False)
    witness_f: np.ndarray = field(repr=False)
    blow_up_time: float | None = None


def _extremal(a, b, m, t_max, rtol):
    def rhs(t, f):
        return b * (f + np.abs(f) ** m)

    def hit(t, f):
        return f[0] - 2.0 * a

    hit.terminal = True
    hit.direction = 1

    def big(t, f):
        return f[0] - 1e300 ** (1.0 / max(m, 1.0))

    big.terminal = True
    sol = solve_ivp(rhs, (0.0, t_max), [a], method="DOP853", rtol=rtol, atol=1e-14 * a, events=[hit, big], dense_output=True)
    return sol


def gronwall_hit_time(a: float, b: float, m: float) -> float:
    """Time for ``f' = b (f + f^m)``, ``f(0) = a`` to reach ``2a`` (quadrature oracle)."""
    if b == 0:
        return math.inf
    val, _ = quad(lambda f: 1.0 / (f + f**m), a, 2 * a, epsabs=0, epsrel=1e-13, limit=200)
    return val / b


def certify_gronwall(a: float, b: float, m: float, T1: float, c_univ: float = 1.5, rtol: float = 1e-13) -> GronwallCert:
    """Integrate the extremal ODE and check ``f <= 2a`` up to the horizon."""
    if not a > 0:
        raise ValueError("a must be positive")
    if b < 0:
        raise ValueError("b must be nonnegative")
    if m < 1:
        raise ValueError("m must be >= 1")
    if not T1 > 0:
        raise ValueError("T1 must be positive")
    if b == 0:
        t = np.linspace(0.0, T1, 65)
        return GronwallCert(a, b, m, T1, c_univ, T1, True, math.inf, math.inf, t, np.full_like(t, a))
    rate = b * (1.0 + a ** (m - 1.0))
    horizon = min(T1, c_univ / rate)
    # f' >= b f, so 2a is reached before ln2 / b
    t_max = max(horizon, math.log(2.0) / b) * 1.01
    sol = _extremal(a, b, m, t_max, rtol)
    if sol.status == -1:
        raise RuntimeError(f"extremal ODE integration failed: {sol.message}")
    blow = None
    if len(sol.t_events[1]):
        blow = float(sol.t_events[1][0])
    t_hit = float(sol.t_events[0][0]) if len(sol.t_events[0]) else math.inf
    if blow is not None and blow <= horizon and math.isinf(t_hit):
        t_hit = blow
    t = np.linspace(0.0, min(horizon, sol.t[-1]), 257)
    f = sol.sol(t)[0]
    passed = bool(horizon <= t_hit and np.all(f <= 2.0 * a * (1 + 1e-12)))
    c_max = t_hit * rate
    return GronwallCert(a, b, m, T1, c_univ, horizon, passed, c_max, t_hit, t, f, blow)


def max_c_bisect(a: float, b: float, m: float, T1: float = math.inf, tol: float = 1e-12) -> float:
    """Largest ``c`` with a passing certificate, by bisection on ``c_univ``."""
    if b == 0:
        return math.inf
    lo, hi = 0.0, 1.0
    while certify_gronwall(a, b, m, T1 if math.isfinite(T1) else 1e300, hi).passed:
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            return math.inf
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if certify_gronwall(a, b, m, T1 if math.isfinite(T1) else 1e300, mid).passed:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# kappa condition and iteration


def kappa_lhs(kappa: float, C: float, tau0: float) -> float:
    e = 15.0 / tau0
    return C * (kappa**e + kappa ** (1.0 + e) + kappa ** (-2.0 + e))


def _check_tau0(tau0: float) -> None:
    if not 5.0 < tau0 <= 7.5:
        raise ValueError(f"tau0 must lie in (5, 15/2], got {tau0}")


def solve_kappa(C: float, tau0: float, tol: float = 1e-12) -> float:
    """Largest kappa in (0, 1/2) with ``kappa_lhs <= 1/4``, by bisection."""
    if not C > 0:
        raise ValueError("C must be positive")
    _check_tau0(tau0)
    if kappa_lhs(0.5, C, tau0) <= 0.25:
        return 0.5 - tol  # the interval is open at 1/2
    lo, hi = 0.0, 0.5
    # lhs(0+) = 0 unless the last exponent vanishes (tau0 = 15/2), where it tends to C
    if kappa_lhs(1e-300, C, tau0) > 0.25 or (tau0 == 7.5 and C >= 0.25):
        raise ValueError(f"no kappa in (0, 1/2) satisfies the condition for C = {C}, tau0 = {tau0}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if kappa_lhs(mid, C, tau0) <= 0.25:
            lo = mid
        else:
            hi = mid
    return lo


@dataclass
class IterationTrace:
    kappa: float
    tau0: float
    C: float
    r0: float
    eps_star: float
    sequence: np.ndarray
    n_frak: int = 241
    R: float = 1.0

    @property
    def invariant_holds(self) -> bool:
        return bool(np.all(self.sequence <= self.eps_star))

    @property
    def implied_eps(self) -> float:
        """``kappa^(5 N) R^3 eps_star`` for the chosen integer N > 240."""
        return float(self.kappa ** (5 * self.n_frak) * self.R**3 * self.eps_star)


def radius_exponent(tau0: float) -> float:
    return 2.25 * (-0.5 + 5.0 / tau0)


def iterate_map(O0, kappa, tau0, C, r0, N):
    """Equality-case map of the recursive inequality, N steps."""
    a = np.float64(C) * np.float64(kappa) ** -15.0
    e = radius_exponent(tau0)
    seq = np.empty(N + 1)
    seq[0] = O0
    o = np.float64(O0)
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(N):
            o = 0.25 * o + a * o**1.5 + (np.float64(kappa) ** n * r0) ** e
            seq[n + 1] = o
    return seq


def iterate_O(
    O0: float,
    kappa: float,
    tau0: float,
    C: float,
    r0: float,
    N: int,
    eps_star: float,
    check: bool = True,
    n_frak: int = 241,
    R: float = 1.0,
) -> IterationTrace:
    """Run the map after checking the smallness conditions of the induction.

    ``check=False`` skips the preconditions, for sharpness experiments.
    """
    _check_tau0(tau0)
    if not 0 < kappa < 0.5:
        raise ValueError("kappa must lie in (0, 1/2)")
    if n_frak <= 240:
        raise ValueError("N must exceed 240")
    if check:
        if C * kappa**-15.0 * math.sqrt(eps_star) > 0.25:
            raise ValueError("smallness condition NegativePowers violated: C kappa^-15 sqrt(eps_star) > 1/4")
        if r0 ** radius_exponent(tau0) > 0.5 * eps_star:
            raise ValueError("radius condition violated: r0^((9/4)(-1/2+5/tau0)) > eps_star / 2")
        if O0 > eps_star:
            raise ValueError("initial condition violated: O0 > eps_star")
        if O0 < 0:
            raise ValueError("O0 must be nonnegative")
    seq = iterate_map(O0, kappa, tau0, C, r0, N)
    return IterationTrace(kappa, tau0, C, r0, eps_star, seq, n_frak, R)


def admissible_r0(eps_star: float, tau0: float) -> float:
    """Largest r0 with ``r0^((9/4)(-1/2+5/tau0)) <= eps_star / 2`` (shaved for roundoff)."""
    return (0.5 * eps_star) ** (1.0 / radius_exponent(tau0)) * (1.0 - 1e-12)


def admissible_eps_star(kappa: float, C: float) -> float:
    """Largest eps_star with ``C kappa^-15 sqrt(eps_star) <= 1/4`` (shaved for roundoff)."""
    return (0.25 * kappa**15 / C) ** 2 * (1.0 - 1e-12)
