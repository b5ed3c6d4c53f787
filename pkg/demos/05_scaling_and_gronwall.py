"""Scaling of the two equations, and the constants of the regularity argument.

Run:  python3 demos/05_scaling_and_gronwall.py
"""
# %%
import math

from micropolar.grid import GridSpec
from micropolar.gronwall import (
    admissible_eps_star,
    admissible_r0,
    certify_gronwall,
    iterate_O,
    max_c_bisect,
    solve_kappa,
)
from micropolar.scaling import scaling_check

# %% [markdown]
# The u equation is invariant under u -> lam u(lam^2 t, lam x), w -> lam w.
# The w equation is not: the zeroth-order damping -w and the curl coupling
# carry the wrong powers of lam.  The rescaled residual of manufactured data
# is compared with the roundoff floor.

# %%
out = scaling_check(GridSpec(32), seed=0)
for row in out["lambdas"]:
    print(f"  lam = {row['lambda']}: u-eq equivariance error {row['res1_equivariance_error']:.1e}, "
          f"w-eq defect / floor {row['res2_over_floor']:.1e}, prediction error {row['res2_prediction_error']:.1e}")

# %% [markdown]
# Gronwall: f <= a + b int (f + f^m) keeps f <= 2a up to c / (b (1 + a^(m-1))).
# For m = 1 the extremal solution is a e^{2bt}, so the largest c is ln 2.

# %%
cert = certify_gronwall(1.0, 0.5, 1.0, T1=10.0, c_univ=0.6)
print(f"m = 1: t_hit = {cert.t_hit:.12f}, ln2/(2b) = {math.log(2):.12f}, certificate {cert.passed}")
print(f"m = 3, a = 0.5: largest admissible c = {max_c_bisect(0.5, 1.0, 3.0):.10f}")

# %% [markdown]
# The iteration O_{n+1} <= O_n/4 + C kappa^-15 O_n^{3/2} + r_n^{...} stays below
# eps* when kappa solves the kappa condition and eps*, r0 are small enough.
# Breaking the smallness condition by a factor 4 loses the invariant at once.

# %%
C, tau0 = 1.0, 6.0
kappa = solve_kappa(C, tau0)
eps = admissible_eps_star(kappa, C)
good = iterate_O(eps, kappa, tau0, C, admissible_r0(eps, tau0), 10_000, eps)
bad = iterate_O(16 * eps, kappa, tau0, C, admissible_r0(16 * eps, tau0), 10_000, 16 * eps, check=False)
print(f"kappa = {kappa:.6f}, eps* = {eps:.3e}")
print(f"admissible run: invariant holds for 10^4 steps: {good.invariant_holds}")
print(f"4x violation: invariant holds: {bad.invariant_holds} (O_1 / eps* = {bad.sequence[1] / bad.eps_star:.2f})")
