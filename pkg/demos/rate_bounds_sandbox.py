"""Play with the closed-form rates without running anything.

Iteration counts and per-iteration contraction factors for the three
method families, as functions of the objective condition number kappa
and the network quality.
"""

import math

from dvopt import (
    alg1_complexity,
    diging_rates,
    gd_iterations,
    nesterov_tv_bound,
    panda_rates,
    static_nesterov_comparison,
)

print("--- iterations to reach eps (R/eps = 1e6) ---")
print(f"{'kappa':>8} {'plain gd':>10} {'accelerated':>12}")
for kappa in (4, 25, 100, 400):
    l_s, mu = float(kappa), 1.0
    n_gd = gd_iterations(l_s, mu, 1.0, 1e-6)
    n_acc = alg1_complexity(kappa, 0.0, log_term=math.log(1e6)).n_iters
    print(f"{kappa:>8} {n_gd:>10} {n_acc:>12}")

print()
print("--- how many graph changes the accelerated method tolerates ---")
print(f"{'kappa':>8} {'alpha ceiling':>14} {'changes per 1000 iters':>24}")
for kappa in (4, 25, 100, 400):
    ceiling = alg1_complexity(kappa, 0.0, log_term=1.0).alpha_ceiling
    print(f"{kappa:>8} {ceiling:>14.5f} {int(1000 * ceiling):>24}")

print()
print("--- baseline contraction floors (per iteration) ---")
print(f"{'kappa':>8} {'tracking lam0 (n=25)':>22} {'dual-averaging lam0':>20}")
for kappa in (4, 25, 100):
    lam_d, _ = diging_rates(float(kappa), 25)
    lam_p, _, _ = panda_rates(float(kappa))
    print(f"{kappa:>8} {lam_d:>22.6f} {lam_p:>20.6f}")

print()
print("--- residual bound after N steps with m graph changes (kappa=25, R=1) ---")
for m in (0, 1, 3):
    values = [nesterov_tv_bound(25.0, 1.0, 1.0, m, n) for n in (0, 50, 200)]
    print(f"m={m}: N=0 -> {values[0]:9.2e}  N=50 -> {values[1]:9.2e}  N=200 -> {values[2]:9.2e}")

print()
print("--- static-network comparison against the accelerated primal method ---")
for lam2, chi, kphi in ((0.5, 1.0, 1.0), (0.9, 50.0, 10.0), (0.99, 1000.0, 2.0)):
    favors, lhs, rhs = static_nesterov_comparison(lam2, kphi, chi)
    side = "dual accelerated" if favors else "primal accelerated"
    print(f"lambda2={lam2:4.2f} chi={chi:7.1f} kappa_phi={kphi:5.1f}: favors {side} ({lhs:.3e} vs {rhs:.3e})")
