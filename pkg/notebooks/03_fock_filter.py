# # Fock-state filter
#
# Tune the detuning so only level M is resonant. Its cavity block grows like
# sinh^2 while the other blocks oscillate, so a photon count heralds |M>.

import numpy as np
from scipy.stats import poisson

from ioncavity import SystemParams
from ioncavity.experiments import run_fock_filter
from ioncavity.model import EffectiveParams

eff = EffectiveParams.manual(1e4, 1e3)
M, beta = 0, 0.7
p = SystemParams(eta=0.1, delta=0.01 * eff.omega_ii * (2 * M + 1))
t_final = 0.05  # |Gamma(M)| t = 1

res = run_fock_filter(p, eff, M, beta, t_final, samples=101, n_threshold=2)
print("success probability:", res.success_prob, "Poisson:", poisson.pmf(M, beta ** 2))
print("max |n_RS - sinh^2|:", np.max(np.abs(res.n_RS - res.n_RS_analytic)))
print("max n_NS:", res.n_NS.max(), "bound |xi|/omega:", res.bound_NS)
print("fidelity after a count >= 2:", res.fidelity)

# A stricter threshold trades detection probability for fidelity. Pair
# creation leaves odd counts empty, so thresholds 1 and 2 act alike.

for th in (2, 4, 6):
    r = run_fock_filter(p, eff, M, beta, t_final, samples=11, n_threshold=th)
    print(f"threshold {th}: detection {r.detection_prob:.4f}  fidelity {r.fidelity:.5f}")

# For M > 0 the neighbours of M are supercritical and the bound on n_NS no
# longer holds.

M = 4
p4 = p.replace(delta=0.01 * eff.omega_ii * (2 * M + 1))
r4 = run_fock_filter(p4, eff, M, 2.0, t_final / 9, samples=51, n_threshold=4)
print("M=4: max n_NS", r4.n_NS.max(), "vs bound", r4.bound_NS)
