# # Semiclassical limit of the Fock-resolved squeezing
#
# Replacing (2 b^dag b + 1) by 2|beta|^2 turns the vibration into a classical
# amplitude. The gap to the full model closes as beta grows.

from ioncavity import SystemParams
from ioncavity.adiabatic import effective_params
from ioncavity.experiments import run_semiclassical_comparison

p = SystemParams(Delta=3e5, lambda1=3e5, lambda2=3e5, Omega_abs=3e6,
                 phi_drive=1.5 * 3.141592653589793, nu=5e5, eta=0.1)
eff = effective_params(p)
eff.regime, eff.xi_ii

# beta=1 needs the closed-form cavity blocks because rare high-m levels
# amplify past any practical truncation.

runs = [(1, dict(N_vib=32, cavity_engine="bogoliubov")),
        (5, dict(N_cav=128, N_vib=64)),
        (10, dict(N_cav=64, N_vib=200))]
for beta, kw in runs:
    (c,) = run_semiclassical_comparison(p, eff, [beta], r_max=1.0, samples=21, **kw)
    print(f"beta={beta:>2}: deviation at r=0.5 = {c.deviation_at(0.5):+.3e}")

# To first order in r the deviation is -r / (4 |beta|^2), from the +1 in
# (2 b^dag b + 1).

(c,) = run_semiclassical_comparison(p, eff, [2], r_max=0.01, samples=3, N_vib=32,
                                    cavity_engine="bogoliubov")
print(c.deviation[1] / c.r[1], -1 / 16)
