# # Checking the adiabatic elimination
#
# Propagate the full dressed-state model and the effective |i>-branch model
# from |0, 0, i> and compare. Larger Delta should shrink the infidelity.

import numpy as np

from ioncavity import SystemParams
from ioncavity.adiabatic import classify_regime, effective_params, validate_effective_dynamics
from ioncavity.fockalg import Atom, Boson, SpaceSignature

base = SystemParams(Delta=3e6, lambda1=3e5, lambda2=3e5, Omega_abs=3e5, delta=6e4,
                    nu=5e5, eta=0.1, varphi=np.pi / 2)
space = SpaceSignature.of(Boson(24), Boson(8), Atom())

for Delta in (3e6, 6e6, 12e6):
    p = base.replace(Delta=Delta)
    res = validate_effective_dynamics(p, effective_params(p), space, 2e-4, 40)
    print(f"Delta={Delta:.0e}  ratio_minus={classify_regime(p).ratio_minus:5.1f}  "
          f"max infidelity={res.max_infidelity:.3e}  warnings={len(res.warnings)}")

# At Delta = 3e6 the effective model drifts away. Fourth-order terms and the
# (Omega/Delta)^2 shifts are not small there.

p = base
res = validate_effective_dynamics(p, effective_params(p), space, 2e-4, 8)
np.round(np.c_[res.times * 1e6, res.n_exact, res.n_effective], 3)
