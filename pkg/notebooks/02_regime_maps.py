# # Amplification regimes per vibrational level
#
# With the ion at a node the pair drive depends on the phonon number m. Each
# level gets its own ratio F(m) = Gamma(m) / Xi(m).

import numpy as np

from ioncavity import SystemParams
from ioncavity.experiments import regime_map, significant_levels
from ioncavity.model import EffectiveParams

p = SystemParams(eta=0.1)
xi = 1e3

# At zero detuning F(m) = 2 xi / omega for every level.

(flat,) = regime_map(p, EffectiveParams.manual(3e3, xi), [0.0], 30)
flat.shape, flat.F_abs[:3]

# Detunings here include the eta^2 of the level-dependent shift.

levels = significant_levels(4.0)
print("levels with Poisson weight >= 1e-3 at beta=4:", levels.min(), "to", levels.max())

for ratio, factor in [(10 / 9, -2.0), (10 / 4, 0.5)]:
    eff = EffectiveParams.manual(ratio * xi, xi)
    (rm,) = regime_map(p, eff, [factor * p.eta ** 2 * eff.omega_ii], 40)
    print(f"omega/|xi|={ratio:.3f}: {sorted(rm.classes_over(levels))}, shape {rm.shape}")

# A detuning of eta^2 omega (2M+1) makes exactly one level resonant.

eff = EffectiveParams.manual(1e4, 9e3)
(rm,) = regime_map(p, eff, [p.eta ** 2 * eff.omega_ii * 21], 30)
print("resonant:", rm.resonant_levels)
print(np.round(rm.F_abs[5:15], 2))
