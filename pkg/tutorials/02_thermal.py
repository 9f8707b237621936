"""Joint squeezing and rotation estimation with a thermal probe."""

import numpy as np

from gaussqfim import full_report, model_derivatives, thermal_squeeze_rotate_model
from gaussqfim.verify import residuals

md = model_derivatives(thermal_squeeze_rotate_model(nbar=1.0, r=0.5, phi=0.3))
rep = full_report(md)
print("SLD QFIM:\n", np.round(rep.sld_qfim, 6))
print(f"B_R={rep.bound_rld:.7f}  B_S={rep.bound_sld:.7f}  R={rep.ratio:.6f}")

# The bounds do not depend on the true rotation angle.
for phi in (0.0, 0.7, 1.3):
    r = full_report(model_derivatives(thermal_squeeze_rotate_model(1.0, 0.5, phi)))
    print(f"phi={phi}: B_R={r.bound_rld:.12f} B_S={r.bound_sld:.12f}")

# Hotter probes push R towards one.
for nbar in (0.5, 2.0, 10.0, 50.0):
    r = full_report(model_derivatives(thermal_squeeze_rotate_model(nbar, 1.0)))
    print(f"nbar={nbar:>5}: R={r.ratio:.6f}")

print()
for line in residuals(md):
    print(line.describe())
