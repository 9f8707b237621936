"""Estimating both quadratures of a displacement with a squeezed thermal probe.

The RLD bound sits exactly one unit above the SLD bound, whatever the probe.
"""

import numpy as np

from gaussqfim import displacement_model, full_report, model_derivatives

for nbar in (0.5, 1.0, 2.0):
    for r in (0.0, 0.3, 0.8):
        rep = full_report(model_derivatives(displacement_model(nbar, r)))
        print(f"nbar={nbar:<4} r={r:<4} B_R={rep.bound_rld:8.4f} B_S={rep.bound_sld:8.4f} "
              f"gap={rep.bound_rld - rep.bound_sld:.12f}")

rep = full_report(model_derivatives(displacement_model(1.0, 0.0)))
print("\nRLD QFIM at nbar=1, r=0:")
print(np.round(rep.rld_qfim, 6))
print("saturation matrix (nonzero: the SLD bound cannot be reached):")
print(np.round(rep.saturation, 6))
