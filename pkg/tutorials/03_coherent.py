"""Coherent probe: pure state, so Gamma is singular and pseudoinverses take over."""

import numpy as np

from gaussqfim import coherent_squeeze_rotate_model, full_report, gamma, model_derivatives, pinv
from gaussqfim.matalg import matrix_rank

md = model_derivatives(coherent_squeeze_rotate_model(alpha=1.0, r=0.5, phi=0.0))
g = gamma(md.cov)
print("rank Gamma =", matrix_rank(g))
print("Gamma^+ =\n", np.round(pinv(g), 6))

rep = full_report(md)
print(f"B_R={rep.bound_rld:.6f} B_S={rep.bound_sld:.6f} R={rep.ratio:.6f}")
print(f"saturation[r,phi] = {rep.saturation[0, 1]:.6f}")

for a2 in (0.5, 1.0, 2.0, 4.0):
    rs = [full_report(model_derivatives(coherent_squeeze_rotate_model(np.sqrt(a2), r))).ratio for r in (0.2, 0.5, 1.0)]
    print(f"|alpha|^2={a2}: R=" + ", ".join(f"{x:.4f}" for x in rs))
