"""Steering a maximally entangled qubit pair with two complementary measurements.

Alice measures in the computational and Hadamard bases.  The solver
returns the nearest local-hidden-state reconstruction, its distance with a
duality-gap certificate, and a witness whose bound is verified by sweeping
every deterministic strategy.  Adding white noise eventually destroys the
steering, and the verdict flips to a certified LHS model.
"""

import numpy as np

from lhvlab import (
    Basis,
    DensityMatrix,
    MeasurementAssemblage,
    Povm,
    assemblage_of,
    decide_unsteerable,
    fourier_basis,
    maximally_entangled,
    nearest_lhs_model,
)

ma = MeasurementAssemblage.from_povms(
    [Povm.from_basis(Basis.computational(2)), Povm.from_basis(fourier_basis(2))]
)
sigma = assemblage_of(maximally_entangled(2), ma)

sol = nearest_lhs_model(sigma)
print(f"distance to the LHS set: {sol.distance:.9f} (gap {sol.fw_gap:.1e})")
print(f"closed form (sqrt2 - 1)/2 = {(np.sqrt(2) - 1) / 2:.9f}")

verdict = decide_unsteerable(sigma)
w = verdict.witness
print(f"verdict: {verdict.tag}; witness value {w.value_on_target:.6f} > LHS bound {w.lhs_bound:.6f}")
for x in range(2):
    for a in range(2):
        print(f"  F[x={x}, a={a}] =\n{np.round(w.functionals[x, a].real, 4)}")

print("white-noise family v |phi+><phi+| + (1 - v) I/4:")
for v in (0.6, 0.7, 0.72, 0.8):
    rho = DensityMatrix(v * maximally_entangled(2).matrix + (1 - v) * np.eye(4) / 4)
    verdict = decide_unsteerable(assemblage_of(rho, ma))
    print(f"  v = {v:.2f}: {verdict.tag} (distance {verdict.distance:.2e})")
