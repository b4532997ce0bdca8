"""Jointly measurable settings never steer.

If Alice's measurements are all coarse-grainings of one parent POVM, every
state admits an LHS model for them: the parent's outcome is the hidden
variable.  Here noisy versions of complementary qubit measurements are
generated both ways, as a smeared parent and as directly mixed projectors,
and the verdict tracks the noise level.
"""

import numpy as np

from lhvlab import (
    Basis,
    MeasurementAssemblage,
    Povm,
    assemblage_of,
    decide_unsteerable,
    fourier_basis,
    maximally_entangled,
    smear_parent_povm,
)

rho = maximally_entangled(2)

# parent: the four projectors of two complementary bases, each with weight 1/2
z = Povm.from_basis(Basis.computational(2)).effects
x = Povm.from_basis(fourier_basis(2)).effects
parent = Povm(0.5 * np.concatenate([z, x]))
response = np.zeros((2, 2, 4))
response[0, 0, 0] = response[0, 1, 1] = 1.0
response[0, :, 2:] = 0.5
response[1, 0, 2] = response[1, 1, 3] = 1.0
response[1, :, :2] = 0.5
ma = smear_parent_povm(parent, response)
print(f"smeared parent POVM: {decide_unsteerable(assemblage_of(rho, ma)).tag}")

print("noisy complementary measurements eta * projector + (1 - eta) * I/2:")
for eta in (0.5, 0.7, 0.71, 0.8, 1.0):
    effects = [eta * z + (1 - eta) * np.eye(2) / 2, eta * x + (1 - eta) * np.eye(2) / 2]
    verdict = decide_unsteerable(assemblage_of(rho, MeasurementAssemblage.from_povms(effects)))
    print(f"  eta = {eta:.2f}: {verdict.tag} (distance {verdict.distance:.2e})")
