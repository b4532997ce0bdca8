"""Noisy CHSH correlations: where does the local polytope end?

Mix the Bell-state correlations for the textbook CHSH settings with white
noise, ask the LP for a verdict along the way, and locate the transition
by bisection.  The separating witness found on the way is a rescaled CHSH
functional.
"""

import numpy as np

from lhvlab import (
    Basis,
    CorrelationTensor,
    MeasurementAssemblage,
    Povm,
    correlations_of,
    decide_bell_local,
    fourier_basis,
    maximally_entangled,
)

c, s = np.cos(np.pi / 8), np.sin(np.pi / 8)
alice = MeasurementAssemblage.from_povms(
    [Povm.from_basis(Basis.computational(2)), Povm.from_basis(fourier_basis(2))]
)
bob = MeasurementAssemblage.from_povms(
    [Povm.from_basis(np.array([[c, -s], [s, c]])), Povm.from_basis(np.array([[c, s], [-s, c]]))]
)
p = correlations_of(maximally_entangled(2), alice, bob)

# CHSH value from the correlators E(x, y) = P(a = b) - P(a != b)
e = p.probabilities[0, 0] + p.probabilities[1, 1] - p.probabilities[0, 1] - p.probabilities[1, 0]
print(f"CHSH value S = {e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1]:.6f} (local maximum 2)")

verdict = decide_bell_local(p)
w = verdict.witness
print(f"verdict: {verdict.tag}")
print(f"witness value {w.value_on_target:.6f} < local bound {w.local_bound:.6f}")


def noisy(v):
    return CorrelationTensor(v * p.probabilities + (1 - v) / 4)


for v in (0.5, 0.7, 0.72, 0.9):
    print(f"  v = {v:.2f}: {decide_bell_local(noisy(v)).tag}")

lo, hi = 0.0, 1.0
while hi - lo > 1e-7:
    mid = 0.5 * (lo + hi)
    lo, hi = (mid, hi) if decide_bell_local(noisy(mid)).local else (lo, mid)
print(f"transition at v = {0.5 * (lo + hi):.7f}; 1/sqrt(2) = {1 / np.sqrt(2):.7f}")

model = decide_bell_local(noisy(0.6)).model
support = np.argwhere(model.weights > 1e-12)
print(f"at v = 0.6 the local model uses {len(support)} of 16 deterministic strategy pairs")
