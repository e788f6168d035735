"""Pilot training: DFT phase schedules make the Gram a scaled identity.

The cascaded channel has K N M unknowns and every training step observes M
of them, so T_p >= K N steps are needed. With a DFT phase schedule and
orthonormal pilots, Q^H Q = N K I and all estimators decouple.
"""

import numpy as np

from risnf import dft_phase_schedule, gram, orthonormal_pilots
from risnf.training import observation_matrix

K, N, M = 4, 2, 2
phi = dft_phase_schedule(K, K * N, N)
X = orthonormal_pilots(N)
print("RIS phase schedule (angles in units of pi):")
print(np.round(np.angle(phi.phi) / np.pi, 3))

G = gram(phi, N, M)
Q = observation_matrix(phi, X, M)
print(f"Q is {Q.shape[0]} x {Q.shape[1]}; Gram is {G.scaled_identity():.1f} * I: "
      f"{np.allclose(Q.conj().T @ Q, G.scaled_identity() * np.eye(K * N * M))}")

# a random schedule of the same length still has a full-rank Gram, just not a flat one
rng = np.random.default_rng(0)
G_rand = gram(np.exp(2j * np.pi * rng.random((K, K))), N, M)
w = np.linalg.eigvalsh(G_rand.ris_factor)
print(f"random phases: RIS Gram eigenvalues {np.round(w, 2)}, "
      f"condition {w[-1] / w[0]:.1f}")
