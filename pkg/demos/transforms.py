"""
Hartley transform and feature map
=================================

Builds the transform circuit, compares it against the dense Hartley matrix and
looks at how distinguishable neighbouring feature states are.
"""

# %%
import numpy as np

from qhartley import circuits as cl
from qhartley.verification import dht_matrix, hartley_states, max_far_overlap

n = 3
u = cl.circuit_to_unitary(cl.build_qht(n))
size = 2**n

# %%
# With the ancilla starting in 0 the top-left block is the Hartley matrix,
# and nothing leaks into the ancilla-1 half.
print("block error:", np.abs(u[:size, :size] - dht_matrix(n)).max())
print("leakage    :", np.abs(u[size:, :size]).max())

# %%
# Feature states on the integers and on the half-integers are orthonormal bases.
for grid in (np.arange(size), np.arange(size) + 0.5):
    s, prob = hartley_states(n, grid)
    print(grid[:3], "gram error", np.abs(s.conj() @ s.T - np.eye(size)).max(), "branch prob", prob[:3])

# %%
# Overlap between states a fixed distance apart, with and without the RZ gate.
for gap in (0.5, 1.0, 2.0):
    print(f"|dx| >= {gap}: with RZ {max_far_overlap(5, 0.1, gap):.3f}, "
          f"without {max_far_overlap(5, 0.1, gap, x_rotation=False):.3f}")
