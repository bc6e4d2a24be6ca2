"""
Correlated two-dimensional normal
=================================

Two feature registers joined by a correlation block, trained on a grid of
half-integers and sampled at twice that resolution.
"""

# %%
import numpy as np

from qhartley import sampling as smp
from qhartley.model import QuantumModel
from qhartley.targets import TargetSpec
from qhartley.training import TrainConfig, train_bivariate

target = TargetSpec("binormal", {"rho": 0.8})
rep = train_bivariate(target, QuantumModel("bivariate-hartley", 4, 2),
                      TrainConfig(epochs=3000, seed=1, loss_report_stride=500))
print("loss", rep.final_loss)

# %%
h = smp.postprocess_bivariate(smp.sample(rep.model, 10**6, seed=3, S=1))
inside = h.xs <= rep.model.x_max
xs = h.xs[inside]
emp = h.probs[np.ix_(inside, inside)]
print("Pearson r vs target:", smp.pearson(emp, target.grid_values(xs, xs)))

# %%
# Coarse text rendering of the sampled density.
for row in emp[::2, ::2]:
    print("".join(" .:-=+*#%@"[min(9, int(9 * v / emp.max()))] for v in row))
