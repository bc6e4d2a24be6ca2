"""
Solving a second-order equation
===============================

Trains a model so that it satisfies a differential equation plus a boundary
value and slope, then compares the result and its derivatives to the exact
solution.
"""

# %%
import numpy as np

from qhartley.model import GridModel, QuantumModel
from qhartley.targets import TargetSpec, de_solution
from qhartley.training import TrainConfig, de_grid, train_de

kind = "de1"
target = TargetSpec(kind)
report = train_de(kind, QuantumModel("hartley", 4, 3),
                  TrainConfig(epochs=5000, seed=0, init_scale=1.0, loss_report_stride=1000))
m = report.model
print("final loss", report.final_loss)

# %%
grid = de_grid(kind, 4)
r = GridModel(m, grid, order=2).evaluate(m.theta, m.alpha, m.beta)
f, f1, f2 = de_solution(kind, grid, target.params["mu"], target.params["sigma"])
print("max |f - exact|  :", np.abs(r["f"] - f).max())
print("max |f' - exact| :", np.abs(r["f1"] - f1).max())
print("max |f''- exact| :", np.abs(r["f2"] - f2).max())
