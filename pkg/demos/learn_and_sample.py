"""
Learning a density and sampling from it
=======================================

Fits a log-normal density with a real-amplitude ansatz, then draws samples on
the training grid and on a grid twice as fine.
"""

# %%
import numpy as np

from qhartley import sampling as smp
from qhartley.model import GridModel, QuantumModel
from qhartley.targets import TargetSpec
from qhartley.training import TrainConfig, train_distribution

target = TargetSpec("gbm")
report = train_distribution(target, QuantumModel("hartley", 5, 5),
                            TrainConfig(epochs=5000, seed=0, loss_report_stride=1000))
for epoch, loss in report.losses:
    print(f"epoch {epoch:5d}  loss {loss:.3e}")
model = report.model

# %%
# Plain sampling: one readout per integer point.
ints = np.arange(32.0)
q = GridModel(model, ints).evaluate(model.theta, model.alpha, model.beta)["q"]
coarse = smp.histogram(smp.sample(model, 10**5, seed=1), bins=ints)
print("TVD vs model on integers:", round(smp.tvd(coarse.probs, q / q.sum()), 4))

# %%
# One extra qubit and the CNOT ladder give half-integer resolution.
halves = np.arange(64) / 2
fine = smp.histogram(smp.sample(model, 10**6, seed=2, S=1), bins=halves)
t = target.grid_values(halves)
print("TVD vs target on half-integers:", round(smp.tvd(fine.probs, t / t.sum()), 4))
for x, p in list(zip(halves, fine.probs))[18:30]:
    print(f"{x:5.1f} {'#' * int(400 * p)}")
