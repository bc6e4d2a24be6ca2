"""
Fourier and Hartley models on an exponential density
====================================================

Same target, same budget. The Hartley model uses one angle per qubit and
layer; the Fourier pair schemes use two.
"""

# %%
from qhartley.model import QuantumModel
from qhartley.targets import TargetSpec
from qhartley.training import TrainConfig, integer_grid, train_distribution

target = TargetSpec("exponential")
templates = {"hera": lambda n: QuantumModel("hartley", n, 1)}
for scheme in ("RYRX", "RXRZ", "RZRY", "RX", "RY", "RZ"):
    templates[scheme] = lambda n, s=scheme: QuantumModel("fourier", n, 1, ansatz="hea", scheme=s)

for n in (2, 3, 4):
    row = []
    for name, make in templates.items():
        t = make(n)
        rep = train_distribution(target, t, TrainConfig(epochs=3000, loss_report_stride=3000), grid=integer_grid(n))
        row.append(f"{name}({t.n_params})={rep.final_loss:.1e}")
    print(f"n={n}: " + "  ".join(row))
