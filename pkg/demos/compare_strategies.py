"""
Which combination strategy finds divergences sooner?
====================================================

Same seeds, same trial seeds, different ways of combining mutators.
"""
import numpy as np

from contractdiff.campaign import compare_strategies, default_config
from contractdiff.campaign.report import render_comparison
from contractdiff.mutation import StrategyChoice

cfg = default_config(
    seeds=["builtin:Ledger", "builtin:Counter"],
    backends=["reference", "gas_variant"],
    iterations=60,
    step_limit=100_000,
    persist=False,
)
strategies = list(StrategyChoice)
cmp = compare_strategies(cfg, strategies, trials=8)
print(render_comparison(cmp))

# best-so-far curves as an array: rows are iterations, columns strategies
curves = np.array([[row[s] for s in cmp.strategies] for row in cmp.table()])
print("shape:", curves.shape)
for name, area in zip(cmp.strategies, curves.sum(axis=0)):
    print(f"area under curve {name:12s} {area:.2f}")
