"""
Catching a gas-accounting bug
=============================

Two backends that agree on every output, but one charges more for storage.
"""
import tempfile

from contractdiff.campaign import default_config, run_campaign
from contractdiff.campaign.report import render_text

# the Ledger seed has storage writes behind conditions that start out dead
corpus = tempfile.mkdtemp(prefix="gasdiff-")
cfg = default_config(
    corpus=corpus,
    seeds=["builtin:Ledger"],
    backends=["reference", "gas_variant"],
    iterations=50,
    step_limit=100_000,
    seed=1,
)
report = run_campaign(cfg)

print(render_text(report))
print("first mutant with a gas difference:", report.first_gas_divergence)
print("corpus written to", corpus)
