"""Campaign orchestration, findings, reports and the command line."""
from .config import BackendSpec, CampaignConfig, ConfigError, SeedSpec, bundled_seeds, config_from_dict, default_config, load_config
from .findings import FindingStore, InconsistencyRecord, InvalidFinding, read_index
from .run import (
    CampaignReport,
    NoViableSeeds,
    StaleFinding,
    StrategyComparison,
    compare_strategies,
    replay,
    run_campaign,
    trial_seed,
)

__all__ = [
    "BackendSpec", "CampaignConfig", "ConfigError", "SeedSpec", "bundled_seeds", "config_from_dict",
    "default_config", "load_config", "FindingStore", "InconsistencyRecord", "InvalidFinding", "read_index",
    "CampaignReport", "NoViableSeeds", "StaleFinding", "StrategyComparison", "compare_strategies", "replay",
    "run_campaign", "trial_seed",
]
