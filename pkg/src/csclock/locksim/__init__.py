"""Monte Carlo simulation of the dual-line clock lock and its Allan deviation."""
from .allan import AllanSeries, allan_deviation, overlapping_adev, white_fm_edf
from .campaign import CampaignResult, SeedSummary, campaign_seeds, run_campaign
from .config import STRETCHED_HZ_PER_T, SimConfig
from .engine import SimTrace, simulate

__all__ = [
    "AllanSeries", "CampaignResult", "STRETCHED_HZ_PER_T", "SeedSummary", "SimConfig", "SimTrace",
    "allan_deviation", "campaign_seeds", "overlapping_adev", "run_campaign", "simulate", "white_fm_edf",
]
