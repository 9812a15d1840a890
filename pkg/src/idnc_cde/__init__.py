"""Game-theoretic instantly decodable network coding for cooperative data exchange."""
from .session import ErasureModel, GameLedger, run_init_phase, sample_channel, is_complete
from .game import Session, advance_stage, utility_game1, utility_game2
from .equilibrium import analyze_stage, brute_force_ne
from .learning import resolve_stage_action
from .harness import ExperimentConfig, run_sweep

__version__ = "0.1.0"
