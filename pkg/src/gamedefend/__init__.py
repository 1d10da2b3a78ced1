"""Incentive-based correctness and defendability of security objectives in finite games."""
from .defend import (Verdict, Witness, characterization_verdict, defendable_NE_characterization,
                     defendable_OptNE_characterization, defendable_oracle, deviation_closure,
                     is_correct, security_level, valid)
from .errors import BudgetExceeded, GameError, UnsupportedOperation
from .game import GameFrame, MixedProfile, UtilityProfile, load_game
from .protocol import parse_protocol, play, plans, to_frame
from .solution import SolutionConcept, mixed_nash_2p, solve

__all__ = [
    "BudgetExceeded", "GameError", "GameFrame", "MixedProfile", "SolutionConcept",
    "UnsupportedOperation", "UtilityProfile", "Verdict", "Witness",
    "characterization_verdict", "defendable_NE_characterization",
    "defendable_OptNE_characterization", "defendable_oracle", "deviation_closure",
    "is_correct", "load_game", "mixed_nash_2p", "parse_protocol", "plans", "play",
    "security_level", "solve", "to_frame", "valid",
]
