"""Key agreement in the random-oracle model: protocols, attackers, reductions."""

from .core import (ExecutionRecord, Message, ProtocolRun, ProtocolSpec, agreement,
                   communication_cost, estimate_agreement, execute, replay)
from .eavesdroppers import (EveConfig, HeavyQueryEve, brute_force_attack, consistent_view_attack,
                            evaluate_attacker, heavy_query_eve_attack, simulate_receiver_attack)
from .errors import (BudgetExceeded, InsufficientSamples, NoGapError, ParameterError, SpecError,
                     UnsupportedPolicy)
from .oracle import Oracle
from .protocols import (REGISTRY, build, hash_chain_adaptive, matrix_rowcol, merkle_puzzles,
                        trivial_point, xor_masked_rowcol)
from .seeding import derive_seed
from .transforms import eliminate_apriori_heavy, key_as_last_query

__version__ = "0.1.0"
