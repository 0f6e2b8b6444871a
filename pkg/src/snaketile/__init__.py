"""Snake tiling problems on marked groups: solvers, towers of HNN levels, tree automata."""
from .errors import BudgetExceeded, InstanceError, Undetermined, UnsupportedCapability
from .groups import (Element, FreeGroup, GeneratingSet, HnnGroup, HnnPresentation,
                     LamplighterGroup, PermutationLimitGroup, amalgam_normal_form, ball,
                     evaluate, hnn_normal_form, multiply, z_projection)
from .tiles import (FinitePathSnake, Ouroboros, PeriodicSnake, Tileset, ValidityMode,
                    enumerate_tilesets, extend_generators, tileset_index, to_directed_strong,
                    validate_snake)
from .solver import (Budget, Case, CaseLabel, Outcome, Verdict, classify_z,
                     infinite_snake_decide, lift_snake, ouroboros_search, path_search,
                     periodic_snake_search, reach)

__version__ = "0.1.0"
