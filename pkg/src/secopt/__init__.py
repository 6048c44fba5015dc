"""Privacy-preserving decentralized optimization over homomorphic ciphertexts.

Agents and a coordinator jointly minimize a coupled convex objective under a
linear coupled constraint. All aggregated quantities travel as masked,
additively homomorphically encrypted messages; agents recover only the sums
they need for their local primal-dual updates.
"""
from .audit import AuditReport, adversary_audit
from .codec import FixedPointCodec
from .crypto import Ciphertext, CryptoContext, cipher_add, cipher_mul, make_context
from .errors import (ConfigError, DimensionError, DivergenceError, DomainError,
                     EncodingOverflowError, KeyMismatchError, ProtocolStallError,
                     SchemeError, SecoptError, SecurityRegressionError)
from .experiments import (ComparisonResult, TrafficConfig, build_numerical_example,
                          build_traffic_example, encryption_error, incidence_matrix,
                          optimality_gap, reference_optimum, run_with_baseline)
from .masks import AFFINE, ZERO, MaskSet, generate_masks
from .problem import (AgentSpec, BoxSet, NegLog, PrimalDualState, ProblemSpec,
                      Quadratic, SolverParams, Zero, initial_state)
from .protocol import (AdversaryTap, Message, ProtocolConfig, ProtocolRunResult,
                       ProtocolState, run_protocol, transcript_lines)
from .records import IterationRecord
from .solvers import (dual_subgradient, eval_objective, primal_subgradient,
                      project_box, rpds_step, solve_plaintext, spds_step,
                      stopping_error)

__version__ = "0.1.0"
