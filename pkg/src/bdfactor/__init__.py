"""Stochastic factorization of birth-death chains.

Factor a tridiagonal stochastic transition matrix into stochastic
bidiagonal pieces in either order, swap the pieces to get new chains,
follow the same transforms on the spectral-measure side, and verify
everything against independent oracles: band products, continued
fractions, moment reconstruction, matrix powers, and seeded Monte
Carlo urn experiments.
"""

from .chains import (BirthDeathChain, LowerBidiagonal, UpperBidiagonal,
                     ValidationReport, chain_from_json, chain_to_csv,
                     chain_to_json, factors_from_csv, factors_to_csv,
                     multiply_lu, multiply_ul, truncate_dense, validate_chain)
from .contfrac import (ChainSequence, ChainSequenceValue,
                       ContinuedFractionEvaluation, chain_sequence_partials,
                       chain_sequence_value, convergents, evaluate_H,
                       evaluate_H_tilde, periodic_F)
from .errors import (AdmissibilityViolation, BDFactorError, DomainError,
                     EvaluationError, Inconclusive, NotFactorizable,
                     NumericBreakdown, PrecisionError, SpecError)
from .factorize import (AdmissibleRange, LUFactors, ULFactors, darboux_lu,
                        darboux_ul, lu_factorize, ul_factorize,
                        y0_admissible_range)
from .models import (ConstantChainParams, JacobiAuxSequences, JacobiParams,
                     constant_case_b_ul, constant_chain, constant_lu_closed_form,
                     constant_ul_closed_form, jacobi_chain,
                     jacobi_lu_chain_sequence, jacobi_lu_closed_form,
                     jacobi_ul_chain_sequence, jacobi_ul_closed_form)
from .spectral import (MomentTable, OrthoRecurrence, RecurrenceClassification,
                       SpectralMeasure, christoffel, classify_recurrence,
                       constant_chain_measure, geronimus, invariant_measure,
                       jacobi_weight, km_matrix_power_oracle, km_transition,
                       moment, moments_table, point_measure,
                       recurrence_from_measure, stieltjes_transform)
from .urnsim import (SimulationReport, UrnStepSpec, compare_empirical,
                     constant_urn_spec, exp1_up_probability,
                     exp2_down_probability, jacobi_urn_spec, simulate_chain,
                     simulate_composed, simulate_urn, urn_row_exact, urn_step)

__version__ = "0.1.0"
