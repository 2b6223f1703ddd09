"""Hidden quantum Markov models."""
from hqmm.convert import hmm_to_hqmm_circuit, hmm_to_hqmm_sqrt, prior_state
from hqmm.data import SequenceDataset, load_dataset, save_dataset
from hqmm.givens import HRotation, factor_unitary, h_matrix
from hqmm.hmm import HmmParams, baum_welch, hmm_forward, hmm_sample, observable_operators
from hqmm.learn import Phase, StackedKraus, TrainConfig, TrainReport, apply_rotation, inner_optimize, stack, train, unstack
from hqmm.metrics import DaScore, da
from hqmm.model import HqmmState, KrausSet, hqmm_loglik, hqmm_output_probs, hqmm_sample, hqmm_step
from hqmm.models import builtin_model
from hqmm.quantum import ImpossibleObservation

__version__ = "0.1.0"
