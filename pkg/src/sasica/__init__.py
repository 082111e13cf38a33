"""Model-based ICA and transform comparison for symmetric alpha-stable AR(1) signals."""
from .model import ModelParams, build_mixing, build_whitening, synthesize, whiten
from .transforms import dct_matrix, haar_matrix, identity, klt_matrix, make_transform, opwav_matrix
from .criteria import evaluate, mse_criterion, redundancy_R, row_alpha_norms
from .optimizer import OptimizerOptions, match_basis, multistart, optimize

__version__ = "0.1.0"
