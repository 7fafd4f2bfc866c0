"""Nonparametric LPV state-space identification with a 2D-filtered LS-SVM."""
from .core import (AlphaPolynomial, Dataset, DatasetError, HyperParams,
                   LengthMismatch, NonFinite, TooShort, TrainedModel,
                   UnstablePolynomial, companion_from_alpha, read_dataset_csv,
                   validate_dataset, write_dataset_csv)
from .estimator import (CoefficientPair, DivergedSimulation, SingularSystem,
                        ZeroVariance, bfr, fit, io_coefficients, load_model,
                        reconstruct, save_model, simulate)
from .filter2d import (CutoffOutOfRange, FilteredGram, butterworth_alpha,
                       filter_gram_2d, iir_filter_1d)
from .kernels import GramMatrix, RBFKernel, extended_gram, gram, kernel_sequences, rbf
from .tuner import AllDiverged, CuriositySet, barycenter, j_index, tune

__version__ = "0.1.0"
