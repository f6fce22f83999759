"""Selection-valid inference for forward stepwise regression and the lasso path."""

from .bootstrap import BootstrapSummary, estimated_model_size, run_bootstrap
from .data_io import Dataset, DataError, load_csv, write_csv
from .lasso_test import LassoPath, LassoSpacingTest, lars_path, lasso_pvalue_sequence
from .linmodel import ActiveSet, SigmaEstimate, residualize, sigma_full, t_statistic
from .stepwise import ForwardStepwiseInference, StepwiseTable, run_stepwise

__all__ = [
    "ActiveSet", "BootstrapSummary", "DataError", "Dataset", "ForwardStepwiseInference",
    "LassoPath", "LassoSpacingTest", "SigmaEstimate", "StepwiseTable", "estimated_model_size",
    "lars_path", "lasso_pvalue_sequence", "load_csv", "residualize", "run_bootstrap",
    "run_stepwise", "sigma_full", "t_statistic", "write_csv",
]
__version__ = "0.1.0"
