"""Neural-network ground-motion prediction toolkit for PGA and PGV.

A small feedforward network (three inputs, one hidden layer, one output)
maps moment magnitude, Vs30, and Joyner-Boore distance to the natural log
of peak ground acceleration or velocity.  The package ships the published
weight sets for both intensity measures, a Levenberg-Marquardt trainer for
refitting on new catalogs, and residual / sensitivity / attenuation
analyses with delimited and graphical output.
"""

from .analysis import (DEFAULT_RJB_EDGES_KM, DEFAULT_VS30_EDGES_MPS,
                       AttenuationCurve, BinnedResiduals, ImportanceVector,
                       ResidualBin, ResidualTable, attenuation_curve,
                       bin_residuals, garson_importance, residuals)
from .core import (MAGNITUDE_RANGE, RJB_RANGE_KM, STANDARD_GRAVITY_CMPS2,
                   GroundMotionRecord, NetworkModel, Normalization,
                   Prediction, Target, batch_values, forward, log_sigmoid,
                   out_of_domain_reasons, published_model,
                   published_normalization, validate_record)
from .dataio import (MODEL_FORMAT_VERSION, REQUIRED_COLUMNS, CatalogReport,
                     read_catalog, read_model, write_model, write_table)
from .errors import (AnalysisError, CatalogError, GmpeAnnError,
                     InputDomainError, ModelFormatError, TrainingError)
from .trainer import (SplitSpec, SweepEntry, SweepResult, TrainConfig,
                      TrainingReport, correlation, fit_normalization,
                      jacobian, split_catalog, sweep_hidden_sizes, train)

__version__ = "0.1.0"

__all__ = [
    "AnalysisError",
    "AttenuationCurve",
    "BinnedResiduals",
    "CatalogError",
    "CatalogReport",
    "DEFAULT_RJB_EDGES_KM",
    "DEFAULT_VS30_EDGES_MPS",
    "GmpeAnnError",
    "GroundMotionRecord",
    "ImportanceVector",
    "InputDomainError",
    "MAGNITUDE_RANGE",
    "MODEL_FORMAT_VERSION",
    "ModelFormatError",
    "NetworkModel",
    "Normalization",
    "Prediction",
    "REQUIRED_COLUMNS",
    "RJB_RANGE_KM",
    "ResidualBin",
    "ResidualTable",
    "STANDARD_GRAVITY_CMPS2",
    "SplitSpec",
    "SweepEntry",
    "SweepResult",
    "Target",
    "TrainConfig",
    "TrainingError",
    "TrainingReport",
    "attenuation_curve",
    "batch_values",
    "bin_residuals",
    "correlation",
    "fit_normalization",
    "forward",
    "garson_importance",
    "jacobian",
    "log_sigmoid",
    "out_of_domain_reasons",
    "published_model",
    "published_normalization",
    "read_catalog",
    "read_model",
    "residuals",
    "split_catalog",
    "sweep_hidden_sizes",
    "train",
    "validate_record",
    "write_model",
    "write_table",
]
