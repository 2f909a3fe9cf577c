"""Information-content transformation and evaluation toolkit for 1D spectra.

Train a channel-wise statistical model from a labeled spectrum library,
convert raw spectra into information spectra, and quantify how much the
transform improves class separability via correlation-matrix distances,
histogram Bayes error, and a from-scratch backprop MLP. A deterministic
carbohydrate-like spectrum generator makes the whole pipeline testable
end to end.
"""

from .errors import SpecinfoError
from .metrics import (
    BayesReport,
    ClassMultiplicities,
    CorrelationMatrix,
    DistanceReport,
    IndexPartition,
    bayes_error,
    correlation_matrix,
    distances,
    evaluate_transform,
    ideal_matrix,
    multiplicities_from_library,
    partition_indices,
    pearson,
)
from .mlp import (
    LearningCurve,
    MlpNetwork,
    MlpTopology,
    TrainConfig,
    classify,
    forward,
    init_network,
    train,
    train_repeated,
)
from .spectra import (
    PpmGrid,
    Spectrum,
    SpectrumLibrary,
    load_library,
    resample,
    resample_library,
    save_library,
    validate_library,
    vector_normalize,
)
from .synth import (
    ClassSpec,
    PeakSpec,
    VariationConfig,
    bernstein_baseline,
    default_grid,
    default_multiplicities,
    gen_class_specs,
    gen_library,
    gen_spectrum,
)
from .transform import (
    ChannelEnvelope,
    ChannelHistogram,
    InformationModel,
    InformationSpectrum,
    bin_index,
    clip_threshold,
    compute_envelope,
    hot_regions,
    information_content,
    suggest_threshold,
    to_information,
    train_model,
)

__version__ = "0.1.0"
