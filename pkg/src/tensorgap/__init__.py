"""Symmetric tensor spectral-norm certificates, plug-in cumulant tensors and
Monte Carlo checks of the detection/estimation reduction for norm approximation."""

__version__ = "0.1.0"

from .symtensor import (  # noqa: E402
    SymmetricTensor,
    axpy,
    eval_form,
    frobenius,
    grad_slice,
    make_rank_one,
    read_symtensor,
    unfold,
    write_symtensor,
)
from .specnorm import (  # noqa: E402
    Certificate,
    PowerIterConfig,
    distortion_probe,
    lower_cert_power,
    oracle_net,
    upper_cert_unfold,
)
from .cumulant import SampleSet, khat, population_planted_cumulant, sample_moments, whitening_matrix  # noqa: E402
from .planted import (  # noqa: E402
    H0,
    H1,
    PlantedConfig,
    TwoPointDist,
    regime_params,
    sample_dataset,
    twopoint_cumulant,
    twopoint_from_bernoulli,
)
from .harness import (  # noqa: E402
    detection_experiment,
    estimate_error_distribution,
    framework_bound,
    lowdeg_bound_sum,
    scaling_sweep,
    separation_window,
)
