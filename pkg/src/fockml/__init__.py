"""fockml: exact linear-optics simulation and the classifiers built on it.

Layers, bottom up:

* :mod:`fockml.fock` — Fock bases, permanents, lifted unitaries.
* :mod:`fockml.circuit` — Reck-style meshes and data-encoding layouts.
* :mod:`fockml.model` — observables, model evaluation, Fourier spectra,
  degree-of-freedom counts, shot sampling.
* :mod:`fockml.variational` — derivative-free training of angles + weights.
* :mod:`fockml.kernel` — two-mode Gaussian-kernel sampler and kernel ridge.
* :mod:`fockml.rks` — random kitchen sinks with circuit-sampled cosines.
* :mod:`fockml.datasets` — toy data generators and seeded splits.
* :mod:`fockml.experiments` — end-to-end runs producing reports.
* :mod:`fockml.service` / :mod:`fockml.cli` — HTTP service and its CLI client.
"""

from .exceptions import NumericalError
from .fock import (
    FockBasis,
    enumerate_fock_basis,
    lift_unitary,
    permanent,
    transition_amplitude,
)
from .circuit import CircuitSpec, EncodingLayout, mode_unitary, reck_unitary
from .model import (
    Observable,
    batch_evaluate,
    dof_pnr,
    dof_threshold,
    evaluate_model,
    extract_fourier_coefficients,
    m_min,
    sample_counts,
)
from .variational import TrainConfig, TrainedModel, accuracy, classify, cost, train
from .kernel import (
    KernelModel,
    KernelObservable,
    fit_kernel_classifier,
    fit_kernel_observable,
    kernel_circuit_response,
    kernel_predict,
    ridge_solve,
)
from .rks import (
    RandomFeatureSet,
    RksModel,
    feature_matrix,
    isolated_cosine,
    rks_predict,
    rks_train,
    sample_feature_set,
)
from .datasets import LabeledDataset, make_circles, make_linear, make_moons, split

__version__ = "0.1.0"

__all__ = [
    "NumericalError",
    "FockBasis",
    "enumerate_fock_basis",
    "permanent",
    "transition_amplitude",
    "lift_unitary",
    "CircuitSpec",
    "EncodingLayout",
    "reck_unitary",
    "mode_unitary",
    "Observable",
    "evaluate_model",
    "batch_evaluate",
    "extract_fourier_coefficients",
    "dof_pnr",
    "dof_threshold",
    "m_min",
    "sample_counts",
    "TrainConfig",
    "TrainedModel",
    "cost",
    "train",
    "classify",
    "accuracy",
    "KernelObservable",
    "KernelModel",
    "kernel_circuit_response",
    "fit_kernel_observable",
    "ridge_solve",
    "fit_kernel_classifier",
    "kernel_predict",
    "RandomFeatureSet",
    "RksModel",
    "sample_feature_set",
    "isolated_cosine",
    "feature_matrix",
    "rks_train",
    "rks_predict",
    "LabeledDataset",
    "make_linear",
    "make_circles",
    "make_moons",
    "split",
]
