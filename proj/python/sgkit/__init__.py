# Copyright 2026 The sgkit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Non-ideal Stern-Gerlach filter model: simulation and parameter recovery."""

from ._sgkit import (
    Instrument,
    KrausOperator,
    SgkitError,
    affine_coefficients,
    compare_with_paper,
    cyclic_kraus,
    design_matrix,
    effect,
    exact_normalize,
    fit,
    ideal_instrument,
    nonselective_post_state,
    normalization_residual,
    observable_labels,
    parameter_names,
    probability,
    project_to_normalized,
    rotate_kraus,
    roundtrip,
    selective_post_state,
    simulate,
    verify,
)

__version__ = "0.1.0"

__all__ = [
    "Instrument",
    "KrausOperator",
    "SgkitError",
    "affine_coefficients",
    "compare_with_paper",
    "cyclic_kraus",
    "design_matrix",
    "effect",
    "exact_normalize",
    "fit",
    "ideal_instrument",
    "nonselective_post_state",
    "normalization_residual",
    "observable_labels",
    "parameter_names",
    "probability",
    "project_to_normalized",
    "rotate_kraus",
    "roundtrip",
    "selective_post_state",
    "simulate",
    "verify",
]
