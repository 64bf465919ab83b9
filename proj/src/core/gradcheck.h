// core/gradcheck.h

// Copyright 2026  The svbn Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SVBN_CORE_GRADCHECK_H_
#define SVBN_CORE_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "core/common.h"
#include "core/dense_net.h"

namespace svbn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_block;
  Eigen::Index worst_index = -1;
  Eigen::Index params_checked = 0;
};

// Central differences (f(p+eps) - f(p-eps)) / (2 eps) against the analytic
// gradient; per-parameter relative error |a - n| / (|a| + |n| + 1e-12).
// `analytic` must hold the gradient at the unperturbed point. The loss
// closure is re-evaluated with each parameter perturbed in place. Refuses
// models above max_params (exhaustive perturbation only makes sense small).
GradCheckReport CheckGradients(const std::vector<ParamRef>& params,
                               const std::vector<ParamRef>& analytic,
                               const std::function<double()>& loss, double epsilon,
                               Eigen::Index max_params = 10000);

}  // namespace svbn

#endif  // SVBN_CORE_GRADCHECK_H_
