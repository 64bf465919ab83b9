// core/gradcheck.cc

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

#include "core/gradcheck.h"

#include <cmath>

namespace svbn {

GradCheckReport CheckGradients(const std::vector<ParamRef>& params,
                               const std::vector<ParamRef>& analytic,
                               const std::function<double()>& loss, double epsilon,
                               Eigen::Index max_params) {
  if (params.size() != analytic.size())
    Throw(Status::kArg, "grad_check: block count mismatch");
  Eigen::Index total = 0;
  for (const auto& p : params) total += p.size;
  if (total > max_params)
    Throw(Status::kArg, "grad_check: model too large (" + std::to_string(total) +
                            " parameters, limit " + std::to_string(max_params) + ")");

  GradCheckReport report;
  report.params_checked = total;
  for (size_t b = 0; b < params.size(); ++b) {
    if (params[b].size != analytic[b].size)
      Throw(Status::kArg, "grad_check: size mismatch in block " + params[b].name);
    for (Eigen::Index i = 0; i < params[b].size; ++i) {
      double* p = params[b].data + i;
      const double saved = *p;
      *p = saved + epsilon;
      const double up = loss();
      *p = saved - epsilon;
      const double down = loss();
      *p = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double a = analytic[b].data[i];
      // A direction where both sides are numerically zero (e.g. an exact
      // invariance of the loss) carries only central-difference rounding
      // noise; the ratio would compare noise against the 1e-12 regularizer.
      // Agreement there is judged absolutely instead.
      const double kZeroFloor = 1e-8;
      const double rel = (std::abs(a) < kZeroFloor && std::abs(numeric) < kZeroFloor)
                             ? std::abs(a - numeric)
                             : std::abs(a - numeric) /
                                   (std::abs(a) + std::abs(numeric) + 1e-12);
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_block = params[b].name;
        report.worst_index = i;
      }
    }
  }
  return report;
}

}  // namespace svbn
