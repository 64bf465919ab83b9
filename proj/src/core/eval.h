// core/eval.h

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

#ifndef SVBN_CORE_EVAL_H_
#define SVBN_CORE_EVAL_H_

#include <map>
#include <string>
#include <vector>

#include "core/common.h"

namespace svbn {

enum class TrialLabel : uint8_t {
  kGenuine = 0,
  kTargetWrong = 1,
  kImposterCorrect = 2,
  kImposterWrong = 3,
};

TrialLabel ParseTrialLabel(const std::string& name);
std::string TrialLabelName(TrialLabel label);

struct Trial {
  std::string enroll_id;
  std::string test_id;
  TrialLabel label;
};

struct TrialSet {
  std::vector<Trial> trials;
};

// Tab-separated: enroll_id, test_id, label name.
TrialSet LoadTrials(const std::string& path);
void SaveTrials(const std::string& path, const TrialSet& trials);

// Score files: enroll_id, test_id, score per line (tab-separated; scores
// printed with enough digits to round-trip a 64-bit real).
using ScoreTable = std::map<std::pair<std::string, std::string>, double>;
ScoreTable LoadScores(const std::string& path);
void SaveScores(const std::string& path, const ScoreTable& scores);

struct EerResult {
  double eer = 0.0;  // fraction in [0, 1]
  double threshold = 0.0;
};

// Threshold sweep over all distinct scores; accept iff score >= t.
// FRR = fraction of genuine < t, FAR = fraction of impostors >= t.
// EER = (FAR+FRR)/2 at the threshold minimizing |FAR-FRR|; ties take the
// lower threshold.
EerResult ComputeEer(const std::vector<double>& genuine, const std::vector<double>& impostor);

struct MinDcfResult {
  double min_dcf = 0.0;  // normalized to [0, 1]
  double threshold = 0.0;
};

// Minimum over the same sweep (plus the reject-all threshold) of
// (c_miss P_miss p_t + c_fa P_fa (1-p_t)) / min(c_miss p_t, c_fa (1-p_t)).
MinDcfResult ComputeMinDcf(const std::vector<double>& genuine,
                           const std::vector<double>& impostor, double c_miss, double c_fa,
                           double p_target);

struct DetPoint {
  double threshold;
  double far;
  double frr;
};

struct DetExport {
  std::vector<DetPoint> points;        // one per distinct threshold, ascending
  std::vector<double> genuine_hist;    // 50 bins over the joint score range
  std::vector<double> impostor_hist;
  double hist_lo = 0.0, hist_hi = 0.0;
};

DetExport ComputeDetExport(const std::vector<double>& genuine,
                           const std::vector<double>& impostor);

// Per-trial weighted mean across systems; every input must cover exactly the
// same trial keys. Default weights are equal.
ScoreTable FuseScores(const std::vector<ScoreTable>& systems,
                      const std::vector<double>& weights = {});

struct TypeMetrics {
  double eer_percent = 0.0;
  double min_dcf = 0.0;
  double threshold = 0.0;
  size_t impostor_trials = 0;
};

struct MetricReport {
  std::map<TrialLabel, TypeMetrics> per_type;  // the three non-target types
  double average_eer_percent = 0.0;            // arithmetic mean over types
  double average_min_dcf = 0.0;
  size_t genuine_trials = 0;
};

struct DcfParams {
  double c_miss = 10.0;
  double c_fa = 1.0;
  double p_target = 0.01;
};

// Joins trials with scores (missing keys are an error) and computes EER and
// minDCF per non-target type against the shared genuine scores.
MetricReport Evaluate(const TrialSet& trials, const ScoreTable& scores,
                      const DcfParams& dcf);

// Key-value lines followed by an aligned human-readable table.
std::string FormatReport(const MetricReport& report);

}  // namespace svbn

#endif  // SVBN_CORE_EVAL_H_
