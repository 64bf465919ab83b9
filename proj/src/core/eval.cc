// core/eval.cc

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

#include "core/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace svbn {

TrialLabel ParseTrialLabel(const std::string& name) {
  if (name == "genuine") return TrialLabel::kGenuine;
  if (name == "target_wrong") return TrialLabel::kTargetWrong;
  if (name == "imposter_correct") return TrialLabel::kImposterCorrect;
  if (name == "imposter_wrong") return TrialLabel::kImposterWrong;
  Throw(Status::kFormat, "unknown trial label: " + name);
}

std::string TrialLabelName(TrialLabel label) {
  switch (label) {
    case TrialLabel::kGenuine: return "genuine";
    case TrialLabel::kTargetWrong: return "target_wrong";
    case TrialLabel::kImposterCorrect: return "imposter_correct";
    case TrialLabel::kImposterWrong: return "imposter_wrong";
  }
  return "unknown";
}

TrialSet LoadTrials(const std::string& path) {
  std::ifstream is(path);
  if (!is) Throw(Status::kIo, "cannot open trials: " + path);
  TrialSet set;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Trial trial;
    std::string label;
    if (!std::getline(fields, trial.enroll_id, '\t') ||
        !std::getline(fields, trial.test_id, '\t') || !std::getline(fields, label, '\t'))
      Throw(Status::kFormat, path + ":" + std::to_string(line_no) + ": expected 3 fields");
    trial.label = ParseTrialLabel(label);
    set.trials.push_back(std::move(trial));
  }
  return set;
}

void SaveTrials(const std::string& path, const TrialSet& trials) {
  std::ofstream os(path);
  if (!os) Throw(Status::kIo, "cannot write trials: " + path);
  for (const auto& t : trials.trials)
    os << t.enroll_id << '\t' << t.test_id << '\t' << TrialLabelName(t.label) << '\n';
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

ScoreTable LoadScores(const std::string& path) {
  std::ifstream is(path);
  if (!is) Throw(Status::kIo, "cannot open scores: " + path);
  ScoreTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string enroll, test, value;
    if (!std::getline(fields, enroll, '\t') || !std::getline(fields, test, '\t') ||
        !std::getline(fields, value, '\t'))
      Throw(Status::kFormat, path + ":" + std::to_string(line_no) + ": expected 3 fields");
    table[{enroll, test}] = std::stod(value);
  }
  return table;
}

void SaveScores(const std::string& path, const ScoreTable& scores) {
  std::ofstream os(path);
  if (!os) Throw(Status::kIo, "cannot write scores: " + path);
  char buffer[64];
  for (const auto& [key, value] : scores) {
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    os << key.first << '\t' << key.second << '\t' << buffer << '\n';
  }
  if (!os) Throw(Status::kIo, "write failed: " + path);
}

namespace {
// FRR and FAR at a given threshold under the accept-iff-score>=t rule.
struct ErrorRates {
  double frr;
  double far;
};

ErrorRates RatesAt(const std::vector<double>& genuine, const std::vector<double>& impostor,
                   double t) {
  size_t miss = 0, fa = 0;
  for (double s : genuine)
    if (s < t) ++miss;
  for (double s : impostor)
    if (s >= t) ++fa;
  return {static_cast<double>(miss) / genuine.size(),
          static_cast<double>(fa) / impostor.size()};
}

std::vector<double> DistinctThresholds(const std::vector<double>& genuine,
                                       const std::vector<double>& impostor) {
  std::set<double> values(genuine.begin(), genuine.end());
  values.insert(impostor.begin(), impostor.end());
  return {values.begin(), values.end()};
}
}  // namespace

EerResult ComputeEer(const std::vector<double>& genuine, const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty())
    Throw(Status::kArg, "compute_eer: need both genuine and impostor scores");
  const std::vector<double> thresholds = DistinctThresholds(genuine, impostor);
  EerResult best;
  double best_gap = std::numeric_limits<double>::infinity();
  for (double t : thresholds) {
    const ErrorRates r = RatesAt(genuine, impostor, t);
    const double gap = std::abs(r.far - r.frr);
    if (gap < best_gap) {  // ties keep the lower threshold
      best_gap = gap;
      best.eer = 0.5 * (r.far + r.frr);
      best.threshold = t;
    }
  }
  return best;
}

MinDcfResult ComputeMinDcf(const std::vector<double>& genuine,
                           const std::vector<double>& impostor, double c_miss, double c_fa,
                           double p_target) {
  if (genuine.empty() || impostor.empty())
    Throw(Status::kArg, "compute_mindcf: need both genuine and impostor scores");
  if (c_miss <= 0.0 || c_fa <= 0.0)
    Throw(Status::kConfig, "compute_mindcf: costs must be positive");
  if (!(p_target > 0.0 && p_target < 1.0))
    Throw(Status::kConfig, "compute_mindcf: p_target must be in (0,1)");

  std::vector<double> thresholds = DistinctThresholds(genuine, impostor);
  // Reject-all operating point: a threshold above every score.
  thresholds.push_back(*std::max_element(thresholds.begin(), thresholds.end()) + 1.0);
  const double denom = std::min(c_miss * p_target, c_fa * (1.0 - p_target));
  MinDcfResult best;
  best.min_dcf = std::numeric_limits<double>::infinity();
  for (double t : thresholds) {
    const ErrorRates r = RatesAt(genuine, impostor, t);
    const double dcf =
        (c_miss * r.frr * p_target + c_fa * r.far * (1.0 - p_target)) / denom;
    if (dcf < best.min_dcf) {
      best.min_dcf = dcf;
      best.threshold = t;
    }
  }
  return best;
}

DetExport ComputeDetExport(const std::vector<double>& genuine,
                           const std::vector<double>& impostor) {
  if (genuine.empty() || impostor.empty())
    Throw(Status::kArg, "det_export: need both genuine and impostor scores");
  DetExport det;
  for (double t : DistinctThresholds(genuine, impostor)) {
    const ErrorRates r = RatesAt(genuine, impostor, t);
    det.points.push_back({t, r.far, r.frr});
  }
  const int kBins = 50;
  det.hist_lo = std::min(*std::min_element(genuine.begin(), genuine.end()),
                         *std::min_element(impostor.begin(), impostor.end()));
  det.hist_hi = std::max(*std::max_element(genuine.begin(), genuine.end()),
                         *std::max_element(impostor.begin(), impostor.end()));
  const double width = det.hist_hi > det.hist_lo ? det.hist_hi - det.hist_lo : 1.0;
  det.genuine_hist.assign(kBins, 0.0);
  det.impostor_hist.assign(kBins, 0.0);
  auto bin_of = [&](double s) {
    int b = static_cast<int>((s - det.hist_lo) / width * kBins);
    return std::clamp(b, 0, kBins - 1);
  };
  for (double s : genuine) det.genuine_hist[bin_of(s)] += 1.0;
  for (double s : impostor) det.impostor_hist[bin_of(s)] += 1.0;
  return det;
}

ScoreTable FuseScores(const std::vector<ScoreTable>& systems,
                      const std::vector<double>& weights) {
  if (systems.empty()) Throw(Status::kArg, "fuse_scores: no systems");
  std::vector<double> w = weights;
  if (w.empty()) w.assign(systems.size(), 1.0);
  if (w.size() != systems.size())
    Throw(Status::kConfig, "fuse_scores: weight count != system count");
  const double w_sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (w_sum == 0.0) Throw(Status::kConfig, "fuse_scores: weights sum to zero");

  const ScoreTable& reference = systems.front();
  for (size_t s = 1; s < systems.size(); ++s) {
    std::string missing;
    int missing_count = 0;
    for (const auto& [key, value] : reference) {
      if (!systems[s].count(key)) {
        if (missing_count < 5) missing += " " + key.first + "/" + key.second;
        ++missing_count;
      }
    }
    for (const auto& [key, value] : systems[s]) {
      if (!reference.count(key)) {
        if (missing_count < 5) missing += " " + key.first + "/" + key.second;
        ++missing_count;
      }
    }
    if (missing_count > 0)
      Throw(Status::kArg, "fuse_scores: system " + std::to_string(s) + " differs on " +
                              std::to_string(missing_count) + " trial keys:" + missing);
  }

  ScoreTable fused;
  for (const auto& [key, value] : reference) {
    double acc = w[0] * value;
    for (size_t s = 1; s < systems.size(); ++s) acc += w[s] * systems[s].at(key);
    fused[key] = acc / w_sum;
  }
  return fused;
}

MetricReport Evaluate(const TrialSet& trials, const ScoreTable& scores,
                      const DcfParams& dcf) {
  std::vector<double> genuine;
  std::map<TrialLabel, std::vector<double>> impostors;
  for (const auto& trial : trials.trials) {
    auto it = scores.find({trial.enroll_id, trial.test_id});
    if (it == scores.end())
      Throw(Status::kDependency,
            "evaluate: missing score for trial " + trial.enroll_id + "/" + trial.test_id);
    if (trial.label == TrialLabel::kGenuine)
      genuine.push_back(it->second);
    else
      impostors[trial.label].push_back(it->second);
  }
  if (genuine.empty()) Throw(Status::kArg, "evaluate: no genuine trials");
  if (impostors.empty()) Throw(Status::kArg, "evaluate: no impostor trials");

  MetricReport report;
  report.genuine_trials = genuine.size();
  for (const auto& [label, scores_of_type] : impostors) {
    TypeMetrics metrics;
    const EerResult eer = ComputeEer(genuine, scores_of_type);
    const MinDcfResult mdcf =
        ComputeMinDcf(genuine, scores_of_type, dcf.c_miss, dcf.c_fa, dcf.p_target);
    metrics.eer_percent = 100.0 * eer.eer;
    metrics.threshold = eer.threshold;
    metrics.min_dcf = mdcf.min_dcf;
    metrics.impostor_trials = scores_of_type.size();
    report.per_type[label] = metrics;
  }
  for (const auto& [label, metrics] : report.per_type) {
    report.average_eer_percent += metrics.eer_percent;
    report.average_min_dcf += metrics.min_dcf;
  }
  report.average_eer_percent /= report.per_type.size();
  report.average_min_dcf /= report.per_type.size();
  return report;
}

std::string FormatReport(const MetricReport& report) {
  std::ostringstream os;
  os << "genuine_trials=" << report.genuine_trials << "\n";
  for (const auto& [label, m] : report.per_type) {
    const std::string name = TrialLabelName(label);
    os << name << ".eer_percent=" << m.eer_percent << "\n";
    os << name << ".min_dcf=" << m.min_dcf << "\n";
    os << name << ".threshold=" << m.threshold << "\n";
    os << name << ".impostor_trials=" << m.impostor_trials << "\n";
  }
  os << "average.eer_percent=" << report.average_eer_percent << "\n";
  os << "average.min_dcf=" << report.average_min_dcf << "\n";
  os << "\n";
  char row[160];
  std::snprintf(row, sizeof(row), "%-18s %12s %10s %12s\n", "non-target type", "EER%",
                "minDCF", "trials");
  os << row;
  for (const auto& [label, m] : report.per_type) {
    std::snprintf(row, sizeof(row), "%-18s %12.4f %10.4f %12zu\n",
                  TrialLabelName(label).c_str(), m.eer_percent, m.min_dcf,
                  m.impostor_trials);
    os << row;
  }
  std::snprintf(row, sizeof(row), "%-18s %12.4f %10.4f\n", "average",
                report.average_eer_percent, report.average_min_dcf);
  os << row;
  return os.str();
}

}  // namespace svbn
