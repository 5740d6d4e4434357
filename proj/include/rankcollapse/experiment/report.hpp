// Copyright 2026 The rankcollapse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "rankcollapse/experiment/trace_file.hpp"

namespace rankcollapse::experiment {

enum class Verdict { pass, fail, not_run };

std::string to_string(Verdict verdict);

struct CriterionResult {
  int id = 0;
  std::string title;
  Verdict verdict = Verdict::not_run;
  std::string detail;
  std::map<std::string, double> measured;
  // Signed distance to the threshold, positive when passing; NaN for
  // criteria that are pure counts or were not run.
  double margin = 0.0;
};

struct Report {
  std::vector<CriterionResult> criteria;  // ids 1..14 in order

  bool any_failed() const;
};

// Pure function of the traces. Criteria without the traces they need, and
// the unit-oracle criteria 1, 7, 8 and 9, are reported as not run.
Report evaluate_report(const std::vector<TraceFile>& traces);

std::string format_report_text(const Report& report);
std::string format_report_json(const Report& report);

// Thresholds shared with the acceptance suite.
inline constexpr double kSrankSlack = 1e-10;
inline constexpr double kRatioBoundSlack = 1e-10;
inline constexpr double kPsdTolerance = 1e-9;
inline constexpr double kOdeTolerance = 1e-3;
inline constexpr double kRankCollapseMargin = 3.0;
inline constexpr double kSupervisedMargin = 5.0;
inline constexpr double kPenaltyMargin = 3.0;
inline constexpr double kMonteCarloKeep = 0.8;
inline constexpr double kCollapseFraction = 0.5;

double median(std::vector<double> values);

}  // namespace rankcollapse::experiment
