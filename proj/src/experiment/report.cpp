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

#include "rankcollapse/experiment/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace rankcollapse::experiment {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<const TraceFile*> select(const std::vector<TraceFile>& traces, const std::string& experiment,
                                     const std::string& arm = "") {
  std::vector<const TraceFile*> out;
  for (const auto& t : traces)
    if (t.experiment == experiment && (arm.empty() || t.arm == arm) && !t.rows.empty()) out.push_back(&t);
  return out;
}

// First experiment in `experiments` with traces for the arm.
std::vector<const TraceFile*> select_arm(const std::vector<TraceFile>& traces,
                                         std::initializer_list<const char*> experiments, const std::string& arm) {
  for (const char* e : experiments) {
    auto found = select(traces, e, arm);
    if (!found.empty()) return found;
  }
  return {};
}

std::map<std::uint64_t, const TraceFile*> by_seed(const std::vector<const TraceFile*>& traces) {
  std::map<std::uint64_t, const TraceFile*> out;
  for (const auto* t : traces) out[t->seed] = t;
  return out;
}

std::vector<double> finals(const std::vector<const TraceFile*>& traces, const std::string& column) {
  std::vector<double> out;
  for (const auto* t : traces) out.push_back(t->last(column));
  return out;
}

// final srank over peak srank, per trace.
std::vector<double> final_over_peak(const std::vector<const TraceFile*>& traces) {
  std::vector<double> out;
  for (const auto* t : traces) {
    const auto s = t->values("srank");
    const double peak = *std::max_element(s.begin(), s.end());
    out.push_back(peak > 0.0 ? s.back() / peak : 0.0);
  }
  return out;
}

std::size_t diverged_count(const std::vector<const TraceFile*>& traces) {
  return static_cast<std::size_t>(std::count_if(traces.begin(), traces.end(), [](const TraceFile* t) { return t->diverged; }));
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CriterionResult not_run(int id, std::string title, std::string why) {
  CriterionResult r;
  r.id = id;
  r.title = std::move(title);
  r.verdict = Verdict::not_run;
  r.detail = std::move(why);
  r.margin = kNaN;
  return r;
}

CriterionResult finish(CriterionResult r, bool ok) {
  r.verdict = ok ? Verdict::pass : Verdict::fail;
  return r;
}

CriterionResult psd_srank(const std::vector<TraceFile>& traces) {
  const std::string title = "kernel PSD srank non-increasing";
  const auto runs = select(traces, "kernel-psd");
  if (runs.empty()) return not_run(2, title, "no kernel-psd traces");
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (const auto* t : runs) {
    const double delta = t->config.get_double("kernel.delta");
    const auto srank = t->values("srank");
    const auto energy = t->values("energy_at_prev_srank");
    for (std::size_t i = 1; i < srank.size(); ++i, ++checked)
      if (srank[i] > srank[i - 1] && energy[i] < 1.0 - delta - kSrankSlack) ++violations;
  }
  CriterionResult r{2, title, Verdict::pass, "", {}, kNaN};
  r.measured = {{"instances", static_cast<double>(runs.size())},
                {"steps_checked", static_cast<double>(checked)},
                {"violations", static_cast<double>(violations)}};
  r.detail = std::to_string(violations) + " violations over " + std::to_string(checked) + " steps in " +
             std::to_string(runs.size()) + " instances";
  return finish(std::move(r), violations == 0);
}

CriterionResult psd_ratio(const std::vector<TraceFile>& traces) {
  const std::string title = "kernel PSD ratio decay and bound";
  const auto runs = select(traces, "kernel-psd");
  if (runs.empty()) return not_run(3, title, "no kernel-psd traces");
  double increases = 0.0;
  double ties = 0.0;
  double missed = 0.0;
  double excess = -std::numeric_limits<double>::infinity();
  for (const auto* t : runs) {
    for (double v : t->values("ratio_increases")) increases += v;
    for (double v : t->values("ratio_ties")) ties += v;
    for (double v : t->values("ratio_missed_decreases")) missed += v;
    for (double v : t->values("max_bound_excess")) excess = std::max(excess, v);
  }
  CriterionResult r{3, title, Verdict::pass, "", {}, kRatioBoundSlack - excess};
  r.measured = {{"increases", increases}, {"ties", ties}, {"missed_decreases", missed}, {"max_bound_excess", excess}};
  r.detail = fmt(increases) + " increases, " + fmt(missed) + " missed decreases (" + fmt(ties) +
             " sub-resolution ties), worst bound excess " + fmt(excess) +
             " (closed-form diagonal case is checked by the acceptance suite)";
  return finish(std::move(r), increases == 0.0 && missed == 0.0 && excess <= kRatioBoundSlack);
}

CriterionResult normal_subsequence(const std::vector<TraceFile>& traces) {
  const std::string title = "normal-matrix PSD subsequence";
  const auto runs = select(traces, "kernel-normal");
  if (runs.empty()) return not_run(4, title, "no kernel-normal traces");
  double not_psd = 0.0;
  double increases = 0.0;
  double ties = 0.0;
  double missed = 0.0;
  double excess = -std::numeric_limits<double>::infinity();
  for (const auto* t : runs) {
    for (double v : t->values("psd")) not_psd += v == 1.0 ? 0.0 : 1.0;
    for (double v : t->values("ratio_increases")) increases += v;
    for (double v : t->values("ratio_ties")) ties += v;
    for (double v : t->values("ratio_missed_decreases")) missed += v;
    excess = std::max(excess, t->last("f_worst_excess"));
  }
  CriterionResult r{4, title, Verdict::pass, "", {}, kRatioBoundSlack - excess};
  r.measured = {{"instances", static_cast<double>(runs.size())},
                {"non_psd_powers", not_psd},
                {"increases", increases},
                {"ties", ties},
                {"missed_decreases", missed},
                {"f_worst_excess", excess}};
  r.detail = fmt(not_psd) + " non-PSD powers, " + fmt(increases) + " increases, " + fmt(missed) +
             " missed decreases (" + fmt(ties) + " sub-resolution ties), worst f excess " + fmt(excess);
  return finish(std::move(r), not_psd == 0.0 && increases == 0.0 && missed == 0.0 && excess <= kRatioBoundSlack);
}

CriterionResult balancedness(const std::vector<TraceFile>& traces) {
  const std::string title = "balancedness drift first order in step size";
  const auto runs = select(traces, "linear-flow");
  if (runs.empty()) return not_run(5, title, "no linear-flow traces");
  std::vector<double> ratios;
  double worst_c = 0.0;
  bool ok = true;
  for (const auto* t : runs) {
    const double eta = t->config.get_double("flow.step");
    const double c = t->config.get_double("flow.drift_constant");
    const auto coarse = t->values("balancedness_eta");
    const auto fine = t->values("balancedness_half_eta");
    const double d1 = *std::max_element(coarse.begin(), coarse.end());
    const double d2 = *std::max_element(fine.begin(), fine.end());
    const double ratio = d2 > 0.0 ? d1 / d2 : kNaN;
    ratios.push_back(ratio);
    worst_c = std::max(worst_c, d1 / eta);
    ok = ok && !t->diverged && d1 <= c * eta && d2 <= c * eta / 2.0 && ratio >= 1.0 && ratio <= 4.0;
  }
  const double lo = *std::min_element(ratios.begin(), ratios.end());
  const double hi = *std::max_element(ratios.begin(), ratios.end());
  CriterionResult r{5, title, Verdict::pass, "", {}, std::min(lo - 1.0, 4.0 - hi)};
  r.measured = {{"configs", static_cast<double>(runs.size())},
                {"median_drift_ratio", median(ratios)},
                {"min_drift_ratio", lo},
                {"max_drift_ratio", hi},
                {"max_drift_over_eta", worst_c}};
  r.detail = "drift(η)/drift(η/2) in [" + fmt(lo) + ", " + fmt(hi) + "], expected 2 within factor 2; max drift/η " +
             fmt(worst_c);
  return finish(std::move(r), ok);
}

CriterionResult ode_check(const std::vector<TraceFile>& traces) {
  const std::string title = "singular-value ODE matches finite differences";
  const auto runs = select(traces, "linear-flow");
  if (runs.empty()) return not_run(6, title, "no linear-flow traces");
  double worst = 0.0;
  for (const auto* t : runs) worst = std::max(worst, t->last("ode_max_rel_err"));
  CriterionResult r{6, title, Verdict::pass, "", {}, kOdeTolerance - worst};
  r.measured = {{"configs", static_cast<double>(runs.size())}, {"max_rel_err", worst}};
  r.detail = "max relative error " + fmt(worst) + " (limit " + fmt(kOdeTolerance) + ")";
  return finish(std::move(r), worst <= kOdeTolerance);
}

CriterionResult margin_check(int id, const std::string& title, const std::vector<const TraceFile*>& high,
                             const std::vector<const TraceFile*>& low, const std::string& high_name,
                             const std::string& low_name, double required) {
  if (high.empty() || low.empty())
    return not_run(id, title, "needs " + high_name + " and " + low_name + " traces");
  const double mh = median(finals(high, "srank"));
  const double ml = median(finals(low, "srank"));
  CriterionResult r{id, title, Verdict::pass, "", {}, mh - ml - required};
  r.measured = {{"median_final_srank_" + high_name, mh},
                {"median_final_srank_" + low_name, ml},
                {"seeds_" + high_name, static_cast<double>(high.size())},
                {"seeds_" + low_name, static_cast<double>(low.size())},
                {"diverged", static_cast<double>(diverged_count(high) + diverged_count(low))}};
  r.detail = "median final srank " + high_name + " " + fmt(mh) + " vs " + low_name + " " + fmt(ml) +
             ", required margin " + fmt(required);
  return finish(std::move(r), mh - ml >= required && mh > ml);
}

CriterionResult bootstrapping(const std::vector<TraceFile>& traces) {
  const std::string title = "rank collapse needs bootstrapping";
  const auto mc = select(traces, "grid-ablations", "mc");
  const auto fqe = select(traces, "grid-ablations", "fqe");
  const auto reinit = select(traces, "grid-ablations", "reinit");
  if (mc.empty() || fqe.empty() || reinit.empty()) return not_run(12, title, "needs mc, fqe and reinit traces");
  const double m_mc = median(final_over_peak(mc));
  const double m_fqe = median(final_over_peak(fqe));
  const double m_reinit = median(final_over_peak(reinit));
  const double margin =
      std::min({m_mc - kMonteCarloKeep, kCollapseFraction - m_fqe, kCollapseFraction - m_reinit});
  CriterionResult r{12, title, Verdict::pass, "", {}, margin};
  r.measured = {{"mc_final_over_peak", m_mc}, {"fqe_final_over_peak", m_fqe}, {"reinit_final_over_peak", m_reinit}};
  r.detail = "median final/peak srank: mc " + fmt(m_mc) + " (need >= " + fmt(kMonteCarloKeep) + "), fqe " +
             fmt(m_fqe) + " and reinit " + fmt(m_reinit) + " (need <= " + fmt(kCollapseFraction) + ")";
  return finish(std::move(r), margin >= 0.0);
}

CriterionResult penalty(const std::vector<TraceFile>& traces) {
  const std::string title = "L_p penalty mitigates collapse";
  const auto lp = select(traces, "grid-penalty", "lp");
  const auto base = select_arm(traces, {"grid-penalty", "grid-offline"}, "t200");
  if (lp.empty() || base.empty()) return not_run(13, title, "needs lp and t200 traces");
  const double s_lp = median(finals(lp, "srank"));
  const double s_base = median(finals(base, "srank"));
  const double g_lp = median(finals(lp, "greedy_return"));
  const double g_base = median(finals(base, "greedy_return"));
  CriterionResult r{13, title, Verdict::pass, "", {}, std::min(s_lp - s_base - kPenaltyMargin, g_lp - g_base)};
  r.measured = {{"median_final_srank_lp", s_lp},
                {"median_final_srank_t200", s_base},
                {"median_final_return_lp", g_lp},
                {"median_final_return_t200", g_base}};
  r.detail = "median final srank lp " + fmt(s_lp) + " vs t200 " + fmt(s_base) + " (margin " +
             fmt(kPenaltyMargin) + "); median greedy return lp " + fmt(g_lp) + " vs t200 " + fmt(g_base);
  return finish(std::move(r), s_lp > s_base && s_lp - s_base >= kPenaltyMargin && g_lp >= g_base);
}

// Paired per seed: the T=200 run's final TD error exceeds the T=10 median
// while its final srank is below the same seed's T=10 run. Passes when a
// strict majority of paired seeds agree.
CriterionResult td_tradeoff(const std::vector<TraceFile>& traces) {
  const std::string title = "more steps per iteration: higher TD error, lower srank";
  const auto short_runs = select(traces, "grid-offline", "t10");
  const auto long_runs = select(traces, "grid-offline", "t200");
  if (short_runs.empty() || long_runs.empty()) return not_run(14, title, "needs t10 and t200 traces");
  const double td_short = median(finals(short_runs, "td_error"));
  const auto shorts = by_seed(short_runs);
  std::size_t paired = 0;
  std::size_t agree = 0;
  for (const auto& [seed, t] : by_seed(long_runs)) {
    const auto it = shorts.find(seed);
    if (it == shorts.end()) continue;
    ++paired;
    if (t->last("td_error") > td_short && t->last("srank") < it->second->last("srank")) ++agree;
  }
  CriterionResult r{14, title, Verdict::pass, "", {}, kNaN};
  r.measured = {{"median_final_td_t10", td_short},
                {"median_final_td_t200", median(finals(long_runs, "td_error"))},
                {"paired_seeds", static_cast<double>(paired)},
                {"agreeing_seeds", static_cast<double>(agree)}};
  r.detail = std::to_string(agree) + " of " + std::to_string(paired) +
             " paired seeds have T=200 TD error above the T=10 median (" + fmt(td_short) + ") with lower srank";
  return finish(std::move(r), paired > 0 && 2 * agree > paired);
}

}  // namespace

std::string to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::pass:
      return "PASS";
    case Verdict::fail:
      return "FAIL";
    case Verdict::not_run:
      return "NOT RUN";
  }
  return "?";
}

double median(std::vector<double> values) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

bool Report::any_failed() const {
  return std::any_of(criteria.begin(), criteria.end(), [](const auto& c) { return c.verdict == Verdict::fail; });
}

Report evaluate_report(const std::vector<TraceFile>& traces) {
  const std::string unit_only = "unit-oracle criterion; evaluated by the acceptance suite, not from traces";
  Report report;
  report.criteria.push_back(not_run(1, "srank correctness", unit_only));
  report.criteria.push_back(psd_srank(traces));
  report.criteria.push_back(psd_ratio(traces));
  report.criteria.push_back(normal_subsequence(traces));
  report.criteria.push_back(balancedness(traces));
  report.criteria.push_back(ode_check(traces));
  report.criteria.push_back(not_run(7, "epsilon-zero bound and zeta perturbation", unit_only));
  report.criteria.push_back(not_run(8, "gridworld oracles", unit_only));
  report.criteria.push_back(not_run(9, "gradient exactness", unit_only));
  report.criteria.push_back(margin_check(10, "rank collapse worse with T=200 than T=10",
                                         select(traces, "grid-offline", "t10"),
                                         select(traces, "grid-offline", "t200"), "t10", "t200", kRankCollapseMargin));
  report.criteria.push_back(margin_check(11, "supervised Q* regression keeps higher srank",
                                         select(traces, "grid-offline", "qstar"),
                                         select_arm(traces, {"grid-offline", "grid-penalty"}, "t200"), "qstar",
                                         "t200", kSupervisedMargin));
  report.criteria.push_back(bootstrapping(traces));
  report.criteria.push_back(penalty(traces));
  report.criteria.push_back(td_tradeoff(traces));
  return report;
}

std::string format_report_text(const Report& report) {
  std::ostringstream os;
  for (const auto& c : report.criteria) {
    os << "[" << to_string(c.verdict) << "] " << c.id << ". " << c.title << ": " << c.detail;
    if (!std::isnan(c.margin)) os << " (margin " << fmt(c.margin) << ")";
    os << "\n";
  }
  return os.str();
}

std::string format_report_json(const Report& report) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : report.criteria) {
    nlohmann::json item;
    item["id"] = c.id;
    item["title"] = c.title;
    item["verdict"] = c.verdict == Verdict::pass ? "pass" : c.verdict == Verdict::fail ? "fail" : "not_run";
    item["detail"] = c.detail;
    item["margin"] = std::isnan(c.margin) ? nlohmann::json(nullptr) : nlohmann::json(c.margin);
    nlohmann::json measured = nlohmann::json::object();
    for (const auto& [k, v] : c.measured) measured[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
    item["measured"] = measured;
    out.push_back(item);
  }
  return nlohmann::json{{"criteria", out}, {"failed", report.any_failed()}}.dump(2) + "\n";
}

}  // namespace rankcollapse::experiment
