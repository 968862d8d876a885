#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace descfm {

enum class Orientation { HigherBetter, LowerBetter };
std::string to_string(Orientation o);
Orientation orientation_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Metrics. All throw InputError on length mismatch or empty input.

double rmse(std::span<const double> pred, std::span<const double> label);
double mae(std::span<const double> pred, std::span<const double> label);
// 1 - SS_res / SS_tot; nullopt when the labels are constant.
std::optional<double> r2(std::span<const double> pred, std::span<const double> label);
// Mann-Whitney statistic with average ranks for ties; nullopt with one class.
std::optional<double> roc_auc(std::span<const double> score, std::span<const double> label);
// Step-wise precision-recall integral, tied scores grouped; nullopt without positives.
std::optional<double> average_precision(std::span<const double> score, std::span<const double> label);

// Dispatch by name: rmse, mae, r2, roc_auc, average_precision.
std::optional<double> compute_metric(const std::string& name, std::span<const double> pred, std::span<const double> label);
Orientation default_orientation(const std::string& metric);
bool is_classification_metric(const std::string& metric);

// ---------------------------------------------------------------------------
// Distributions

double normal_cdf(double x);
// Student t CDF via the regularized incomplete beta function.
double student_t_cdf(double t, double nu);

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(std::size_t n);

// P(Q <= q) for the studentized range of k normal means with df degrees of
// freedom; df = 0 means infinite.
double studentized_range_cdf(double q, int k, double df);
// Critical value with P(Q > q) = alpha. Throws NumericError when the root is
// not bracketed by [0, 100].
double studentized_range_quantile(double alpha, int k, double df);

// ---------------------------------------------------------------------------
// Tukey HSD

struct HsdResult {
  std::vector<double> means;
  double ms_within = 0.0;
  double df = 0.0;
  double q_crit = 0.0;
  std::size_t replicates = 0;
  std::vector<std::vector<bool>> different;  // k x k
  std::size_t best = 0;
  std::vector<bool> winners;
};

// values[m] holds the replicate metric values of model m.
HsdResult tukey_hsd(const std::vector<std::vector<double>>& values, Orientation orientation, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Win aggregation

// round(100 * wins / total) to whole percent, halves away from zero.
int win_rate_percent(std::size_t wins, std::size_t total);

struct WinSummary {
  std::string model;
  std::size_t wins = 0;
  std::size_t total = 0;
  int rate = 0;
};

// winners[b][m]: model m is in benchmark b's winner set.
std::vector<WinSummary> aggregate_wins(const std::vector<std::string>& models, const std::vector<std::vector<bool>>& winners);

// ---------------------------------------------------------------------------
// Cliff consistency: one-sided one-sample t-test of H1 mean(diff) > 0.

struct CliffTest {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;
  double t = 0.0;
  double p = 1.0;
  bool consistent = true;
};

CliffTest cliff_consistency(std::span<const double> diffs, double alpha = 0.05);

// ---------------------------------------------------------------------------
// Replicates

struct ReplicateResult {
  std::string benchmark;
  std::string model;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;
  Orientation orientation = Orientation::LowerBetter;
  std::optional<double> rmse_cliff;
  std::optional<double> rmse_noncliff;
};

struct ReplicateOutcome {
  double value = 0.0;
  std::optional<double> rmse_cliff;
  std::optional<double> rmse_noncliff;
};

// One replicate; failures are rethrown with benchmark, model and seed named.
ReplicateResult run_replicate_seed(const std::string& benchmark, const std::string& model, const std::string& metric,
                                   Orientation orientation, std::uint64_t seed,
                                   const std::function<ReplicateOutcome(std::uint64_t)>& run);

// Calls run(seed) for seed = 1..n. Failures are rethrown with the seed named.
std::vector<ReplicateResult> run_replicates(const std::string& benchmark, const std::string& model,
                                            const std::string& metric, Orientation orientation, std::size_t n_reps,
                                            const std::function<ReplicateOutcome(std::uint64_t)>& run);

// benchmark,model,seed,metric,value,orientation,rmse_cliff,rmse_noncliff
void write_results_csv(std::ostream& out, std::span<const ReplicateResult> rows);
std::vector<ReplicateResult> read_results_csv(std::istream& in, const std::string& source = "results");

// ---------------------------------------------------------------------------
// Report

struct BenchmarkReport {
  std::string benchmark;
  std::string metric;
  Orientation orientation = Orientation::LowerBetter;
  std::vector<std::string> models;
  HsdResult hsd;
  std::vector<std::optional<CliffTest>> cliff;  // per model, cliff benchmarks only
};

struct Report {
  std::vector<BenchmarkReport> benchmarks;
  std::vector<WinSummary> wins;
};

// Groups by benchmark in first-appearance order; models keep first-appearance
// order too. Throws InputError on unequal replicate counts or mixed metrics.
Report build_report(std::span<const ReplicateResult> rows, double alpha = 0.05);

void write_winners_csv(std::ostream& out, const Report& r);
void write_wins_csv(std::ostream& out, const Report& r);
void write_cliff_csv(std::ostream& out, const Report& r);
void write_report_text(std::ostream& out, const Report& r);

}  // namespace descfm
