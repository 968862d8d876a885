#include "descfm/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include "descfm/errors.hpp"

namespace descfm {

std::string to_string(Orientation o) { return o == Orientation::HigherBetter ? "higher_better" : "lower_better"; }

Orientation orientation_from_string(const std::string& s) {
  if (s == "higher_better") return Orientation::HigherBetter;
  if (s == "lower_better") return Orientation::LowerBetter;
  throw InputError("unknown orientation '" + s + "' (expected higher_better or lower_better)");
}

namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size())
    throw InputError(std::string(what) + ": " + std::to_string(a.size()) + " predictions vs " + std::to_string(b.size()) +
                     " labels");
  if (a.empty()) throw InputError(std::string(what) + ": empty input");
}

std::vector<std::size_t> positives_negatives(std::span<const double> label, std::size_t& pos) {
  std::vector<std::size_t> idx(label.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  pos = 0;
  for (double y : label) {
    if (y != 0.0 && y != 1.0) throw InputError("binary metric: label " + std::to_string(y) + " is not 0 or 1");
    pos += y == 1.0;
  }
  return idx;
}

std::string fmt(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

double rmse(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label, "rmse");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - label[i]) * (pred[i] - label[i]);
  return std::sqrt(s / static_cast<double>(pred.size()));
}

double mae(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label, "mae");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - label[i]);
  return s / static_cast<double>(pred.size());
}

std::optional<double> r2(std::span<const double> pred, std::span<const double> label) {
  check_pair(pred, label, "r2");
  const double mean = std::accumulate(label.begin(), label.end(), 0.0) / static_cast<double>(label.size());
  double res = 0.0, tot = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    res += (pred[i] - label[i]) * (pred[i] - label[i]);
    tot += (label[i] - mean) * (label[i] - mean);
  }
  if (tot == 0.0) return std::nullopt;
  return 1.0 - res / tot;
}

std::optional<double> roc_auc(std::span<const double> score, std::span<const double> label) {
  check_pair(score, label, "roc_auc");
  std::size_t pos = 0;
  std::vector<std::size_t> idx = positives_negatives(label, pos);
  const std::size_t neg = label.size() - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && score[idx[j]] == score[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t)
      if (label[idx[t]] == 1.0) rank_sum += avg_rank;
    i = j;
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

std::optional<double> average_precision(std::span<const double> score, std::span<const double> label) {
  check_pair(score, label, "average_precision");
  std::size_t pos = 0;
  std::vector<std::size_t> idx = positives_negatives(label, pos);
  if (pos == 0) return std::nullopt;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && score[idx[j]] == score[idx[i]]) {
      tp += label[idx[j]] == 1.0;
      ++j;
    }
    seen = j;
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

std::optional<double> compute_metric(const std::string& name, std::span<const double> pred, std::span<const double> label) {
  if (name == "rmse") return rmse(pred, label);
  if (name == "mae") return mae(pred, label);
  if (name == "r2") return r2(pred, label);
  if (name == "roc_auc") return roc_auc(pred, label);
  if (name == "average_precision") return average_precision(pred, label);
  throw InputError("unknown metric '" + name + "'");
}

Orientation default_orientation(const std::string& metric) {
  if (metric == "rmse" || metric == "mae") return Orientation::LowerBetter;
  if (metric == "r2" || metric == "roc_auc" || metric == "average_precision") return Orientation::HigherBetter;
  throw InputError("unknown metric '" + metric + "'");
}

bool is_classification_metric(const std::string& metric) { return metric == "roc_auc" || metric == "average_precision"; }

// ---------------------------------------------------------------------------
// Distributions

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double student_t_cdf(double t, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("student_t_cdf: degrees of freedom must be positive");
  if (std::isnan(t)) return t;
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  if (t == 0.0) return 0.5;
  const double tail = 0.5 * boost::math::ibeta(nu / 2.0, 0.5, nu / (nu + t * t));
  return t > 0 ? 1.0 - tail : tail;
}

const GaussLegendre& gauss_legendre(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, GaussLegendre> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n == 0) throw std::invalid_argument("gauss_legendre: n must be positive");
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // three-term recurrence for P_n and its derivative
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 - (static_cast<double>(k) - 1.0) * p0) /
                          static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1, pn1 = n == 1 ? 1.0 : p0;
      dp = static_cast<double>(n) * (x * pn - pn1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    g.weights[i] = g.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) g.nodes[n / 2] = 0.0;
  return cache.emplace(n, std::move(g)).first->second;
}

namespace {

constexpr std::size_t kNodes = 64;
constexpr int kInnerPanels = 4;
constexpr int kOuterPanels = 4;

template <typename F>
double integrate(double a, double b, int panels, F&& f) {
  const GaussLegendre& g = gauss_legendre(kNodes);
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + h * p, mid = lo + h / 2.0;
    double s = 0.0;
    for (std::size_t i = 0; i < kNodes; ++i) s += g.weights[i] * f(mid + h / 2.0 * g.nodes[i]);
    total += s * h / 2.0;
  }
  return total;
}

// Inner-integral nodes never move, so phi(z) * weight and Phi(z) are cached.
struct InnerGrid {
  std::vector<double> z, weighted_pdf, cdf;
};

const InnerGrid& inner_grid() {
  static const InnerGrid grid = [] {
    InnerGrid g;
    const GaussLegendre& gl = gauss_legendre(kNodes);
    const double a = -8.5, b = 8.5, h = (b - a) / kInnerPanels;
    const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    for (int p = 0; p < kInnerPanels; ++p) {
      const double mid = a + h * p + h / 2.0;
      for (std::size_t i = 0; i < kNodes; ++i) {
        const double z = mid + h / 2.0 * gl.nodes[i];
        g.z.push_back(z);
        g.weighted_pdf.push_back(gl.weights[i] * h / 2.0 * c * std::exp(-z * z / 2.0));
        g.cdf.push_back(normal_cdf(z));
      }
    }
    return g;
  }();
  return grid;
}

// P(range of k standard normals <= w)
double range_cdf(double w, int k) {
  if (w <= 0.0) return 0.0;
  const InnerGrid& g = inner_grid();
  double v = 0.0;
  for (std::size_t i = 0; i < g.z.size(); ++i) {
    const double d = std::max(g.cdf[i] - normal_cdf(g.z[i] - w), 0.0);
    double term = 1.0;
    for (int e = 1; e < k; ++e) term *= d;
    v += g.weighted_pdf[i] * term;
  }
  return std::clamp(k * v, 0.0, 1.0);
}

}  // namespace

double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw std::invalid_argument("studentized range needs k >= 2");
  if (df < 0.0) throw std::invalid_argument("studentized range needs df >= 1 (or 0 for infinity)");
  if (q <= 0.0) return 0.0;
  if (df == 0.0) return range_cdf(q, k);
  // s = sqrt(chi2_df / df); log density up to the normaliser below
  const double nu = df;
  const double log_norm = (nu / 2.0) * std::log(nu) - std::lgamma(nu / 2.0) - (nu / 2.0 - 1.0) * std::log(2.0);
  auto log_f = [&](double s) { return log_norm + (nu - 1.0) * std::log(s) - nu * s * s / 2.0; };
  const double mode = nu > 1.0 ? std::sqrt((nu - 1.0) / nu) : 0.0;
  const double peak = mode > 0.0 ? log_f(mode) : (nu == 1.0 ? log_norm : 0.0);
  const double step = 0.25 / std::sqrt(nu);
  double lo = mode, hi = mode;
  while (lo > 0.0 && log_f(std::max(lo, 1e-300)) > peak - 60.0) lo = std::max(0.0, lo - step);
  while (log_f(hi + 1e-300) > peak - 60.0 || hi <= mode) hi += step;
  const double v = integrate(lo, hi, kOuterPanels, [&](double s) { return s <= 0.0 ? 0.0 : std::exp(log_f(s)) * range_cdf(q * s, k); });
  return std::clamp(v, 0.0, 1.0);
}

namespace {

double quantile_uncached(double alpha, int k, double df) {
  const double target = 1.0 - alpha;
  double lo = 0.0, hi = 100.0;
  if (studentized_range_cdf(hi, k, df) < target)
    throw NumericError("studentized range quantile not bracketed by [0, 100] for k=" + std::to_string(k) +
                       ", df=" + fmt(df, 6));
  double mid = 0.0, f = 0.0;
  for (int iter = 0; iter < 100; ++iter) {
    mid = 0.5 * (lo + hi);
    f = studentized_range_cdf(mid, k, df);
    if (f < target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-10) break;
  }
  if (std::abs(f - target) >= 1e-6) throw NumericError("studentized range bisection did not converge");
  return mid;
}

}  // namespace

// Reports recompute the same few critical values many times.
double studentized_range_quantile(double alpha, int k, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  static std::mutex mu;
  static std::map<std::tuple<double, int, double>, double> cache;
  const auto key = std::make_tuple(alpha, k, df);
  {
    std::lock_guard lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double q = quantile_uncached(alpha, k, df);
  std::lock_guard lock(mu);
  cache.emplace(key, q);
  return q;
}

// ---------------------------------------------------------------------------
// Tukey HSD

HsdResult tukey_hsd(const std::vector<std::vector<double>>& values, Orientation orientation, double alpha) {
  const std::size_t k = values.size();
  if (k < 2) throw InputError("Tukey HSD needs at least two models");
  const std::size_t n = values[0].size();
  for (const auto& v : values) {
    if (v.size() != n) throw InputError("Tukey HSD needs equal replicate counts per model");
    for (double x : v)
      if (!std::isfinite(x)) throw InputError("Tukey HSD: non-finite metric value");
  }
  if (n < 2) throw InputError("Tukey HSD needs at least two replicates per model");

  HsdResult r;
  r.replicates = n;
  double ss = 0.0;
  for (const auto& v : values) {
    const double m = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    r.means.push_back(m);
    for (double x : v) ss += (x - m) * (x - m);
  }
  r.df = static_cast<double>(k * (n - 1));
  r.ms_within = ss / r.df;
  r.q_crit = studentized_range_quantile(alpha, static_cast<int>(k), r.df);
  const double se = std::sqrt(r.ms_within / static_cast<double>(n));
  r.different.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double gap = std::abs(r.means[i] - r.means[j]);
      // zero pooled variance: any gap is an exact separation
      r.different[i][j] = se == 0.0 ? gap > 0.0 : gap / se > r.q_crit;
    }
  for (std::size_t i = 1; i < k; ++i) {
    const bool better = orientation == Orientation::HigherBetter ? r.means[i] > r.means[r.best] : r.means[i] < r.means[r.best];
    if (better) r.best = i;
  }
  r.winners.assign(k, false);
  for (std::size_t i = 0; i < k; ++i) r.winners[i] = i == r.best || !r.different[r.best][i];
  return r;
}

// ---------------------------------------------------------------------------
// Wins

int win_rate_percent(std::size_t wins, std::size_t total) {
  if (total == 0) return 0;
  return static_cast<int>(std::lround(100.0 * static_cast<double>(wins) / static_cast<double>(total)));
}

std::vector<WinSummary> aggregate_wins(const std::vector<std::string>& models, const std::vector<std::vector<bool>>& winners) {
  std::vector<WinSummary> out;
  for (std::size_t m = 0; m < models.size(); ++m) {
    WinSummary w;
    w.model = models[m];
    for (const auto& b : winners) {
      if (b.size() != models.size()) throw InputError("winner set width does not match the model list");
      ++w.total;
      w.wins += b[m] ? 1 : 0;
    }
    w.rate = win_rate_percent(w.wins, w.total);
    out.push_back(w);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cliff consistency

CliffTest cliff_consistency(std::span<const double> diffs, double alpha) {
  if (diffs.size() < 2) throw InputError("cliff consistency test needs at least two differences");
  for (double d : diffs)
    if (!std::isfinite(d)) throw InputError("cliff consistency: non-finite difference");
  CliffTest c;
  c.n = diffs.size();
  const double n = static_cast<double>(c.n);
  c.mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / n;
  double ss = 0.0;
  for (double d : diffs) ss += (d - c.mean) * (d - c.mean);
  c.sd = std::sqrt(ss / (n - 1.0));
  if (c.sd == 0.0) {
    if (c.mean > 0.0) {
      c.t = std::numeric_limits<double>::infinity();
      c.p = 0.0;
    } else {
      c.t = c.mean == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
      c.p = c.mean == 0.0 ? 0.5 : 1.0;
    }
    c.consistent = c.mean <= 0.0;
    return c;
  }
  c.t = c.mean / (c.sd / std::sqrt(n));
  c.p = 1.0 - student_t_cdf(c.t, n - 1.0);
  c.consistent = c.p >= alpha;
  return c;
}

// ---------------------------------------------------------------------------
// Replicates and results files

ReplicateResult run_replicate_seed(const std::string& benchmark, const std::string& model, const std::string& metric,
                                   Orientation orientation, std::uint64_t seed,
                                   const std::function<ReplicateOutcome(std::uint64_t)>& run) {
  const std::string where = benchmark + "/" + model + " seed " + std::to_string(seed) + ": ";
  ReplicateOutcome o;
  try {
    o = run(seed);
  } catch (const InputError& e) {
    throw InputError(where + e.what());
  } catch (const NumericError& e) {
    throw NumericError(where + e.what());
  }
  if (!std::isfinite(o.value)) throw NumericError(where + "metric " + metric + " is not finite");
  if (o.rmse_cliff.has_value() != o.rmse_noncliff.has_value())
    throw InputError(where + "cliff and noncliff RMSE must be reported together");
  return {benchmark, model, seed, metric, o.value, orientation, o.rmse_cliff, o.rmse_noncliff};
}

std::vector<ReplicateResult> run_replicates(const std::string& benchmark, const std::string& model,
                                            const std::string& metric, Orientation orientation, std::size_t n_reps,
                                            const std::function<ReplicateOutcome(std::uint64_t)>& run) {
  std::vector<ReplicateResult> out;
  for (std::uint64_t seed = 1; seed <= n_reps; ++seed)
    out.push_back(run_replicate_seed(benchmark, model, metric, orientation, seed, run));
  return out;
}

namespace {

constexpr const char* kResultsHeader = "benchmark,model,seed,metric,value,orientation,rmse_cliff,rmse_noncliff";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void check_field(const std::string& s, const char* what) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw InputError(std::string(what) + " '" + s + "' contains a character not allowed in results CSV");
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw InputError(where + ": '" + s + "' is not a number");
}

}  // namespace

void write_results_csv(std::ostream& out, std::span<const ReplicateResult> rows) {
  out << kResultsHeader << '\n';
  for (const auto& r : rows) {
    check_field(r.benchmark, "benchmark id");
    check_field(r.model, "model id");
    check_field(r.metric, "metric");
    out << r.benchmark << ',' << r.model << ',' << r.seed << ',' << r.metric << ',' << fmt(r.value) << ','
        << to_string(r.orientation) << ',' << (r.rmse_cliff ? fmt(*r.rmse_cliff) : "") << ','
        << (r.rmse_noncliff ? fmt(*r.rmse_noncliff) : "") << '\n';
  }
}

std::vector<ReplicateResult> read_results_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw InputError(source + ": empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw InputError(source + ":1: unexpected header '" + line + "'");
  std::vector<ReplicateResult> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto cells = split_line(line);
    if (cells.size() != 8) throw InputError(where + ": expected 8 fields, found " + std::to_string(cells.size()));
    ReplicateResult r;
    r.benchmark = cells[0];
    r.model = cells[1];
    const double seed = parse_number(cells[2], where);
    if (seed < 0 || seed != std::floor(seed)) throw InputError(where + ": seed must be a non-negative integer");
    r.seed = static_cast<std::uint64_t>(seed);
    r.metric = cells[3];
    r.value = parse_number(cells[4], where);
    try {
      r.orientation = orientation_from_string(cells[5]);
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
    if (!cells[6].empty()) r.rmse_cliff = parse_number(cells[6], where);
    if (!cells[7].empty()) r.rmse_noncliff = parse_number(cells[7], where);
    if (r.rmse_cliff.has_value() != r.rmse_noncliff.has_value())
      throw InputError(where + ": rmse_cliff and rmse_noncliff must both be present or both empty");
    if (!std::isfinite(r.value)) throw InputError(where + ": metric value is not finite");
    rows.push_back(std::move(r));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Report

Report build_report(std::span<const ReplicateResult> rows, double alpha) {
  Report report;
  std::vector<std::string> bench_order, model_order;
  std::map<std::string, std::vector<const ReplicateResult*>> by_bench;
  for (const auto& r : rows) {
    if (!by_bench.count(r.benchmark)) bench_order.push_back(r.benchmark);
    by_bench[r.benchmark].push_back(&r);
    if (std::find(model_order.begin(), model_order.end(), r.model) == model_order.end()) model_order.push_back(r.model);
  }
  std::vector<std::vector<bool>> winners;
  for (const auto& b : bench_order) {
    const auto& items = by_bench[b];
    BenchmarkReport br;
    br.benchmark = b;
    br.metric = items.front()->metric;
    br.orientation = items.front()->orientation;
    std::map<std::string, std::vector<const ReplicateResult*>> by_model;
    const bool cliff_bench = items.front()->rmse_cliff.has_value();
    for (const auto* r : items) {
      if (r->metric != br.metric || r->orientation != br.orientation)
        throw InputError("benchmark '" + b + "' mixes metrics or orientations");
      if (r->rmse_cliff.has_value() != cliff_bench)
        throw InputError("benchmark '" + b + "' has cliff RMSEs on some rows only");
      if (!by_model.count(r->model)) br.models.push_back(r->model);
      by_model[r->model].push_back(r);
    }
    std::vector<std::vector<double>> values;
    for (const auto& m : br.models) {
      auto reps = by_model[m];
      std::sort(reps.begin(), reps.end(), [](const auto* a, const auto* c) { return a->seed < c->seed; });
      for (std::size_t i = 1; i < reps.size(); ++i)
        if (reps[i]->seed == reps[i - 1]->seed)
          throw InputError("benchmark '" + b + "', model '" + m + "': duplicate seed " + std::to_string(reps[i]->seed));
      std::vector<double> v;
      std::vector<double> diffs;
      for (const auto* r : reps) {
        v.push_back(r->value);
        if (cliff_bench) diffs.push_back(*r->rmse_cliff - *r->rmse_noncliff);
      }
      values.push_back(std::move(v));
      br.cliff.push_back(cliff_bench ? std::optional<CliffTest>(cliff_consistency(diffs, alpha)) : std::nullopt);
    }
    try {
      br.hsd = tukey_hsd(values, br.orientation, alpha);
    } catch (const InputError& e) {
      throw InputError("benchmark '" + b + "': " + e.what());
    }
    std::vector<bool> row(model_order.size(), false);
    for (std::size_t i = 0; i < br.models.size(); ++i) {
      const auto pos = static_cast<std::size_t>(std::find(model_order.begin(), model_order.end(), br.models[i]) - model_order.begin());
      row[pos] = br.hsd.winners[i];
    }
    winners.push_back(std::move(row));
    report.benchmarks.push_back(std::move(br));
  }
  // a model is scored only on the benchmarks it took part in
  for (std::size_t m = 0; m < model_order.size(); ++m) {
    WinSummary w;
    w.model = model_order[m];
    for (std::size_t b = 0; b < report.benchmarks.size(); ++b) {
      const auto& models = report.benchmarks[b].models;
      if (std::find(models.begin(), models.end(), w.model) == models.end()) continue;
      ++w.total;
      w.wins += winners[b][m] ? 1 : 0;
    }
    w.rate = win_rate_percent(w.wins, w.total);
    report.wins.push_back(w);
  }
  return report;
}

void write_winners_csv(std::ostream& out, const Report& r) {
  out << "benchmark,model,mean,winner,best,q_crit,ms_within,df\n";
  for (const auto& b : r.benchmarks)
    for (std::size_t i = 0; i < b.models.size(); ++i)
      out << b.benchmark << ',' << b.models[i] << ',' << fmt(b.hsd.means[i], 10) << ',' << (b.hsd.winners[i] ? 1 : 0) << ','
          << (i == b.hsd.best ? 1 : 0) << ',' << fmt(b.hsd.q_crit, 10) << ',' << fmt(b.hsd.ms_within, 10) << ','
          << fmt(b.hsd.df, 10) << '\n';
}

void write_wins_csv(std::ostream& out, const Report& r) {
  out << "model,wins,benchmarks,win_rate_percent\n";
  for (const auto& w : r.wins) out << w.model << ',' << w.wins << ',' << w.total << ',' << w.rate << '\n';
}

void write_cliff_csv(std::ostream& out, const Report& r) {
  out << "benchmark,model,n,mean_diff,sd_diff,t,p,consistent\n";
  for (const auto& b : r.benchmarks)
    for (std::size_t i = 0; i < b.models.size(); ++i) {
      if (!b.cliff[i]) continue;
      const CliffTest& c = *b.cliff[i];
      out << b.benchmark << ',' << b.models[i] << ',' << c.n << ',' << fmt(c.mean, 10) << ',' << fmt(c.sd, 10) << ','
          << fmt(c.t, 10) << ',' << fmt(c.p, 10) << ',' << (c.consistent ? "consistent" : "inconsistent") << '\n';
    }
}

void write_report_text(std::ostream& out, const Report& r) {
  std::size_t width = 5;
  for (const auto& w : r.wins) width = std::max(width, w.model.size());
  out << "Win summary (" << r.benchmarks.size() << " benchmarks)\n";
  char buf[256];
  std::snprintf(buf, sizeof buf, "  %-*s  %5s  %10s  %6s\n", static_cast<int>(width), "model", "wins", "benchmarks", "rate");
  out << buf;
  for (const auto& w : r.wins) {
    std::snprintf(buf, sizeof buf, "  %-*s  %5zu  %10zu  %5d%%\n", static_cast<int>(width), w.model.c_str(), w.wins, w.total,
                  w.rate);
    out << buf;
  }
  out << "\nPer-benchmark winners\n";
  for (const auto& b : r.benchmarks) {
    out << "  " << b.benchmark << " (" << b.metric << ", " << to_string(b.orientation) << "): ";
    bool first = true;
    for (std::size_t i = 0; i < b.models.size(); ++i) {
      if (!b.hsd.winners[i]) continue;
      out << (first ? "" : ", ") << b.models[i] << (i == b.hsd.best ? "*" : "");
      first = false;
    }
    out << '\n';
  }
  bool any_cliff = false;
  for (const auto& b : r.benchmarks)
    for (const auto& c : b.cliff) any_cliff |= c.has_value();
  if (!any_cliff) return;
  out << "\nCliff consistency (one-sided t-test, H1: cliff RMSE > noncliff RMSE)\n";
  for (const auto& b : r.benchmarks)
    for (std::size_t i = 0; i < b.models.size(); ++i) {
      if (!b.cliff[i]) continue;
      std::snprintf(buf, sizeof buf, "  %s / %s: t=%.4g p=%.4g %s\n", b.benchmark.c_str(), b.models[i].c_str(), b.cliff[i]->t,
                    b.cliff[i]->p, b.cliff[i]->consistent ? "consistent" : "inconsistent");
      out << buf;
    }
}

}  // namespace descfm
