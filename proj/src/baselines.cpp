#include "descfm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace descfm {

// ---------------------------------------------------------------------------
// Jacobi eigensolver

SymmetricEigen jacobi_eigen(const Tensor& symmetric, double tol, std::size_t max_sweeps) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw ShapeError("jacobi_eigen: matrix is " + symmetric.shape_string());
  Tensor a = symmetric;
  Tensor v(n, n);
  for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  double full = 0.0;
  for (double x : a.values()) full += x * x;
  full = std::sqrt(full);

  SymmetricEigen out;
  while (out.sweeps < max_sweeps && off_norm() > tol * std::max(full, 1e-300)) {
    ++out.sweeps;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // symmetric Schur 2x2
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  out.values.resize(n);
  out.vectors = Tensor(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]);
    // sign convention: largest-magnitude entry positive
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i)
      if (std::abs(v(i, order[j])) > std::abs(v(arg, order[j]))) arg = i;
    const double sign = v(arg, order[j]) < 0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = sign * v(i, order[j]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PCA

double PcaModel::total_variance() const {
  double s = 0.0;
  for (double e : eigenvalues) s += std::max(e, 0.0);
  return s;
}

double PcaModel::captured_ratio() const {
  double s = 0.0;
  for (std::size_t j = 0; j < k(); ++j) s += ratios[j];
  return s;
}

Tensor PcaModel::project(const Tensor& x) const {
  if (x.cols() != input_dim()) throw ShapeError("PCA project: input has " + std::to_string(x.cols()) + " columns, expected " +
                                                std::to_string(input_dim()));
  Tensor z(x.rows(), k());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t j = 0; j < k(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < input_dim(); ++c) s += (x(r, c) - mean[c]) * components(c, j);
      z(r, j) = s;
    }
  return z;
}

Tensor PcaModel::reconstruct(const Tensor& z) const {
  if (z.cols() != k()) throw ShapeError("PCA reconstruct: input has " + std::to_string(z.cols()) + " columns");
  Tensor x(z.rows(), input_dim());
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < input_dim(); ++c) {
      double s = mean[c];
      for (std::size_t j = 0; j < k(); ++j) s += z(r, j) * components(c, j);
      x(r, c) = s;
    }
  return x;
}

PcaModel fit_pca(const Tensor& x, double variance_threshold, std::vector<std::string> names) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) throw std::invalid_argument("variance threshold must lie in (0, 1]");
  const std::size_t n = x.rows(), d = x.cols();
  if (n < 2) throw InputError("PCA needs at least two rows");
  if (d == 0) throw InputError("PCA needs at least one column");
  if (!x.all_finite()) throw InputError("PCA input contains non-finite values");
  if (names.empty())
    for (std::size_t c = 0; c < d; ++c) names.push_back("x" + std::to_string(c));
  if (names.size() != d) throw ShapeError("PCA: name count does not match column count");

  PcaModel m;
  m.names = std::move(names);
  m.threshold = variance_threshold;
  m.mean.assign(d, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < d; ++c) m.mean[c] += x(r, c);
  for (double& v : m.mean) v /= static_cast<double>(n);
  Tensor cov(d, d);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x(r, i) - m.mean[i];
      for (std::size_t j = i; j < d; ++j) cov(i, j) += xi * (x(r, j) - m.mean[j]);
    }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) cov(j, i) = cov(i, j) /= static_cast<double>(n);

  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += cov(i, i);
  if (!(trace > 0.0)) throw InputError("PCA input has zero total variance (all columns constant)");

  const SymmetricEigen eig = jacobi_eigen(cov);
  m.eigenvalues = eig.values;
  double total = 0.0;
  for (double e : eig.values) total += std::max(e, 0.0);
  std::size_t k = 0;
  double cum = 0.0;
  for (double e : eig.values) {
    const double r = std::max(e, 0.0) / total;
    m.ratios.push_back(r);
    if (cum < variance_threshold - 1e-12) {
      cum += r;
      ++k;
    }
  }
  // float32 so a saved model reproduces in-memory projections exactly
  m.components = Tensor(d, k);
  for (std::size_t c = 0; c < d; ++c)
    for (std::size_t j = 0; j < k; ++j) m.components(c, j) = eig.vectors(c, j);
  round_to_float32(m.components);
  return m;
}

Tensor impute_zero(const DescriptorMatrix& d) {
  Tensor t(d.rows, d.cols());
  for (std::size_t r = 0; r < d.rows; ++r)
    for (std::size_t c = 0; c < d.cols(); ++c) t(r, c) = d.valid(r, c) ? d.at(r, c) : 0.0;
  return t;
}

Tensor PcaProjector::transform(const DescriptorMatrix& raw) const {
  return pca.project(impute_zero(apply_scaler(raw, scaler)));
}

PcaProjector fit_projector(const DescriptorMatrix& raw, double variance_threshold) {
  PcaProjector p;
  p.scaler = fit_scaler(raw);
  p.pca = fit_pca(impute_zero(apply_scaler(raw, p.scaler)), variance_threshold, raw.names);
  return p;
}

namespace {

nlohmann::json pca_header(const PcaModel& m) {
  return {{"names", m.names}, {"mean", m.mean}, {"eigenvalues", m.eigenvalues}, {"ratios", m.ratios},
          {"threshold", m.threshold}, {"k", m.k()}};
}

PcaModel pca_from(const nlohmann::json& h, const Tensor& components) {
  PcaModel m;
  m.names = h.at("names").get<std::vector<std::string>>();
  m.mean = h.at("mean").get<std::vector<double>>();
  m.eigenvalues = h.at("eigenvalues").get<std::vector<double>>();
  m.ratios = h.at("ratios").get<std::vector<double>>();
  m.threshold = h.at("threshold").get<double>();
  m.components = components;
  if (components.rows() != m.mean.size() || components.cols() != h.at("k").get<std::size_t>())
    throw InputError("PCA component tensor has shape " + components.shape_string());
  return m;
}

template <typename Fn>
auto json_guard(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed " + what + " header: " + e.what());
  }
}

}  // namespace

ChmcFile projector_to_chmc(const PcaProjector& p) {
  ChmcFile f;
  f.header["kind"] = "pca";
  f.header["descriptor_set_version"] = kDescriptorSetVersion;
  f.header["scaler"] = scaler_to_json(p.scaler);
  f.header["pca"] = pca_header(p.pca);
  f.tensors.emplace_back("pca.components", p.pca.components);
  return f;
}

PcaProjector projector_from_chmc(const ChmcFile& f) {
  if (f.header.value("kind", "") != "pca") throw InputError("checkpoint kind is '" + f.header.value("kind", "") + "', expected 'pca'");
  return json_guard("pca", [&] {
    PcaProjector p;
    p.scaler = scaler_from_json(f.header.at("scaler"));
    p.pca = pca_from(f.header.at("pca"), f.tensor("pca.components"));
    return p;
  });
}

// ---------------------------------------------------------------------------
// Feature MLPs

void BaselineConfig::validate() const {
  if (hidden == 0) throw std::invalid_argument("hidden width must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (patience == 0) throw std::invalid_argument("patience must be at least 1");
  if (!(val_fraction > 0.0 && val_fraction < 0.5)) throw std::invalid_argument("val_fraction must lie in (0, 0.5)");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
}

Tensor FeatureModel::features(const DescriptorMatrix& raw) const {
  const Tensor z = impute_zero(apply_scaler(raw, scaler));
  return pca ? pca->project(z) : z;
}

namespace {

BaselineResult fit_features(FeatureModel model, const DescriptorMatrix& raw, std::span<const double> labels,
                            const BaselineConfig& cfg, const LogFn& log) {
  const Tensor x = model.features(raw);
  std::mt19937_64 rng(cfg.seed);
  const SplitIndices split = split_train_val(labels, cfg.task, cfg.val_fraction, rng);
  model.head = fit_task_head(labels, cfg.task, split.train);
  std::vector<double> targets(labels.begin(), labels.end());
  for (double& y : targets) y = (y - model.head.label_mean) / model.head.label_std;

  std::mt19937_64 init_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  model.net = FeedForward::init(x.cols(), cfg.hidden, cfg.hidden_layers, 1, init_rng, "mlp");
  const BatchForward fwd = [&](Tape& tape, std::span<const std::size_t> rows) {
    Tensor xb(rows.size(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
      std::copy_n(x.data() + rows[i] * x.cols(), x.cols(), xb.data() + i * x.cols());
    return model.net.forward(tape, tape.constant(std::move(xb)));
  };
  const std::vector<ParamGroup> groups{{model.net.params(), cfg.lr}};
  FitOptions opt;
  opt.task = cfg.task;
  opt.epochs = cfg.epochs;
  opt.batch_size = cfg.batch_size;
  opt.patience = cfg.patience;
  opt.seed = cfg.seed;
  BaselineResult r;
  r.history = fit_supervised(fwd, targets, split, groups, opt, log);
  for (Parameter* p : model.net.params()) p->zero_grad();
  model.metadata = {{"seed", cfg.seed},
                    {"task", to_string(cfg.task)},
                    {"hidden", cfg.hidden},
                    {"hidden_layers", cfg.hidden_layers},
                    {"best_epoch", r.history.best_epoch},
                    {"epochs_run", r.history.val_loss.size()}};
  r.model = std::move(model);
  return r;
}

void check_rows(const DescriptorMatrix& raw, std::span<const double> labels, const BaselineConfig& cfg, const std::string& who) {
  cfg.validate();
  if (raw.rows != labels.size()) throw InputError(who + ": descriptor rows and label count differ");
  check_labels(labels, cfg.task, cfg.allow_small, who);
}

}  // namespace

BaselineResult fit_descriptor_fnn(const DescriptorMatrix& raw, std::span<const double> labels, const BaselineConfig& cfg,
                                  const LogFn& log) {
  check_rows(raw, labels, cfg, "descriptor_fnn");
  FeatureModel m;
  m.kind = "descriptor_fnn";
  m.scaler = fit_scaler(raw);
  return fit_features(std::move(m), raw, labels, cfg, log);
}

BaselineResult fit_pcamlp(const DescriptorMatrix& raw, std::span<const double> labels, PcaMode mode,
                          const PcaProjector* prefit, const BaselineConfig& cfg, const LogFn& log) {
  check_rows(raw, labels, cfg, "pcamlp");
  FeatureModel m;
  m.kind = "pcamlp";
  if (mode == PcaMode::Prefitted) {
    if (!prefit) throw std::invalid_argument("pcamlp: prefitted mode needs a projector");
    m.scaler = prefit->scaler;
    m.pca = prefit->pca;
  } else {
    PcaProjector local = fit_projector(raw);
    m.scaler = std::move(local.scaler);
    m.pca = std::move(local.pca);
  }
  BaselineResult r = fit_features(std::move(m), raw, labels, cfg, log);
  r.model.metadata["pca_mode"] = mode == PcaMode::Prefitted ? "prefitted" : "local";
  return r;
}

std::vector<double> predict(const FeatureModel& model, const DescriptorMatrix& raw) {
  const Tensor x = model.features(raw);
  if (x.rows() == 0) return {};
  Tape tape;
  const Tensor& y = model.net.forward_const(tape, tape.borrow(x)).value();
  std::vector<double> out;
  out.reserve(y.rows());
  for (std::size_t i = 0; i < y.rows(); ++i) out.push_back(apply_task_head(model.head, y[i]));
  return out;
}

ChmcFile feature_model_to_chmc(const FeatureModel& m) {
  ChmcFile f;
  f.header["kind"] = m.kind;
  f.header["descriptor_set_version"] = kDescriptorSetVersion;
  f.header["scaler"] = scaler_to_json(m.scaler);
  f.header["pca"] = m.pca ? pca_header(*m.pca) : nlohmann::json(nullptr);
  f.header["net"] = {{"input", m.net.input_dim()},
                     {"hidden", m.net.weights.size() > 1 ? m.net.weights.front().value.cols() : 0},
                     {"hidden_layers", m.net.weights.size() - 1}};
  f.header["task"] = {{"task", to_string(m.head.task)}, {"label_mean", m.head.label_mean}, {"label_std", m.head.label_std}};
  f.header["metadata"] = m.metadata;
  if (m.pca) f.tensors.emplace_back("pca.components", m.pca->components);
  for (const Parameter* p : const_cast<FeedForward&>(m.net).params()) f.tensors.emplace_back(p->name, p->value);
  return f;
}

FeatureModel feature_model_from_chmc(const ChmcFile& f) {
  const std::string kind = f.header.value("kind", "");
  if (kind != "descriptor_fnn" && kind != "pcamlp")
    throw InputError("checkpoint kind is '" + kind + "', expected 'descriptor_fnn' or 'pcamlp'");
  return json_guard(kind, [&] {
    FeatureModel m;
    m.kind = kind;
    m.scaler = scaler_from_json(f.header.at("scaler"));
    if (!f.header.at("pca").is_null()) m.pca = pca_from(f.header.at("pca"), f.tensor("pca.components"));
    const auto& net = f.header.at("net");
    std::mt19937_64 rng(0);
    m.net = FeedForward::init(net.at("input").get<std::size_t>(), std::max<std::size_t>(net.at("hidden").get<std::size_t>(), 1),
                              net.at("hidden_layers").get<std::size_t>(), 1, rng, "mlp");
    for (Parameter* p : m.net.params()) {
      const Tensor& t = f.tensor(p->name);
      if (!t.same_shape(p->value)) throw InputError("tensor '" + p->name + "' has shape " + t.shape_string());
      p->value = t;
      p->zero_grad();
    }
    const auto& t = f.header.at("task");
    m.head = TaskHead{task_from_string(t.at("task").get<std::string>()), t.at("label_mean").get<double>(),
                      t.at("label_std").get<double>()};
    m.metadata = f.header.value("metadata", nlohmann::json::object());
    return m;
  });
}

}  // namespace descfm
