#include "descfm/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace descfm {

namespace {

constexpr const char* kMpnnKind = "mpnn";

void log_line(const LogFn& log, const std::string& s) {
  if (log) log(s);
}

std::vector<std::size_t> iota_vec(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

BatchGraph batch_of(std::span<const MolFeatures> mols, std::span<const std::size_t> rows) {
  std::vector<const MolFeatures*> ptrs;
  ptrs.reserve(rows.size());
  for (std::size_t r : rows) ptrs.push_back(&mols[r]);
  return make_batch(std::span<const MolFeatures* const>(ptrs));
}

void zero_grads(std::span<const ParamGroup> groups) {
  for (const auto& g : groups)
    for (Parameter* p : g.params) {
      if (p->grad.same_shape(p->value))
        p->grad.fill(0.0);
      else
        p->zero_grad();
    }
}

std::vector<Tensor> snapshot(std::span<const ParamGroup> groups) {
  std::vector<Tensor> out;
  for (const auto& g : groups)
    for (const Parameter* p : g.params) out.push_back(p->value);
  return out;
}

void restore(std::span<const ParamGroup> groups, const std::vector<Tensor>& values) {
  std::size_t k = 0;
  for (const auto& g : groups)
    for (Parameter* p : g.params) p->value = values[k++];
}

Var task_loss(Task task, Var pred, const Tensor& target) {
  const Tensor all(target.rows(), target.cols(), 1.0);
  return task == Task::Regression ? mse_masked(pred, target, all) : bce_with_logits(pred, target);
}

Tensor column(std::span<const double> values, std::span<const std::size_t> rows) {
  Tensor t(rows.size(), 1);
  for (std::size_t i = 0; i < rows.size(); ++i) t[i] = values[rows[i]];
  return t;
}

}  // namespace

std::string to_string(Task t) { return t == Task::Regression ? "regression" : "binary_classification"; }

Task task_from_string(const std::string& s) {
  if (s == "regression") return Task::Regression;
  if (s == "binary_classification" || s == "classification") return Task::BinaryClassification;
  throw InputError("unknown task '" + s + "' (expected regression or binary_classification)");
}

// ---------------------------------------------------------------------------
// Checkpoints

nlohmann::json to_json(const MpnnConfig& c) {
  return {{"hidden_size", c.hidden_size}, {"depth", c.depth},           {"ffn_layers", c.ffn_layers},
          {"ffn_hidden", c.ffn_hidden},   {"output_dim", c.output_dim}, {"activation", "relu"}};
}

MpnnConfig mpnn_config_from_json(const nlohmann::json& j) {
  MpnnConfig c;
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.depth = j.at("depth").get<std::size_t>();
  c.ffn_layers = j.at("ffn_layers").get<std::size_t>();
  c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
  c.output_dim = j.at("output_dim").get<std::size_t>();
  c.validate();
  return c;
}

ChmcFile checkpoint_to_chmc(const Checkpoint& c) {
  ChmcFile f;
  f.header["kind"] = kMpnnKind;
  f.header["mpnn"] = to_json(c.model.config);
  f.header["featurizer_version"] = kFeaturizerVersion;
  f.header["descriptor_set_version"] = kDescriptorSetVersion;
  f.header["descriptor_names"] = c.descriptor_names;
  f.header["scaler"] = c.scaler ? scaler_to_json(*c.scaler) : nlohmann::json(nullptr);
  if (c.task)
    f.header["task"] = {{"task", to_string(c.task->task)}, {"label_mean", c.task->label_mean}, {"label_std", c.task->label_std}};
  else
    f.header["task"] = nullptr;
  f.header["metadata"] = c.metadata;
  for (const Parameter* p : const_cast<MpnnModel&>(c.model).all_params()) f.tensors.emplace_back(p->name, p->value);
  return f;
}

Checkpoint checkpoint_from_chmc(const ChmcFile& f) {
  try {
    if (f.header.value("kind", "") != kMpnnKind)
      throw InputError("checkpoint kind is '" + f.header.value("kind", "") + "', expected '" + kMpnnKind + "'");
    if (f.header.at("featurizer_version").get<std::uint32_t>() != kFeaturizerVersion)
      throw InputError("checkpoint was written with a different featurizer version");
    Checkpoint c;
    c.model = MpnnModel::init(mpnn_config_from_json(f.header.at("mpnn")), 0);
    for (Parameter* p : c.model.all_params()) {
      const Tensor& t = f.tensor(p->name);
      if (!t.same_shape(p->value))
        throw InputError("tensor '" + p->name + "' has shape " + t.shape_string() + ", expected " + p->value.shape_string());
      p->value = t;
      p->zero_grad();
    }
    c.descriptor_names = f.header.at("descriptor_names").get<std::vector<std::string>>();
    if (!f.header.at("scaler").is_null()) c.scaler = scaler_from_json(f.header.at("scaler"));
    if (!f.header.at("task").is_null()) {
      const auto& t = f.header.at("task");
      c.task = TaskHead{task_from_string(t.at("task").get<std::string>()), t.at("label_mean").get<double>(),
                        t.at("label_std").get<double>()};
    }
    c.metadata = f.header.value("metadata", nlohmann::json::object());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed checkpoint header: ") + e.what());
  }
}

void save_checkpoint(const std::string& path, const Checkpoint& c) { save_chmc(path, checkpoint_to_chmc(c)); }

Checkpoint load_checkpoint(const std::string& path) {
  try {
    return checkpoint_from_chmc(load_chmc(path));
  } catch (const InputError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw InputError(path + ": " + msg);
  }
}

// ---------------------------------------------------------------------------
// Pre-training

void PretrainConfig::validate() const {
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (!(mask_fraction >= 0.0 && mask_fraction < 1.0)) throw std::invalid_argument("mask_fraction must lie in [0, 1)");
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0)) throw std::invalid_argument("holdout_fraction must lie in (0, 1)");
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be positive");
}

Tensor gather_targets(const DescriptorMatrix& targets, std::span<const std::size_t> rows) {
  const std::size_t cols = targets.cols();
  Tensor t(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = targets.at(rows[i], c);
      t(i, c) = targets.valid(rows[i], c) ? v : 0.0;
    }
  return t;
}

Tensor pretrain_loss_mask(const DescriptorMatrix& targets, std::span<const std::size_t> rows, const PretrainConfig& cfg,
                          std::mt19937_64& rng) {
  const std::size_t cols = targets.cols();
  Tensor mask(rows.size(), cols, 1.0);
  std::bernoulli_distribution drop(cfg.mask_fraction);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c) {
      if (cfg.use_validity_mask && !targets.valid(rows[i], c)) {
        mask(i, c) = 0.0;
        continue;
      }
      if (!cfg.use_validity_mask && !targets.valid(rows[i], c))
        throw NumericError("target cell (row " + std::to_string(rows[i]) + ", column " + targets.names[c] +
                           ") is invalid and the validity mask is disabled");
      if (cfg.use_random_mask && cfg.mask_fraction > 0.0 && drop(rng)) mask(i, c) = 0.0;
    }
  return mask;
}

double heldout_rmse(const MpnnModel& model, std::span<const MolFeatures> mols, const DescriptorMatrix& targets,
                    std::span<const std::size_t> rows) {
  double ss = 0.0;
  std::size_t n = 0;
  constexpr std::size_t kChunk = 128;
  for (std::size_t start = 0; start < rows.size(); start += kChunk) {
    const auto chunk = rows.subspan(start, std::min(kChunk, rows.size() - start));
    Tape tape;
    const Tensor& pred = forward_const(tape, batch_of(mols, chunk), model).output.value();
    for (std::size_t i = 0; i < chunk.size(); ++i)
      for (std::size_t c = 0; c < targets.cols(); ++c) {
        if (!targets.valid(chunk[i], c)) continue;
        const double d = pred(i, c) - targets.at(chunk[i], c);
        ss += d * d;
        ++n;
      }
  }
  return n == 0 ? 0.0 : std::sqrt(ss / static_cast<double>(n));
}

PretrainResult pretrain(std::span<const MolFeatures> mols, const DescriptorMatrix& targets, const MpnnConfig& arch,
                        const PretrainConfig& cfg, const LogFn& log) {
  cfg.validate();
  if (targets.rows != mols.size())
    throw InputError("pretrain: " + std::to_string(mols.size()) + " molecules but " + std::to_string(targets.rows) +
                     " descriptor rows");
  if (mols.size() < 2) throw InputError("pretrain needs at least two molecules");
  MpnnConfig config = arch;
  config.output_dim = targets.cols();

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order = iota_vec(mols.size());
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_hold = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(mols.size()))), 1, mols.size() - 1);
  std::vector<std::size_t> hold(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_hold));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
  std::sort(hold.begin(), hold.end());

  PretrainResult result;
  MpnnModel model = MpnnModel::init(config, cfg.seed);
  const auto params = model.all_params();
  const ParamGroup group{params, cfg.lr};
  AdamState adam;

  const double init_rmse = heldout_rmse(model, mols, targets, hold);
  result.history.push_back({0, std::nan(""), init_rmse, 0});
  MpnnModel best = model;
  double best_rmse = init_rmse;
  log_line(log, "epoch 0: held-out rmse " + std::to_string(init_rmse));

  const std::size_t steps_per_epoch = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t warmup_steps = cfg.warmup_epochs * steps_per_epoch;
  std::size_t step = 0;
  double last_loss = std::nan("");
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0, skipped = 0;
    for (std::size_t start = 0; start < train.size(); start += cfg.batch_size) {
      const std::span<const std::size_t> rows(train.data() + start, std::min(cfg.batch_size, train.size() - start));
      const Tensor mask = pretrain_loss_mask(targets, rows, cfg, rng);
      if (std::all_of(mask.values().begin(), mask.values().end(), [](double m) { return m == 0.0; })) {
        ++skipped;
        log_line(log, "warning: epoch " + std::to_string(epoch) + " batch at " + std::to_string(start) +
                          " has no unmasked targets; skipped");
        continue;
      }
      const BatchGraph batch = batch_of(mols, rows);
      zero_grads(std::span<const ParamGroup>(&group, 1));
      Tape tape;
      Var loss = mse_masked(forward(tape, batch, model).output, gather_targets(targets, rows), mask);
      const double value = loss.value()[0];
      if (!std::isfinite(value))
        throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch) + ", step " + std::to_string(step));
      tape.backward(loss);
      ++step;
      const double lr =
          warmup_steps == 0 ? cfg.lr : cfg.lr * std::min(1.0, static_cast<double>(step) / static_cast<double>(warmup_steps));
      adam_step(params, adam, lr);
      loss_sum += value;
      ++batches;
    }
    last_loss = batches ? loss_sum / static_cast<double>(batches) : std::nan("");
    const double rmse = heldout_rmse(model, mols, targets, hold);
    result.history.push_back({epoch, last_loss, rmse, skipped});
    log_line(log, "epoch " + std::to_string(epoch) + ": train loss " + std::to_string(last_loss) + ", held-out rmse " +
                      std::to_string(rmse));
    if (rmse < best_rmse) {
      best_rmse = rmse;
      best = model;
      result.best_epoch = epoch;
    }
  }

  result.checkpoint.model = std::move(best);
  for (Parameter* p : result.checkpoint.model.all_params()) p->zero_grad();
  result.checkpoint.descriptor_names = targets.names;
  result.checkpoint.metadata = {{"stage", "pretrain"},
                                {"seed", cfg.seed},
                                {"epochs", cfg.epochs},
                                {"final_loss", std::isfinite(last_loss) ? nlohmann::json(last_loss) : nlohmann::json(nullptr)},
                                {"best_epoch", result.best_epoch},
                                {"best_heldout_rmse", best_rmse},
                                {"mask_fraction", cfg.mask_fraction}};
  return result;
}

// ---------------------------------------------------------------------------
// Supervised loop

SplitIndices split_train_val(std::span<const double> labels, Task task, double val_fraction, std::mt19937_64& rng) {
  const std::size_t n = labels.size();
  if (n < 2) throw InputError("need at least two labeled rows to form a validation split");
  const auto n_val = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n))), 1, n - 1);
  auto has_both = [&](const std::vector<std::size_t>& rows) {
    bool zero = false, one = false;
    for (std::size_t r : rows) (labels[r] > 0.5 ? one : zero) = true;
    return zero && one;
  };
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::vector<std::size_t> order = iota_vec(n);
    std::shuffle(order.begin(), order.end(), rng);
    SplitIndices s;
    s.val.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    if (task == Task::Regression || (has_both(s.train) && has_both(s.val))) return s;
  }
  throw InputError("classification split has a single class in train or validation after one redraw");
}

FitHistory fit_supervised(const BatchForward& forward_fn, std::span<const double> targets, const SplitIndices& split,
                          std::span<const ParamGroup> groups, const FitOptions& opt, const LogFn& log) {
  if (opt.batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (opt.patience == 0) throw std::invalid_argument("patience must be at least 1");
  if (split.train.empty() || split.val.empty()) throw InputError("empty training or validation split");
  FitHistory h;
  std::vector<AdamState> states(groups.size());
  std::vector<std::size_t> train = split.train;
  std::mt19937_64 rng(opt.seed);
  const Tensor val_target = column(targets, split.val);
  auto val_loss = [&] {
    Tape tape;
    return task_loss(opt.task, forward_fn(tape, split.val), val_target).value()[0];
  };
  std::vector<Tensor> best = snapshot(groups);
  double best_val = val_loss();
  std::size_t waited = 0;
  for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < train.size(); start += opt.batch_size) {
      const std::span<const std::size_t> rows(train.data() + start, std::min(opt.batch_size, train.size() - start));
      zero_grads(groups);
      Tape tape;
      Var loss = task_loss(opt.task, forward_fn(tape, rows), column(targets, rows));
      const double value = loss.value()[0];
      if (!std::isfinite(value)) throw NumericError("non-finite training loss at epoch " + std::to_string(epoch));
      tape.backward(loss);
      for (std::size_t g = 0; g < groups.size(); ++g) adam_step(groups[g].params, states[g], groups[g].lr);
      loss_sum += value;
      ++batches;
    }
    h.train_loss.push_back(loss_sum / static_cast<double>(batches));
    const double v = val_loss();
    if (!std::isfinite(v)) throw NumericError("non-finite validation loss at epoch " + std::to_string(epoch));
    h.val_loss.push_back(v);
    if (v < best_val) {
      best_val = v;
      best = snapshot(groups);
      h.best_epoch = epoch;
      waited = 0;
    } else if (++waited >= opt.patience) {
      h.stopped_early = true;
      log_line(log, "early stop at epoch " + std::to_string(epoch) + ", best epoch " + std::to_string(h.best_epoch));
      break;
    }
  }
  restore(groups, best);
  return h;
}

// ---------------------------------------------------------------------------
// Fine-tuning

void FinetuneConfig::validate() const {
  if (!(val_fraction > 0.0 && val_fraction < 0.5)) throw std::invalid_argument("val_fraction must lie in (0, 0.5)");
  if (patience == 0) throw std::invalid_argument("patience must be at least 1");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be at least 1");
  if (!(lr_head > 0.0) || !(lr_mp >= 0.0)) throw std::invalid_argument("learning rates must be positive");
}

FinetuneResult finetune(const Checkpoint& base, std::span<const MolFeatures> mols, std::span<const double> labels,
                        const FinetuneConfig& cfg, const LogFn& log) {
  cfg.validate();
  if (mols.size() != labels.size()) throw InputError("finetune: molecule and label counts differ");
  check_labels(labels, cfg.task, cfg.allow_small, "finetune");

  std::mt19937_64 rng(cfg.seed);
  const SplitIndices split = split_train_val(labels, cfg.task, cfg.val_fraction, rng);

  FinetuneResult result;
  Checkpoint& out = result.checkpoint;
  out = base;
  const TaskHead head = fit_task_head(labels, cfg.task, split.train);
  std::vector<double> targets(labels.begin(), labels.end());
  for (double& y : targets) y = (y - head.label_mean) / head.label_std;

  if (cfg.reinit_head || out.model.config.output_dim != 1) out.model.reinit_head(1, cfg.seed);
  MpnnModel& model = out.model;
  std::vector<ParamGroup> groups{{model.head_params(), cfg.lr_head}};
  if (!cfg.freeze_mp) groups.push_back({model.encoder_params(), cfg.lr_mp});

  const BatchForward fwd = [&](Tape& tape, std::span<const std::size_t> rows) {
    return forward(tape, batch_of(mols, rows), model, cfg.freeze_mp).output;
  };
  FitOptions opt;
  opt.task = cfg.task;
  opt.epochs = cfg.epochs;
  opt.batch_size = cfg.batch_size;
  opt.patience = cfg.patience;
  opt.seed = cfg.seed;
  result.history = fit_supervised(fwd, targets, split, groups, opt, log);
  for (Parameter* p : model.all_params()) p->zero_grad();
  out.task = head;
  out.metadata["stage"] = "finetune";
  out.metadata["finetune"] = {{"seed", cfg.seed},
                              {"task", to_string(cfg.task)},
                              {"best_epoch", result.history.best_epoch},
                              {"epochs_run", result.history.val_loss.size()},
                              {"freeze_mp", cfg.freeze_mp}};
  return result;
}

void check_labels(std::span<const double> labels, Task task, bool allow_small, const std::string& who) {
  if (labels.size() < 10 && !allow_small)
    throw InputError(who + ": " + std::to_string(labels.size()) + " training rows (< 10); pass allow_small to override");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(labels[i])) throw InputError(who + ": label in row " + std::to_string(i) + " is not finite");
    if (task == Task::BinaryClassification && labels[i] != 0.0 && labels[i] != 1.0)
      throw InputError(who + ": binary label in row " + std::to_string(i) + " is not 0 or 1");
  }
}

TaskHead fit_task_head(std::span<const double> labels, Task task, std::span<const std::size_t> rows) {
  TaskHead head{task, 0.0, 1.0};
  if (task != Task::Regression || rows.empty()) return head;
  double mean = 0.0;
  for (std::size_t r : rows) mean += labels[r];
  mean /= static_cast<double>(rows.size());
  double ss = 0.0;
  for (std::size_t r : rows) ss += (labels[r] - mean) * (labels[r] - mean);
  const double sd = std::sqrt(ss / static_cast<double>(rows.size()));
  head.label_mean = mean;
  head.label_std = sd > 0.0 ? sd : 1.0;
  return head;
}

double apply_task_head(const TaskHead& head, double output) {
  if (head.task == Task::Regression) return output * head.label_std + head.label_mean;
  return std::clamp(sigmoid(output), 1e-12, 1.0 - 1e-12);
}

std::vector<double> predict(const Checkpoint& model, std::span<const MolFeatures> mols, std::size_t batch_size) {
  std::vector<double> out;
  out.reserve(mols.size());
  const TaskHead head = model.task.value_or(TaskHead{});
  if (model.model.config.output_dim != 1) throw InputError("predict: model has no single-output task head");
  for (std::size_t start = 0; start < mols.size(); start += batch_size) {
    const auto chunk = mols.subspan(start, std::min(batch_size, mols.size() - start));
    Tape tape;
    const Tensor& y = forward_const(tape, make_batch(chunk), model.model).output.value();
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      out.push_back(apply_task_head(head, y[i]));
    }
  }
  return out;
}

std::vector<MolFeatures> featurize_smiles(std::span<const std::string> smiles) {
  std::vector<MolFeatures> out;
  out.reserve(smiles.size());
  for (std::size_t i = 0; i < smiles.size(); ++i) {
    try {
      out.push_back(featurize(parse_smiles(smiles[i])));
    } catch (const InputError& e) {
      throw InputError("row " + std::to_string(i + 1) + " ('" + smiles[i] + "'): " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

std::vector<std::string> LabeledDataset::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw InputError("dataset has no column '" + name + "'");
  const auto c = static_cast<std::size_t>(it - header.begin());
  std::vector<std::string> out;
  out.reserve(extra.size());
  for (const auto& row : extra) out.push_back(row[c]);
  return out;
}

LabeledDataset read_labeled_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  LabeledDataset d;
  std::string line;
  if (!std::getline(in, line)) throw InputError(path + ": empty file");
  d.header = split_csv_line(line);
  auto find = [&](const std::string& name) -> std::ptrdiff_t {
    const auto it = std::find(d.header.begin(), d.header.end(), name);
    return it == d.header.end() ? -1 : it - d.header.begin();
  };
  const auto c_smiles = find("smiles"), c_target = find("target"), c_split = find("split");
  if (c_smiles < 0 || c_target < 0) throw InputError(path + ": header must contain 'smiles' and 'target' columns");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != d.header.size())
      throw InputError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(d.header.size()) +
                       " fields, found " + std::to_string(cells.size()));
    const std::string& t = cells[static_cast<std::size_t>(c_target)];
    double y = 0.0;
    try {
      std::size_t used = 0;
      y = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
    } catch (const std::exception&) {
      throw InputError(path + ":" + std::to_string(lineno) + ": target '" + t + "' is not a number");
    }
    std::string split = c_split >= 0 ? cells[static_cast<std::size_t>(c_split)] : std::string();
    if (!split.empty() && split != "train" && split != "test")
      throw InputError(path + ":" + std::to_string(lineno) + ": split must be 'train' or 'test', got '" + split + "'");
    d.smiles.push_back(cells[static_cast<std::size_t>(c_smiles)]);
    d.target.push_back(y);
    d.split.push_back(std::move(split));
    d.extra.push_back(std::move(cells));
  }
  return d;
}

}  // namespace descfm
