#include "descfm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "descfm/errors.hpp"

namespace descfm {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* key) { return k == key; });
    if (!known) throw InputError(where + ": unknown key '" + k + "'");
  }
}

template <class T>
void take(const json& j, const char* key, T& field, const std::string& where) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  // reject negative values for unsigned fields instead of wrapping them
  if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw InputError(where + ": '" + key + "' must be a non-negative integer");
  }
  try {
    field = v.get<T>();
  } catch (const json::exception& e) {
    throw InputError(where + ": '" + key + "': " + e.what());
  }
}

void take_task(const json& j, Task& t, const std::string& where) {
  if (!j.contains("task")) return;
  if (!j.at("task").is_string()) throw InputError(where + ": 'task' must be a string");
  t = task_from_string(j.at("task").get<std::string>());
}

std::string resolve(const std::string& base_file, const std::string& p) {
  if (p.empty()) return p;
  const std::filesystem::path path(p);
  if (path.is_absolute()) return p;
  return (std::filesystem::path(base_file).parent_path() / path).string();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

}  // namespace

json to_json(const PretrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"warmup_epochs", c.warmup_epochs},
          {"mask_fraction", c.mask_fraction},
          {"use_validity_mask", c.use_validity_mask},
          {"use_random_mask", c.use_random_mask},
          {"holdout_fraction", c.holdout_fraction},
          {"seed", c.seed}};
}

json to_json(const FinetuneConfig& c) {
  return {{"task", to_string(c.task)},     {"epochs", c.epochs},         {"batch_size", c.batch_size},
          {"lr_head", c.lr_head},          {"lr_mp", c.lr_mp},           {"val_fraction", c.val_fraction},
          {"patience", c.patience},        {"freeze_mp", c.freeze_mp},   {"allow_small", c.allow_small},
          {"reinit_head", c.reinit_head},  {"seed", c.seed}};
}

json to_json(const BaselineConfig& c) {
  return {{"task", to_string(c.task)}, {"hidden", c.hidden},           {"hidden_layers", c.hidden_layers},
          {"epochs", c.epochs},        {"batch_size", c.batch_size},   {"lr", c.lr},
          {"val_fraction", c.val_fraction}, {"patience", c.patience},  {"allow_small", c.allow_small},
          {"seed", c.seed}};
}

PretrainConfig apply_json(PretrainConfig c, const json& j, const std::string& where) {
  check_keys(j, {"epochs", "batch_size", "lr", "warmup_epochs", "mask_fraction", "use_validity_mask", "use_random_mask",
                 "holdout_fraction", "seed"},
             where);
  take(j, "epochs", c.epochs, where);
  take(j, "batch_size", c.batch_size, where);
  take(j, "lr", c.lr, where);
  take(j, "warmup_epochs", c.warmup_epochs, where);
  take(j, "mask_fraction", c.mask_fraction, where);
  take(j, "use_validity_mask", c.use_validity_mask, where);
  take(j, "use_random_mask", c.use_random_mask, where);
  take(j, "holdout_fraction", c.holdout_fraction, where);
  take(j, "seed", c.seed, where);
  return c;
}

FinetuneConfig apply_json(FinetuneConfig c, const json& j, const std::string& where) {
  check_keys(j, {"task", "epochs", "batch_size", "lr_head", "lr_mp", "val_fraction", "patience", "freeze_mp",
                 "allow_small", "reinit_head", "seed"},
             where);
  take_task(j, c.task, where);
  take(j, "epochs", c.epochs, where);
  take(j, "batch_size", c.batch_size, where);
  take(j, "lr_head", c.lr_head, where);
  take(j, "lr_mp", c.lr_mp, where);
  take(j, "val_fraction", c.val_fraction, where);
  take(j, "patience", c.patience, where);
  take(j, "freeze_mp", c.freeze_mp, where);
  take(j, "allow_small", c.allow_small, where);
  take(j, "reinit_head", c.reinit_head, where);
  take(j, "seed", c.seed, where);
  return c;
}

BaselineConfig apply_json(BaselineConfig c, const json& j, const std::string& where) {
  check_keys(j, {"task", "hidden", "hidden_layers", "epochs", "batch_size", "lr", "val_fraction", "patience",
                 "allow_small", "seed"},
             where);
  take_task(j, c.task, where);
  take(j, "hidden", c.hidden, where);
  take(j, "hidden_layers", c.hidden_layers, where);
  take(j, "epochs", c.epochs, where);
  take(j, "batch_size", c.batch_size, where);
  take(j, "lr", c.lr, where);
  take(j, "val_fraction", c.val_fraction, where);
  take(j, "patience", c.patience, where);
  take(j, "allow_small", c.allow_small, where);
  take(j, "seed", c.seed, where);
  return c;
}

MpnnConfig apply_json(MpnnConfig c, const json& j, const std::string& where) {
  check_keys(j, {"hidden_size", "depth", "ffn_layers", "ffn_hidden"}, where);
  take(j, "hidden_size", c.hidden_size, where);
  take(j, "depth", c.depth, where);
  take(j, "ffn_layers", c.ffn_layers, where);
  take(j, "ffn_hidden", c.ffn_hidden, where);
  return c;
}

// ---------------------------------------------------------------------------

std::vector<BenchmarkSpec> read_suite_json(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_array() || j.empty()) throw InputError(path + ": expected a non-empty JSON list of benchmarks");
  std::vector<BenchmarkSpec> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = path + ": benchmark " + std::to_string(i);
    const json& e = j[i];
    check_keys(e, {"id", "dataset", "task", "metric", "orientation", "cliff_column"}, where);
    BenchmarkSpec b;
    std::string task = "regression", orientation;
    take(e, "id", b.id, where);
    take(e, "dataset", b.dataset, where);
    take(e, "task", task, where);
    take(e, "metric", b.metric, where);
    take(e, "orientation", orientation, where);
    if (b.id.empty() || b.dataset.empty() || b.metric.empty())
      throw InputError(where + ": id, dataset and metric are required");
    if (b.id.find(',') != std::string::npos) throw InputError(where + ": id must not contain commas");
    if (!seen.insert(b.id).second) throw InputError(where + ": duplicate id '" + b.id + "'");
    b.task = task_from_string(task);
    b.orientation = orientation.empty() ? default_orientation(b.metric) : orientation_from_string(orientation);
    if (is_classification_metric(b.metric) != (b.task == Task::BinaryClassification))
      throw InputError(where + ": metric '" + b.metric + "' does not fit task '" + task + "'");
    if (e.contains("cliff_column")) {
      std::string col;
      take(e, "cliff_column", col, where);
      if (b.task != Task::Regression) throw InputError(where + ": cliff columns need a regression task");
      b.cliff_column = col;
    }
    b.dataset = resolve(path, b.dataset);
    out.push_back(std::move(b));
  }
  return out;
}

std::vector<ModelSpec> read_roster_json(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_array() || j.empty()) throw InputError(path + ": expected a non-empty JSON list of models");
  std::vector<ModelSpec> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = path + ": model " + std::to_string(i);
    const json& e = j[i];
    check_keys(e, {"id", "kind", "checkpoint", "projector", "arch", "options"}, where);
    ModelSpec m;
    take(e, "id", m.id, where);
    take(e, "kind", m.kind, where);
    take(e, "checkpoint", m.checkpoint, where);
    take(e, "projector", m.projector, where);
    if (e.contains("arch")) m.arch = e.at("arch");
    if (e.contains("options")) m.options = e.at("options");
    if (m.id.empty()) throw InputError(where + ": id is required");
    if (m.id.find(',') != std::string::npos) throw InputError(where + ": id must not contain commas");
    if (!seen.insert(m.id).second) throw InputError(where + ": duplicate id '" + m.id + "'");
    static const std::set<std::string> kinds{"finetune", "scratch", "descriptor_fnn", "pcamlp"};
    if (!kinds.contains(m.kind)) throw InputError(where + ": unknown kind '" + m.kind + "'");
    if (m.kind == "finetune" && m.checkpoint.empty()) throw InputError(where + ": finetune models need a checkpoint");
    if (m.kind != "scratch" && !m.arch.empty()) throw InputError(where + ": arch applies to scratch models only");
    m.checkpoint = resolve(path, m.checkpoint);
    m.projector = resolve(path, m.projector);
    // surface option errors before any training starts
    try {
      if (m.kind == "finetune" || m.kind == "scratch") {
        apply_json(FinetuneConfig{}, m.options, where + " options").validate();
        apply_json(MpnnConfig{}, m.arch, where + " arch").validate();
      } else {
        apply_json(BaselineConfig{}, m.options, where + " options").validate();
      }
    } catch (const std::invalid_argument& e) {
      throw InputError(where + ": " + e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

bool parse_flag(const std::string& s, bool& out) {
  if (s == "1" || s == "true" || s == "True") {
    out = true;
    return true;
  }
  if (s == "0" || s == "false" || s == "False") {
    out = false;
    return true;
  }
  return false;
}

template <class T>
std::vector<T> gather(const std::vector<T>& v, std::span<const std::size_t> rows) {
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(v[r]);
  return out;
}

}  // namespace

BenchmarkData load_benchmark(const BenchmarkSpec& spec) {
  BenchmarkData b;
  b.spec = spec;
  const LabeledDataset ds = read_labeled_csv(spec.dataset);
  const std::string where = spec.dataset;
  if (ds.size() == 0) throw InputError(where + ": no rows");
  std::vector<Molecule> molecules;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    try {
      molecules.push_back(parse_smiles(ds.smiles[i]));
    } catch (const InputError& e) {
      throw InputError(where + ": row " + std::to_string(i + 1) + " ('" + ds.smiles[i] + "'): " + e.what());
    }
    b.mols.push_back(featurize(molecules.back()));
    ids.push_back(std::to_string(i + 1));
    if (ds.split[i] == "train")
      b.train.push_back(i);
    else if (ds.split[i] == "test")
      b.test.push_back(i);
    else
      throw InputError(where + ": row " + std::to_string(i + 1) + ": benchmarks need split = train or test");
  }
  if (b.train.empty() || b.test.empty()) throw InputError(where + ": needs both train and test rows");
  b.raw = compute_descriptor_matrix(molecules, ids);
  b.labels = ds.target;

  const auto test_labels = gather(b.labels, b.test);
  if (spec.task == Task::BinaryClassification) {
    const bool pos = std::count(test_labels.begin(), test_labels.end(), 1.0) > 0;
    const bool neg = std::count(test_labels.begin(), test_labels.end(), 0.0) > 0;
    if (!pos || !neg) throw InputError(where + ": the test split needs both classes");
  } else if (spec.metric == "r2" && std::all_of(test_labels.begin(), test_labels.end(),
                                                [&](double v) { return v == test_labels.front(); })) {
    throw InputError(where + ": r2 is undefined on constant test labels");
  }

  if (spec.cliff_column) {
    const auto col = ds.column(*spec.cliff_column);
    b.cliff.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
      bool flag = false;
      if (!parse_flag(col[i], flag))
        throw InputError(where + ": row " + std::to_string(i + 1) + ": cliff value '" + col[i] + "' is not 0/1");
      b.cliff[i] = flag;
    }
    std::size_t n_cliff = 0;
    for (std::size_t r : b.test) n_cliff += b.cliff[r];
    if (n_cliff == 0 || n_cliff == b.test.size())
      throw InputError(where + ": the test split needs both cliff and noncliff rows");
  }
  return b;
}

LoadedModel load_model(const ModelSpec& spec) {
  LoadedModel m;
  m.spec = spec;
  if (spec.kind == "finetune") m.base = load_checkpoint(spec.checkpoint);
  if (spec.kind == "pcamlp" && !spec.projector.empty()) {
    try {
      m.projector = projector_from_chmc(load_chmc(spec.projector));
    } catch (const InputError& e) {
      throw InputError(spec.projector + ": " + e.what());
    }
  }
  return m;
}

ReplicateOutcome run_replicate(const BenchmarkData& data, const LoadedModel& model, std::uint64_t seed,
                               const LogFn& log) {
  const auto& spec = model.spec;
  const auto train_labels = gather(data.labels, data.train);
  const auto test_labels = gather(data.labels, data.test);
  std::vector<double> pred;

  if (spec.kind == "finetune" || spec.kind == "scratch") {
    FinetuneConfig cfg = apply_json(FinetuneConfig{}, spec.options, spec.id);
    // a random encoder trains at the head rate unless told otherwise
    if (spec.kind == "scratch" && !spec.options.contains("lr_mp")) cfg.lr_mp = cfg.lr_head;
    cfg.task = data.spec.task;
    cfg.seed = seed;
    Checkpoint base;
    if (spec.kind == "finetune") {
      base = *model.base;
    } else {
      base.model = MpnnModel::init(apply_json(MpnnConfig{}, spec.arch, spec.id), seed);
    }
    const auto fitted = finetune(base, gather(data.mols, data.train), train_labels, cfg, log);
    pred = predict(fitted.checkpoint, gather(data.mols, data.test));
  } else {
    BaselineConfig cfg = apply_json(BaselineConfig{}, spec.options, spec.id);
    cfg.task = data.spec.task;
    cfg.seed = seed;
    const DescriptorMatrix train_raw = select_rows(data.raw, data.train);
    BaselineResult fitted;
    if (spec.kind == "descriptor_fnn")
      fitted = fit_descriptor_fnn(train_raw, train_labels, cfg, log);
    else
      fitted = fit_pcamlp(train_raw, train_labels, model.projector ? PcaMode::Prefitted : PcaMode::Local,
                          model.projector ? &*model.projector : nullptr, cfg, log);
    pred = predict(fitted.model, select_rows(data.raw, data.test));
  }

  ReplicateOutcome out;
  const auto value = compute_metric(data.spec.metric, pred, test_labels);
  if (!value) throw InputError("metric " + data.spec.metric + " is undefined on the test split");
  out.value = *value;
  if (!data.cliff.empty()) {
    std::vector<double> pc, lc, pn, ln;
    for (std::size_t k = 0; k < data.test.size(); ++k) {
      const bool c = data.cliff[data.test[k]];
      (c ? pc : pn).push_back(pred[k]);
      (c ? lc : ln).push_back(test_labels[k]);
    }
    out.rmse_cliff = rmse(pc, lc);
    out.rmse_noncliff = rmse(pn, ln);
  }
  return out;
}

std::vector<ReplicateResult> run_suite(const std::vector<BenchmarkData>& benchmarks,
                                       const std::vector<LoadedModel>& models, const SuiteOptions& opt,
                                       const LogFn& log) {
  if (opt.replicates == 0) throw std::invalid_argument("replicates must be at least 1");
  struct Job {
    std::size_t bench, model;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t b = 0; b < benchmarks.size(); ++b)
    for (std::size_t m = 0; m < models.size(); ++m)
      for (std::uint64_t s = 1; s <= opt.replicates; ++s) jobs.push_back({b, m, s});

  std::mutex log_mu;
  LogFn safe_log;
  if (log)
    safe_log = [&](const std::string& line) {
      std::lock_guard lock(log_mu);
      log(line);
    };

  std::vector<std::optional<ReplicateResult>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const BenchmarkData& data = benchmarks[job.bench];
      const LoadedModel& model = models[job.model];
      try {
        results[i] = run_replicate_seed(data.spec.id, model.spec.id, data.spec.metric, data.spec.orientation, job.seed,
                                        [&](std::uint64_t seed) { return run_replicate(data, model, seed); });
        if (safe_log)
          safe_log(data.spec.id + "/" + model.spec.id + " seed " + std::to_string(job.seed) + ": " +
                   data.spec.metric + " " + std::to_string(results[i]->value));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(opt.workers, 1, std::max<std::size_t>(jobs.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // report the first failure in job order so the message does not depend on scheduling
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<ReplicateResult> out;
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

}  // namespace descfm
