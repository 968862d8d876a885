// descfm command-line front end.
//
// Exit codes: 0 ok, 2 usage, 3 input parse, 4 numeric failure, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "descfm/baselines.hpp"
#include "descfm/descriptors.hpp"
#include "descfm/embed.hpp"
#include "descfm/errors.hpp"
#include "descfm/pipeline.hpp"
#include "descfm/stats.hpp"
#include "descfm/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace descfm;

namespace {

// JSON config files: flat keys apply to the active subcommand; an object keyed
// by the subcommand name works too.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(std::string active) : active_(std::move(active)) {}

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        if (key != active_) continue;
        for (const auto& [k, v] : value.items()) items.push_back(item(k, v));
      } else {
        items.push_back(item(key, value));
      }
    }
    return items;
  }

 private:
  CLI::ConfigItem item(const std::string& key, const json& v) const {
    CLI::ConfigItem it;
    it.parents = {active_};
    it.name = key;
    if (v.is_array()) {
      for (const auto& e : v) it.inputs.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    } else {
      it.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    return it;
  }

  std::string active_;
};

json typed(const std::string& s) {
  if (s.empty()) return s;
  try {
    json v = json::parse(s);
    if (v.is_number() || v.is_boolean()) return v;
  } catch (const json::exception&) {
  }
  return s;
}

std::set<const CLI::Option*> g_flags;

CLI::Option* flag(CLI::App* sub, const std::string& name, bool& target, const std::string& desc = "") {
  CLI::Option* o = sub->add_flag(name, target, desc);
  g_flags.insert(o);
  return o;
}

// Every option of the subcommand, given or defaulted.
json resolved_config(const CLI::App* sub) {
  json out = json::object();
  out["command"] = sub->get_name();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (g_flags.contains(opt)) {
      out[name] = opt->count() > 0 && opt->as<bool>();
    } else if (opt->count() > 0) {
      const auto& r = opt->results();
      out[name] = r.size() == 1 ? typed(r.front()) : json(r);
    } else {
      out[name] = typed(opt->get_default_str());
    }
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

void echo_config(const CLI::App* sub, const std::string& path) { write_text(path, resolved_config(sub).dump(2) + "\n"); }

void log_err(const std::string& line) { std::cerr << line << "\n"; }

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct ParsedInput {
  std::vector<std::string> ids;
  std::vector<std::string> smiles;
  std::vector<Molecule> mols;
};

// SMILES files (one per line, optional id) or CSV with a smiles column.
ParsedInput read_molecules(const std::string& path) {
  ParsedInput in;
  if (fs::path(path).extension() == ".csv") {
    const auto ds = read_labeled_csv(path);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      in.ids.push_back(std::to_string(i + 1));
      in.smiles.push_back(ds.smiles[i]);
    }
  } else {
    for (const auto& r : read_smiles_file(path)) {
      in.ids.push_back(r.id);
      in.smiles.push_back(r.smiles);
    }
  }
  for (std::size_t i = 0; i < in.smiles.size(); ++i) {
    try {
      in.mols.push_back(parse_smiles(in.smiles[i]));
    } catch (const InputError& e) {
      throw InputError(path + ": record " + std::to_string(i + 1) + " ('" + in.smiles[i] + "'): " + e.what());
    }
  }
  if (in.mols.empty()) throw InputError(path + ": no molecules");
  return in;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// ---------------------------------------------------------------------------

struct FeaturizeArgs {
  std::string input, out, csv;
};

void run_featurize(const CLI::App* sub, const FeaturizeArgs& a) {
  const auto in = read_molecules(a.input);
  const DescriptorMatrix d = compute_descriptor_matrix(in.mols, in.ids);
  ensure_parent(a.out);
  save_chmd(a.out, d);
  if (!a.csv.empty()) {
    std::ofstream csv(a.csv);
    write_descriptor_csv(csv, d);
  }
  echo_config(sub, a.out + ".config.json");
  std::cout << "featurized " << d.rows << " molecules x " << d.cols() << " descriptors -> " << a.out << "\n";
}

struct PretrainArgs {
  std::string corpus, descriptors, out, pca_out, history;
  MpnnConfig arch;
  PretrainConfig cfg;
  bool no_validity_mask = false, no_random_mask = false;
  double clip_sigmas = 6.0, pca_threshold = 0.95;
};

void run_pretrain(const CLI::App* sub, PretrainArgs a) {
  a.cfg.use_validity_mask = !a.no_validity_mask;
  a.cfg.use_random_mask = !a.no_random_mask;
  a.arch.validate();
  a.cfg.validate();
  const auto in = read_molecules(a.corpus);
  DescriptorMatrix raw;
  if (a.descriptors.empty()) {
    raw = compute_descriptor_matrix(in.mols, in.ids);
  } else {
    raw = load_chmd(a.descriptors);
    if (raw.rows != in.mols.size())
      throw InputError(a.descriptors + ": " + std::to_string(raw.rows) + " rows but the corpus has " +
                       std::to_string(in.mols.size()) + " molecules");
  }
  const ScalerStats scaler = fit_scaler(raw, a.clip_sigmas);
  const DescriptorMatrix targets = apply_scaler(raw, scaler);
  std::vector<MolFeatures> feats;
  for (const auto& m : in.mols) feats.push_back(featurize(m));
  PretrainResult r = pretrain(feats, targets, a.arch, a.cfg, log_err);
  r.checkpoint.scaler = scaler;
  ensure_parent(a.out);
  save_checkpoint(a.out, r.checkpoint);
  if (!a.history.empty()) {
    std::ostringstream h;
    h << "epoch,train_loss,heldout_rmse,skipped_batches\n";
    for (const auto& e : r.history)
      h << e.epoch << "," << (std::isnan(e.train_loss) ? "" : fmt17(e.train_loss)) << "," << fmt17(e.heldout_rmse)
        << "," << e.skipped_batches << "\n";
    write_text(a.history, h.str());
  }
  if (!a.pca_out.empty()) save_chmc(a.pca_out, projector_to_chmc(fit_projector(raw, a.pca_threshold)));
  echo_config(sub, a.out + ".config.json");
  std::cout << "pretrained on " << feats.size() << " molecules; best epoch " << r.best_epoch << " held-out rmse "
            << r.history[r.best_epoch].heldout_rmse << " -> " << a.out << "\n";
}

struct FinetuneArgs {
  std::string checkpoint, data, out, task = "regression", history;
  bool scratch = false;
  MpnnConfig arch;
  FinetuneConfig cfg;
};

void run_finetune(const CLI::App* sub, FinetuneArgs a) {
  a.cfg.task = task_from_string(a.task);
  a.cfg.validate();
  if (a.scratch == !a.checkpoint.empty()) throw std::invalid_argument("give exactly one of --checkpoint or --scratch");
  Checkpoint base;
  if (a.scratch) {
    a.arch.validate();
    base.model = MpnnModel::init(a.arch, a.cfg.seed);
  } else {
    base = load_checkpoint(a.checkpoint);
  }
  const LabeledDataset ds = read_labeled_csv(a.data);
  std::vector<std::string> smiles;
  std::vector<double> labels;
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.split[i] != "test") {
      smiles.push_back(ds.smiles[i]);
      labels.push_back(ds.target[i]);
    }
  std::vector<MolFeatures> feats;
  try {
    feats = featurize_smiles(smiles);
  } catch (const InputError& e) {
    throw InputError(a.data + ": " + e.what());
  }
  const FinetuneResult r = finetune(base, feats, labels, a.cfg, log_err);
  ensure_parent(a.out);
  save_checkpoint(a.out, r.checkpoint);
  if (!a.history.empty()) {
    std::ostringstream h;
    h << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < r.history.val_loss.size(); ++e)
      h << e << "," << (e < r.history.train_loss.size() ? fmt17(r.history.train_loss[e]) : "") << ","
        << fmt17(r.history.val_loss[e]) << "\n";
    write_text(a.history, h.str());
  }
  echo_config(sub, a.out + ".config.json");
  std::cout << "fine-tuned on " << feats.size() << " rows; best epoch " << r.history.best_epoch << " -> " << a.out
            << "\n";
}

struct PredictArgs {
  std::string model, input, out;
};

void run_predict(const CLI::App* sub, const PredictArgs& a) {
  const Checkpoint c = load_checkpoint(a.model);
  if (!c.task) throw InputError(a.model + ": checkpoint has no task head; run finetune first");
  const auto in = read_molecules(a.input);
  std::vector<MolFeatures> feats;
  for (const auto& m : in.mols) feats.push_back(featurize(m));
  const auto pred = predict(c, feats);
  std::ostringstream out;
  out << "id,smiles,prediction\n";
  for (std::size_t i = 0; i < pred.size(); ++i) out << in.ids[i] << "," << in.smiles[i] << "," << fmt17(pred[i]) << "\n";
  ensure_parent(a.out);
  write_text(a.out, out.str());
  echo_config(sub, a.out + ".config.json");
  std::cout << "predicted " << pred.size() << " molecules -> " << a.out << "\n";
}

struct BenchmarkArgs {
  std::string suite, roster, out_dir;
  std::size_t replicates = 5;
  std::size_t workers = 1;
};

void run_benchmark(const CLI::App* sub, const BenchmarkArgs& a) {
  const auto suite = read_suite_json(a.suite);
  const auto roster = read_roster_json(a.roster);
  std::vector<BenchmarkData> data;
  for (const auto& b : suite) data.push_back(load_benchmark(b));
  std::vector<LoadedModel> models;
  for (const auto& m : roster) models.push_back(load_model(m));
  const auto rows = run_suite(data, models, {a.replicates, a.workers}, log_err);
  fs::create_directories(a.out_dir);
  std::ostringstream csv;
  write_results_csv(csv, rows);
  write_text((fs::path(a.out_dir) / "results.csv").string(), csv.str());
  echo_config(sub, (fs::path(a.out_dir) / "config.json").string());
  std::cout << rows.size() << " replicate results -> " << (fs::path(a.out_dir) / "results.csv").string() << "\n";
}

struct ReportArgs {
  std::string results, out_dir;
  double alpha = 0.05;
};

void run_report(const CLI::App* sub, const ReportArgs& a) {
  std::ifstream in(a.results);
  if (!in) throw InputError("cannot open '" + a.results + "'");
  const auto rows = read_results_csv(in, a.results);
  const Report r = build_report(rows, a.alpha);
  fs::create_directories(a.out_dir);
  const auto path = [&](const char* name) { return (fs::path(a.out_dir) / name).string(); };
  std::ostringstream winners, wins, cliff, text;
  write_winners_csv(winners, r);
  write_wins_csv(wins, r);
  write_cliff_csv(cliff, r);
  write_report_text(text, r);
  write_text(path("winners.csv"), winners.str());
  write_text(path("wins.csv"), wins.str());
  write_text(path("cliff.csv"), cliff.str());
  write_text(path("report.txt"), text.str());
  echo_config(sub, path("config.json"));
  std::cout << text.str();
}

struct FingerprintArgs {
  std::string input, series, out, sort_out, kind = "learned", checkpoint;
  int radius = 2;
  std::size_t width = 2048;
};

void run_fingerprint(const CLI::App* sub, const FingerprintArgs& a) {
  if (a.input.empty() == a.series.empty()) throw std::invalid_argument("give exactly one of --input or --series");
  if (!a.sort_out.empty() && a.series.empty()) throw std::invalid_argument("--sort-out needs --series");
  FingerprintFn fp;
  std::optional<Checkpoint> ckpt;
  if (a.kind == "learned") {
    if (a.checkpoint.empty()) throw std::invalid_argument("--kind learned needs --checkpoint");
    ckpt = load_checkpoint(a.checkpoint);
    fp = [&](const Molecule& m) { return fingerprint(m, ckpt->model); };
  } else if (a.kind == "morgan") {
    if (a.radius < 0 || a.width == 0) throw std::invalid_argument("radius must be >= 0 and width > 0");
    fp = [&](const Molecule& m) {
      const auto c = morgan_fingerprint(m, a.radius, a.width);
      return std::vector<double>(c.begin(), c.end());
    };
  } else {
    throw std::invalid_argument("--kind must be learned or morgan");
  }

  std::vector<std::string> ids, labels;
  std::vector<std::vector<double>> rows;
  std::ostringstream sorted;
  if (!a.input.empty()) {
    const auto in = read_molecules(a.input);
    for (std::size_t i = 0; i < in.mols.size(); ++i) {
      ids.push_back(in.ids[i]);
      labels.emplace_back();
      rows.push_back(fp(in.mols[i]));
    }
  } else {
    sorted << "series_label,tau,order,zero_norm\n";
    for (const auto& s : read_series_json(a.series)) {
      const auto add = [&](const std::string& id, const std::string& smi) {
        try {
          rows.push_back(fp(parse_smiles(smi)));
        } catch (const InputError& e) {
          throw InputError(a.series + ": " + id + ": " + e.what());
        }
        ids.push_back(id);
        labels.push_back(s.label);
      };
      add(s.label + ":lead", s.lead);
      for (std::size_t i = 0; i < s.members.size(); ++i) add(s.label + ":m" + std::to_string(i + 1), s.members[i]);
      if (s.members.size() >= 2) {
        const SortResult r = sort_series(s, fp);
        std::string order, flagged;
        for (std::size_t k = 0; k < r.order.size(); ++k) order += (k ? ";" : "") + std::to_string(r.order[k] + 1);
        for (std::size_t k = 0; k < r.zero_norm.size(); ++k)
          if (r.zero_norm[k]) flagged += (flagged.empty() ? "" : ";") + std::to_string(k + 1);
        sorted << s.label << "," << (r.tau ? fmt17(*r.tau) : "") << "," << order << "," << flagged << "\n";
      } else {
        log_err("series " + s.label + ": one member, nothing to sort");
      }
    }
  }
  std::ostringstream out;
  out << "id,series_label";
  const std::size_t width = rows.empty() ? 0 : rows.front().size();
  for (std::size_t c = 0; c < width; ++c) out << ",f" << c;
  out << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << ids[i] << "," << labels[i];
    for (double v : rows[i]) out << "," << fmt17(v);
    out << "\n";
  }
  ensure_parent(a.out);
  write_text(a.out, out.str());
  if (!a.sort_out.empty()) write_text(a.sort_out, sorted.str());
  echo_config(sub, a.out + ".config.json");
  std::cout << rows.size() << " fingerprints of width " << width << " -> " << a.out << "\n";
}

struct ProjectArgs {
  std::string embeddings, out;
  TsneConfig cfg;
  bool random_init = false;
};

void run_project(const CLI::App* sub, ProjectArgs a) {
  a.cfg.pca_init = !a.random_init;
  std::ifstream in(a.embeddings);
  if (!in) throw InputError("cannot open '" + a.embeddings + "'");
  std::string line;
  if (!std::getline(in, line) || line.rfind("id,series_label", 0) != 0)
    throw InputError(a.embeddings + ":1: expected header id,series_label,f0,...");
  std::vector<std::string> ids, labels;
  std::vector<double> values;
  std::size_t width = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    if (cells.size() < 3) throw InputError(a.embeddings + ":" + std::to_string(lineno) + ": too few columns");
    if (width == 0) width = cells.size() - 2;
    if (cells.size() - 2 != width)
      throw InputError(a.embeddings + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                       " features");
    ids.push_back(cells[0]);
    labels.push_back(cells[1]);
    for (std::size_t c = 2; c < cells.size(); ++c) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[c].size() || cells[c].empty())
        throw InputError(a.embeddings + ":" + std::to_string(lineno) + ": bad value '" + cells[c] + "'");
      values.push_back(v);
    }
  }
  const Tensor x(ids.size(), width, std::move(values));
  const TsneResult r = tsne(x, a.cfg);
  std::ostringstream out;
  out << "id,x,y,series_label\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out << ids[i] << "," << fmt17(r.y(i, 0)) << "," << fmt17(r.y(i, 1)) << "," << labels[i] << "\n";
  ensure_parent(a.out);
  write_text(a.out, out.str());
  echo_config(sub, a.out + ".config.json");
  std::cout << "projected " << ids.size() << " points; KL " << r.kl_initial << " -> " << r.kl_final << " -> " << a.out
            << "\n";
}

std::string active_subcommand(int argc, char** argv, const std::vector<std::string>& names) {
  for (int i = 1; i < argc; ++i)
    for (const auto& n : names)
      if (argv[i] == n) return n;
  return "";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"descfm: descriptor-pretrained message-passing models for molecular property prediction"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  const std::vector<std::string> names{"featurize", "pretrain", "finetune", "predict",
                                       "benchmark", "report",   "fingerprint", "project"};
  app.set_config("--config", "", "JSON file with option values (flags override it)");
  app.config_formatter(std::make_shared<JsonConfig>(active_subcommand(argc, argv, names)));

  FeaturizeArgs fa;
  auto* featurize_cmd = app.add_subcommand("featurize", "SMILES file -> CHMD descriptor matrix");
  featurize_cmd->add_option("--input", fa.input, "SMILES file (or CSV with a smiles column)")->required();
  featurize_cmd->add_option("--out", fa.out, "output CHMD path")->required();
  featurize_cmd->add_option("--csv", fa.csv, "also write the matrix as CSV");

  PretrainArgs pa;
  auto* pretrain_cmd = app.add_subcommand("pretrain", "corpus + descriptors -> pretrained CHMC checkpoint");
  pretrain_cmd->add_option("--corpus", pa.corpus, "SMILES corpus")->required();
  pretrain_cmd->add_option("--descriptors", pa.descriptors, "CHMD for the corpus (computed when omitted)");
  pretrain_cmd->add_option("--out", pa.out, "output checkpoint")->required();
  pretrain_cmd->add_option("--pca-out", pa.pca_out, "also fit and save a scaler+PCA projector");
  pretrain_cmd->add_option("--pca-threshold", pa.pca_threshold, "explained variance kept by the projector");
  pretrain_cmd->add_option("--history", pa.history, "per-epoch history CSV");
  pretrain_cmd->add_option("--hidden-size", pa.arch.hidden_size);
  pretrain_cmd->add_option("--depth", pa.arch.depth, "message-passing iterations");
  pretrain_cmd->add_option("--ffn-layers", pa.arch.ffn_layers, "hidden layers in the output network");
  pretrain_cmd->add_option("--ffn-hidden", pa.arch.ffn_hidden, "output network width (0 = hidden size)");
  pretrain_cmd->add_option("--epochs", pa.cfg.epochs);
  pretrain_cmd->add_option("--batch-size", pa.cfg.batch_size);
  pretrain_cmd->add_option("--lr", pa.cfg.lr);
  pretrain_cmd->add_option("--warmup-epochs", pa.cfg.warmup_epochs);
  pretrain_cmd->add_option("--mask-fraction", pa.cfg.mask_fraction, "valid cells dropped from each batch loss");
  flag(pretrain_cmd, "--no-validity-mask", pa.no_validity_mask);
  flag(pretrain_cmd, "--no-random-mask", pa.no_random_mask);
  pretrain_cmd->add_option("--holdout-fraction", pa.cfg.holdout_fraction);
  pretrain_cmd->add_option("--clip-sigmas", pa.clip_sigmas, "winsorization bound for scaled targets");
  pretrain_cmd->add_option("--seed", pa.cfg.seed);

  FinetuneArgs ta;
  auto* finetune_cmd = app.add_subcommand("finetune", "checkpoint + labeled CSV -> fine-tuned checkpoint");
  finetune_cmd->add_option("--checkpoint", ta.checkpoint, "pretrained checkpoint");
  flag(finetune_cmd, "--scratch", ta.scratch, "start from a randomly initialised model instead");
  finetune_cmd->add_option("--data", ta.data, "CSV with smiles,target[,split]; test rows are skipped")->required();
  finetune_cmd->add_option("--out", ta.out, "output checkpoint")->required();
  finetune_cmd->add_option("--task", ta.task, "regression or binary_classification");
  finetune_cmd->add_option("--history", ta.history, "per-epoch history CSV");
  finetune_cmd->add_option("--hidden-size", ta.arch.hidden_size, "with --scratch");
  finetune_cmd->add_option("--depth", ta.arch.depth, "with --scratch");
  finetune_cmd->add_option("--ffn-layers", ta.arch.ffn_layers, "with --scratch");
  finetune_cmd->add_option("--epochs", ta.cfg.epochs);
  finetune_cmd->add_option("--batch-size", ta.cfg.batch_size);
  finetune_cmd->add_option("--lr-head", ta.cfg.lr_head);
  finetune_cmd->add_option("--lr-mp", ta.cfg.lr_mp, "encoder learning rate");
  finetune_cmd->add_option("--val-fraction", ta.cfg.val_fraction);
  finetune_cmd->add_option("--patience", ta.cfg.patience);
  flag(finetune_cmd, "--freeze-mp", ta.cfg.freeze_mp, "keep encoder weights fixed");
  flag(finetune_cmd, "--allow-small", ta.cfg.allow_small, "permit fewer than 10 training rows");
  finetune_cmd->add_option("--seed", ta.cfg.seed);

  PredictArgs pra;
  auto* predict_cmd = app.add_subcommand("predict", "fine-tuned checkpoint + molecules -> predictions CSV");
  predict_cmd->add_option("--model", pra.model, "fine-tuned checkpoint")->required();
  predict_cmd->add_option("--input", pra.input, "SMILES file or CSV with a smiles column")->required();
  predict_cmd->add_option("--out", pra.out, "output CSV")->required();

  BenchmarkArgs ba;
  if (const char* env = std::getenv("DESCFM_WORKERS")) {
    try {
      ba.workers = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "ignoring DESCFM_WORKERS='" << env << "'\n";
    }
  }
  auto* benchmark_cmd = app.add_subcommand("benchmark", "suite + roster -> replicate results CSV");
  benchmark_cmd->add_option("--suite", ba.suite, "suite JSON")->required();
  benchmark_cmd->add_option("--roster", ba.roster, "model roster JSON")->required();
  benchmark_cmd->add_option("--out-dir", ba.out_dir, "output directory")->required();
  benchmark_cmd->add_option("--replicates", ba.replicates, "seeds 1..n per benchmark and model");
  benchmark_cmd->add_option("--workers", ba.workers, "concurrent replicate runs (default from DESCFM_WORKERS)");

  ReportArgs ra;
  auto* report_cmd = app.add_subcommand("report", "results CSV -> winners, win rates, cliff consistency");
  report_cmd->add_option("--results", ra.results, "results CSV from benchmark")->required();
  report_cmd->add_option("--out-dir", ra.out_dir, "output directory")->required();
  report_cmd->add_option("--alpha", ra.alpha, "significance level");

  FingerprintArgs fpa;
  auto* fingerprint_cmd = app.add_subcommand("fingerprint", "molecules or series -> embedding CSV");
  fingerprint_cmd->add_option("--input", fpa.input, "SMILES file or CSV");
  fingerprint_cmd->add_option("--series", fpa.series, "series JSON; also sorts each series by cosine distance");
  fingerprint_cmd->add_option("--out", fpa.out, "embedding CSV")->required();
  fingerprint_cmd->add_option("--sort-out", fpa.sort_out, "per-series sorting CSV (with --series)");
  fingerprint_cmd->add_option("--kind", fpa.kind, "learned or morgan");
  fingerprint_cmd->add_option("--checkpoint", fpa.checkpoint, "checkpoint for learned fingerprints");
  fingerprint_cmd->add_option("--radius", fpa.radius, "Morgan radius");
  fingerprint_cmd->add_option("--width", fpa.width, "Morgan width");

  ProjectArgs pja;
  auto* project_cmd = app.add_subcommand("project", "embedding CSV -> 2-D t-SNE coordinates");
  project_cmd->add_option("--embeddings", pja.embeddings, "CSV written by fingerprint")->required();
  project_cmd->add_option("--out", pja.out, "output CSV id,x,y,series_label")->required();
  project_cmd->add_option("--perplexity", pja.cfg.perplexity);
  project_cmd->add_option("--iters", pja.cfg.iters);
  project_cmd->add_option("--lr", pja.cfg.lr);
  project_cmd->add_option("--exaggeration", pja.cfg.exaggeration);
  project_cmd->add_option("--exaggeration-iters", pja.cfg.exaggeration_iters);
  flag(project_cmd, "--random-init", pja.random_init, "random-normal start instead of PCA");
  project_cmd->add_option("--seed", pja.cfg.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*featurize_cmd) run_featurize(featurize_cmd, fa);
    if (*pretrain_cmd) run_pretrain(pretrain_cmd, pa);
    if (*finetune_cmd) run_finetune(finetune_cmd, ta);
    if (*predict_cmd) run_predict(predict_cmd, pra);
    if (*benchmark_cmd) run_benchmark(benchmark_cmd, ba);
    if (*report_cmd) run_report(report_cmd, ra);
    if (*fingerprint_cmd) run_fingerprint(fingerprint_cmd, fpa);
    if (*project_cmd) run_project(project_cmd, pja);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
