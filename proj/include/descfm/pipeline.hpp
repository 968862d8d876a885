#pragma once

#include <optional>
#include <string>
#include <vector>

#include "descfm/baselines.hpp"
#include "descfm/stats.hpp"
#include "descfm/train.hpp"

namespace descfm {

// ---------------------------------------------------------------------------
// Config <-> JSON. Readers start from the given defaults and reject unknown keys.

nlohmann::json to_json(const PretrainConfig& c);
nlohmann::json to_json(const FinetuneConfig& c);
nlohmann::json to_json(const BaselineConfig& c);
PretrainConfig apply_json(PretrainConfig c, const nlohmann::json& j, const std::string& where);
FinetuneConfig apply_json(FinetuneConfig c, const nlohmann::json& j, const std::string& where);
BaselineConfig apply_json(BaselineConfig c, const nlohmann::json& j, const std::string& where);
MpnnConfig apply_json(MpnnConfig c, const nlohmann::json& j, const std::string& where);

// ---------------------------------------------------------------------------
// Suites and rosters

struct BenchmarkSpec {
  std::string id;
  std::string dataset;  // resolved against the suite file's directory
  Task task = Task::Regression;
  std::string metric;
  Orientation orientation = Orientation::LowerBetter;
  std::optional<std::string> cliff_column;
};

// JSON list of {id, dataset, task, metric, orientation?, cliff_column?}.
std::vector<BenchmarkSpec> read_suite_json(const std::string& path);

// Model kinds:
//   finetune        pretrained checkpoint + fresh head ("checkpoint" required)
//   scratch         randomly initialised D-MPNN ("arch" optional)
//   descriptor_fnn  descriptor MLP
//   pcamlp          scaler -> PCA -> MLP; "projector" selects prefitted mode
struct ModelSpec {
  std::string id;
  std::string kind;
  std::string checkpoint;
  std::string projector;
  nlohmann::json arch = nlohmann::json::object();
  nlohmann::json options = nlohmann::json::object();
};

// JSON list of {id, kind, checkpoint?, projector?, arch?, options?}; paths
// resolved against the roster file's directory.
std::vector<ModelSpec> read_roster_json(const std::string& path);

// ---------------------------------------------------------------------------
// Benchmark execution

struct BenchmarkData {
  BenchmarkSpec spec;
  std::vector<MolFeatures> mols;
  DescriptorMatrix raw;
  std::vector<double> labels;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<bool> cliff;  // per row; empty without a cliff column
};

// Reads, parses and featurizes the dataset. Requires a split column with both
// train and test rows. Cliff benchmarks need cliff and noncliff test rows.
BenchmarkData load_benchmark(const BenchmarkSpec& spec);

struct LoadedModel {
  ModelSpec spec;
  std::optional<Checkpoint> base;
  std::optional<PcaProjector> projector;
};

LoadedModel load_model(const ModelSpec& spec);

// Train on the train rows with `seed`, score the test rows.
ReplicateOutcome run_replicate(const BenchmarkData& data, const LoadedModel& model, std::uint64_t seed,
                               const LogFn& log = {});

struct SuiteOptions {
  std::size_t replicates = 5;
  std::size_t workers = 1;
};

// Every (benchmark, model, seed) triple, possibly in parallel. Rows come back
// in suite, roster, seed order whatever the worker count.
std::vector<ReplicateResult> run_suite(const std::vector<BenchmarkData>& benchmarks,
                                       const std::vector<LoadedModel>& models, const SuiteOptions& opt,
                                       const LogFn& log = {});

}  // namespace descfm
