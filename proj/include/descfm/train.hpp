#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "descfm/chmc.hpp"
#include "descfm/descriptors.hpp"
#include "descfm/dmpnn.hpp"

namespace descfm {

using LogFn = std::function<void(const std::string&)>;

enum class Task { Regression, BinaryClassification };
std::string to_string(Task t);
Task task_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Checkpoints

// Output transform attached to a fine-tuned model.
struct TaskHead {
  Task task = Task::Regression;
  double label_mean = 0.0;  // regression only
  double label_std = 1.0;
};

struct Checkpoint {
  MpnnModel model;
  std::vector<std::string> descriptor_names;
  std::optional<ScalerStats> scaler;
  std::optional<TaskHead> task;  // set once fine-tuned
  nlohmann::json metadata = nlohmann::json::object();
};

ChmcFile checkpoint_to_chmc(const Checkpoint& c);
Checkpoint checkpoint_from_chmc(const ChmcFile& f);
void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

nlohmann::json to_json(const MpnnConfig& c);
MpnnConfig mpnn_config_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// Pre-training

struct PretrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  std::size_t warmup_epochs = 2;
  // Each step, this fraction of valid target cells is left out of the loss.
  double mask_fraction = 0.15;
  bool use_validity_mask = true;
  bool use_random_mask = true;
  double holdout_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PretrainEpoch {
  std::size_t epoch = 0;  // 0 = before training
  double train_loss = 0.0;
  double heldout_rmse = 0.0;
  std::size_t skipped_batches = 0;
};

struct PretrainResult {
  Checkpoint checkpoint;  // weights from the best held-out epoch
  std::vector<PretrainEpoch> history;
  std::size_t best_epoch = 0;
};

// targets: standardized (and clipped) descriptor rows aligned with `mols`.
PretrainResult pretrain(std::span<const MolFeatures> mols, const DescriptorMatrix& targets, const MpnnConfig& arch,
                        const PretrainConfig& cfg, const LogFn& log = {});

// Masked MSE for one batch: validity mask AND NOT random drop. Exposed for tests.
Tensor pretrain_loss_mask(const DescriptorMatrix& targets, std::span<const std::size_t> rows, const PretrainConfig& cfg,
                          std::mt19937_64& rng);
Tensor gather_targets(const DescriptorMatrix& targets, std::span<const std::size_t> rows);

// Standardized RMSE over valid cells of the given rows.
double heldout_rmse(const MpnnModel& model, std::span<const MolFeatures> mols, const DescriptorMatrix& targets,
                    std::span<const std::size_t> rows);

// ---------------------------------------------------------------------------
// Generic supervised loop shared by fine-tuning and the baselines

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
};

// Seeded random split. For classification both parts must contain both
// classes; the split is redrawn once, then InputError.
SplitIndices split_train_val(std::span<const double> labels, Task task, double val_fraction, std::mt19937_64& rng);

struct ParamGroup {
  std::vector<Parameter*> params;
  double lr = 1e-3;
};

struct FitOptions {
  Task task = Task::Regression;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t patience = 10;
  std::uint64_t seed = 0;
};

struct FitHistory {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 1-based index into val_loss
  bool stopped_early = false;
};

// Produces predictions (rows x 1) for the given row indices.
using BatchForward = std::function<Var(Tape&, std::span<const std::size_t> rows)>;

// Minimises MSE (regression) or logistic loss on `targets` (already
// transformed). Restores the parameters of the best validation epoch.
FitHistory fit_supervised(const BatchForward& forward, std::span<const double> targets, const SplitIndices& split,
                          std::span<const ParamGroup> groups, const FitOptions& opt, const LogFn& log = {});

// ---------------------------------------------------------------------------
// Fine-tuning

struct FinetuneConfig {
  Task task = Task::Regression;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr_head = 1e-3;
  double lr_mp = 1e-4;  // defaults to lr_head / 10
  double val_fraction = 0.1;
  std::size_t patience = 10;
  bool freeze_mp = false;
  bool allow_small = false;  // permit fewer than 10 training rows
  bool reinit_head = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FinetuneResult {
  Checkpoint checkpoint;  // model with task head attached
  FitHistory history;
};

FinetuneResult finetune(const Checkpoint& base, std::span<const MolFeatures> mols, std::span<const double> labels,
                        const FinetuneConfig& cfg, const LogFn& log = {});

// Shared by fine-tuning and the baselines: finite labels, binary labels in
// {0,1}, at least 10 rows unless allow_small.
void check_labels(std::span<const double> labels, Task task, bool allow_small, const std::string& who);
// Regression: mean/std over `rows` (std 0 becomes 1). Classification: identity.
TaskHead fit_task_head(std::span<const double> labels, Task task, std::span<const std::size_t> rows);
// Raw model output to the reported value.
double apply_task_head(const TaskHead& head, double output);

// Regression: un-standardized values. Classification: probabilities in (0,1).
std::vector<double> predict(const Checkpoint& model, std::span<const MolFeatures> mols, std::size_t batch_size = 128);

// Parses and featurizes; errors name the offending row.
std::vector<MolFeatures> featurize_smiles(std::span<const std::string> smiles);

// ---------------------------------------------------------------------------
// Labeled dataset CSV: header with `smiles`, `target`, optional `split`
// (train/test) and any extra columns (kept as strings).

struct LabeledDataset {
  std::vector<std::string> smiles;
  std::vector<double> target;
  std::vector<std::string> split;  // empty strings when the column is absent
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> extra;  // per row, aligned with header

  std::size_t size() const { return smiles.size(); }
  // Value of an extra column; throws InputError when absent.
  std::vector<std::string> column(const std::string& name) const;
};

LabeledDataset read_labeled_csv(const std::string& path);

}  // namespace descfm
