#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "descfm/chmc.hpp"
#include "descfm/descriptors.hpp"
#include "descfm/nn.hpp"
#include "descfm/train.hpp"

namespace descfm {

// ---------------------------------------------------------------------------
// PCA

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Tensor vectors;              // column j pairs with values[j]
  std::size_t sweeps = 0;
};

// Cyclic Jacobi rotations. Throws ShapeError for a non-square input.
SymmetricEigen jacobi_eigen(const Tensor& symmetric, double tol = 1e-14, std::size_t max_sweeps = 100);

struct PcaModel {
  std::vector<std::string> names;
  std::vector<double> mean;          // per input column
  Tensor components;                 // cols x k, orthonormal columns
  std::vector<double> eigenvalues;   // all of them, descending (population covariance)
  std::vector<double> ratios;        // eigenvalue / trace
  double threshold = 0.95;

  std::size_t k() const { return components.cols(); }
  std::size_t input_dim() const { return mean.size(); }
  double total_variance() const;
  double captured_ratio() const;

  Tensor project(const Tensor& x) const;      // n x cols -> n x k
  Tensor reconstruct(const Tensor& z) const;  // n x k -> n x cols
};

// Rows of x are observations. k is the smallest count whose cumulative ratio
// reaches the threshold. Throws InputError for fewer than two rows or zero
// total variance.
PcaModel fit_pca(const Tensor& x, double variance_threshold = 0.95, std::vector<std::string> names = {});

// Masked cells become 0 (the column mean in standardized space).
Tensor impute_zero(const DescriptorMatrix& d);

// Scaler plus PCA, fitted on raw descriptors. Maps raw descriptor rows to
// principal-component scores.
struct PcaProjector {
  ScalerStats scaler;
  PcaModel pca;

  Tensor transform(const DescriptorMatrix& raw) const;
};

PcaProjector fit_projector(const DescriptorMatrix& raw, double variance_threshold = 0.95);

ChmcFile projector_to_chmc(const PcaProjector& p);
PcaProjector projector_from_chmc(const ChmcFile& f);

// ---------------------------------------------------------------------------
// MLP on fixed descriptor features

struct BaselineConfig {
  Task task = Task::Regression;
  std::size_t hidden = 1800;
  std::size_t hidden_layers = 2;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double val_fraction = 0.1;
  std::size_t patience = 10;
  bool allow_small = false;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class PcaMode { Prefitted, Local };

// descriptor_fnn: scaler -> MLP. pcamlp: scaler -> PCA -> MLP.
struct FeatureModel {
  std::string kind;  // "descriptor_fnn" or "pcamlp"
  ScalerStats scaler;
  std::optional<PcaModel> pca;
  FeedForward net;
  TaskHead head;
  nlohmann::json metadata = nlohmann::json::object();

  // Network inputs for raw descriptor rows.
  Tensor features(const DescriptorMatrix& raw) const;
};

struct BaselineResult {
  FeatureModel model;
  FitHistory history;
};

// `raw` holds unscaled descriptor values; any column set works as long as
// prediction uses the same names.
BaselineResult fit_descriptor_fnn(const DescriptorMatrix& raw, std::span<const double> labels, const BaselineConfig& cfg,
                                  const LogFn& log = {});

// Prefitted mode uses `prefit` as is; local mode fits a projector on `raw`.
BaselineResult fit_pcamlp(const DescriptorMatrix& raw, std::span<const double> labels, PcaMode mode,
                          const PcaProjector* prefit, const BaselineConfig& cfg, const LogFn& log = {});

std::vector<double> predict(const FeatureModel& model, const DescriptorMatrix& raw);

ChmcFile feature_model_to_chmc(const FeatureModel& m);
FeatureModel feature_model_from_chmc(const ChmcFile& f);

}  // namespace descfm
