#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tactile/nn/network.hpp"
#include "tactile/train/dataset.hpp"
#include "tactile/train/metrics.hpp"

namespace tactile::train {

struct TrainOptions {
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  std::size_t patience = 20;
  std::size_t max_epochs = 300;
  double data_fraction = 1.0;  // of the train split, sampled by seed
  bool rmse_loss = false;      // minimize RMSE itself instead of MSE
  // Train against labels scaled to unit RMS by a power of two, folded into
  // the fusion layer so the saved model still predicts newtons.
  bool normalize_labels = true;
  std::uint64_t seed = 1;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;  // mean over batches, in loss units
  double val_rmse = 0.0;    // N, over every model output
};

struct TrainReport {
  std::vector<EpochRecord> epochs;  // epoch 0 is the untrained model
  Metrics test;
  Metrics train;
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  double best_val_rmse = 0.0;
  double wall_seconds = 0.0;
  double label_scale = 1.0;
  double data_fraction = 1.0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  std::vector<std::size_t> frozen_layers;
};

/// Mini-batch Adam on the train split with early stopping on validation
/// RMSE; the best-validation parameters are restored before the final
/// metrics are taken on the test split. Metrics cover the model's output
/// bins. Throws ValidationError on an architecture/dataset mismatch and
/// NumericalError (after restoring the last good parameters) when the loss
/// or a gradient stops being finite.
TrainReport train(nn::Network<float>& model, const Dataset& data, const TrainOptions& opt);

/// Eval-mode predictions for the given samples.
std::vector<ForceDistribution> predict_samples(nn::Network<float>& model, const Dataset& data,
                                               std::span<const std::size_t> indices);

Metrics evaluate(nn::Network<float>& model, const Dataset& data, std::span<const std::size_t> indices);

/// Throws ValidationError unless the model can consume the dataset.
void check_compatible(const nn::Architecture& arch, const Dataset& data);

/// Per-epoch CSV "epoch,train_loss,val_rmse" followed by the summary
/// line. No timings, so reruns compare equal.
std::string report_csv(const TrainReport& report);
/// "RMSE_dist x y z | RMSE_total x y z"
std::string summary_line(const Metrics& m);

/// %.6g
std::string fmt(double v);

}  // namespace tactile::train
