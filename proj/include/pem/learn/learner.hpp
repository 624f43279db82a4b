#pragma once

#include <array>
#include <stdexcept>
#include <string>

#include "pem/core/model.hpp"
#include "pem/learn/car.hpp"
#include "pem/learn/dataset.hpp"
#include "pem/learn/mle.hpp"
#include "pem/learn/stats.hpp"

namespace pem::learn {

struct LearnOptions {
  double gate_m = kDefaultGateM;
  double alpha = 0.95;
  double precision_shape = 1.0;
  double precision_rate = 1.0;
  int max_iterations = 10000;
  double tolerance = 1e-6;
  std::string metadata;
  /// Fit the seven fields concurrently (OpenMP). The serial path gives the
  /// same model bit for bit.
  bool parallel = true;
};

struct FieldReport {
  Field field = Field::a01;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;
  double precision = 0.0;
  double center = 0.0;
  int observed_conditions = 0;
};

struct LearnResult {
  PemModel model;
  std::array<FieldReport, kFieldCount> fields;
  PartitionStats stats;
};

class NoObservationsError : public std::runtime_error {
 public:
  NoObservationsError() : std::runtime_error("no observations") {}
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(Field field, double gradient_norm);
  Field field() const { return field_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  Field field_;
  double gradient_norm_;
};

/// Latent-scale data for one field: binomial log-odds for transitions,
/// Gaussian for means (precision n / s^2), log-sigma (precision 2(n-1)) and
/// Fisher-z correlation (precision max(n-3, 1)).
CarField field_data(const PartitionStats& stats, const RawFields& raw, Field field);

/// Level used for a field with no data anywhere.
double fallback_center(const PartitionStats& stats, Field field);

/// Natural-scale parameter from its latent value, clamped into the model's
/// valid domain.
double from_latent(Field field, double latent);

CarSpec car_spec_for(const GridSpec& grid, const LearnOptions& options, const PartitionStats& stats,
                     Field field);

/// Matching, statistics, MLE, then one centered CAR fit per field.
/// Throws NoObservationsError when no ground-truth object falls inside the
/// grid, ConvergenceError when a field fit does not converge.
LearnResult learn_pem(const PerceptionDataset& dataset, const GridSpec& grid,
                      const LearnOptions& options = {});

/// Fitting stage alone, from precomputed statistics.
LearnResult fit_model(PartitionStats stats, const LearnOptions& options = {});

}  // namespace pem::learn
