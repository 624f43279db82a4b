#include "pem/learn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace pem::learn {

namespace {

constexpr double kVarianceFloor = 1e-12;
constexpr double kSigmaFloor = 1e-9;
constexpr double kRhoLimit = 1.0 - 1e-9;
constexpr double kProbabilityLimit = 1e-6;

std::string convergence_message(Field field, double gradient_norm) {
  std::ostringstream out;
  out << "CAR fit of " << field_name(field) << " did not converge (gradient norm " << gradient_norm << ")";
  return out.str();
}

double logit(double p) { return std::log(p / (1.0 - p)); }

// pooled within-condition variance of one error component
double pooled_variance(const RawFields& raw, Field sigma_field) {
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < raw.sample_count.size(); ++c) {
    if (raw.is_empty(sigma_field, c)) continue;
    const double s = raw[sigma_field][c];
    const double dof = static_cast<double>(raw.sample_count[c] - 1);
    num += dof * s * s;
    den += dof;
  }
  return den > 0.0 ? num / den : 1.0;
}

}  // namespace

ConvergenceError::ConvergenceError(Field field, double gradient_norm)
    : std::runtime_error(convergence_message(field, gradient_norm)),
      field_(field),
      gradient_norm_(gradient_norm) {}

CarField field_data(const PartitionStats& stats, const RawFields& raw, Field field) {
  const std::size_t n = stats.conditions.size();
  CarField out;
  out.value.assign(n, 0.0);
  out.weight.assign(n, 0.0);
  out.observed.assign(n, false);

  switch (field) {
    case Field::a01:
    case Field::a11: {
      out.likelihood = Likelihood::binomial;
      const int from = field == Field::a01 ? 0 : 1;
      for (std::size_t c = 0; c < n; ++c) {
        const auto& counts = stats.conditions[c].counts[static_cast<std::size_t>(from)];
        const auto trials = counts[0] + counts[1];
        if (trials == 0) continue;
        out.value[c] = static_cast<double>(counts[1]);
        out.weight[c] = static_cast<double>(trials);
        out.observed[c] = true;
      }
      break;
    }
    case Field::mu_r:
    case Field::mu_theta: {
      const Field spread = field == Field::mu_r ? Field::sigma_r : Field::sigma_theta;
      const double fallback_var = pooled_variance(raw, spread);
      for (std::size_t c = 0; c < n; ++c) {
        if (raw.is_empty(field, c)) continue;
        double var = raw.is_empty(spread, c) ? fallback_var : raw[spread][c] * raw[spread][c];
        var = std::max(var, kVarianceFloor);
        out.value[c] = raw[field][c];
        out.weight[c] = static_cast<double>(raw.sample_count[c]) / var;
        out.observed[c] = true;
      }
      break;
    }
    case Field::sigma_r:
    case Field::sigma_theta:
      for (std::size_t c = 0; c < n; ++c) {
        if (raw.is_empty(field, c)) continue;
        out.value[c] = std::log(std::max(raw[field][c], kSigmaFloor));
        out.weight[c] = 2.0 * static_cast<double>(raw.sample_count[c] - 1);
        out.observed[c] = true;
      }
      break;
    case Field::rho:
      for (std::size_t c = 0; c < n; ++c) {
        if (raw.is_empty(field, c)) continue;
        out.value[c] = std::atanh(std::clamp(raw[field][c], -kRhoLimit, kRhoLimit));
        out.weight[c] = std::max(static_cast<double>(raw.sample_count[c] - 3), 1.0);
        out.observed[c] = true;
      }
      break;
  }
  return out;
}

double fallback_center(const PartitionStats& stats, Field field) {
  switch (field) {
    case Field::a01:
    case Field::a11: {
      double observed = 0.0, detected = 0.0;
      for (const auto& c : stats.conditions) {
        observed += static_cast<double>(c.observed);
        detected += static_cast<double>(c.detected);
      }
      if (!(observed > 0.0)) return 0.0;
      return logit(std::clamp(detected / observed, kProbabilityLimit, 1.0 - kProbabilityLimit));
    }
    case Field::mu_r: return 1.0;
    case Field::mu_theta: return 0.0;
    case Field::sigma_r:
    case Field::sigma_theta: return std::log(0.01);
    case Field::rho: return 0.0;
  }
  return 0.0;
}

double from_latent(Field field, double latent) {
  switch (field) {
    case Field::a01:
    case Field::a11:
      return std::clamp(latent >= 0.0 ? 1.0 / (1.0 + std::exp(-latent))
                                      : std::exp(latent) / (1.0 + std::exp(latent)),
                        0.0, 1.0);
    case Field::mu_r:
    case Field::mu_theta: return latent;
    case Field::sigma_r:
    case Field::sigma_theta: return std::max(std::exp(latent), 1e-300);
    case Field::rho: return std::clamp(std::tanh(latent), -1.0 + 1e-12, 1.0 - 1e-12);
  }
  return latent;
}

CarSpec car_spec_for(const GridSpec& grid, const LearnOptions& options, const PartitionStats& stats,
                     Field field) {
  CarSpec spec;
  spec.alpha = options.alpha;
  spec.adjacency = build_adjacency(grid);
  spec.precision_shape = options.precision_shape;
  spec.precision_rate = options.precision_rate;
  spec.centered = true;
  spec.fallback_center = fallback_center(stats, field);
  spec.max_iterations = options.max_iterations;
  spec.tolerance = options.tolerance;
  return spec;
}

LearnResult fit_model(PartitionStats stats, const LearnOptions& options) {
  if (stats.total_observed() == 0) throw NoObservationsError();
  const GridSpec grid = stats.grid;
  const RawFields raw = estimate_mle(stats);

  std::array<CarFit, kFieldCount> fits;
  std::array<std::exception_ptr, kFieldCount> failures;
  std::array<int, kFieldCount> observed{};

  auto fit_one = [&](int i) {
    try {
      const Field f = kAllFields[static_cast<std::size_t>(i)];
      const CarField data = field_data(stats, raw, f);
      observed[static_cast<std::size_t>(i)] =
          static_cast<int>(std::count(data.observed.begin(), data.observed.end(), true));
      fits[static_cast<std::size_t>(i)] = fit_car(data, car_spec_for(grid, options, stats, f));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };

  if (options.parallel) {
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < kFieldCount; ++i) fit_one(i);
  } else {
    for (int i = 0; i < kFieldCount; ++i) fit_one(i);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  LearnResult result{PemModel::uniform(grid, perfect_params(), options.metadata), {}, std::move(stats)};
  for (std::size_t i = 0; i < kAllFields.size(); ++i) {
    const Field f = kAllFields[i];
    const CarFit& fit = fits[i];
    result.fields[i] = {f,      fit.converged, fit.iterations, fit.gradient_norm,
                        fit.precision, fit.center, observed[i]};
    if (!fit.converged) throw ConvergenceError(f, fit.gradient_norm);
    for (std::size_t c = 0; c < result.model.conditions.size(); ++c) {
      ConditionParams& p = result.model.conditions[c];
      const double v = from_latent(f, fit.latent[c]);
      switch (f) {
        case Field::a01: p.transition.a01 = v; break;
        case Field::a11: p.transition.a11 = v; break;
        case Field::mu_r: p.error.mu_r = v; break;
        case Field::mu_theta: p.error.mu_theta = v; break;
        case Field::sigma_r: p.error.sigma_r = v; break;
        case Field::sigma_theta: p.error.sigma_theta = v; break;
        case Field::rho: p.error.rho = v; break;
      }
    }
  }
  validate(result.model);
  return result;
}

LearnResult learn_pem(const PerceptionDataset& dataset, const GridSpec& grid, const LearnOptions& options) {
  validate(grid);
  PartitionStats stats = options.parallel ? accumulate_stats(dataset, grid, options.gate_m)
                                          : accumulate_stats_serial(dataset, grid, options.gate_m);
  return fit_model(std::move(stats), options);
}

}  // namespace pem::learn
