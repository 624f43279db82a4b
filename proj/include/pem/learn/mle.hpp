#pragma once

#include <array>
#include <optional>
#include <string_view>
#include <vector>

#include "pem/learn/stats.hpp"

namespace pem::learn {

/// The seven per-condition parameters of a model.
enum class Field { a01, a11, mu_r, mu_theta, sigma_r, sigma_theta, rho };
inline constexpr int kFieldCount = 7;
inline constexpr std::array<Field, kFieldCount> kAllFields = {
    Field::a01, Field::a11, Field::mu_r, Field::mu_theta, Field::sigma_r, Field::sigma_theta, Field::rho};

std::string_view field_name(Field f);
std::optional<Field> field_from_name(std::string_view name);

/// Unsmoothed per-condition estimates. `empty[f][c]` marks a value that the
/// data cannot define (no transitions out of the state, fewer than two
/// samples, or zero sample variance for rho); its `value` is NaN.
struct RawFields {
  std::array<std::vector<double>, kFieldCount> value;
  std::array<std::vector<bool>, kFieldCount> empty;
  std::vector<std::int64_t> sample_count;

  const std::vector<double>& operator[](Field f) const { return value[static_cast<std::size_t>(f)]; }
  bool is_empty(Field f, std::size_t c) const { return empty[static_cast<std::size_t>(f)][c]; }
};

/// Transition rows w_k. / sum_m w_km, sample means, sample standard
/// deviations (n - 1) and the Pearson correlation.
RawFields estimate_mle(const PartitionStats& stats);

}  // namespace pem::learn
