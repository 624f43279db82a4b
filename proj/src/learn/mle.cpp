#include "pem/learn/mle.hpp"

#include <cmath>
#include <limits>

namespace pem::learn {

std::string_view field_name(Field f) {
  switch (f) {
    case Field::a01: return "a01";
    case Field::a11: return "a11";
    case Field::mu_r: return "mu_r";
    case Field::mu_theta: return "mu_theta";
    case Field::sigma_r: return "sigma_r";
    case Field::sigma_theta: return "sigma_theta";
    case Field::rho: return "rho";
  }
  return "?";
}

std::optional<Field> field_from_name(std::string_view name) {
  for (Field f : kAllFields) {
    if (field_name(f) == name) return f;
  }
  return std::nullopt;
}

RawFields estimate_mle(const PartitionStats& stats) {
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  const std::size_t n = stats.conditions.size();
  RawFields raw;
  for (auto& v : raw.value) v.assign(n, kNaN);
  for (auto& e : raw.empty) e.assign(n, true);
  raw.sample_count.assign(n, 0);

  auto set = [&](Field f, std::size_t c, double value) {
    raw.value[static_cast<std::size_t>(f)][c] = value;
    raw.empty[static_cast<std::size_t>(f)][c] = false;
  };

  for (std::size_t c = 0; c < n; ++c) {
    const ConditionStats& cs = stats.conditions[c];
    const auto from0 = cs.counts[0][0] + cs.counts[0][1];
    const auto from1 = cs.counts[1][0] + cs.counts[1][1];
    if (from0 > 0) set(Field::a01, c, static_cast<double>(cs.counts[0][1]) / static_cast<double>(from0));
    if (from1 > 0) set(Field::a11, c, static_cast<double>(cs.counts[1][1]) / static_cast<double>(from1));

    const auto m = static_cast<std::int64_t>(cs.samples.size());
    raw.sample_count[c] = m;
    if (m == 0) continue;

    double mean_r = 0.0, mean_t = 0.0;
    for (const auto& s : cs.samples) {
      mean_r += s.eps_r;
      mean_t += s.eps_theta;
    }
    mean_r /= static_cast<double>(m);
    mean_t /= static_cast<double>(m);
    set(Field::mu_r, c, mean_r);
    set(Field::mu_theta, c, mean_t);
    if (m < 2) continue;

    double srr = 0.0, stt = 0.0, srt = 0.0;
    for (const auto& s : cs.samples) {
      const double dr = s.eps_r - mean_r;
      const double dt = s.eps_theta - mean_t;
      srr += dr * dr;
      stt += dt * dt;
      srt += dr * dt;
    }
    const double denom = static_cast<double>(m - 1);
    set(Field::sigma_r, c, std::sqrt(srr / denom));
    set(Field::sigma_theta, c, std::sqrt(stt / denom));
    if (srr > 0.0 && stt > 0.0) set(Field::rho, c, srt / std::sqrt(srr * stt));
  }
  return raw;
}

}  // namespace pem::learn
