#include "pem/learn/car.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>

namespace pem::learn {

bool Adjacency::linked(int a, int b) const {
  const auto& row = neighbors[static_cast<std::size_t>(a)];
  return std::binary_search(row.begin(), row.end(), b);
}

int Adjacency::components() const {
  std::vector<bool> seen(neighbors.size(), false);
  int count = 0;
  for (std::size_t start = 0; start < neighbors.size(); ++start) {
    if (seen[start]) continue;
    ++count;
    std::queue<int> todo;
    todo.push(static_cast<int>(start));
    seen[start] = true;
    while (!todo.empty()) {
      const int c = todo.front();
      todo.pop();
      for (int n : neighbors[static_cast<std::size_t>(c)]) {
        if (!seen[static_cast<std::size_t>(n)]) {
          seen[static_cast<std::size_t>(n)] = true;
          todo.push(n);
        }
      }
    }
  }
  return count;
}

int Adjacency::isolated() const {
  return static_cast<int>(std::count_if(neighbors.begin(), neighbors.end(),
                                        [](const auto& row) { return row.empty(); }));
}

Adjacency build_adjacency(const GridSpec& grid) {
  validate(grid);
  const int rings = grid.n_rings();
  const int sectors = grid.n_sectors();
  Adjacency adj;
  adj.neighbors.resize(static_cast<std::size_t>(grid.n_conditions()));
  for (int occ = 0; occ < kOcclusionLevels; ++occ) {
    for (int ring = 0; ring < rings; ++ring) {
      for (int sector = 0; sector < sectors; ++sector) {
        const auto level = static_cast<OcclusionLevel>(occ);
        const int self = index_of({level, ring, sector}, grid).index;
        auto& row = adj.neighbors[static_cast<std::size_t>(self)];
        auto link = [&](int r, int s) {
          const int other = index_of({level, r, s}, grid).index;
          if (other != self) row.push_back(other);
        };
        link(ring, (sector + 1) % sectors);
        link(ring, (sector + sectors - 1) % sectors);
        if (ring > 0) link(ring - 1, sector);
        if (ring + 1 < rings) link(ring + 1, sector);
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
      }
    }
  }
  return adj;
}

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
double sigmoid(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

class Objective {
 public:
  Objective(const CarField& field, const CarSpec& spec, double center)
      : field_(field), spec_(spec), center_(center) {
    const int n = spec.adjacency.size();
    const int deficiency = spec.alpha >= 1.0 ? spec.adjacency.components() : spec.adjacency.isolated();
    tau_numerator_ = std::max(0.5 * static_cast<double>(n - deficiency) + spec.precision_shape - 1.0, 0.0);
  }

  bool observed(std::size_t c) const { return field_.observed[c] && field_.weight[c] > 0.0; }

  /// phi' (D - alpha B) phi
  double quadratic(const std::vector<double>& phi) const {
    double q = 0.0;
    for (std::size_t c = 0; c < phi.size(); ++c) {
      const auto& nb = spec_.adjacency.neighbors[c];
      double sum = 0.0;
      for (int j : nb) sum += phi[static_cast<std::size_t>(j)];
      q += phi[c] * (static_cast<double>(nb.size()) * phi[c] - spec_.alpha * sum);
    }
    return q;
  }

  double tau(double q) const { return tau_numerator_ / (0.5 * q + spec_.precision_rate); }

  double data_nll(std::size_t c, double x) const {
    if (!observed(c)) return 0.0;
    if (field_.likelihood == Likelihood::gaussian) {
      const double r = x - field_.value[c];
      return 0.5 * field_.weight[c] * r * r;
    }
    return field_.weight[c] * softplus(x) - field_.value[c] * x;
  }

  double data_grad(std::size_t c, double x) const {
    if (!observed(c)) return 0.0;
    if (field_.likelihood == Likelihood::gaussian) return field_.weight[c] * (x - field_.value[c]);
    return field_.weight[c] * sigmoid(x) - field_.value[c];
  }

  double data_curv(std::size_t c, double x) const {
    if (!observed(c)) return 0.0;
    if (field_.likelihood == Likelihood::gaussian) return field_.weight[c];
    const double s = sigmoid(x);
    return field_.weight[c] * s * (1.0 - s);
  }

  /// Negative log posterior with tau at its conditional optimum.
  double value(const std::vector<double>& phi) const {
    double f = 0.0;
    for (std::size_t c = 0; c < phi.size(); ++c) f += data_nll(c, center_ + phi[c]);
    const double q = quadratic(phi);
    const double t = tau(q);
    f += 0.5 * t * q + spec_.precision_rate * t;
    if (tau_numerator_ > 0.0) f -= tau_numerator_ * std::log(t);
    return f;
  }

  double center() const { return center_; }

 private:
  const CarField& field_;
  const CarSpec& spec_;
  double center_;
  double tau_numerator_ = 0.0;
};

void check_input(const CarField& field, const CarSpec& spec) {
  const auto n = static_cast<std::size_t>(spec.adjacency.size());
  if (field.value.size() != n || field.weight.size() != n || field.observed.size() != n) {
    throw CarError("field size does not match adjacency");
  }
  if (!(spec.alpha > 0.0 && spec.alpha <= 1.0)) throw CarError("alpha must lie in (0, 1]");
  if (!(spec.precision_shape > 0.0 && spec.precision_rate > 0.0)) {
    throw CarError("precision prior parameters must be positive");
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (int j : spec.adjacency.neighbors[c]) {
      if (j < 0 || static_cast<std::size_t>(j) >= n || static_cast<std::size_t>(j) == c ||
          !spec.adjacency.linked(j, static_cast<int>(c))) {
        throw CarError("adjacency must be symmetric with zero diagonal");
      }
    }
    if (!field.observed[c]) continue;
    if (!std::isfinite(field.value[c]) || !std::isfinite(field.weight[c]) || field.weight[c] < 0.0) {
      throw CarError("observed values and weights must be finite, weights non-negative");
    }
    if (field.likelihood == Likelihood::binomial &&
        (field.value[c] < 0.0 || field.value[c] > field.weight[c])) {
      throw CarError("binomial successes must lie in [0, trials]");
    }
  }
}

double pooled_center(const CarField& field, const CarSpec& spec) {
  if (!spec.centered) return 0.0;
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < field.value.size(); ++c) {
    if (!field.observed[c] || !(field.weight[c] > 0.0)) continue;
    if (field.likelihood == Likelihood::gaussian) {
      num += field.weight[c] * field.value[c];
    } else {
      num += field.value[c];
    }
    den += field.weight[c];
  }
  if (!(den > 0.0)) return spec.fallback_center;
  if (field.likelihood == Likelihood::gaussian) return num / den;
  const double p = (num + 0.5) / (den + 1.0);
  return std::log(p / (1.0 - p));
}

}  // namespace

CarFit fit_car(const CarField& field, const CarSpec& spec) {
  check_input(field, spec);
  const auto n = static_cast<std::size_t>(spec.adjacency.size());
  const Objective objective(field, spec, pooled_center(field, spec));
  const double center = objective.center();

  // start from the per-condition data where there is any
  std::vector<double> phi(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    if (!objective.observed(c)) continue;
    if (field.likelihood == Likelihood::gaussian) {
      phi[c] = field.value[c] - center;
    } else {
      const double p = (field.value[c] + 0.5) / (field.weight[c] + 1.0);
      phi[c] = std::log(p / (1.0 - p)) - center;
    }
  }

  std::vector<Eigen::Triplet<double>> prior;
  for (std::size_t c = 0; c < n; ++c) {
    const auto& nb = spec.adjacency.neighbors[c];
    prior.emplace_back(static_cast<int>(c), static_cast<int>(c), static_cast<double>(nb.size()));
    for (int j : nb) prior.emplace_back(static_cast<int>(c), j, -spec.alpha);
  }

  CarFit fit;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(n));
  std::vector<double> diag(n);
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;

  double f = objective.value(phi);
  for (int iter = 0;; ++iter) {
    const double tau = objective.tau(objective.quadratic(phi));
    // gradient and Hessian (tau held fixed) of the profiled objective
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(prior.size() + n);
    for (const auto& t : prior) triplets.emplace_back(t.row(), t.col(), tau * t.value());
    for (std::size_t c = 0; c < n; ++c) {
      const auto& nb = spec.adjacency.neighbors[c];
      double prior_grad = static_cast<double>(nb.size()) * phi[c];
      for (int j : nb) prior_grad -= spec.alpha * phi[static_cast<std::size_t>(j)];
      const double x = center + phi[c];
      grad[static_cast<Eigen::Index>(c)] = objective.data_grad(c, x) + tau * prior_grad;
      const double curv = objective.data_curv(c, x);
      // small ridge keeps unidentified directions solvable
      const double ridge = 1e-10 * (1.0 + tau);
      triplets.emplace_back(static_cast<int>(c), static_cast<int>(c), curv + ridge);
      diag[c] = tau * static_cast<double>(nb.size()) + curv + ridge;
    }

    double scaled = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double g = grad[static_cast<Eigen::Index>(c)];
      scaled += g * g / diag[c];
    }
    fit.gradient_norm = std::sqrt(scaled);
    fit.iterations = iter;
    fit.precision = tau;
    if (fit.gradient_norm < spec.tolerance) {
      fit.converged = true;
      break;
    }
    if (iter >= spec.max_iterations) break;

    Eigen::SparseMatrix<double> hessian(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    hessian.setFromTriplets(triplets.begin(), triplets.end());
    solver.compute(hessian);
    if (solver.info() != Eigen::Success) break;
    const Eigen::VectorXd step = solver.solve(-grad);
    if (solver.info() != Eigen::Success || !step.allFinite()) break;

    const double slope = grad.dot(step);
    double scale = 1.0;
    bool accepted = false;
    std::vector<double> trial(n);
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      for (std::size_t c = 0; c < n; ++c) trial[c] = phi[c] + scale * step[static_cast<Eigen::Index>(c)];
      const double ft = objective.value(trial);
      if (std::isfinite(ft) && ft <= f + 1e-4 * scale * slope) {
        phi.swap(trial);
        f = ft;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // no further decrease is representable; take the Newton point anyway
      // only if it does not increase the objective
      for (std::size_t c = 0; c < n; ++c) trial[c] = phi[c] + step[static_cast<Eigen::Index>(c)];
      const double ft = objective.value(trial);
      if (!(ft <= f)) break;
      phi.swap(trial);
      f = ft;
    }
  }

  fit.center = center;
  fit.latent.resize(n);
  for (std::size_t c = 0; c < n; ++c) fit.latent[c] = center + phi[c];
  return fit;
}

}  // namespace pem::learn
