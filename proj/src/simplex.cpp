#include "photstat/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "photstat/errors.hpp"

namespace photstat {

namespace {

struct Vertex {
  std::vector<double> x;
  double f;
};

}  // namespace

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                          std::vector<double> start, const std::vector<double>& step, const std::vector<double>& lower,
                          const std::vector<double>& upper, const SimplexOptions& options) {
  const std::size_t dim = start.size();
  if (dim == 0 || step.size() != dim || lower.size() != dim || upper.size() != dim) {
    throw DomainError("simplex dimensions do not match");
  }

  int evaluations = 0;
  auto project = [&](std::vector<double> x) {
    for (std::size_t j = 0; j < dim; ++j) x[j] = std::clamp(x[j], lower[j], upper[j]);
    return x;
  };
  auto evaluate = [&](const std::vector<double>& x) {
    ++evaluations;
    const double f = objective(x);
    return std::isnan(f) ? std::numeric_limits<double>::infinity() : f;
  };

  std::vector<Vertex> simplex;
  simplex.reserve(dim + 1);
  start = project(std::move(start));
  simplex.push_back({start, evaluate(start)});
  for (std::size_t j = 0; j < dim; ++j) {
    std::vector<double> x = start;
    x[j] += step[j];
    if (x[j] > upper[j]) x[j] = start[j] - step[j];
    x = project(std::move(x));
    simplex.push_back({x, evaluate(x)});
  }

  auto by_value = [](const Vertex& l, const Vertex& r) { return l.f < r.f; };
  bool converged = false;
  while (evaluations < options.max_evaluations) {
    std::sort(simplex.begin(), simplex.end(), by_value);
    const Vertex& best = simplex.front();

    double f_spread = 0.0;
    double x_spread = 0.0;
    for (std::size_t i = 1; i <= dim; ++i) {
      f_spread = std::max(f_spread, std::abs(simplex[i].f - best.f));
      for (std::size_t j = 0; j < dim; ++j) x_spread = std::max(x_spread, std::abs(simplex[i].x[j] - best.x[j]));
    }
    if (f_spread <= options.ftol && x_spread <= options.xtol) {
      converged = true;
      break;
    }

    std::vector<double> centroid(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[i].x[j] / static_cast<double>(dim);
    }
    auto along = [&](double t) {
      std::vector<double> x(dim);
      for (std::size_t j = 0; j < dim; ++j) x[j] = centroid[j] + t * (simplex[dim].x[j] - centroid[j]);
      return project(std::move(x));
    };

    Vertex& worst = simplex[dim];
    const Vertex reflected{along(-1.0), 0.0};
    const double f_reflected = evaluate(reflected.x);
    if (f_reflected < simplex[0].f) {
      std::vector<double> expanded = along(-2.0);
      const double f_expanded = evaluate(expanded);
      if (f_expanded < f_reflected) {
        worst = {std::move(expanded), f_expanded};
      } else {
        worst = {reflected.x, f_reflected};
      }
      continue;
    }
    if (f_reflected < simplex[dim - 1].f) {
      worst = {reflected.x, f_reflected};
      continue;
    }
    const bool outside = f_reflected < worst.f;
    std::vector<double> contracted = along(outside ? -0.5 : 0.5);
    const double f_contracted = evaluate(contracted);
    if (f_contracted < (outside ? f_reflected : worst.f)) {
      worst = {std::move(contracted), f_contracted};
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 1; i <= dim; ++i) {
      for (std::size_t j = 0; j < dim; ++j) {
        simplex[i].x[j] = simplex[0].x[j] + 0.5 * (simplex[i].x[j] - simplex[0].x[j]);
      }
      simplex[i].f = evaluate(simplex[i].x);
    }
  }

  std::sort(simplex.begin(), simplex.end(), by_value);
  return {simplex.front().x, simplex.front().f, evaluations, converged};
}

}  // namespace photstat
