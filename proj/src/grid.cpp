#include "grid.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "errors.hpp"

namespace lavreg {

Grid::Grid(std::vector<double> nodes, std::vector<double> weights)
    : nodes_(std::move(nodes)), weights_(std::move(weights)) {
  require(!nodes_.empty(), ErrorCode::invalid_argument, "grid: empty node set");
  require(nodes_.size() == weights_.size(), ErrorCode::invalid_argument,
          "grid: nodes/weights length mismatch");
  double wsum = 0.0;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    require(nodes_[i] > 0.0 && nodes_[i] < 1.0, ErrorCode::invalid_argument,
            "grid: nodes must lie in (0,1)");
    if (i > 0)
      require(nodes_[i] > nodes_[i - 1], ErrorCode::invalid_argument,
              "grid: nodes must be strictly increasing");
    require(weights_[i] > 0.0, ErrorCode::invalid_argument,
            "grid: weights must be positive");
    wsum += weights_[i];
  }
  require(std::abs(wsum - 1.0) <= 1e-12, ErrorCode::invalid_argument,
          "grid: weights must sum to 1 within 1e-12");
  t_ = Eigen::Map<const Eigen::VectorXd>(nodes_.data(),
                                         static_cast<long>(nodes_.size()));
  w_ = Eigen::Map<const Eigen::VectorXd>(weights_.data(),
                                         static_cast<long>(weights_.size()));
}

GridPtr make_uniform_grid(int n) {
  require(n >= 2, ErrorCode::invalid_argument,
          "make_uniform_grid: n must be >= 2");
  std::vector<double> nodes(static_cast<size_t>(n)),
      weights(static_cast<size_t>(n), 1.0 / n);
  for (int i = 0; i < n; ++i)
    nodes[static_cast<size_t>(i)] = (i + 0.5) / n;
  return std::make_shared<Grid>(std::move(nodes), std::move(weights));
}

bool same_grid(const GridPtr& a, const GridPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->size() == b->size() && a->nodes() == b->nodes() &&
         a->weights() == b->weights();
}

GridFunction::GridFunction(GridPtr g, Eigen::VectorXd v)
    : grid(std::move(g)), values(std::move(v)) {
  require(grid != nullptr, ErrorCode::invalid_argument,
          "grid function: null grid");
  require(values.size() == grid->size(), ErrorCode::invalid_argument,
          "grid function: values length must equal grid size");
  require(values.allFinite(), ErrorCode::invalid_argument,
          "grid function: values must be finite");
}

GridFunction constant_function(const GridPtr& grid, double c) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  return GridFunction(grid, Eigen::VectorXd::Constant(grid->size(), c));
}

GridFunction sample_function(const GridPtr& grid,
                             const std::function<double(double)>& f) {
  require(grid != nullptr, ErrorCode::invalid_argument, "null grid");
  Eigen::VectorXd v(grid->size());
  for (int i = 0; i < grid->size(); ++i) v[i] = f(grid->node(i));
  return GridFunction(grid, std::move(v));
}

double inner(const GridFunction& f, const GridFunction& g) {
  require(same_grid(f.grid, g.grid), ErrorCode::grid_mismatch,
          "inner: functions live on different grids");
  return (f.grid->weight_vector().array() * f.values.array() *
          g.values.array())
      .sum();
}

double norm(const GridFunction& f) {
  return std::sqrt(
      (f.grid->weight_vector().array() * f.values.array().square()).sum());
}

GridFunction operator+(const GridFunction& f, const GridFunction& g) {
  require(same_grid(f.grid, g.grid), ErrorCode::grid_mismatch,
          "+: functions live on different grids");
  return GridFunction(f.grid, f.values + g.values);
}

GridFunction operator-(const GridFunction& f, const GridFunction& g) {
  require(same_grid(f.grid, g.grid), ErrorCode::grid_mismatch,
          "-: functions live on different grids");
  return GridFunction(f.grid, f.values - g.values);
}

GridFunction operator*(double a, const GridFunction& f) {
  return GridFunction(f.grid, a * f.values);
}

void write_csv(const GridFunction& f, std::ostream& out) {
  out << "t,value\n";
  char buf[64];
  for (int i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", f.grid->node(i),
                  f.values[i]);
    out << buf;
  }
}

void write_csv(const GridFunction& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorCode::io, "cannot open " + path + " for writing");
  write_csv(f, out);
  require(out.good(), ErrorCode::io, "write failed for " + path);
}

}  // namespace lavreg
