#ifndef LAVREG_GRID_HPP
#define LAVREG_GRID_HPP

#include <Eigen/Core>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace lavreg {

/// Quadrature discretization of L2(0,1): nodes in (0,1), positive weights
/// summing to 1. Immutable after construction.
class Grid {
public:
  Grid(std::vector<double> nodes, std::vector<double> weights);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }
  double node(int i) const { return nodes_[static_cast<size_t>(i)]; }
  double weight(int i) const { return weights_[static_cast<size_t>(i)]; }

  /// Weights as an Eigen vector (copied once at construction).
  const Eigen::VectorXd& weight_vector() const { return w_; }
  const Eigen::VectorXd& node_vector() const { return t_; }

private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  Eigen::VectorXd t_, w_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Composite midpoint rule: nodes (i - 1/2)/n, weights 1/n.
GridPtr make_uniform_grid(int n);

bool same_grid(const GridPtr& a, const GridPtr& b);

/// Element of the discretized Hilbert space.
struct GridFunction {
  GridPtr grid;
  Eigen::VectorXd values;

  GridFunction() = default;
  GridFunction(GridPtr g, Eigen::VectorXd v);

  int size() const { return static_cast<int>(values.size()); }
};

GridFunction constant_function(const GridPtr& grid, double c);
GridFunction sample_function(const GridPtr& grid,
                             const std::function<double(double)>& f);

double inner(const GridFunction& f, const GridFunction& g);
double norm(const GridFunction& f);

GridFunction operator+(const GridFunction& f, const GridFunction& g);
GridFunction operator-(const GridFunction& f, const GridFunction& g);
GridFunction operator*(double a, const GridFunction& f);

/// CSV with header `t,value`, 17 significant digits per entry.
void write_csv(const GridFunction& f, std::ostream& out);
void write_csv(const GridFunction& f, const std::string& path);

}  // namespace lavreg

#endif
