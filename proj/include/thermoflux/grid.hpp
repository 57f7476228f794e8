#pragma once

#include <vector>

namespace thermoflux {

/// Uniform 1D node grid over [0, length]. x(0) == 0 and x(n-1) == length
/// exactly; dx == length/(n-1).
class Grid1D {
 public:
  Grid1D() : Grid1D(0.1, 201) {}
  Grid1D(double length, int n_nodes);

  double length() const { return length_; }
  int n_nodes() const { return n_nodes_; }
  double dx() const { return dx_; }
  double x(int i) const {
    return length_ * (static_cast<double>(i) / (n_nodes_ - 1));
  }

 private:
  double length_;
  int n_nodes_;
  double dx_;
};

}  // namespace thermoflux
