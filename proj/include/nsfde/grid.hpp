#pragma once

#include <stdexcept>
#include <vector>

namespace nsfde {

/// Uniform grid t_i = i * t_end / n_steps, i = 0..n_steps.
class TimeGrid {
 public:
  TimeGrid(double t_end, int n_steps) : t_end_(t_end), n_steps_(n_steps) {
    if (!(t_end > 0.0)) throw std::invalid_argument("TimeGrid: t_end must be positive");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
  }

  double t_end() const { return t_end_; }
  int n_steps() const { return n_steps_; }
  int n_nodes() const { return n_steps_ + 1; }
  double dt() const { return t_end_ / n_steps_; }
  double node(int i) const { return t_end_ * static_cast<double>(i) / n_steps_; }

  std::vector<double> nodes() const {
    std::vector<double> out(n_nodes());
    for (int i = 0; i <= n_steps_; ++i) out[i] = node(i);
    return out;
  }

  bool operator==(const TimeGrid& other) const {
    return t_end_ == other.t_end_ && n_steps_ == other.n_steps_;
  }

 private:
  double t_end_;
  int n_steps_;
};

}  // namespace nsfde
