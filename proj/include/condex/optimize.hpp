#pragma once

#include <functional>
#include <span>
#include <vector>

namespace condex::optim {

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<void(std::span<const double>, std::span<double>)>;

struct Result {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  int max_iterations = 4000;
  double f_tolerance = 1e-11;  // relative spread of simplex values
  double x_tolerance = 1e-9;   // simplex diameter, per coordinate
  int restarts = 2;            // re-seed the simplex at the best point
};

/// Derivative-free simplex minimization. Non-finite objective values are
/// treated as +infinity, so infeasible regions can be expressed directly.
[[nodiscard]] Result nelder_mead(const Objective& f, std::vector<double> x0,
                                 std::span<const double> initial_step,
                                 const NelderMeadOptions& options = {});

struct BoxOptions {
  int max_iterations = 500;
  double g_tolerance = 1e-8;   // infinity norm of the projected gradient
  double f_tolerance = 1e-14;  // relative decrease between iterations
};

/// Projected BFGS for box constraints. With an empty `gradient` the gradient
/// is approximated by central differences (one-sided at active bounds).
[[nodiscard]] Result minimize_box(const Objective& f, const Gradient& gradient,
                                  std::vector<double> x0, std::span<const double> lower,
                                  std::span<const double> upper, const BoxOptions& options = {});

/// Central-difference gradient with relative step, clipped to the box.
void numeric_gradient(const Objective& f, std::span<const double> x, std::span<const double> lower,
                      std::span<const double> upper, std::span<double> g);

}  // namespace condex::optim
