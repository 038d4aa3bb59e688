#ifndef KH_REFERENCE_HPP
#define KH_REFERENCE_HPP

#include <cstdint>
#include <optional>

#include "kh/problems.hpp"

namespace kh {

struct ReferenceResult {
  ReferenceSolution solution;
  double achieved_mapping_norm = 0.0;  ///< ||gradient mapping|| at x_star
  std::uint64_t iterations = 0;
  bool converged = false;              ///< false when the iteration cap was hit first
};

/// Over-solves the problem with restarted FISTA until the composite gradient
/// mapping falls below tol. x_star is whichever of the final and the
/// best-objective iterate has the smaller mapping, and F_star = F(x_star);
/// gap_tolerance estimates F(x_star) - min F as ||G|| * max(1, ||x_star - x0||).
ReferenceResult solve_reference(const FiniteSumProblem& problem, double tol,
                                std::uint64_t max_iterations = 2'000'000,
                                const std::optional<Vector>& x0 = std::nullopt);

}  // namespace kh

#endif  // KH_REFERENCE_HPP
