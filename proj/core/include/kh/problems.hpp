#ifndef KH_PROBLEMS_HPP
#define KH_PROBLEMS_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "kh/libsvm.hpp"
#include "kh/proximal.hpp"
#include "kh/types.hpp"

namespace kh {

/// Loss family of the generalized-linear components f_i(x) = phi(a_i^T x, b_i).
enum class Loss {
  LeastSquares,  ///< phi(m, b) = (m - b)^2 / 2
  Logistic,      ///< phi(m, b) = log(1 + exp(-b m)), b in {-1, +1}
};

std::string to_string(Loss loss);
Loss loss_from_string(const std::string& name);

/// A stored optimum: F_star = F(x_star) and an estimate of its accuracy.
struct ReferenceSolution {
  Vector x_star;
  double F_star = 0.0;
  double gap_tolerance = 0.0;
  std::string provenance;
};

/// F(x) = (1/n) sum_i f_i(x) + l(x) with a common smoothness bound L.
///
/// Every component gradient is a scalar multiple of its data row,
/// grad f_i(x) = slope_i(x) * a_i, which the estimator exploits. Immutable
/// after construction apart from the explicit setters; safe to share across
/// concurrent runs.
class FiniteSumProblem {
 public:
  FiniteSumProblem(Loss loss, Matrix rows, Vector labels, Regularizer reg = {});

  std::size_t n() const noexcept { return static_cast<std::size_t>(rows_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(rows_.cols()); }
  Loss loss() const noexcept { return loss_; }
  const Matrix& rows() const noexcept { return rows_; }
  const Vector& labels() const noexcept { return labels_; }

  /// Analytic worst-case bound: max ||a_i||^2 (least squares) or /4 (logistic).
  double smoothness() const noexcept { return L_; }
  double analytic_smoothness() const noexcept { return analytic_L_; }
  /// Replaces L; must be positive. Convergence guarantees need a valid bound.
  void set_smoothness(double L);

  const Regularizer& regularizer() const noexcept { return reg_; }
  void set_regularizer(const Regularizer& reg) { reg_ = reg; }

  const std::optional<ReferenceSolution>& reference() const noexcept { return reference_; }
  void set_reference(ReferenceSolution ref) { reference_ = std::move(ref); }
  void clear_reference() { reference_.reset(); }

  double margin(std::size_t i, const Vector& x) const { return rows_.row(static_cast<Eigen::Index>(i)).dot(x); }
  double loss_value(std::size_t i, double margin) const noexcept;
  double loss_slope(std::size_t i, double margin) const noexcept;

  double component_value(std::size_t i, const Vector& x) const {
    return loss_value(i, margin(i, x));
  }
  /// slope_i(x) with grad f_i(x) = slope_i(x) * a_i.
  double component_slope(std::size_t i, const Vector& x) const {
    return loss_slope(i, margin(i, x));
  }
  Vector component_gradient(std::size_t i, const Vector& x) const;
  /// out += weight * grad f_i(x).
  void add_component_gradient(std::size_t i, const Vector& x, double weight, Vector& out) const;

  /// All n slopes at x in one pass.
  Vector slopes(const Vector& x) const;

  double smooth_value(const Vector& x) const;
  Vector full_gradient(const Vector& x) const;
  double objective(const Vector& x) const { return smooth_value(x) + reg_value(reg_, x); }

  /// Composite gradient mapping L (x - prox(x - grad f(x) / L, 1 / L)).
  Vector gradient_mapping(const Vector& x) const;

 private:
  Loss loss_;
  Matrix rows_;
  Vector labels_;
  Regularizer reg_;
  double L_ = 0.0;
  double analytic_L_ = 0.0;
  std::optional<ReferenceSolution> reference_;
};

/// f_i(x) = (a_i^T x - b_i)^2 / 2. Throws std::invalid_argument for empty data.
FiniteSumProblem make_least_squares(const SparseDataset& data, Regularizer reg = {});
/// f_i(x) = log(1 + exp(-b_i a_i^T x)); labels must be -1 or +1.
FiniteSumProblem make_logistic(const SparseDataset& data, Regularizer reg = {});
FiniteSumProblem make_problem(Loss loss, const SparseDataset& data, Regularizer reg = {});

Matrix dense_rows(const SparseDataset& data);
SparseDataset to_sparse(const Matrix& rows, const Vector& labels);

/// Synthetic generator controls.
///
/// Draw order from SplitMix64(seed): the n x d design, row-major, as
/// N(0, 1) * column_scale_j with column_scale_j = (j + 1)^(-column_decay);
/// then the planted x_true (each coordinate nonzero with probability
/// `sparsity`, value N(0, 1)); then one noise draw per row. Least-squares
/// labels are a_i^T x_true + noise * N(0, 1); logistic labels are the sign
/// of the same quantity (+1 at zero). Rows are rescaled to unit norm when
/// normalize_rows is set, before labels are formed.
struct SynthSpec {
  std::size_t n = 100;
  std::size_t d = 10;
  Loss family = Loss::LeastSquares;
  std::uint64_t seed = 0;
  double column_decay = 0.0;
  double sparsity = 1.0;
  double noise = 0.1;
  double planted_scale = 1.0;
  bool normalize_rows = false;
  Regularizer reg{};
};

struct Synthesized {
  SparseDataset data;
  FiniteSumProblem problem;
};

Synthesized synthesize(const SynthSpec& spec);

}  // namespace kh

#endif  // KH_PROBLEMS_HPP
