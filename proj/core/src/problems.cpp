#include "kh/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kh/rng.hpp"

namespace kh {

std::string to_string(Loss loss) {
  switch (loss) {
    case Loss::LeastSquares: return "least_squares";
    case Loss::Logistic: return "logistic";
  }
  return "unknown";
}

Loss loss_from_string(const std::string& name) {
  if (name == "least_squares" || name == "lasso" || name == "quadratic") return Loss::LeastSquares;
  if (name == "logistic") return Loss::Logistic;
  throw std::invalid_argument("unknown loss family '" + name +
                              "' (expected least_squares or logistic)");
}

FiniteSumProblem::FiniteSumProblem(Loss loss, Matrix rows, Vector labels, Regularizer reg)
    : loss_(loss), rows_(std::move(rows)), labels_(std::move(labels)), reg_(reg) {
  if (rows_.rows() == 0 || rows_.cols() == 0) {
    throw std::invalid_argument("problem: dataset must have at least one row and column");
  }
  if (labels_.size() != rows_.rows()) {
    throw std::invalid_argument("problem: label count does not match row count");
  }
  if (!rows_.allFinite() || !labels_.allFinite()) {
    throw std::invalid_argument("problem: data must be finite");
  }
  if (loss_ == Loss::Logistic) {
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
      if (labels_[i] != 1.0 && labels_[i] != -1.0) {
        throw std::invalid_argument("logistic problem: labels must be -1 or +1 (row " +
                                    std::to_string(i + 1) + ")");
      }
    }
  }
  const double max_sq = rows_.rowwise().squaredNorm().maxCoeff();
  analytic_L_ = loss_ == Loss::Logistic ? max_sq / 4.0 : max_sq;
  if (!(analytic_L_ > 0.0)) {
    throw std::invalid_argument("problem: all rows are zero, smoothness undefined");
  }
  L_ = analytic_L_;
}

void FiniteSumProblem::set_smoothness(double L) {
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw std::domain_error("problem: smoothness override must be positive");
  }
  L_ = L;
}

double FiniteSumProblem::loss_value(std::size_t i, double m) const noexcept {
  const double b = labels_[static_cast<Eigen::Index>(i)];
  if (loss_ == Loss::LeastSquares) {
    const double r = m - b;
    return 0.5 * r * r;
  }
  const double z = -b * m;  // log(1 + exp(z))
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double FiniteSumProblem::loss_slope(std::size_t i, double m) const noexcept {
  const double b = labels_[static_cast<Eigen::Index>(i)];
  if (loss_ == Loss::LeastSquares) return m - b;
  const double z = -b * m;
  // d/dm log(1 + exp(-b m)) = -b * sigmoid(z)
  const double sig = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return -b * sig;
}

Vector FiniteSumProblem::component_gradient(std::size_t i, const Vector& x) const {
  return component_slope(i, x) * rows_.row(static_cast<Eigen::Index>(i)).transpose();
}

void FiniteSumProblem::add_component_gradient(std::size_t i, const Vector& x, double weight,
                                              Vector& out) const {
  const auto row = rows_.row(static_cast<Eigen::Index>(i));
  out.noalias() += (weight * loss_slope(i, row.dot(x))) * row.transpose();
}

Vector FiniteSumProblem::slopes(const Vector& x) const {
  Vector m = rows_ * x;
  for (Eigen::Index i = 0; i < m.size(); ++i) m[i] = loss_slope(static_cast<std::size_t>(i), m[i]);
  return m;
}

double FiniteSumProblem::smooth_value(const Vector& x) const {
  const Vector m = rows_ * x;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) acc += loss_value(static_cast<std::size_t>(i), m[i]);
  return acc / static_cast<double>(n());
}

Vector FiniteSumProblem::full_gradient(const Vector& x) const {
  const Vector s = slopes(x);
  Vector g = rows_.transpose() * s;
  g /= static_cast<double>(n());
  return g;
}

Vector FiniteSumProblem::gradient_mapping(const Vector& x) const {
  const Vector g = full_gradient(x);
  const Vector xp = prox(reg_, x - g / L_, 1.0 / L_);
  return L_ * (x - xp);
}

Matrix dense_rows(const SparseDataset& data) {
  data.validate();
  Matrix A = Matrix::Zero(static_cast<Eigen::Index>(data.rows.size()),
                          static_cast<Eigen::Index>(data.dim));
  for (std::size_t r = 0; r < data.rows.size(); ++r) {
    for (const auto& e : data.rows[r]) {
      A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(e.index - 1)) = e.value;
    }
  }
  return A;
}

SparseDataset to_sparse(const Matrix& rows, const Vector& labels) {
  SparseDataset data;
  data.dim = static_cast<std::size_t>(rows.cols());
  data.rows.resize(static_cast<std::size_t>(rows.rows()));
  data.labels.assign(labels.data(), labels.data() + labels.size());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
      if (rows(r, c) != 0.0) {
        data.rows[static_cast<std::size_t>(r)].push_back(
            {static_cast<std::uint32_t>(c + 1), rows(r, c)});
      }
    }
  }
  return data;
}

FiniteSumProblem make_problem(Loss loss, const SparseDataset& data, Regularizer reg) {
  if (data.rows.empty()) throw std::invalid_argument("problem: empty dataset");
  Vector labels = Eigen::Map<const Vector>(data.labels.data(),
                                           static_cast<Eigen::Index>(data.labels.size()));
  return FiniteSumProblem(loss, dense_rows(data), std::move(labels), reg);
}

FiniteSumProblem make_least_squares(const SparseDataset& data, Regularizer reg) {
  return make_problem(Loss::LeastSquares, data, reg);
}

FiniteSumProblem make_logistic(const SparseDataset& data, Regularizer reg) {
  return make_problem(Loss::Logistic, data, reg);
}

Synthesized synthesize(const SynthSpec& spec) {
  if (spec.n == 0 || spec.d == 0) throw std::invalid_argument("synthesize: n and d must be >= 1");
  SplitMix64 rng(spec.seed);
  const auto n = static_cast<Eigen::Index>(spec.n);
  const auto d = static_cast<Eigen::Index>(spec.d);

  Matrix A(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double scale = std::pow(static_cast<double>(j + 1), -spec.column_decay);
      A(i, j) = rng.normal() * scale;
    }
  }
  if (spec.normalize_rows) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double nrm = A.row(i).norm();
      if (nrm > 0.0) A.row(i) /= nrm;
    }
  }
  Vector x_true(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const bool active = rng.uniform01() < spec.sparsity;
    const double v = rng.normal() * spec.planted_scale;
    x_true[j] = active ? v : 0.0;
  }
  Vector labels = A * x_true;
  for (Eigen::Index i = 0; i < n; ++i) {
    labels[i] += spec.noise * rng.normal();
    if (spec.family == Loss::Logistic) labels[i] = labels[i] >= 0.0 ? 1.0 : -1.0;
  }
  SparseDataset data = to_sparse(A, labels);
  FiniteSumProblem problem(spec.family, std::move(A), std::move(labels), spec.reg);
  return {std::move(data), std::move(problem)};
}

}  // namespace kh
