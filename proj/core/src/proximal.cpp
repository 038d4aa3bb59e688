#include "kh/proximal.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace kh {
namespace {

void check_weight(double w, const char* what) {
  if (!(w >= 0.0) || !std::isfinite(w)) {
    throw std::domain_error(std::string("regularizer weight ") + what +
                            " must be finite and nonnegative");
  }
}

}  // namespace

Regularizer Regularizer::lasso(double lambda) {
  check_weight(lambda, "l1");
  return {Kind::L1, lambda, 0.0};
}

Regularizer Regularizer::squared_l2(double lambda) {
  check_weight(lambda, "l2");
  return {Kind::SquaredL2, 0.0, lambda};
}

Regularizer Regularizer::elastic_net(double lambda1, double lambda2) {
  check_weight(lambda1, "l1");
  check_weight(lambda2, "l2");
  return {Kind::ElasticNet, lambda1, lambda2};
}

std::string Regularizer::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::Zero: os << "zero"; break;
    case Kind::L1: os << "l1(" << l1 << ")"; break;
    case Kind::SquaredL2: os << "squared_l2(" << l2 << ")"; break;
    case Kind::ElasticNet: os << "elastic_net(" << l1 << "," << l2 << ")"; break;
  }
  return os.str();
}

double reg_value(const Regularizer& reg, const Vector& x) {
  switch (reg.kind) {
    case Regularizer::Kind::Zero: return 0.0;
    case Regularizer::Kind::L1: return reg.l1 * x.lpNorm<1>();
    case Regularizer::Kind::SquaredL2: return 0.5 * reg.l2 * x.squaredNorm();
    case Regularizer::Kind::ElasticNet:
      return reg.l1 * x.lpNorm<1>() + 0.5 * reg.l2 * x.squaredNorm();
  }
  return 0.0;
}

void prox_into(const Regularizer& reg, const Vector& v, double step, Vector& out) {
  if (!(step > 0.0)) throw std::domain_error("prox: step must be positive");
  out.resize(v.size());
  switch (reg.kind) {
    case Regularizer::Kind::Zero:
      out = v;
      return;
    case Regularizer::Kind::L1: {
      const double thr = step * reg.l1;
      for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = soft_threshold(v[i], thr);
      return;
    }
    case Regularizer::Kind::SquaredL2:
      out = v / (1.0 + step * reg.l2);
      return;
    case Regularizer::Kind::ElasticNet: {
      const double thr = step * reg.l1;
      const double scale = 1.0 / (1.0 + step * reg.l2);
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        out[i] = soft_threshold(v[i], thr) * scale;
      }
      return;
    }
  }
}

Vector prox(const Regularizer& reg, const Vector& v, double step) {
  Vector out;
  prox_into(reg, v, step, out);
  return out;
}

}  // namespace kh
