#ifndef KH_TYPES_HPP
#define KH_TYPES_HPP

#include <Eigen/Core>

namespace kh {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace kh

#endif  // KH_TYPES_HPP
