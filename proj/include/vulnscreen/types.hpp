#ifndef VULNSCREEN_TYPES_HPP
#define VULNSCREEN_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>

namespace vulnscreen {

using Scalar = double;
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVec = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

// Encoded answers are small nonnegative category codes; class labels are 0/1.
using CodeMat = Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic>;
using CodeVec = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>;
using LabelVec = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

}  // namespace vulnscreen

#endif  // VULNSCREEN_TYPES_HPP
