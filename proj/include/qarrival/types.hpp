#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace qarrival {

using Real = double;
using Complex = std::complex<Real>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealVector = Vector<Real>;
using ComplexVector = Vector<Complex>;
using DenseMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;

inline constexpr Complex kI{0.0, 1.0};

}  // namespace qarrival
