#pragma once

#include <complex>

#include <Eigen/Dense>

namespace pmor {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RMatrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

}  // namespace pmor
