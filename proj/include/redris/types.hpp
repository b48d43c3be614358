#pragma once

#include <Eigen/Dense>
#include <complex>

namespace redris {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/** @brief Converts a power level in dBm to watts. */
inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/** @brief Converts a gain in dB to linear scale. */
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace redris
