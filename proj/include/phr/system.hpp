#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>

#include "phr/errors.hpp"
#include "phr/numeric.hpp"

namespace phr {

/// Descriptor system E x' = A x + B u, y = C x + D u with square transfer
/// function (m inputs, m outputs). E may be singular.
struct DescriptorSystem {
  Matrix E, A, B, C, D;

  DescriptorSystem() = default;
  DescriptorSystem(Matrix e, Matrix a, Matrix b, Matrix c, Matrix d)
      : E(std::move(e)), A(std::move(a)), B(std::move(b)), C(std::move(c)),
        D(std::move(d)) {
    check_dimensions();
  }

  Eigen::Index n() const { return E.rows(); }
  Eigen::Index m() const { return D.rows(); }

  void check_dimensions() const {
    const Eigen::Index nn = E.rows();
    const Eigen::Index mm = D.rows();
    if (E.cols() != nn || A.rows() != nn || A.cols() != nn) {
      throw InvalidInputError("DescriptorSystem: E, A must be square of equal size");
    }
    if (D.cols() != mm) {
      throw InvalidInputError("DescriptorSystem: D must be square (m inputs = m outputs)");
    }
    if (B.rows() != nn || B.cols() != mm || C.rows() != mm || C.cols() != nn) {
      throw InvalidInputError("DescriptorSystem: B must be n x m and C must be m x n");
    }
  }
};

}  // namespace phr
