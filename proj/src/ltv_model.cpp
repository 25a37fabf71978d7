#include "pushmpc/ltv_model.hpp"

#include <cassert>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace pushmpc {

Mat5 jacobian_a(const ErrorState& e, const Vec4& v) {
  const double v_rd = v[0], w_rd = v[1];
  const double ce = std::cos(e[2]), se = std::sin(e[2]);
  const double speed = e[3] + v_rd;
  Mat5 a = Mat5::Zero();
  a(0, 1) = w_rd;
  a(0, 2) = -se * speed;
  a(0, 3) = ce;
  a(1, 0) = -w_rd;
  a(1, 2) = ce * speed;
  a(1, 3) = se;
  a(2, 4) = 1.0;
  return a;
}

Mat54 jacobian_bv(const ErrorState& e, const Vec4&) {
  const double ce = std::cos(e[2]), se = std::sin(e[2]);
  Mat54 b = Mat54::Zero();
  b(0, 0) = ce - 1.0;
  b(0, 1) = e[1];
  b(1, 0) = se;
  b(1, 1) = -e[0];
  b(3, 2) = -1.0;
  b(4, 3) = -1.0;
  return b;
}

Mat52 input_matrix() {
  Mat52 b = Mat52::Zero();
  b(3, 0) = 1.0;
  b(4, 1) = 1.0;
  return b;
}

LtvStepModel discretize(const Mat5& a_c, const Mat52& bu_c, const Mat54& bv_c,
                        double ts) {
  assert(ts > 0.0);
  // exp([[A, I], [0, 0]] ts) = [[exp(A ts), int_0^ts exp(A tau) dtau], [0, I]]
  Eigen::Matrix<double, 10, 10> aug = Eigen::Matrix<double, 10, 10>::Zero();
  aug.topLeftCorner<5, 5>() = a_c;
  aug.topRightCorner<5, 5>() = Mat5::Identity();
  const Eigen::Matrix<double, 10, 10> e = (aug * ts).exp();
  LtvStepModel m;
  m.a_d = e.topLeftCorner<5, 5>();
  const Mat5 gamma = e.topRightCorner<5, 5>();
  m.bu_d = gamma * bu_c;
  m.bv_d = gamma * bv_c;
  return m;
}

LtvStepModel linearize_step(const ErrorState& e, const Vec4& v, double ts) {
  return discretize(jacobian_a(e, v), input_matrix(), jacobian_bv(e, v), ts);
}

}  // namespace pushmpc
