#include "pushmpc/types.hpp"

#include <cmath>

namespace pushmpc {

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * M_PI);
  if (w <= -M_PI) w += 2.0 * M_PI;
  return w;
}

Mat2 rotation2(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat2 r;
  r << c, -s, s, c;
  return r;
}

}  // namespace pushmpc
