#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace nseg {

// Central-difference gradient verification. `f` maps a point (flat vector)
// to a scalar; `analytic` is the gradient under test at `point`. Returns
// max_i |analytic_i - central_i| / max(1, |analytic_i|).
// The caller is responsible for choosing points away from kinks.
template <class S, class F>
S max_rel_grad_error(F&& f, Eigen::Matrix<S, Eigen::Dynamic, 1> point,
                     const Eigen::Matrix<S, Eigen::Dynamic, 1>& analytic, S epsilon) {
  if (point.size() != analytic.size())
    throw std::invalid_argument("max_rel_grad_error: point/gradient size mismatch");
  S worst = S(0);
  for (Eigen::Index i = 0; i < point.size(); ++i) {
    const S saved = point[i];
    point[i] = saved + epsilon;
    const S fp = f(point);
    point[i] = saved - epsilon;
    const S fm = f(point);
    point[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::domain_error("max_rel_grad_error: non-finite loss evaluation");
    const S central = (fp - fm) / (S(2) * epsilon);
    const S denom = std::max(S(1), std::abs(analytic[i]));
    worst = std::max(worst, std::abs(analytic[i] - central) / denom);
  }
  return worst;
}

}  // namespace nseg
