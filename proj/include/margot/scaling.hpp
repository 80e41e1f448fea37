#pragma once

#include <utility>

#include "errors.hpp"
#include "types.hpp"

namespace margot {

struct ScalingResult {
  Vector mu_in;
  Vector mu_out;
  int iterations = 0;
  double residual = 0.0;
};

// Alternating rescaling driving Diag(mu_in .* sigma_in) Z Diag(mu_out .* b)
// to margins (sigma_in, sigma_out). `apply`/`apply_t` multiply by Z and Z^T;
// `b` is the column weight (alpha for regular paths, sigma_out for hitting
// paths) and `c` the mu_out numerator (n_ref, resp. the all-ones vector).
// The residual is evaluated before each sweep, so a solve that starts
// consistent still counts the verifying sweep.
template <class Apply, class ApplyT>
ScalingResult balance_margins(Apply&& apply, ApplyT&& apply_t,
                              const Vector& sigma_in, const Vector& sigma_out,
                              const Vector& b, const Vector& c, double tol,
                              int max_iter) {
  if (!(tol > 0.0))
    throw BadParameter("tol must be positive");
  if (max_iter < 1)
    throw BadParameter("max_iter must be at least 1");
  const Index n = sigma_in.size();
  Vector mu_in = Vector::Ones(n);
  Vector mu_out = Vector::Ones(n);
  Vector v = apply(mu_out.cwiseProduct(b));
  Vector u = apply_t(mu_in.cwiseProduct(sigma_in));
  auto residual = [&]() {
    return (mu_in.cwiseProduct(sigma_in).cwiseProduct(v) - sigma_in)
               .lpNorm<Eigen::Infinity>() +
           (mu_out.cwiseProduct(b).cwiseProduct(u) - sigma_out)
               .lpNorm<Eigen::Infinity>();
  };
  int iterations = 0;
  for (int it = 1; it <= max_iter; ++it) {
    iterations = it;
    const double resid = residual();
    if (resid <= tol) {
      if (it == 1) {
        // A solve that starts on-margin still takes one update: otherwise
        // the components at zero-margin nodes keep their init values, and
        // the flow formulas read those components.
        mu_in = v.cwiseInverse();
        u = apply_t(mu_in.cwiseProduct(sigma_in));
        mu_out = c.cwiseQuotient(u);
      }
      return {std::move(mu_in), std::move(mu_out), iterations, resid};
    }
    mu_in = v.cwiseInverse();
    u = apply_t(mu_in.cwiseProduct(sigma_in));
    mu_out = c.cwiseQuotient(u);
    v = apply(mu_out.cwiseProduct(b));
    if (!mu_in.allFinite() || !mu_out.allFinite() || !v.allFinite() ||
        !u.allFinite())
      throw DivergentScaling("scaling vectors overflowed");
  }
  throw NoConvergence(iterations, residual());
}

} // namespace margot
