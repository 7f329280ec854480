#include "turbo/complexity.hpp"

namespace turbo {

ComplexityEstimate complexity_estimate(const ComplexityInputs& c) {
  const double d = static_cast<double>(c.d);
  const double dl = static_cast<double>(c.d_l);
  const double dn = static_cast<double>(c.d_n);
  const double p = static_cast<double>(c.p);
  const double np = static_cast<double>(c.n_p);
  const double nit = static_cast<double>(c.n_it);

  const double tf_particle = p * dl * dl + p * p * dl + p * p * p + 6.0 * dl * dl * dl +
                             2.0 * dn * dl * dl + 3.0 * dl * dn * dn + dn * dn * dn / 3.0;
  const double mpf_particle = 2.0 * p * dl * dl + 3.0 * p * p * dl + p * p * p +
                              5.0 * dl * dl * dl + 2.0 * dl * dl * dn + 3.0 * dl * dn * dn +
                              dn * dn * dn / 3.0;

  ComplexityEstimate out;
  out.n_tf = 2.0 * d * p * p + p * d * d + (nit + 4.0) * d * d * d + nit * np * tf_particle;
  out.n_mpf = np * mpf_particle;
  return out;
}

}  // namespace turbo
