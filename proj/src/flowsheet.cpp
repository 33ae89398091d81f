#include "bois/flowsheet.hpp"

#include <cmath>

namespace bois {

namespace {

constexpr std::array<double, 3> kSpeciesMass{1.0, 1.0, 2.0};  // A + B -> C conserves mass

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ProcessInputs ProcessInputs::from_vec(const Vec& x) {
  require(x.size() == 5, "ProcessInputs: expected 5 components");
  return ProcessInputs{x[0], x[1], x[2], x[3], x[4]};
}

Vec ProcessInputs::to_vec() const {
  Vec x(5);
  x << reactor_temp, reactor_pressure, separator_temp, separator_pressure, recycle_fraction;
  return x;
}

BoxDomain flowsheet_domain() {
  Vec lo(5), hi(5);
  lo << 673.0, 250.0, 288.0, 140.0, 0.5;
  hi << 973.0, 450.0, 338.0, 170.0, 0.9;
  return BoxDomain(lo, hi);
}

Vec StreamVector::to_vec() const {
  Vec y(dim);
  y[0] = product_flow;
  for (int i = 0; i < 3; ++i) y[1 + i] = product_frac[i];
  y[4] = purge_flow;
  for (int i = 0; i < 3; ++i) y[5 + i] = purge_frac[i];
  for (int i = 0; i < 5; ++i) y[8 + i] = heat_duty[i];
  for (int i = 0; i < 3; ++i) y[13 + i] = power_duty[i];
  return y;
}

StreamVector StreamVector::from_vec(const Vec& y) {
  require(y.size() == dim, "StreamVector: expected 16 components");
  StreamVector s;
  s.product_flow = y[0];
  for (int i = 0; i < 3; ++i) s.product_frac[i] = y[1 + i];
  s.purge_flow = y[4];
  for (int i = 0; i < 3; ++i) s.purge_frac[i] = y[5 + i];
  for (int i = 0; i < 5; ++i) s.heat_duty[i] = y[8 + i];
  for (int i = 0; i < 3; ++i) s.power_duty[i] = y[13 + i];
  return s;
}

const std::array<std::string, StreamVector::dim>& StreamVector::names() {
  static const std::array<std::string, dim> n{
      "F_p",  "psi_A", "psi_B", "psi_C", "F_o",  "xi_A", "xi_B", "xi_C",
      "Qdot_1", "Qdot_2", "Qdot_3", "Qdot_4", "Qdot_5", "Wdot_1", "Wdot_2", "Wdot_3"};
  return n;
}

double FlowsheetParams::conversion(double reactor_temp, double reactor_pressure) const {
  const double st = logistic((reactor_temp - conversion_temp_mid) / conversion_temp_scale);
  const double sp =
      logistic((reactor_pressure - conversion_pressure_mid) / conversion_pressure_scale);
  return conversion_base + conversion_span * st * (0.5 + 0.5 * sp);
}

std::array<double, 3> FlowsheetParams::recovery(double separator_temp,
                                                double separator_pressure) const {
  const double cold = (recovery_temp_ref - separator_temp) / recovery_temp_scale;
  const double press = (separator_pressure - recovery_pressure_ref) / recovery_pressure_scale;
  std::array<double, 3> eta{};
  for (int i = 0; i < 3; ++i)
    eta[i] = logistic(recovery_bias[i] + recovery_temp_gain * cold +
                      recovery_pressure_gain * press);
  return eta;
}

StreamVector simulate_flowsheet(const ProcessInputs& x, const FlowsheetParams& p) {
  require(flowsheet_domain().contains(x.to_vec(), 1e-9),
          "simulate_flowsheet: input outside the design box");

  const double chi = p.conversion(x.reactor_temp, x.reactor_pressure);
  const std::array<double, 3> eta = p.recovery(x.separator_temp, x.separator_pressure);
  const double r = x.recycle_fraction;
  const Eigen::Vector3d feed(p.feed_a, p.feed_b, 0.0);

  // One pass through reactor and separator for a given tear stream.
  // Extent chi * Na*Nb/(Na+Nb) stays below min(Na, Nb), so flows stay positive.
  auto pass = [&](const Eigen::Vector3d& recycle) {
    const Eigen::Vector3d inlet = feed + recycle;
    const double extent = chi * inlet[0] * inlet[1] / (inlet[0] + inlet[1]);
    Eigen::Vector3d out(inlet[0] - extent, inlet[1] - extent, inlet[2] + extent);
    Eigen::Vector3d vapor;
    for (int i = 0; i < 3; ++i) vapor[i] = (1.0 - eta[i]) * out[i];
    struct PassResult {
      Eigen::Vector3d out, vapor, next_recycle;
      double extent;
    };
    return PassResult{out, vapor, Eigen::Vector3d(r * vapor), extent};
  };

  Eigen::Vector3d recycle = Eigen::Vector3d::Zero();
  std::vector<double> residuals;
  residuals.reserve(p.max_iterations);
  bool converged = false;
  Eigen::Vector3d out{}, vapor{};
  double extent = 0.0;
  for (int it = 0; it < p.max_iterations; ++it) {
    const auto step = pass(recycle);
    const double residual =
        (step.next_recycle - recycle).norm() / std::max(1.0, recycle.norm());
    residuals.push_back(residual);
    if (residual < p.tolerance) {
      out = step.out;
      vapor = step.vapor;
      extent = step.extent;
      converged = true;
      break;
    }
    recycle = (1.0 - p.damping) * recycle + p.damping * step.next_recycle;
  }
  if (!converged)
    throw SimulationError("simulate_flowsheet: recycle balance did not converge", residuals);

  StreamVector y;
  std::array<double, 3> product_mass{}, purge_mass{};
  double fp = 0.0, fo = 0.0;
  for (int i = 0; i < 3; ++i) {
    product_mass[i] = kSpeciesMass[i] * eta[i] * out[i];
    purge_mass[i] = kSpeciesMass[i] * (1.0 - r) * vapor[i];
    fp += product_mass[i];
    fo += purge_mass[i];
  }
  y.product_flow = fp;
  y.purge_flow = fo;
  for (int i = 0; i < 3; ++i) {
    y.product_frac[i] = product_mass[i] / fp;
    y.purge_frac[i] = purge_mass[i] / fo;
  }

  const double feed_mass = kSpeciesMass[0] * p.feed_a + kSpeciesMass[1] * p.feed_b;
  double recycle_mass = 0.0, effluent_mass = 0.0;
  for (int i = 0; i < 3; ++i) {
    recycle_mass += kSpeciesMass[i] * recycle[i];
    effluent_mass += kSpeciesMass[i] * out[i];
  }

  y.heat_duty[0] = p.heat_feed_coeff * feed_mass * (x.reactor_temp - p.feed_temp) / 100.0;
  y.heat_duty[1] =
      p.heat_recycle_coeff * recycle_mass * (x.reactor_temp - x.separator_temp) / 100.0;
  y.heat_duty[2] =
      p.heat_reactor_coeff * extent * (1.0 + (x.reactor_temp - 673.0) / 300.0);
  y.heat_duty[3] =
      p.heat_condenser_coeff * effluent_mass * (x.reactor_temp - x.separator_temp) / 100.0;
  y.heat_duty[4] = p.heat_product_coeff * fp * (1.0 + (338.0 - x.separator_temp) / 50.0);

  y.power_duty[0] =
      p.power_feed_coeff * feed_mass * std::log(x.reactor_pressure / p.feed_pressure);
  y.power_duty[1] = p.power_recycle_coeff * recycle_mass *
                    std::log(x.reactor_pressure / x.separator_pressure);
  y.power_duty[2] =
      p.power_product_coeff * fp * (x.reactor_pressure - x.separator_pressure) / 300.0;
  return y;
}

CostBreakdown process_cost(const StreamVector& y, const CostWeights& w) {
  if (w.target_rate == 0.0) throw ConfigError("process_cost: target_rate must be nonzero");

  CostBreakdown c;
  for (int j = 0; j < 2; ++j) c.f1 += w.reagent_price[j] * w.feed_rate[j];
  double product_term = 0.0, purge_term = 0.0;
  for (int i = 0; i < 3; ++i) {
    product_term += w.product_value[i] * y.product_frac[i];
    purge_term += w.purge_value[i] * y.purge_frac[i];
  }
  c.f1 += y.product_flow * product_term + y.purge_flow * purge_term;
  const double miss = (y.product_frac[2] * y.product_flow - w.target_rate) / w.target_rate;
  c.f1 += w.penalty_weight * miss * miss;

  for (int h = 0; h < 5; ++h) c.f2 += w.heat_price[h] * y.heat_duty[h];
  for (int k = 0; k < 3; ++k) c.f2 += w.power_price * y.power_duty[k];

  c.f = c.f1 + c.f2;
  return c;
}

}  // namespace bois
