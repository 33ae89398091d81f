#pragma once

#include "bois/common.hpp"

#include <array>
#include <string>

namespace bois {

// Reactor-separator-recycle flowsheet: reagents A and B are compressed,
// heated and fed to a reactor producing C; the effluent is separated into a
// product liquid and a vapor that is partly recycled, partly purged.
// Internally the balance runs in moles of (A, B, C) with A + B -> C; reported
// flows are mass flows with species masses (1, 1, 2), so total mass is
// conserved across the reaction.

struct ProcessInputs {
  double reactor_temp;        // K
  double reactor_pressure;
  double separator_temp;      // K
  double separator_pressure;
  double recycle_fraction;    // dimensionless, of the separator vapor

  static ProcessInputs from_vec(const Vec& x);
  Vec to_vec() const;
};

// The search box for the five process inputs.
BoxDomain flowsheet_domain();

// The 16 intermediate outputs modeled by the GP bank.
struct StreamVector {
  static constexpr int dim = 16;

  double product_flow = 0.0;                 // F_p, mass
  std::array<double, 3> product_frac{};      // psi_A, psi_B, psi_C
  double purge_flow = 0.0;                   // F_o, mass
  std::array<double, 3> purge_frac{};        // xi_A, xi_B, xi_C
  std::array<double, 5> heat_duty{};         // Qdot_1..5
  std::array<double, 3> power_duty{};        // Wdot_1..3

  Vec to_vec() const;
  static StreamVector from_vec(const Vec& y);
  static const std::array<std::string, dim>& names();
};

struct FlowsheetParams {
  // fresh feed, mol/s
  double feed_a = 1.0;
  double feed_b = 1.5;

  // per-pass conversion chi(T_r, P_r) = base + span * s(T) * (0.5 + 0.5 s(P)),
  // s logistic; stays inside (0, 1) over the box
  double conversion_base = 0.25;
  double conversion_span = 0.60;
  double conversion_temp_mid = 820.0;
  double conversion_temp_scale = 60.0;
  double conversion_pressure_mid = 350.0;
  double conversion_pressure_scale = 80.0;

  // liquid recovery eta_i(T_s, P_s) = logistic(bias_i + gains); colder and
  // higher pressure condense more
  std::array<double, 3> recovery_bias{-2.2, -1.8, 2.2};  // A, B, C
  double recovery_temp_ref = 325.0;
  double recovery_temp_scale = 25.0;
  double recovery_temp_gain = 1.2;
  double recovery_pressure_ref = 155.0;
  double recovery_pressure_scale = 15.0;
  double recovery_pressure_gain = 0.5;

  // duty and power proportionalities
  double feed_temp = 300.0;
  double feed_pressure = 100.0;
  double heat_feed_coeff = 0.5;
  double heat_recycle_coeff = 0.5;
  double heat_reactor_coeff = 1.0;
  double heat_condenser_coeff = 0.4;
  double heat_product_coeff = 0.3;
  double power_feed_coeff = 0.6;
  double power_recycle_coeff = 0.6;
  double power_product_coeff = 0.3;

  // fixed-point solve
  double damping = 0.5;
  double tolerance = 1e-10;
  int max_iterations = 500;

  double conversion(double reactor_temp, double reactor_pressure) const;
  std::array<double, 3> recovery(double separator_temp, double separator_pressure) const;
};

struct CostWeights {
  std::array<double, 2> reagent_price{1.0, 0.8};    // w_A0, w_B0
  std::array<double, 2> feed_rate{1.0, 1.5};        // F_A, F_B (mass)
  std::array<double, 3> product_value{2.0, 2.0, -10.0};  // w_i1; negative = credit
  std::array<double, 3> purge_value{0.5, 0.5, 1.0};      // w_i2
  double penalty_weight = 30.0;  // w_3
  double target_rate = 0.9;      // Fbar, target mass rate of C in the product
  std::array<double, 5> heat_price{0.4, 0.4, 0.6, 0.3, 0.3};  // w_h
  double power_price = 1.2;                                   // w_e
};

// Steady state via damped fixed-point iteration on the recycle stream.
// Throws SimulationError (with residual history) on non-convergence.
StreamVector simulate_flowsheet(const ProcessInputs& x, const FlowsheetParams& params);

struct CostBreakdown {
  double f1 = 0.0;  // materials + flow-target penalty
  double f2 = 0.0;  // utilities
  double f = 0.0;
};

CostBreakdown process_cost(const StreamVector& y, const CostWeights& weights);

}  // namespace bois
