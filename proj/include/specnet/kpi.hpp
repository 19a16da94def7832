#pragma once

#include <span>
#include <vector>

namespace specnet::kpi {

/// Gamma = L_data / (T_data + T_overhead). Throws ZeroTime when the total time
/// is not positive.
double mac_throughput(double data_bits, double data_time_s, double overhead_time_s);

/// l = T2 - T1. Throws NegativeInterval when t2 < t1.
double delay(double t1_s, double t2_s);

/// eta = Gamma / (BW * A), in bit/s/Hz per unit area.
double spectral_efficiency_per_area(double throughput_bps, double bandwidth_hz, double area);

/// Per-period optimal and achieved rewards.
class RegretLedger {
 public:
  void record(double optimal, double achieved);
  double cumulative() const { return cumulative_; }
  std::span<const double> optimal() const { return optimal_; }
  std::span<const double> achieved() const { return achieved_; }
  std::size_t size() const { return optimal_.size(); }

 private:
  std::vector<double> optimal_;
  std::vector<double> achieved_;
  double cumulative_ = 0.0;
};

/// upsilon = sum_i (phi*_i - phi_i). Throws LengthMismatch.
double cumulative_regret(std::span<const double> optimal, std::span<const double> achieved);
double cumulative_regret(const RegretLedger& ledger);

struct ThzLinkParams {
  double code_rate = 1.0;           // (0, 1]
  double symbols_per_block = 1.0;   // M
  double useful_fraction = 1.0;     // rho, (0, 1]
  double symbol_duration_s = 1.0;   // T_s
  double block_error_rate = 0.0;    // [0, 1]
  double effective_bandwidth_hz = 1.0;
};

struct ThzRate {
  double rate_bps = 0.0;
  double spectral_efficiency = 0.0;  // bit/s/Hz
};

/// R = r * M * rho / T_s and SE = (1 - BLER) * R / BW_eff, as printed; no
/// separate bits-per-symbol factor.
ThzRate thz_rate_and_se(const ThzLinkParams& p);

}  // namespace specnet::kpi
