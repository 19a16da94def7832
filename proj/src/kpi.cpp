#include "specnet/kpi.hpp"

#include <cmath>

#include "specnet/error.hpp"

namespace specnet::kpi {

double mac_throughput(double data_bits, double data_time_s, double overhead_time_s) {
  if (data_bits < 0.0 || data_time_s < 0.0 || overhead_time_s < 0.0) {
    throw Error(Errc::kInvalidArgument, "throughput inputs must be non-negative");
  }
  const double total = data_time_s + overhead_time_s;
  if (!(total > 0.0)) throw Error(Errc::kZeroTime, "T_data + T_overhead must be positive");
  return data_bits / total;
}

double delay(double t1_s, double t2_s) {
  if (t2_s < t1_s) throw Error(Errc::kNegativeInterval, "t2 precedes t1");
  return t2_s - t1_s;
}

double spectral_efficiency_per_area(double throughput_bps, double bandwidth_hz, double area) {
  if (!(bandwidth_hz > 0.0) || !(area > 0.0)) {
    throw Error(Errc::kZeroDenominator, "bandwidth and area must be positive");
  }
  return throughput_bps / (bandwidth_hz * area);
}

void RegretLedger::record(double optimal, double achieved) {
  optimal_.push_back(optimal);
  achieved_.push_back(achieved);
  cumulative_ += optimal - achieved;
}

double cumulative_regret(std::span<const double> optimal, std::span<const double> achieved) {
  if (optimal.size() != achieved.size()) {
    throw Error(Errc::kLengthMismatch, "optimal and achieved reward sequences differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < optimal.size(); ++i) total += optimal[i] - achieved[i];
  return total;
}

double cumulative_regret(const RegretLedger& ledger) {
  return cumulative_regret(ledger.optimal(), ledger.achieved());
}

ThzRate thz_rate_and_se(const ThzLinkParams& p) {
  if (!(p.symbol_duration_s > 0.0)) {
    throw Error(Errc::kZeroSymbolDuration, "symbol duration must be positive");
  }
  const bool ok = p.code_rate > 0.0 && p.code_rate <= 1.0 && p.symbols_per_block > 0.0 &&
                  p.useful_fraction > 0.0 && p.useful_fraction <= 1.0 &&
                  p.block_error_rate >= 0.0 && p.block_error_rate <= 1.0 &&
                  p.effective_bandwidth_hz > 0.0;
  if (!ok) throw Error(Errc::kInvalidArgument, "THz link parameters out of range");
  ThzRate out;
  out.rate_bps = p.code_rate * p.symbols_per_block * p.useful_fraction / p.symbol_duration_s;
  out.spectral_efficiency = (1.0 - p.block_error_rate) * out.rate_bps / p.effective_bandwidth_hz;
  return out;
}

}  // namespace specnet::kpi
