#include "evball/evalh/sensing.hpp"

#include <fstream>

#include "evball/core/errors.hpp"
#include "evball/core/io.hpp"

namespace evball::evalh {

double sensing_latency(double v_rel, double d, double r_o, double f, double du) {
  if (v_rel <= 0.0 || d <= 0.0 || r_o <= 0.0 || f <= 0.0 || du < 0.0) {
    throw core::DataError("sensing_latency: all inputs must be positive");
  }
  return (du * d * d) / (f * r_o + du * d) / v_rel;
}

void write_sensing_grid_csv(const std::string& path, double f, double r_o,
                            double du, double d_min, double d_max,
                            double d_step, double v_min, double v_max,
                            double v_step) {
  std::ofstream out(path);
  if (!out) throw core::DataError("cannot write " + path);
  out << "d_m,v_mps,tau_s\n";
  for (double d = d_min; d <= d_max + 1e-9; d += d_step) {
    for (double v = v_min; v <= v_max + 1e-9; v += v_step) {
      out << core::format_double(d) << ',' << core::format_double(v) << ','
          << core::format_double(sensing_latency(v, d, r_o, f, du)) << '\n';
    }
  }
}

}  // namespace evball::evalh
