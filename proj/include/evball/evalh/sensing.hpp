#pragma once

#include <string>

namespace evball::evalh {

/// Sensing latency of an event camera: the time for an obstacle of radius
/// r_o at distance d, closing at v_rel, to move its projection by du
/// pixels under focal length f.
double sensing_latency(double v_rel, double d, double r_o, double f, double du);

/// Emits a (distance, speed) -> tau grid as CSV for plotting.
void write_sensing_grid_csv(const std::string& path, double f, double r_o,
                            double du, double d_min = 0.5, double d_max = 5.0,
                            double d_step = 0.25, double v_min = 1.0,
                            double v_max = 12.0, double v_step = 0.5);

}  // namespace evball::evalh
