#pragma once

#include <string>
#include <vector>

#include "socnav/trajectory_log.hpp"

namespace socnav {

struct SvgStyle {
    double pixels_per_meter = 50.0;
    double margin_px = 40.0;
    double stroke_width = 2.0;
    bool legend = true;
};

/// Color on the blue (0) to pink (1) ramp as "#rrggbb"; t is clamped to [0, 1].
std::string ramp_color(double t);

/// Paths as polylines and final positions as circles; the robot is black and
/// pedestrians are colored by their mean rho_hat (falling back to rho, then 0).
/// Only the first episode in the records is drawn.
std::string render_svg(const std::vector<TrajectoryRecord>& records, const SvgStyle& style = {});

}  // namespace socnav
