#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "finsler/types.hpp"

namespace finsler::cli {

enum class ColorBy { None, Label, Axis };

struct PlotOptions {
  ColorBy color_by = ColorBy::None;
  std::string title;
  double panel_size = 420.0;
  double point_radius = 2.5;
};

/// Scatter plot. 2-D: one panel. 3-D and up: a top view (first two
/// coordinates) and a side view (first coordinate against the last, the drift
/// axis of a Randers embedding). Axis colouring uses the last coordinate.
void write_svg(std::ostream& out, const RowMatrix& coords, const std::optional<Labels>& labels,
               const PlotOptions& options);

}  // namespace finsler::cli
