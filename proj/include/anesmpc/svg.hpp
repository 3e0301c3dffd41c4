#pragma once

// Static SVG line charts of a simulation log (BIS, inputs, fast states).

#include "anesmpc/sim.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace anesmpc {

struct SvgSeries {
  std::string label;
  std::vector<double> y;
  std::string color;
  bool dashed = false;
};

struct SvgChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<SvgSeries> series;
  std::vector<double> reference_lines;  // horizontal guides
};

void write_svg(std::ostream& os, const SvgChart& chart);

/// Writes bis.svg, inputs_propofol.svg, inputs_remifentanil.svg and
/// fast_states.svg into dir; returns the file names.
std::vector<std::string> write_simulation_plots(const std::filesystem::path& dir, const SimLog& log,
                                                double y_ref);

}  // namespace anesmpc
