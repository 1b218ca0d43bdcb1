#pragma once

#include <string>

#include "navstack/sim.hpp"
#include "navstack/world.hpp"

namespace navstack::plot {

struct Style {
  double pixels_per_meter = 50.0;
  double margin = 20.0;  // px
};

/// Self-contained SVG of the world (walls, one-way lanes with direction
/// arrows, locations, graph nodes). All numbers use six decimals.
std::string render_world(const World& world, const Style& style = {});

/// The world plus one robot's logged trajectory and start marker. An empty
/// log draws the world only. Throws InvariantViolation for a robot the log
/// does not declare.
std::string render_trajectory(const World& world, const sim::SimLog& log, const std::string& robot,
                              const Style& style = {});

}  // namespace navstack::plot
