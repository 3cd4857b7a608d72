#pragma once

#include <string>
#include <vector>

#include "agctl/control.hpp"

namespace agctl {

/// Minimal dependency-free SVG rendering of an episode: average temperature
/// vs setpoint on top, command staircases below.
std::string episode_svg(const EpisodeLog& log);

/// Side-by-side average-temperature comparison of several episodes.
std::string comparison_svg(const std::vector<EpisodeLog>& logs);

void write_file(const std::string& path, const std::string& content);

}  // namespace agctl
