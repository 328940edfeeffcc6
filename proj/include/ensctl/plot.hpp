#pragma once

#include "ensctl/experiments.hpp"

#include <string>
#include <vector>

namespace ensctl {

/// Self-contained SVG: one panel per metric, median over trials against N
/// on log-log axes, one series per method. Same records, same bytes.
std::string render_plot(const std::vector<ExperimentRecord>& records);

/// Writes render_plot to `path`; throws InvalidArgument for empty records
/// and IoError when the file cannot be written.
void emit_plot(const std::vector<ExperimentRecord>& records, const std::string& path);

}  // namespace ensctl
