// Waveform CSV export/import and deterministic SVG rendering.
// CSV contract: UTF-8, header "time_s,<signal>,...", scientific notation with
// 9 significant digits, '\n' line endings.
#pragma once

#include <string>
#include <vector>

#include "stacksim/solver.hpp"

namespace stacksim {

std::string waveform_to_csv(const Waveform& w);
Waveform waveform_from_csv(const std::string& text); // throws std::runtime_error on bad input

// SVG 1.1 line plot: time axis in seconds, one polyline per signal, legend.
// Unknown signal names throw std::invalid_argument listing what is available.
std::string render_waveform_svg(const Waveform& w, const std::vector<std::string>& signals);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace stacksim
