#pragma once

#include <string>

#include "schedlab/model.hpp"

namespace schedlab {

// Line-oriented text format, header "schedlab-scenario v1". Times are
// integers; value/pref/eta are printed with 17 significant digits so a
// serialize -> parse -> serialize cycle is byte-identical.
std::string scenario_to_text(const Scenario& s);
Scenario scenario_from_text(const std::string& text);

void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

// Shared real formatting for every schedlab text format.
std::string format_real(double v);

}  // namespace schedlab
