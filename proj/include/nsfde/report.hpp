#pragma once

#include <string>

#include "nsfde/solver.hpp"

namespace nsfde::solver {

/// Human-readable certification report: hypothesis table, measured
/// constants, Picard diagnostics, one line per certified inequality.
std::string format_report(const Scenario& s, const DiagnosticsReport& report);

/// Hypothesis table only (for the `hypotheses` subcommand).
std::string format_hypothesis_table(const DiagnosticsReport& report);

}  // namespace nsfde::solver
