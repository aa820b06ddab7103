#pragma once

// Output helpers: JSON with fixed 17-digit numbers, CSV tables, plot data.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "polythresh/cramer.hpp"
#include "polythresh/polytope_sim.hpp"
#include "polythresh/thresholds.hpp"

namespace polythresh {

inline constexpr const char* kVersion = "0.1.0";

/// Serializes with every double at 17 significant digits; +-inf become the
/// strings "inf"/"-inf" and NaN becomes null. Object keys keep their order.
std::string dump_json(const nlohmann::ordered_json& value);

/// A double as JSON: number, "inf"/"-inf", or null.
nlohmann::ordered_json json_number(double value);
nlohmann::ordered_json json_number(const std::optional<double>& value);

void write_cramer_table(std::ostream& out, const std::vector<CramerEval>& rows);
void write_sweep_csv(std::ostream& out, const SweepGrid& grid);

/// Two blocks separated by a blank line: curve rows (rho, mean, ci_half),
/// then named reference abscissae (t1, window ends, crossings). `header`
/// lines are written first as `#` comments.
void emit_plot_data(const SweepGrid& grid, double t1, const std::optional<TheoreticalWindow>& window,
                    const std::filesystem::path& path, const std::string& header = {});

}  // namespace polythresh
