#include "polythresh/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "polythresh/errors.hpp"
#include "polythresh/stats.hpp"

namespace polythresh {

namespace {

void dump_to(std::ostringstream& os, const nlohmann::ordered_json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << nlohmann::ordered_json(it.key()).dump() << ':';
        dump_to(os, it.value());
      }
      os << '}';
      break;
    }
    case nlohmann::json::value_t::array: {
      os << '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) os << ',';
        first = false;
        dump_to(os, e);
      }
      os << ']';
      break;
    }
    case nlohmann::json::value_t::number_float: {
      const double d = v.get<double>();
      if (std::isnan(d))
        os << "null";
      else if (std::isinf(d))
        os << (d > 0 ? "\"inf\"" : "\"-inf\"");
      else
        os << format_double(d);
      break;
    }
    default:
      os << v.dump();
  }
}

}  // namespace

std::string dump_json(const nlohmann::ordered_json& value) {
  std::ostringstream os;
  dump_to(os, value);
  return os.str();
}

nlohmann::ordered_json json_number(double value) {
  if (std::isnan(value)) return nullptr;
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

nlohmann::ordered_json json_number(const std::optional<double>& value) {
  return value ? json_number(*value) : nlohmann::ordered_json(nullptr);
}

void write_cramer_table(std::ostream& out, const std::vector<CramerEval>& rows) {
  out << "x,lambda_star,h,m,ratio\n";
  for (const auto& r : rows)
    out << format_double(r.x) << ',' << format_double(r.lambda_star) << ',' << format_double(r.h_of_x) << ','
        << format_double(r.tail_m) << ',' << format_double(r.ratio) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepGrid& grid) {
  out << "n,rho,N,mean,ci_half,replicates,test_points\n";
  for (const auto& r : grid.rows)
    out << r.n << ',' << format_double(r.rho) << ',' << r.N << ',' << format_double(r.mean) << ','
        << format_double(r.ci_half) << ',' << r.replicates << ',' << r.test_points << '\n';
}

void emit_plot_data(const SweepGrid& grid, double t1, const std::optional<TheoreticalWindow>& window,
                    const std::filesystem::path& path, const std::string& header) {
  if (grid.rows.empty()) throw ValidationError("emit_plot_data", "sweep grid is empty");
  std::ofstream out(path);
  if (!out) throw ValidationError("emit_plot_data", "cannot open " + path.string());
  if (!header.empty()) {
    std::istringstream lines(header);
    for (std::string line; std::getline(lines, line);) out << "# " << line << '\n';
  }
  out << "# curve: rho mean ci_half\n";
  for (const auto& r : grid.rows)
    out << format_double(r.rho) << ' ' << format_double(r.mean) << ' ' << format_double(r.ci_half) << '\n';
  out << "\n\n# reference: label rho\n";
  out << "t1 " << format_double(t1) << '\n';
  if (window) {
    out << "rho1_lower " << format_double(window->rho1_lower) << '\n';
    out << "rho2_upper " << format_double(window->rho2_upper) << '\n';
  }
  if (grid.rho_hat_low) out << "rho_hat_low " << format_double(*grid.rho_hat_low) << '\n';
  if (grid.rho_hat_high) out << "rho_hat_high " << format_double(*grid.rho_hat_high) << '\n';
  if (!out) throw ValidationError("emit_plot_data", "write failed for " + path.string());
}

}  // namespace polythresh
