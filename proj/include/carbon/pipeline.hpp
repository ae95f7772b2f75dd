#pragma once

// End-to-end command runner behind the `carbon` CLI.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "carbon/builtin_cases.hpp"
#include "carbon/case_io.hpp"
#include "carbon/cef.hpp"
#include "carbon/clearing.hpp"
#include "carbon/emission.hpp"
#include "carbon/errors.hpp"
#include "carbon/grid.hpp"
#include "carbon/report.hpp"
#include "carbon/sensitivity.hpp"

namespace carbon {

enum class Command { Clear, Lmce, Lace, Cef, Compare, Heatmap };
enum class OutputFormat { Csv, Markdown };

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitNumerical = 2;

inline std::optional<Command> parse_command(const std::string& s) {
  if (s == "clear") return Command::Clear;
  if (s == "lmce") return Command::Lmce;
  if (s == "lace") return Command::Lace;
  if (s == "cef") return Command::Cef;
  if (s == "compare") return Command::Compare;
  if (s == "heatmap") return Command::Heatmap;
  return std::nullopt;
}

struct RunConfig {
  Command command = Command::Lmce;
  std::string case_path;  // file path or builtin name
  std::string out_dir;    // empty: $CARBON_OUT, else "out"
  double svd_tol = kDefaultSvdTol;
  int sigma_seed_points = 64;
  std::optional<int> riemann_points;
  OutputFormat format = OutputFormat::Csv;
};

inline std::filesystem::path resolve_out_dir(const RunConfig& cfg) {
  if (!cfg.out_dir.empty()) return cfg.out_dir;
  if (const char* env = std::getenv("CARBON_OUT"); env != nullptr && *env != '\0') return env;
  return "out";
}

/// Builtin name or JSON file.
inline CaseData resolve_case(const std::string& spec) {
  if (is_builtin_case(spec)) return builtin_case(spec);
  if (!std::filesystem::exists(spec)) throw CaseValidationError("case file not found: " + spec);
  return load_case(spec);
}

namespace detail {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

inline void emit_table(const Table& t, const std::filesystem::path& dir, const std::string& stem, OutputFormat fmt) {
  if (fmt == OutputFormat::Csv) {
    write_file(dir / (stem + ".csv"), [&](std::ostream& os) { t.write_csv(os); });
  } else {
    write_file(dir / (stem + ".md"), [&](std::ostream& os) { t.write_markdown(os); });
  }
}

struct Cleared {
  CaseData data;
  PtdfMatrix ptdf;
  LoadMatrix loads;
  ClearingProblem problem;
  ClearingSolution solution;
  EmissionVector k;
};

inline Cleared clear_case(CaseData data) {
  Cleared c{std::move(data), {}, {}, {}, {}, {}};
  c.ptdf = build_ptdf(c.data);
  c.loads = c.data.load_matrix();
  c.problem = assemble_clearing_lp(c.data, c.ptdf, c.loads);
  c.solution = solve_clearing(c.problem);
  c.k = EmissionVector::from_case(c.data);
  return c;
}

inline void riemann_check(const Cleared& c, const LaceResult& lace, int points, const RunConfig& cfg, std::ostream& out) {
  const LaceResult r = compute_lace_riemann(c.data, c.ptdf, c.loads, points, cfg.svd_tol);
  const double diff = (r.value - lace.value).cwiseAbs().maxCoeff();
  out << "riemann cross-check (" << points << " points): max |LACE difference| = " << format_number(diff) << '\n';
}

}  // namespace detail

/// Runs one command; returns the process exit code. Diagnostics are single
/// lines on `err`; summaries go to `out`.
inline int run_pipeline(const RunConfig& cfg, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  try {
    if (!(cfg.svd_tol > 0.0)) throw CaseValidationError("--svd-tol must be positive");
    if (cfg.sigma_seed_points < 1) throw CaseValidationError("--sigma-seeds must be positive");
    if (cfg.riemann_points && *cfg.riemann_points < 1) throw CaseValidationError("--riemann must be positive");
    if (cfg.case_path.empty()) throw CaseValidationError("--case is required");

    const std::filesystem::path dir = resolve_out_dir(cfg);
    const detail::Cleared c = detail::clear_case(resolve_case(cfg.case_path));
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw detail::IoError("cannot create output directory " + dir.string() + ": " + ec.message());

    LaceOptions lace_opt;
    lace_opt.svd_tol = cfg.svd_tol;
    lace_opt.seed_points = cfg.sigma_seed_points;
    const double actual = total_emission(c.k, c.solution.dispatch);

    switch (cfg.command) {
      case Command::Clear: {
        detail::emit_table(clearing_table(c.data, c.solution.dispatch), dir, "clearing", cfg.format);
        out << c.data.name << ": objective " << format_number(c.solution.objective) << ", total emission "
            << format_number(actual) << " tCO2\n";
        break;
      }
      case Command::Lmce: {
        const LmceResult lmce = decompose_lmce(c.k, c.problem, c.solution, cfg.svd_tol);
        const Table t = lmce_table(c.data, lmce);
        detail::emit_table(t, dir, "lmce", cfg.format);
        t.write_markdown(out);
        break;
      }
      case Command::Lace: {
        const LaceResult lace = compute_lace(c.data, c.ptdf, c.loads, lace_opt);
        detail::emit_table(lace_table(c.data, lace), dir, "lace", cfg.format);
        const ConservationReport rep = verify_conservation(lace, c.loads, actual);
        out << "allocated " << format_number(rep.allocated) << " tCO2, generation " << format_number(rep.actual)
            << " tCO2, relative gap " << format_number(rep.relative_gap) << '\n';
        if (cfg.riemann_points) detail::riemann_check(c, lace, *cfg.riemann_points, cfg, out);
        break;
      }
      case Command::Cef: {
        const CefResult cef = cef_solve(c.data, c.ptdf, c.solution.dispatch, c.loads);
        detail::emit_table(cef_table(c.data, cef), dir, "cef", cfg.format);
        out << "allocated " << format_number(cef.allocation.sum()) << " tCO2, generation " << format_number(actual)
            << " tCO2\n";
        break;
      }
      case Command::Compare: {
        const CefResult cef = cef_solve(c.data, c.ptdf, c.solution.dispatch, c.loads);
        const LaceResult lace = compute_lace(c.data, c.ptdf, c.loads, lace_opt);
        const Table t = comparison_table(c.data, c.loads, cef, lace, actual);
        detail::emit_table(t, dir, "compare", cfg.format);
        t.write_markdown(out);
        if (cfg.riemann_points) detail::riemann_check(c, lace, *cfg.riemann_points, cfg, out);
        break;
      }
      case Command::Heatmap: {
        const LmceResult lmce = decompose_lmce(c.k, c.problem, c.solution, cfg.svd_tol);
        const CefResult cef = cef_solve(c.data, c.ptdf, c.solution.dispatch, c.loads);
        const Matrix rates = flow_rates(c.data, cef.flows);
        detail::write_file(dir / "heatmap.svg", [&](std::ostream& os) { write_heatmap_svg(os, c.data, lmce.value, rates); });
        int congested = 0;
        for (Eigen::Index i = 0; i < rates.size(); ++i) congested += rates.data()[i] >= kCongestionMarkPercent ? 1 : 0;
        out << "wrote " << (dir / "heatmap.svg").string() << " (" << congested << " congested line-hours)\n";
        break;
      }
    }
    return kExitOk;
  } catch (const CaseParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const CaseValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const detail::IoError& e) {
    err << "i/o failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace carbon
