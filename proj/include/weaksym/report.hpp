#pragma once

#include <optional>
#include <string>
#include <vector>

namespace weaksym {

enum class CheckStatus { Pass, Fail, Inconclusive };

const char* check_status_name(CheckStatus s);

/// One verification record. Optional fields are emitted only when set so the
/// JSON stays small; vectors are emitted when non-empty.
struct CheckRecord {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::optional<double> slope;
  std::optional<double> limit_estimate;
  std::optional<double> max_residual;
  std::vector<double> epsilons;
  std::vector<double> residuals;
  std::optional<std::string> expression;
};

struct Report {
  std::string version = "0.1.0";
  std::string input_digest;
  uint64_t seed = 42;
  std::vector<CheckRecord> checks;

  bool all_pass() const;
  CheckRecord& add(const std::string& name);
};

/// FNV-1a over the canonical input description (scenario name + sorted
/// overrides, or raw file bytes), rendered as 16 hex digits.
std::string input_digest(const std::string& canonical);

/// Stable key order, two-space indent, '\n'-terminated. Doubles print with
/// the shortest round-trip representation, so identical runs are
/// byte-identical.
std::string emit_report_json(const Report& r);

/// One line per check: STATUS name (evidence).
std::string emit_report_text(const Report& r);

}  // namespace weaksym
