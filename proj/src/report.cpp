#include "weaksym/report.hpp"

#include <cstdint>
#include <sstream>

#include "json.hpp"

namespace weaksym {

const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass:
      return "pass";
    case CheckStatus::Fail:
      return "fail";
    case CheckStatus::Inconclusive:
      return "inconclusive";
  }
  return "?";
}

bool Report::all_pass() const {
  for (const CheckRecord& c : checks)
    if (c.status == CheckStatus::Fail) return false;
  return true;
}

CheckRecord& Report::add(const std::string& name) {
  checks.emplace_back();
  checks.back().name = name;
  return checks.back();
}

std::string input_digest(const std::string& canonical) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)h);
  return buf;
}

std::string emit_report_json(const Report& r) {
  nlohmann::ordered_json j;
  j["version"] = r.version;
  j["input_digest"] = r.input_digest;
  j["seed"] = r.seed;
  j["checks"] = nlohmann::ordered_json::array();
  for (const CheckRecord& c : r.checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["status"] = check_status_name(c.status);
    if (c.slope) jc["slope"] = *c.slope;
    if (!c.epsilons.empty()) jc["epsilons"] = c.epsilons;
    if (!c.residuals.empty()) jc["residuals"] = c.residuals;
    if (c.limit_estimate) jc["limit_estimate"] = *c.limit_estimate;
    if (c.max_residual) jc["max_residual"] = *c.max_residual;
    if (c.expression) jc["expression"] = *c.expression;
    j["checks"].push_back(std::move(jc));
  }
  return j.dump(2) + "\n";
}

std::string emit_report_text(const Report& r) {
  std::ostringstream out;
  out << "report " << r.version << "  digest " << r.input_digest << "  seed "
      << r.seed << "\n";
  for (const CheckRecord& c : r.checks) {
    const char* st = c.status == CheckStatus::Pass   ? "PASS"
                     : c.status == CheckStatus::Fail ? "FAIL"
                                                     : "INCONCLUSIVE";
    out << st << "  " << c.name;
    if (c.slope) out << "  slope=" << *c.slope;
    if (c.max_residual) out << "  max_residual=" << *c.max_residual;
    if (c.limit_estimate) out << "  limit=" << *c.limit_estimate;
    if (c.expression) out << "  " << *c.expression;
    out << "\n";
  }
  return out.str();
}

}  // namespace weaksym
