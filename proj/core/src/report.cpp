#include "operadkit/report.hpp"

#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace operadkit {

std::string render_report(const Report& r, const std::string& format) {
  if (format == "json") {
    nlohmann::ordered_json j;
    j["status"] = r.passed() ? "pass" : "fail";
    j["checks"] = nlohmann::ordered_json::array();
    for (const auto& c : r.checks) {
      nlohmann::ordered_json jc;
      jc["name"] = c.name;
      jc["status"] = c.passed ? "pass" : "fail";
      if (!c.witness.empty()) jc["witness"] = c.witness;
      j["checks"].push_back(jc);
    }
    return j.dump(2) + "\n";
  }
  if (format == "csv") {
    std::ostringstream os;
    os << "name,status,witness\n";
    for (const auto& c : r.checks) {
      std::string w = c.witness;
      for (auto& ch : w)
        if (ch == ',' || ch == '\n') ch = ';';
      os << c.name << "," << (c.passed ? "pass" : "fail") << "," << w << "\n";
    }
    return os.str();
  }
  if (format == "text") {
    std::ostringstream os;
    if (r.checks.empty()) {
      os << "pass, 0 checks\n";
      return os.str();
    }
    for (const auto& c : r.checks) {
      os << (c.passed ? "PASS" : "FAIL") << "  " << c.name;
      if (c.millis > 0) os << "  (" << c.millis << " ms)";
      os << "\n";
      if (!c.passed && !c.witness.empty()) os << "      witness: " << c.witness << "\n";
    }
    os << (r.passed() ? "pass" : "fail") << ", " << r.checks.size() << " checks, "
       << r.failure_count() << " failures\n";
    return os.str();
  }
  throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace operadkit
