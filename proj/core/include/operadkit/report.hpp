#pragma once

#include <string>
#include <vector>

namespace operadkit {

/// Outcome of a total validation: lists each violated invariant.
struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
  void fail(std::string what) { violations.push_back(std::move(what)); }
};

/// One named check within a larger verification run.
struct CheckRecord {
  std::string name;
  bool passed = true;
  std::string witness;  // serialized counterexample, empty when passed
  double millis = 0.0;
};

struct Report {
  std::vector<CheckRecord> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  void add(std::string name, bool ok, std::string witness = "") {
    checks.push_back({std::move(name), ok, std::move(witness), 0.0});
  }
  int failure_count() const {
    int n = 0;
    for (const auto& c : checks)
      if (!c.passed) ++n;
    return n;
  }
};

/// Renders a report as text, json, or csv. Json and csv output is byte-stable
/// across runs (timings are reported in text only).
std::string render_report(const Report& r, const std::string& format);

}  // namespace operadkit
