#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "balldyn/obstruction.hpp"

// Named property suites.  Every suite is a deterministic function of its seed
// and configuration; the reports carry no timing or host data.
namespace balldyn::verify {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;   // worst value seen
  double threshold = 0.0;  // pass iff measured <= threshold (counts: failures <= 0)
  std::string detail;
  int samples = 0;
};

struct SuiteReport {
  std::string suite;
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;
  bool passed() const;
};

struct VerifyConfig {
  double tol = 1e-6;
  int max_iter = 200;
  MetricConvention conv{};
};

const std::vector<std::string>& suite_names();

// Throws InvalidArgument for an unknown name.
SuiteReport run_suite(const std::string& name, std::uint64_t seed, const VerifyConfig& cfg = {});

// Individual properties, shared with the acceptance driver.
PropertyResult type_grid(std::uint64_t seed, const VerifyConfig& cfg);
PropertyResult type_monotonicity(std::uint64_t seed, const VerifyConfig& cfg);
PropertyResult divcomm(std::uint64_t seed, const VerifyConfig& cfg, int samples = 20);
PropertyResult divrate_transfer(std::uint64_t seed, const VerifyConfig& cfg);
PropertyResult normal_form_recovery(std::uint64_t seed, const VerifyConfig& cfg, int trials = 20);
PropertyResult log2_bracket(std::uint64_t seed, const VerifyConfig& cfg);
PropertyResult disc_rate(std::uint64_t seed, const VerifyConfig& cfg);
PropertyResult synthetic_violations(std::uint64_t seed, int per_clause = 50);
PropertyResult generator_consistency(std::uint64_t seed, const VerifyConfig& cfg);
PropertyResult common_dw_families(std::uint64_t seed, const VerifyConfig& cfg, int families = 50);

}  // namespace balldyn::verify
