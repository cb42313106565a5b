#pragma once

#include <functional>
#include <string>
#include <vector>

namespace gkdv {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct VerifyOptions {
  std::size_t threads = 2;
  std::string cache_dir;  ///< edge-spectrum cache (empty: in-memory only)
  std::function<void(const CriterionResult&)> on_result;
};

inline constexpr int kCriterionCount = 12;

/// Runs one acceptance criterion (1..12). Exceptions inside a criterion are
/// reported as a failure with the message in `detail`.
CriterionResult run_criterion(int id, const VerifyOptions& opts = {});
/// Runs the listed criteria (all when empty) in order.
std::vector<CriterionResult> run_acceptance(const std::vector<int>& only,
                                            const VerifyOptions& opts = {});
/// "PASS  7 evolver (2.1 s): detail"
std::string format_result(const CriterionResult& r);

}  // namespace gkdv
