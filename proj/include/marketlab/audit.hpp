#pragma once

#include <string>
#include <vector>

namespace marketlab::audit {

/// One hard-coded worked-example anchor: the recomputed value must match the
/// expected one within tol.
struct AnchorCheck {
  std::string name;
  double got = 0.0;
  double expected = 0.0;
  double tol = 0.0;
  bool pass = false;
};

/// Recomputes the toolkit's reference examples (single-trade ROIs and
/// two-outcome Kelly growth rates) against their expected values.
std::vector<AnchorCheck> worked_examples();

/// Fixed-format report, one `[PASS]`/`[FAIL]` line per anchor plus a
/// summary line; byte-stable across runs.
std::string render_report(const std::vector<AnchorCheck>& checks);

bool all_pass(const std::vector<AnchorCheck>& checks);

}  // namespace marketlab::audit
