#include "marketlab/audit.hpp"

#include <cmath>
#include <sstream>

#include "marketlab/io.hpp"
#include "marketlab/returns.hpp"
#include "marketlab/strategies.hpp"

namespace marketlab::audit {

namespace {

AnchorCheck check(std::string name, double got, double expected, double tol) {
  AnchorCheck c;
  c.name = std::move(name);
  c.got = got;
  c.expected = expected;
  c.tol = tol;
  c.pass = std::abs(got - expected) <= tol;
  return c;
}

}  // namespace

std::vector<AnchorCheck> worked_examples() {
  using returns::Action;
  using market::Mode;

  std::vector<AnchorCheck> out;
  out.push_back(check("stock estimated roi: buy at 100 believing the value is 150",
                      returns::estimated_roi(150.0, 100.0, Action::buy, Mode::stock), 0.5,
                      1e-12));
  out.push_back(check("betting estimated roi: back at decimal odds 2.0 with estimate 0.75",
                      returns::estimated_roi(0.75, 0.5, Action::buy, Mode::betting), 0.5,
                      1e-12));
  out.push_back(check("betting true roi: true probability 0.6 at price 0.5",
                      returns::true_roi_at_price(0.6, 0.5, Action::buy, Mode::betting), 0.2,
                      1e-12));
  out.push_back(check("betting estimated roi: price 0.3, estimate 0.7",
                      returns::estimated_roi(0.7, 0.3, Action::buy, Mode::betting), 4.0 / 3.0,
                      1e-12));
  out.push_back(check("betting true roi: true probability 0.5 at price 0.3",
                      returns::true_roi_at_price(0.5, 0.3, Action::buy, Mode::betting),
                      2.0 / 3.0, 1e-12));

  const std::vector<double> r{0.5, 0.5};
  const std::vector<double> beliefs{0.7, 0.3};
  const std::vector<double> m_same{0.7, 0.3};
  const std::vector<double> m_inverted{0.3, 0.7};
  const strategies::Allocation full = strategies::allocate_kelly(beliefs);
  const strategies::Allocation half = strategies::allocate_fractional_kelly(beliefs, 0.5);

  out.push_back(check("full kelly growth when the market matches the beliefs",
                      strategies::kelly_growth(r, full, m_same), 0.0, 1e-12));
  out.push_back(check("full kelly growth against the inverted market",
                      strategies::kelly_growth(r, full, m_inverted), 0.0, 1e-12));
  out.push_back(check("half kelly growth when the market matches the beliefs",
                      strategies::kelly_growth(r, half, m_same), 0.0, 1e-12));
  out.push_back(check("half kelly growth against the inverted market (base 10)",
                      strategies::kelly_growth(r, half, m_inverted, strategies::LogBase::ten),
                      0.038, 1e-3));
  return out;
}

std::string render_report(const std::vector<AnchorCheck>& checks) {
  std::ostringstream os;
  int failed = 0;
  for (const AnchorCheck& c : checks) {
    if (!c.pass) ++failed;
    os << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": got " << io::fmt_fixed(c.got, 6)
       << ", expected " << io::fmt_fixed(c.expected, 6) << " within " << io::fmt_sig(c.tol, 3)
       << "\n";
  }
  if (failed == 0) {
    os << "all " << checks.size() << " anchors pass\n";
  } else {
    os << failed << " of " << checks.size() << " anchors failed\n";
  }
  return os.str();
}

bool all_pass(const std::vector<AnchorCheck>& checks) {
  for (const AnchorCheck& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

}  // namespace marketlab::audit
