#include "attsync/acceptance.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace attsync;
namespace acc = attsync::acceptance;

namespace {

// f is the arccos_sqrt kernel, f' is off by 1%.
DistanceKernel broken_kernel() {
  const DistanceKernel good = arccos_sqrt_kernel();
  return DistanceKernel("broken_arccos_sqrt", [good](double s) { return good.f(s); }, [good](double s) { return 1.01 * good.f_prime_raw(s); },
                        KernelClass::P0);
}

}  // namespace

TEST(AcceptanceFixtures, RateConstantOracle) {
  const auto rc = acc::rate_constant_oracle(arccos_sqrt_kernel());
  EXPECT_NEAR(rc.c, 0.5, 1e-8);
  EXPECT_LT(rc.spread, 1e-8);
}

TEST(AcceptanceFixtures, BrokenDerivativeFailsPdeCriterion) {
  const auto ok = acc::pde_residual_for({arccos_sqrt_kernel()});
  EXPECT_TRUE(ok.passed) << ok.detail;
  const auto bad = acc::pde_residual_for({linear_cos_kernel(), broken_kernel()});
  EXPECT_FALSE(bad.passed) << bad.detail;
  EXPECT_NE(bad.detail.find("broken_arccos_sqrt"), std::string::npos);
}

TEST(AcceptanceFixtures, ReportFailsOnAnyFailedCriterion) {
  std::vector<acc::CriterionResult> results{acc::incidence_equivalence(),
                                            acc::pde_residual_for({broken_kernel()})};
  std::ostringstream out;
  EXPECT_FALSE(acc::report(out, results, 1.0));
  EXPECT_NE(out.str().find("[FAIL] 8 pde_residual"), std::string::npos) << out.str();
  EXPECT_NE(out.str().find("[PASS] 5 incidence_equivalence"), std::string::npos);
}

TEST(AcceptanceFixtures, ReportFailsOverBudget) {
  std::ostringstream out;
  EXPECT_FALSE(acc::report(out, {acc::incidence_equivalence()}, acc::kSuiteBudgetSeconds + 1.0));
  EXPECT_TRUE(acc::report(out, {acc::incidence_equivalence()}, 1.0));
}

TEST(AcceptanceFixtures, ExceptionBecomesFailure) {
  const auto r = acc::detail::timed(0, "throws", [](acc::CriterionResult&) { throw std::runtime_error("boom"); });
  EXPECT_FALSE(r.passed);
  EXPECT_NE(r.detail.find("boom"), std::string::npos);
}

TEST(AcceptanceFixtures, GreatCircleState) {
  const auto s = acc::great_circle_state(4);
  EXPECT_NEAR(max_pairwise_angle(s), std::numbers::pi, 1e-15);
}
