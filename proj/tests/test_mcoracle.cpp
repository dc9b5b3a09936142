#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pong/mcoracle.hpp"
#include "grasp_fixtures.hpp"

using namespace pong;
using namespace pong::testsupport;

namespace {

WrenchModel tripod(double sigma) {
  const auto s = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  std::vector<ContactDistribution> cs;
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * M_PI * k / 3.0;
    ContactDistribution c =
        curvature_distribution(s, Vec3(std::cos(a), std::sin(a), 0.0), {});
    c.sigma1 = sigma;
    c.sigma2 = sigma;
    cs.push_back(c);
  }
  return build_wrench_model(cs, 0.5, 4, Vec3::Zero());
}

double normal_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

}  // namespace

TEST_CASE("identical seeds reproduce the estimate bit for bit") {
  const WrenchModel m = tripod(0.3);
  McConfig cfg;
  cfg.n_samples = 1000;
  cfg.seed = 42;
  const McEstimate a = estimate_pfc(m, cfg);
  const McEstimate b = estimate_pfc(m, cfg);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.std_err == b.std_err);
  CHECK(a.n_success == b.n_success);
  CHECK(a.n_indeterminate == b.n_indeterminate);

  // A different seed draws different perturbations.
  const auto s42 = sample_normal_sets(m, 42, 1);
  const auto s43 = sample_normal_sets(m, 43, 1);
  CHECK((s42[0] - s43[0]).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("estimate does not depend on the thread count") {
  const WrenchModel m = tripod(0.25);
  McConfig one;
  one.n_samples = 1000;
  one.seed = 7;
  one.threads = 1;
  McConfig four = one;
  four.threads = 4;
  const McEstimate a = estimate_pfc(m, one);
  const McEstimate b = estimate_pfc(m, four);
  CHECK(a.p_hat == b.p_hat);
  CHECK(a.n_success == b.n_success);
  CHECK(a.n_indeterminate == b.n_indeterminate);
}

TEST_CASE("vanishing noise collapses to the mean verdict") {
  McConfig cfg;
  cfg.n_samples = 1000;
  cfg.seed = 5;

  const WrenchModel fc = tripod(1e-9);
  const McEstimate yes = estimate_pfc(fc, cfg);
  CHECK(yes.p_hat == 1.0);
  CHECK(yes.n_success == yes.n_effective);

  // A single contact can never balance its own normal force.
  const auto s = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  ContactDistribution c = curvature_distribution(s, Vec3(1.0, 0.0, 0.0), {});
  c.sigma1 = 1e-9;
  c.sigma2 = 1e-9;
  const WrenchModel one =
      build_wrench_model(std::vector<ContactDistribution>{c}, 0.5, 4, Vec3::Zero());
  const McEstimate no = estimate_pfc(one, cfg);
  CHECK(no.p_hat == 0.0);
  CHECK(no.n_success == 0);
}

TEST_CASE("counts, estimate, and error bar stay consistent") {
  const WrenchModel m = tripod(0.5);
  McConfig cfg;
  cfg.n_samples = 2000;
  cfg.seed = 99;
  const McEstimate est = estimate_pfc(m, cfg);
  CHECK(est.n_effective == cfg.n_samples - est.n_indeterminate);
  CHECK(est.p_hat ==
        static_cast<double>(est.n_success) / static_cast<double>(est.n_effective));
  CHECK(est.std_err == std::sqrt(est.p_hat * (1.0 - est.p_hat) /
                                 static_cast<double>(est.n_effective)));
  CHECK(est.p_hat >= 0.0);
  CHECK(est.p_hat <= 1.0);
}

TEST_CASE("sampler matches the product-CDF closed form on a rectangle") {
  const auto s = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  ContactDistribution c = curvature_distribution(s, Vec3(0.0, 0.0, 1.0), {});
  c.sigma1 = 0.2;
  c.sigma2 = 0.35;
  const WrenchModel m =
      build_wrench_model(std::vector<ContactDistribution>{c}, 0.5, 4, Vec3::Zero());

  const double a1 = -0.1, b1 = 0.25, a2 = -0.4, b2 = 0.1;
  const std::int64_t n = 200000;
  const auto sets = sample_normal_sets(m, 2024, n);
  std::int64_t inside = 0;
  for (const MatX& es : sets) {
    if (es(0, 0) >= a1 && es(0, 0) <= b1 && es(1, 0) >= a2 && es(1, 0) <= b2)
      ++inside;
  }
  const double p_hat = static_cast<double>(inside) / static_cast<double>(n);
  const double se =
      std::sqrt(std::max(p_hat * (1.0 - p_hat), 1e-12) / static_cast<double>(n));
  const double p_true = (normal_cdf(b1 / c.sigma1) - normal_cdf(a1 / c.sigma1)) *
                        (normal_cdf(b2 / c.sigma2) - normal_cdf(a2 / c.sigma2));
  CHECK(std::abs(p_hat - p_true) <= 4.0 * se);
}

TEST_CASE("absorbed deviations always preserve closure") {
  SeqRng rng(2718, 1);
  RandomGraspOptions opt;
  opt.explicit_sigma = true;
  opt.sigma_lo = 0.01;
  opt.sigma_hi = 0.06;
  std::int64_t total_samples = 0;
  std::int64_t nonvacuous = 0;
  for (int g = 0; g < 20; ++g) {
    const WrenchModel m = random_fc_model(rng, opt);
    auto sets = sample_normal_sets(m, 1000 + static_cast<std::uint64_t>(g), 49);
    sets.push_back(MatX::Zero(2, m.n_fingers()));  // hypothesis must hold here
    const ContainmentReport rep = verify_containment(m, sets);
    REQUIRE(rep.n_counterexamples == 0);
    CHECK(rep.n_indeterminate == 0);
    CHECK(rep.n_hypothesis >= 1);  // at least the zero perturbation
    total_samples += rep.n_samples;
    nonvacuous += rep.n_hypothesis;
  }
  CHECK(total_samples >= 1000);
  CHECK(nonvacuous >= 20);
}

TEST_CASE("containment check runs the same on any thread count") {
  SeqRng rng(2718, 2);
  const WrenchModel m = random_fc_model(rng);
  const auto sets = sample_normal_sets(m, 77, 60);
  const ContainmentReport a = verify_containment(m, sets, 1);
  const ContainmentReport b = verify_containment(m, sets, 4);
  CHECK(a.n_hypothesis == b.n_hypothesis);
  CHECK(a.n_counterexamples == b.n_counterexamples);
  CHECK(a.n_indeterminate == b.n_indeterminate);
}

TEST_CASE("grasp resolution and prebuilt models agree") {
  GraspSpec spec;
  spec.surface = ImplicitSurface::make_sphere(Vec3::Zero(), 1.0);
  for (int k = 0; k < 3; ++k) {
    const double a = 2.0 * M_PI * k / 3.0;
    ContactSpec cs;
    cs.position = Vec3(std::cos(a), std::sin(a), 0.0);
    spec.contacts.push_back(cs);
  }
  spec.mu = 0.5;
  spec.n_sides = 4;

  McConfig cfg;
  cfg.n_samples = 1000;
  cfg.seed = 11;
  const McEstimate via_spec = estimate_pfc(spec, cfg);

  const auto dists = spec.resolve();
  const WrenchModel m =
      build_wrench_model(dists, spec.mu, spec.n_sides, spec.torque_origin);
  const McEstimate via_model = estimate_pfc(m, cfg);
  CHECK(via_spec.p_hat == via_model.p_hat);
  CHECK(via_spec.n_success == via_model.n_success);
}

TEST_CASE("bad configurations are rejected") {
  const WrenchModel m = tripod(0.3);
  McConfig cfg;
  cfg.n_samples = 999;
  CHECK_THROWS_AS(estimate_pfc(m, cfg), InputError);
  cfg.n_samples = 1000;
  cfg.confidence_z = 0.0;
  CHECK_THROWS_AS(estimate_pfc(m, cfg), InputError);
  CHECK_THROWS_AS(sample_normal_sets(m, 1, -1), InputError);

  std::vector<MatX> bad{MatX::Zero(3, m.n_fingers())};
  CHECK_THROWS_AS(verify_containment(m, bad), InputError);
}
