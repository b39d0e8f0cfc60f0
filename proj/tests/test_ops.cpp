#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "qdec/gradcheck.hpp"
#include "qdec/ops.hpp"
#include "qdec/optim.hpp"
#include "qdec/rng.hpp"

using namespace qdec;

TEST_CASE("init_uniform stays inside the range and is seed-deterministic") {
  Rng rng_a(7);
  const Mat m = init_uniform_mat(100, 100, 0.15, rng_a);
  for (double v : m.flat()) {
    CHECK(v >= -0.15);
    CHECK(v <= 0.15);
  }
  Rng rng_b(7);
  const Mat m2 = init_uniform_mat(100, 100, 0.15, rng_b);
  CHECK(m == m2);

  Rng rng_c(7);
  CHECK_THROWS_AS(init_uniform_vec(3, 0.0, rng_c), std::invalid_argument);
  CHECK_THROWS_AS(init_uniform_mat(2, 2, -0.1, rng_c), std::invalid_argument);
}

TEST_CASE("softmax analytic cases") {
  const Vec even = softmax(Vec{0.0, 0.0});
  CHECK(even[0] == doctest::Approx(0.5));
  CHECK(even[1] == doctest::Approx(0.5));

  const Vec skew = softmax(Vec{std::log(3.0), 0.0});
  CHECK(skew[0] == doctest::Approx(0.75));
  CHECK(skew[1] == doctest::Approx(0.25));

  const Vec big = softmax(Vec{1000.0, 1000.5});
  const Vec small = softmax(Vec{0.0, 0.5});
  CHECK(big[0] == doctest::Approx(small[0]).epsilon(1e-12));
  CHECK(big[1] == doctest::Approx(small[1]).epsilon(1e-12));

  CHECK_THROWS_AS(softmax(Vec{}), std::invalid_argument);
  CHECK_THROWS_AS(softmax(Vec{1.0, std::numeric_limits<double>::quiet_NaN()}),
                  std::invalid_argument);
  CHECK_THROWS_AS(softmax(Vec{std::numeric_limits<double>::infinity()}),
                  std::invalid_argument);
}

TEST_CASE("softmax properties: unit sum and shift invariance") {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(40);
    Vec logits(n);
    for (double& v : logits) v = rng.uniform(-30.0, 30.0);
    const Vec p = softmax(logits);
    double total = 0.0;
    for (double v : p) {
      CHECK(v > 0.0);
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);

    const double shift = rng.uniform(-100.0, 100.0);
    Vec shifted = logits;
    for (double& v : shifted) v += shift;
    const Vec q = softmax(shifted);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(p[i] - q[i]) <= 1e-12);
  }
}

TEST_CASE("cross entropy analytic cases") {
  CHECK(cross_entropy(Vec{0.0, 1.0}, 1) == doctest::Approx(0.0));
  CHECK(cross_entropy(Vec{0.25, 0.25, 0.25, 0.25}, 2) == doctest::Approx(std::log(4.0)));
  CHECK(cross_entropy(Vec{0.1, 0.9}, 0) == doctest::Approx(2.302585092994046));
  CHECK_THROWS_AS(cross_entropy(Vec{0.5, 0.5}, 2), std::invalid_argument);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  CHECK(argmax_lowest(Vec{0.1, 0.9, 0.3}) == 1);
  CHECK(argmax_lowest(Vec{0.5, 0.2, 0.5}) == 0);
  CHECK(argmax_lowest(Vec{-1.0}) == 0);
}

TEST_CASE("gradient clipping") {
  // two blocks with global norm 30
  Vec a = {18.0, 0.0};
  Vec b = {0.0, 24.0};
  std::vector<std::span<double>> grads = {a, b};
  const double norm = clip_gradient_norm(grads, 15.0);
  CHECK(norm == doctest::Approx(30.0));
  CHECK(a[0] == doctest::Approx(9.0));
  CHECK(b[1] == doctest::Approx(12.0));

  Vec c = {3.0, 4.0};
  std::vector<std::span<double>> small = {c};
  clip_gradient_norm(small, 15.0);
  CHECK(c[0] == doctest::Approx(3.0));
  CHECK(c[1] == doctest::Approx(4.0));

  Vec z = {0.0, 0.0};
  std::vector<std::span<double>> zero = {z};
  clip_gradient_norm(zero, 15.0);
  CHECK(z[0] == 0.0);
  CHECK(z[1] == 0.0);
}

TEST_CASE("gradient clipping preserves direction") {
  Rng rng(4242);
  for (int trial = 0; trial < 25; ++trial) {
    Vec g(16);
    for (double& v : g) v = rng.uniform(-10.0, 10.0);
    Vec before = g;
    std::vector<std::span<double>> grads = {g};
    clip_gradient_norm(grads, 5.0);

    double norm_sq = 0.0;
    for (double v : g) norm_sq += v * v;
    CHECK(std::sqrt(norm_sq) <= 5.0 + 1e-9);

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      dot += g[i] * before[i];
      na += g[i] * g[i];
      nb += before[i] * before[i];
    }
    const double cosine = dot / std::sqrt(na * nb);
    CHECK(std::abs(cosine - 1.0) <= 1e-12);
  }
}

TEST_CASE("adagrad: spot behaviors") {
  AdaGradConfig cfg{0.05, 0.0, 1e-8};

  SUBCASE("first step is about -lr * sign(g)") {
    Vec p = {0.0};
    AdaGrad opt(cfg, 1);
    Vec g = {4.0};
    std::vector<std::span<double>> ps = {p};
    std::vector<std::span<const double>> gs = {g};
    opt.step(ps, gs);
    CHECK(p[0] == doctest::Approx(-0.05).epsilon(1e-6));
  }

  SUBCASE("zero gradient with weight decay only shrinks") {
    AdaGradConfig wd_cfg{0.05, 0.01, 1e-8};
    Vec p = {2.0};
    AdaGrad opt(wd_cfg, 1);
    Vec g = {0.0};
    std::vector<std::span<double>> ps = {p};
    std::vector<std::span<const double>> gs = {g};
    opt.step(ps, gs);
    CHECK(p[0] == doctest::Approx(2.0 * (1.0 - 0.05 * 0.01)));
  }

  SUBCASE("repeated equal gradients shrink the step") {
    Vec p = {0.0};
    AdaGrad opt(cfg, 1);
    Vec g = {1.0};
    std::vector<std::span<double>> ps = {p};
    std::vector<std::span<const double>> gs = {g};
    opt.step(ps, gs);
    const double first = std::abs(p[0]);
    const double before = p[0];
    opt.step(ps, gs);
    const double second = std::abs(p[0] - before);
    CHECK(second < first);
  }

  SUBCASE("NaN gradient is rejected") {
    Vec p = {0.0};
    AdaGrad opt(cfg, 1);
    Vec g = {std::numeric_limits<double>::quiet_NaN()};
    std::vector<std::span<double>> ps = {p};
    std::vector<std::span<const double>> gs = {g};
    CHECK_THROWS_AS(opt.step(ps, gs), std::invalid_argument);
  }

  SUBCASE("steps are bit-deterministic") {
    auto run = [&] {
      Vec p = {0.25, -0.5, 1.0};
      AdaGrad opt(cfg, 3);
      Rng rng(3);
      for (int i = 0; i < 20; ++i) {
        Vec g(3);
        for (double& v : g) v = rng.uniform(-1.0, 1.0);
        std::vector<std::span<double>> ps = {p};
        std::vector<std::span<const double>> gs = {g};
        opt.step(ps, gs);
      }
      return p;
    };
    CHECK(run() == run());
  }
}

TEST_CASE("dropout") {
  Rng rng(11);
  const Vec x = {1.0, -2.0, 3.0, -4.0};

  SUBCASE("inference mode is the identity") {
    CHECK(apply_dropout(x, 0.5, rng, false) == x);
  }
  SUBCASE("rate zero is the identity") {
    CHECK(apply_dropout(x, 0.0, rng, true) == x);
  }
  SUBCASE("rate bounds enforced") {
    CHECK_THROWS_AS(apply_dropout(x, 1.0, rng, true), std::invalid_argument);
    CHECK_THROWS_AS(apply_dropout(x, -0.1, rng, true), std::invalid_argument);
  }
  SUBCASE("survivors are scaled and the mask matches") {
    Vec mask;
    const Vec out = apply_dropout(x, 0.2, rng, true, &mask);
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(out[i] == doctest::Approx(x[i] * mask[i]));
      CHECK((mask[i] == 0.0 || mask[i] == doctest::Approx(1.0 / 0.8)));
    }
  }
  SUBCASE("monte carlo drop fraction") {
    const Vec ones(1000, 1.0);
    std::size_t zeros = 0;
    const int rounds = 1000;  // 10^6 samples total
    for (int r = 0; r < rounds; ++r) {
      const Vec out = apply_dropout(ones, 0.2, rng, true);
      for (double v : out)
        if (v == 0.0) ++zeros;
    }
    const double fraction = static_cast<double>(zeros) / (1000.0 * rounds);
    CHECK(fraction == doctest::Approx(0.2).epsilon(0.025));  // 0.2 +- 0.005
  }
}

TEST_CASE("finite difference checker") {
  SUBCASE("exact quadratic") {
    Vec theta = {0.5, -1.25, 2.0};
    auto loss = [&theta] {
      double s = 0.0;
      for (double v : theta) s += 0.5 * v * v;
      return s;
    };
    const Vec analytic = theta;
    std::vector<std::span<double>> ps = {theta};
    std::vector<std::span<const double>> as = {analytic};
    const auto report = finite_difference_check(loss, ps, as, 1e-5, 1e-6);
    CHECK(report.max_relative_error < 1e-9);
    CHECK(report.failing_parameter_indices.empty());
  }

  SUBCASE("sabotaged gradient is caught") {
    Vec theta = {0.5, -1.25, 2.0};
    auto loss = [&theta] {
      double s = 0.0;
      for (double v : theta) s += 0.5 * v * v;
      return s;
    };
    Vec wrong = theta;
    for (double& v : wrong) v *= 2.0;
    std::vector<std::span<double>> ps = {theta};
    std::vector<std::span<const double>> as = {wrong};
    const auto report = finite_difference_check(loss, ps, as, 1e-5, 1e-4);
    CHECK(!report.failing_parameter_indices.empty());
  }

  SUBCASE("linear loss has unit gradient") {
    Vec theta = {1.0, 2.0, 3.0, 4.0};
    auto loss = [&theta] { return std::accumulate(theta.begin(), theta.end(), 0.0); };
    const Vec ones(theta.size(), 1.0);
    std::vector<std::span<double>> ps = {theta};
    std::vector<std::span<const double>> as = {ones};
    const auto report = finite_difference_check(loss, ps, as, 1e-5, 1e-6);
    CHECK(report.max_relative_error < 1e-9);
  }

  SUBCASE("step must be positive") {
    Vec theta = {1.0};
    const Vec analytic = {1.0};
    std::vector<std::span<double>> ps = {theta};
    std::vector<std::span<const double>> as = {analytic};
    CHECK_THROWS_AS(finite_difference_check([] { return 0.0; }, ps, as, 0.0, 1e-4),
                    std::invalid_argument);
  }
}

TEST_CASE("rng: categorical and substreams") {
  Rng rng(5);
  const Vec weights = {3.0, 1.0, 1.0, 1.0, 1.0};
  std::vector<std::size_t> counts(5, 0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rng.categorical(weights)];
  CHECK(static_cast<double>(counts[0]) / draws == doctest::Approx(3.0 / 7.0).epsilon(0.03));

  Rng a = Rng::substream(123, "corpus");
  Rng b = Rng::substream(123, "corpus");
  Rng c = Rng::substream(123, "pretrain");
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());

  CHECK_THROWS_AS(rng.uniform_int(0), std::invalid_argument);
  const Vec zero_w = {0.0, 0.0};
  CHECK_THROWS_AS(rng.categorical(zero_w), std::invalid_argument);
}
