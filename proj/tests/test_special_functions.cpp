#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "lcmix/special_functions.hpp"

using namespace lcmix;

TEST_CASE("log_sum_exp basics") {
  std::vector<double> v{0.0, 0.0};
  CHECK(log_sum_exp(v) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-14));
  std::vector<double> one{-3.5};
  CHECK(log_sum_exp(one) == doctest::Approx(-3.5));
  CHECK(log_sum_exp({}) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("chi-square upper tail at zero and infinity") {
  CHECK(chi_square_upper_tail(0.0, 1) == 1.0);
  CHECK(chi_square_upper_tail(0.0, 7) == 1.0);
  CHECK(chi_square_upper_tail(1e4, 2) == doctest::Approx(0.0).epsilon(1e-30));
}

TEST_CASE("chi-square df=2 matches the closed form exp(-x/2)") {
  for (double x : {0.01, 0.1, 0.5, 1.0, 2.0, 2.9957, 5.991465, 10.0, 25.0, 60.0}) {
    CHECK(chi_square_upper_tail(x, 2) == doctest::Approx(std::exp(-0.5 * x)).epsilon(1e-12));
  }
  // standard 5% critical value
  CHECK(chi_square_upper_tail(5.991465, 2) == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("chi-square df=1 matches the erfc closed form") {
  for (double x : {0.02, 0.5, 1.0, 3.841459, 9.0, 20.0}) {
    const double reference = std::erfc(std::sqrt(0.5 * x));
    CHECK(chi_square_upper_tail(x, 1) == doctest::Approx(reference).epsilon(1e-12));
  }
  CHECK(chi_square_upper_tail(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-4));
}

TEST_CASE("chi-square even df matches the Erlang series") {
  // Q(x; 2m) = exp(-x/2) * sum_{i<m} (x/2)^i / i!
  auto erlang = [](double x, int m) {
    double term = 1.0, sum = 1.0;
    for (int i = 1; i < m; ++i) {
      term *= 0.5 * x / i;
      sum += term;
    }
    return std::exp(-0.5 * x) * sum;
  };
  for (int df : {4, 6, 10}) {
    for (double x : {0.3, 1.7, 6.0, 14.2, 33.0}) {
      CHECK(chi_square_upper_tail(x, df) ==
            doctest::Approx(erlang(x, df / 2)).epsilon(1e-11));
    }
  }
}

TEST_CASE("chi-square upper tail is monotone decreasing in x") {
  for (int df : {1, 2, 3, 8}) {
    double prev = 1.0;
    for (double x = 0.25; x < 40.0; x += 0.25) {
      const double p = chi_square_upper_tail(x, df);
      CHECK(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("chi-square domain errors") {
  CHECK_THROWS_AS(chi_square_upper_tail(-0.1, 1), std::domain_error);
  CHECK_THROWS_AS(chi_square_upper_tail(1.0, 0), std::domain_error);
  CHECK_THROWS_AS(regularized_gamma_q(0.0, 1.0), std::domain_error);
}
