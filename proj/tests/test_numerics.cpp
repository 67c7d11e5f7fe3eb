#include <doctest.h>

#include <cmath>

#include "csifb/numerics.hpp"
#include "oracles.hpp"

using namespace csifb;

namespace {

CMatrix random_hermitian(Rng& rng, Index n) {
  const CMatrix a = rng.complex_normal_matrix(n, n);
  return 0.5 * (a + a.adjoint());
}

CMatrix random_psd(Rng& rng, Index n, Index rank) {
  const CMatrix f = rng.complex_normal_matrix(n, rank);
  return f * f.adjoint();
}

RVector random_spectrum(Rng& rng, Index n) {
  RVector v(n);
  for (Index i = 0; i < n; ++i) v(i) = std::exp(rng.uniform(-6.0, 3.0));
  std::sort(v.data(), v.data() + n, std::greater<>());
  return v;
}

}  // namespace

TEST_CASE("hermitian_eig: identity and sorting") {
  const Spectrum s = hermitian_eig(CMatrix::Identity(3, 3));
  CHECK(s.values.isApprox(RVector::Ones(3)));
  CMatrix d = CMatrix::Zero(3, 3);
  d.diagonal() << 1.0, 3.0, 2.0;
  const Spectrum t = hermitian_eig(d);
  CHECK(t.values(0) == doctest::Approx(3.0));
  CHECK(t.values(1) == doctest::Approx(2.0));
  CHECK(t.values(2) == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig: random 5x5 matches characteristic polynomial roots") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const CMatrix a = random_hermitian(rng, 5);
    const Spectrum s = hermitian_eig(a);
    const RVector roots = oracle::char_poly_roots(a);
    REQUIRE(roots.size() == 5);
    for (Index i = 0; i < 5; ++i) CHECK(std::abs(s.values(i) - roots(i)) < 1e-8);
    // A v = lambda v and unit norm
    for (Index i = 0; i < 5; ++i) CHECK((a * s.basis.col(i) - s.values(i) * s.basis.col(i)).norm() < 1e-10);
  }
}

TEST_CASE("hermitian_eig: phases normalized and deterministic") {
  Rng rng(5);
  const CMatrix a = random_hermitian(rng, 4);
  const Spectrum s1 = hermitian_eig(a);
  const Spectrum s2 = hermitian_eig(a);
  CHECK(s1.basis == s2.basis);
  for (Index j = 0; j < 4; ++j) {
    Index first = 0;
    while (std::abs(s1.basis(first, j)) <= 1e-12) ++first;
    CHECK(std::abs(s1.basis(first, j).imag()) < 1e-12);
    CHECK(s1.basis(first, j).real() > 0.0);
  }
}

TEST_CASE("hermitian_eig rejects a non-Hermitian matrix") {
  CMatrix a = CMatrix::Identity(2, 2);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(a), NumericError);
}

TEST_CASE("psd_eig clamps tiny negatives and rejects indefinite input") {
  CMatrix a = CMatrix::Zero(2, 2);
  a(0, 0) = 1.0;
  a(1, 1) = -1e-14;
  const Spectrum s = psd_eig(a);
  CHECK(s.values(1) == 0.0);
  a(1, 1) = -0.1;
  CHECK_THROWS_AS(psd_eig(a), NumericError);
}

TEST_CASE("sample_from_covariance") {
  Rng rng(3);
  CHECK(sample_from_covariance(CMatrix::Zero(3, 3), rng).norm() == 0.0);

  // identity: sample covariance within 3 sigma entrywise
  const int n = 100000;
  CMatrix acc = CMatrix::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const CVector x = sample_from_covariance(CMatrix::Identity(2, 2), rng);
    acc += x * x.adjoint();
  }
  acc /= n;
  // Var(|x|^2) = 1 for CN(0,1); Var(x_i x_j^*) = 1 off-diagonal
  const double se = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) {
      const double target = i == j ? 1.0 : 0.0;
      CHECK(std::abs(acc(i, j) - target) < 3.0 * se * std::sqrt(2.0));
    }

  // rank one: draws stay in the range
  const CVector v = rng.complex_normal_vector(4);
  const CMatrix c = v * v.adjoint();
  const CVector u = v.normalized();
  for (int i = 0; i < 100; ++i) {
    const CVector x = sample_from_covariance(c, rng);
    CHECK((x - u * (u.adjoint() * x)).norm() <= 1e-8 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("psd_pinv") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 2.0;
  const CMatrix p = psd_pinv(d);
  CHECK(std::abs(p(0, 0) - 0.5) < 1e-12);
  CHECK(std::abs(p(1, 1)) < 1e-12);

  Rng rng(9);
  const CMatrix a = random_psd(rng, 4, 4) + CMatrix::Identity(4, 4);
  CHECK((psd_pinv(a) - a.inverse()).norm() < 1e-8);

  // Penrose conditions on a rank-deficient PSD matrix
  const CMatrix b = random_psd(rng, 4, 2);
  const CMatrix bp = psd_pinv(b);
  CHECK((b * bp * b - b).norm() < 1e-8);
  CHECK((bp * b * bp - bp).norm() < 1e-8);
  CHECK(((b * bp).adjoint() - b * bp).norm() < 1e-8);
  CHECK(((bp * b).adjoint() - bp * b).norm() < 1e-8);
}

TEST_CASE("psd_factor reproduces the matrix") {
  Rng rng(2);
  const CMatrix c = random_psd(rng, 5, 3);
  const CMatrix f = psd_factor(c);
  CHECK(f.cols() == 3);
  CHECK((f * f.adjoint() - c).norm() < 1e-10 * c.norm());
}

TEST_CASE("reverse_waterfill examples") {
  RVector v(2);
  v << 4.0, 1.0;
  CHECK(reverse_waterfill(v, 2.0) == doctest::Approx(1.0));
  v << 8.0, 8.0;
  CHECK(reverse_waterfill(v, 2.0) == doctest::Approx(4.0));
  v << 3.0, 0.5;
  CHECK(reverse_waterfill(v, 0.0) == doctest::Approx(3.0));
  CHECK(waterfill_distortion(v, reverse_waterfill(v, 0.0)) == doctest::Approx(3.5));
}

TEST_CASE("reverse_waterfill agrees with a bisection oracle on random spectra") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const RVector v = random_spectrum(rng, 1 + trial % 9);
    const double rate = rng.uniform(0.0, 40.0);
    const double lg = reverse_waterfill_log2(v, rate);
    CHECK(std::abs(waterfill_rate(v, std::exp2(lg)) - rate) < 1e-9);
    CHECK(std::abs(lg - oracle::reverse_waterfill_log2(v, rate)) < 1e-9);
  }
}

TEST_CASE("reverse_waterfill at huge rates stays finite in log form") {
  RVector v(3);
  v << 2.0, 1.0, 0.5;
  const double lg = reverse_waterfill_log2(v, 1e4);
  CHECK(std::isfinite(lg));
  CHECK(std::abs(oracle::rate_at(v, lg) - 1e4) < 1e-6);
  CHECK(reverse_waterfill(v, 1e4) == 0.0);
}

TEST_CASE("waterfill_threshold_for_distortion inverts the distortion") {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const RVector v = random_spectrum(rng, 6);
    const double d = rng.uniform(0.0, v.sum());
    CHECK(waterfill_distortion(v, waterfill_threshold_for_distortion(v, d)) == doctest::Approx(d).epsilon(1e-12));
  }
  RVector v(2);
  v << 1.0, 2.0;
  CHECK_THROWS_AS(waterfill_threshold_for_distortion(v, 4.0), ConfigError);
}

TEST_CASE("ecsq_threshold examples") {
  RVector one(1);
  one << 4.0;
  CHECK(ecsq_threshold(one, 3.508) == doctest::Approx(1.0));
  // budget below the overhead: nothing encoded
  CHECK(ecsq_threshold(one, 1.0) == doctest::Approx(4.0));
  // [4,4] at 7.016 bits: 2 x (2 + 1.508), so gamma = 1 (see the ledger)
  RVector two(2);
  two << 4.0, 4.0;
  CHECK(ecsq_threshold(two, 7.016) == doctest::Approx(1.0));
  CHECK(ecsq_threshold(two, 9.016) == doctest::Approx(0.5));
}

TEST_CASE("ecsq_threshold satisfies its rate equation on random spectra") {
  Rng rng(31);
  int interior = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const RVector v = random_spectrum(rng, 1 + trial % 8);
    const double rate = rng.uniform(0.0, 60.0);
    const double g = ecsq_threshold(v, rate);
    const double used = ecsq_rate(v, g);
    CHECK(used <= rate + 1e-9);
    bool at_eigenvalue = false;
    for (Index i = 0; i < v.size(); ++i) at_eigenvalue = at_eigenvalue || std::abs(g - v(i)) <= 1e-12 * v(i);
    if (!at_eigenvalue) {
      ++interior;
      CHECK(std::abs(used - rate) < 1e-9);
    } else {
      // inside a jump: any lower threshold overspends
      CHECK(ecsq_rate(v, g * (1.0 - 1e-9)) > rate);
    }
  }
  CHECK(interior > 20);
}

TEST_CASE("ecsq penalty over reverse water-filling") {
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const RVector v = random_spectrum(rng, 5);
    const double gamma = rng.uniform(v.minCoeff() * 0.5, v.maxCoeff());
    Index active = 0;
    for (Index i = 0; i < v.size(); ++i) active += v(i) > gamma ? 1 : 0;
    CHECK(ecsq_rate(v, gamma) - waterfill_rate(v, gamma) == doctest::Approx(kEcsqOverheadBits * active));
    const double r = rng.uniform(0.0, 30.0);
    CHECK(waterfill_distortion(v, ecsq_threshold(v, r)) >= waterfill_distortion(v, reverse_waterfill(v, r)) - 1e-12);
  }
}

TEST_CASE("tkl_waterfill single and symmetric instances") {
  RVector rho(1), lb(1);
  rho << 2.0;
  lb << 3.0;
  const TklAllocation a = tkl_waterfill(rho, lb, 5.0);
  CHECK(a.alpha(0) == doctest::Approx(5.0 / 4.0));

  RVector r3 = RVector::Constant(3, 1.5), l3 = RVector::Constant(3, 2.0);
  const TklAllocation b = tkl_waterfill(r3, l3, 6.0);
  for (Index i = 0; i < 3; ++i) CHECK(b.alpha(i) == doctest::Approx((6.0 / 3.0) / 3.0));
}

TEST_CASE("tkl_waterfill: power constraint, KKT and grid-search optimum") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    RVector rho(5), lb(5);
    for (Index i = 0; i < 5; ++i) {
      rho(i) = rng.uniform(0.05, 3.0);
      lb(i) = std::exp(rng.uniform(-2.0, 4.0));
    }
    const double power = std::exp(rng.uniform(-1.0, 3.0));
    const TklAllocation a = tkl_waterfill(rho, lb, power);
    CHECK(a.used_power() == doctest::Approx(power).epsilon(1e-10));
    RVector t(5);
    for (Index i = 0; i < 5; ++i) t(i) = rho(i) * lb(i) / (lb(i) + 1.0);
    for (Index i = 0; i < 5; ++i) {
      const double beta = a.alpha(i) * (lb(i) + 1.0);
      if (beta > 0.0) {
        CHECK(std::abs(t(i) / ((beta + 1.0) * (beta + 1.0)) - a.gamma_star) <= 1e-6 * a.gamma_star);
        CHECK(t(i) > a.gamma_star);
      } else {
        CHECK(t(i) <= a.gamma_star * (1.0 + 1e-12));
      }
    }
    const double best = oracle::tkl_grid_max(t, power);
    CHECK(std::abs(a.objective() - best) <= 1e-4 * best);
    CHECK(a.objective() >= best * (1.0 - 1e-9));
  }
}

TEST_CASE("tkl_waterfill degenerate inputs") {
  RVector z = RVector::Zero(3), lb = RVector::Ones(3);
  const TklAllocation a = tkl_waterfill(z, lb, 2.0);
  CHECK_FALSE(a.informative);
  CHECK(a.alpha.isZero());
  CHECK_THROWS_AS(tkl_waterfill(RVector::Ones(2), RVector::Ones(3), 1.0), ConfigError);
}

TEST_CASE("gaussian_posterior matches the direct covariance formula") {
  Rng rng(12);
  RVector d(3);
  d << 2.0, 0.7, 0.1;
  const CMatrix h = rng.complex_normal_matrix(4, 3);
  const CMatrix f = rng.complex_normal_matrix(4, 4);
  const CMatrix r = f * f.adjoint() + 0.5 * CMatrix::Identity(4, 4);
  const LinearPosterior p = gaussian_posterior(d, h, r);
  // x ~ CN(0, D), obs = H D^{-1/2} x + n, so C_x,obs = D^{1/2} H^H
  const CMatrix dh = CMatrix(d.cwiseSqrt().cast<Complex>().asDiagonal());
  const CMatrix cxo = dh * h.adjoint();
  const CMatrix co = h * h.adjoint() + r;
  const CMatrix est = cxo * co.inverse() * cxo.adjoint();
  const CMatrix prior = CMatrix(d.cast<Complex>().asDiagonal());
  CHECK((p.estimate_cov - est).norm() < 1e-10);
  CHECK((p.error_cov - (prior - est)).norm() < 1e-10);
  CHECK((p.gain - cxo * co.inverse()).norm() < 1e-10);
}
