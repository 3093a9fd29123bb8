#include "sysid/metrics.hpp"
#include "sysid/rng.hpp"

#include <Eigen/SVD>
#include <doctest.h>

#include <cmath>
#include <complex>

using namespace sysid;

namespace {

ImpulseResponse random_blocks(Index n, Index p, Index m, std::uint64_t seed) {
    Rng rng(seed);
    ImpulseResponse h(n, p, m);
    for (Index i = 0; i < h.dim(); ++i) h.flat()[i] = rng.next_gaussian();
    return h;
}

// Direct O(L^2) transform, the oracle for the FFT-based bound.
double direct_dft_max(const Eigen::VectorXd& d) {
    const Index L = d.size();
    double best = 0.0;
    for (Index k = 0; k < L; ++k) {
        std::complex<double> acc(0.0, 0.0);
        for (Index t = 0; t < L; ++t)
            acc += d[t] * std::exp(std::complex<double>(0.0, -2.0 * M_PI * double(k) * double(t) / double(L)));
        best = std::max(best, std::abs(acc));
    }
    return best;
}

} // namespace

TEST_CASE("impulse-response error is the Frobenius norm of the difference") {
    const ImpulseResponse h = random_blocks(4, 2, 2, 3);
    CHECK(ir_error(h, h) == 0.0);

    ImpulseResponse shifted = h;
    shifted.flat()[0] += 1.0;
    CHECK(ir_error(shifted, h) == doctest::Approx(1.0));

    const ImpulseResponse g = random_blocks(4, 2, 2, 4);
    double brute = 0.0;
    for (Index i = 0; i < h.dim(); ++i) {
        const double d = h.flat()[i] - g.flat()[i];
        brute += d * d;
    }
    CHECK(ir_error(h, g) == doctest::Approx(std::sqrt(brute)).epsilon(1e-12));

    CHECK_THROWS_AS(ir_error(h, random_blocks(5, 2, 2, 5)), std::invalid_argument);
}

TEST_CASE("hankel spectral error agrees with a hand SVD") {
    const ImpulseResponse h = random_blocks(2, 1, 1, 6);
    CHECK(hankel_spectral_error(h, h) == 0.0);

    // difference concentrated on the middle antidiagonal of n=2:
    // H = [[0,1],[1,0]], spectral norm 1
    ImpulseResponse a(2, 1, 1), b(2, 1, 1);
    a.flat() << 0, 1, 0;
    CHECK(hankel_spectral_error(a, b) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("norm sandwich holds across random single-output geometries") {
    int tested = 0;
    std::uint64_t seed = 7000;
    for (Index n : {1, 2, 3, 5, 9, 17}) {
        for (Index p : {1, 2, 3}) {
            for (int rep = 0; rep < 12; ++rep) {
                const SandwichCheck c = check_norm_sandwich(random_blocks(n, p, 1, ++seed));
                CHECK(c.ok);
                CHECK(c.lower <= c.spectral + 1e-12);
                CHECK(c.spectral <= c.upper + 1e-12);
                ++tested;
            }
        }
    }
    CHECK(tested == 216);

    // the lower bound is specifically a single-output fact: stacked
    // identity blocks defeat it for m = p = 2
    ImpulseResponse adv(2, 2, 2);
    adv.block(0) = Eigen::MatrixXd::Identity(2, 2);
    adv.block(2) = Eigen::MatrixXd::Identity(2, 2);
    const SandwichCheck bad = check_norm_sandwich(adv);
    CHECK(bad.spectral == doctest::Approx(1.0));
    CHECK(bad.lower > bad.spectral);
    CHECK_FALSE(bad.ok);

    const SandwichCheck zero = check_norm_sandwich(ImpulseResponse(3, 1, 1));
    CHECK(zero.ok);
    CHECK(zero.spectral == 0.0);

    // single leading entry at n=2: ||H(d)|| = 1 inside [1/sqrt(2), sqrt(2)]
    ImpulseResponse e1(2, 1, 1);
    e1.flat() << 1, 0, 0;
    const SandwichCheck c = check_norm_sandwich(e1);
    CHECK(c.spectral == doctest::Approx(1.0));
    CHECK(c.lower == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(c.upper == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("least-squares rate formula") {
    const double expected = std::sqrt(8.0 / 64.0) * std::log(8.0);
    CHECK(ls_rate(1.0, 1, 8, 1, 64) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.7352).epsilon(1e-3));
    CHECK(ls_rate(0.0, 2, 8, 3, 10) == 0.0);
    CHECK(ls_rate(1.0, 1, 8, 1, 256) == doctest::Approx(expected / 2.0).epsilon(1e-14));
    // log floor keeps the n = p = 1 corner finite
    CHECK(ls_rate(1.0, 1, 1, 1, 4) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("regularized rate switches regimes at Rbar") {
    CHECK(hnn_rate(0.0, 2, 32, 1, 100).value == 0.0);
    CHECK(hnn_rate(0.0, 2, 32, 1, 5000).value == 0.0);

    // R = 2, n = 32: Rbar = min(4 log^2 32, 32) = 32
    const RateValue large = hnn_rate(0.1, 2, 32, 1, 32);
    const RateValue small = hnn_rate(0.1, 2, 32, 1, 31);
    CHECK(large.regime == "large-T");
    CHECK(small.regime == "small-T");
    CHECK(small.value / large.value ==
          doctest::Approx(std::sqrt(2.0) * std::sqrt(32.0 / 31.0)).epsilon(1e-12));

    const RateValue below = hnn_rate(0.1, 8, 32, 1, 4);
    CHECK(below.regime == "below-theory");

    const double expected = 0.1 * std::sqrt(32.0 / 500.0) * std::log(32.0);
    CHECK(hnn_rate(0.1, 2, 32, 1, 500).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("circulant bound dominates the Hankel spectral norm") {
    // impulse: permutation circulant, bound tight at 1
    ImpulseResponse e1(2, 1, 1);
    e1.flat() << 1, 0, 0;
    CHECK(circulant_spectral_bound(e1) == doctest::Approx(1.0).epsilon(1e-12));

    // all ones at n=2: DFT of (1,1,1) peaks at 3, Hankel norm is 2
    ImpulseResponse ones(2, 1, 1);
    ones.flat() << 1, 1, 1;
    CHECK(circulant_spectral_bound(ones) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(Eigen::JacobiSVD<Eigen::MatrixXd>(hankel_map(ones).data).singularValues()(0) ==
          doctest::Approx(2.0).epsilon(1e-12));

    std::uint64_t seed = 8100;
    for (Index n : {2, 4, 8, 16, 33, 64}) {
        for (int rep = 0; rep < 20; ++rep) {
            const ImpulseResponse d = random_blocks(n, 1, 1, ++seed);
            const double bound = circulant_spectral_bound(d);
            CHECK(bound == doctest::Approx(direct_dft_max(d.flat())).epsilon(1e-9));
            const double spec =
                Eigen::BDCSVD<Eigen::MatrixXd>(hankel_map(d).data).singularValues()(0);
            CHECK(bound >= spec - 1e-9 * (1.0 + spec));
        }
    }

    CHECK_THROWS_AS(circulant_spectral_bound(random_blocks(3, 2, 1, 1)),
                    std::invalid_argument);
}

TEST_CASE("rate evaluation is bitwise reproducible") {
    const double a = ls_rate(0.37, 2, 19, 3, 411);
    const double b = ls_rate(0.37, 2, 19, 3, 411);
    CHECK(a == b);
    CHECK(hnn_rate(0.37, 2, 19, 3, 411).value == hnn_rate(0.37, 2, 19, 3, 411).value);
}

TEST_CASE("error report bundles the metrics") {
    const ImpulseResponse h = random_blocks(4, 1, 1, 9);
    const ImpulseResponse g = random_blocks(4, 1, 1, 10);
    const ErrorReport rep = error_report(g, h, 0.25);
    CHECK(rep.ir_error == doctest::Approx(ir_error(g, h)));
    CHECK(rep.hankel_spectral_error == doctest::Approx(hankel_spectral_error(g, h)));
    CHECK(rep.sandwich_ok);
    CHECK(rep.predicted_rate == 0.25);
}
