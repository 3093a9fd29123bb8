#include "sysid/hankel.hpp"
#include "sysid/lti.hpp"
#include "sysid/rng.hpp"

#include <Eigen/SVD>
#include <doctest.h>

using namespace sysid;

namespace {

ImpulseResponse random_blocks(Index n, Index p, Index m, std::uint64_t seed) {
    Rng rng(seed);
    ImpulseResponse h(n, p, m);
    for (Index i = 0; i < h.dim(); ++i) h.flat()[i] = rng.next_gaussian();
    return h;
}

Eigen::MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = rng.next_gaussian();
    return M;
}

// Brute-force count of (i, l) in [1, n]^2 with i + l - 1 = j.
int count_antidiagonal(Index n, Index j) {
    int count = 0;
    for (Index i = 1; i <= n; ++i)
        for (Index l = 1; l <= n; ++l)
            if (i + l - 1 == j) ++count;
    return count;
}

} // namespace

TEST_CASE("shaping weights match the piecewise formula") {
    const ShapingWeights w = shaping_weights(3);
    REQUIRE(w.k.size() == 5);
    CHECK(w.k[0] == doctest::Approx(1.0));
    CHECK(w.k[1] == doctest::Approx(std::sqrt(2.0)));
    CHECK(w.k[2] == doctest::Approx(std::sqrt(3.0)));
    CHECK(w.k[3] == doctest::Approx(std::sqrt(2.0)));
    CHECK(w.k[4] == doctest::Approx(1.0));

    const ShapingWeights w1 = shaping_weights(1);
    REQUIRE(w1.k.size() == 1);
    CHECK(w1.k[0] == 1.0);

    CHECK_THROWS_AS(shaping_weights(0), std::invalid_argument);
}

TEST_CASE("squared weights count antidiagonal cells") {
    for (Index n : {1, 2, 3, 4, 7, 16, 33}) {
        const ShapingWeights w = shaping_weights(n);
        const Eigen::VectorXi c = antidiagonal_multiplicity(n);
        for (Index j = 1; j <= 2 * n - 1; ++j) {
            CHECK(c[j - 1] == count_antidiagonal(n, j));
            CHECK(w.k[j - 1] * w.k[j - 1] ==
                  doctest::Approx(double(c[j - 1])).epsilon(1e-14));
            CHECK(w.k[j - 1] == w.k[2 * n - j - 1]); // symmetry
        }
    }
    // spot checks at the spec's stated range
    const ShapingWeights w = shaping_weights(256);
    const Eigen::VectorXi c = antidiagonal_multiplicity(256);
    for (Index j = 0; j < c.size(); ++j)
        CHECK(w.k[j] * w.k[j] == doctest::Approx(double(c[j])).epsilon(1e-14));
}

TEST_CASE("antidiagonal multiplicity enumerations") {
    const Eigen::VectorXi c3 = antidiagonal_multiplicity(3);
    REQUIRE(c3.size() == 5);
    CHECK(c3[0] == 1);
    CHECK(c3[1] == 2);
    CHECK(c3[2] == 3);
    CHECK(c3[3] == 2);
    CHECK(c3[4] == 1);
    CHECK(antidiagonal_multiplicity(1)[0] == 1);
}

TEST_CASE("hankel map lays out blocks along antidiagonals") {
    const ImpulseResponse h = ImpulseResponse::scalar((Eigen::VectorXd(3) << 1, 2, 3).finished());
    const HankelMatrix H = hankel_map(h);
    REQUIRE(H.data.rows() == 2);
    REQUIRE(H.data.cols() == 2);
    CHECK(H.data(0, 0) == 1);
    CHECK(H.data(0, 1) == 2);
    CHECK(H.data(1, 0) == 2);
    CHECK(H.data(1, 1) == 3);

    const ImpulseResponse zero(4, 2, 3);
    CHECK(hankel_map(zero).data.norm() == 0.0);

    // order-1 geometric response has a rank-1 Hankel matrix
    Eigen::VectorXd geo(5);
    for (Index t = 0; t < 5; ++t) geo[t] = std::pow(0.5, double(t));
    const Eigen::VectorXd sv =
        Eigen::JacobiSVD<Eigen::MatrixXd>(hankel_map(ImpulseResponse::scalar(geo)).data)
            .singularValues();
    CHECK(sv[1] <= 1e-10 * sv[0]);
}

TEST_CASE("plain adjoint sums antidiagonals") {
    Eigen::MatrixXd M(2, 2);
    M << 1, 0, 0, 0;
    const ImpulseResponse a = hankel_adjoint(M, 2, 1, 1);
    CHECK(a.flat().isApprox((Eigen::VectorXd(3) << 1, 0, 0).finished()));

    const ImpulseResponse h =
        ImpulseResponse::scalar((Eigen::VectorXd(3) << 1, 2, 3).finished());
    const ImpulseResponse b = hankel_adjoint(hankel_map(h).data, 2, 1, 1);
    // antidiagonal sums of [[1,2],[2,3]]
    CHECK(b.flat().isApprox((Eigen::VectorXd(3) << 1, 4, 3).finished()));

    CHECK_THROWS_AS(hankel_adjoint(Eigen::MatrixXd::Zero(3, 2), 2, 1, 1),
                    std::invalid_argument);
}

TEST_CASE("adjoint identities hold to 1e-10 across geometries") {
    Index cases = 0;
    std::uint64_t seed = 100;
    for (Index n : {2, 3, 5, 8, 11, 16}) {
        for (Index p : {1, 2, 3}) {
            for (Index m : {1, 2, 3}) {
                for (int rep = 0; rep < 4; ++rep) {
                    const ImpulseResponse h = random_blocks(n, p, m, ++seed);
                    const Eigen::MatrixXd M = random_matrix(m * n, p * n, ++seed);
                    const double lhs = (hankel_map(h).data.array() * M.array()).sum();
                    const double rhs = block_dot(h, hankel_adjoint(M, n, p, m));
                    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));

                    const ShapingWeights k = shaping_weights(n);
                    const double glhs = (weighted_hankel_map(h, k).data.array() * M.array()).sum();
                    const double grhs = block_dot(h, weighted_hankel_adjoint(M, k, p, m));
                    CHECK(std::abs(glhs - grhs) <= 1e-10 * (1.0 + std::abs(glhs)));
                    ++cases;
                }
            }
        }
    }
    CHECK(cases >= 200);
}

TEST_CASE("weighted map identities") {
    const ShapingWeights k = shaping_weights(2);
    // G(K h) = H(h)
    const ImpulseResponse h =
        ImpulseResponse::scalar((Eigen::VectorXd(3) << 1, 2, 3).finished());
    ImpulseResponse beta = h;
    for (Index j = 0; j < 3; ++j) beta.block(j) *= k.k[j];
    CHECK(weighted_hankel_map(beta, k).data.isApprox(hankel_map(h).data));

    // beta = k gives the all-ones matrix
    ImpulseResponse kvec = ImpulseResponse::scalar(k.k);
    CHECK(weighted_hankel_map(kvec, k).data.isApprox(Eigen::MatrixXd::Ones(2, 2)));

    CHECK_THROWS_AS(weighted_hankel_map(h, shaping_weights(3)), std::invalid_argument);
}

TEST_CASE("weighted operator is an isometry and G*G is the identity") {
    std::uint64_t seed = 900;
    for (Index n : {2, 4, 9, 16}) {
        const ShapingWeights k = shaping_weights(n);
        const ImpulseResponse beta = random_blocks(n, 1, 1, ++seed);
        CHECK(weighted_hankel_map(beta, k).data.norm() ==
              doctest::Approx(beta.norm()).epsilon(1e-10));

        const ImpulseResponse round_trip =
            weighted_hankel_adjoint(weighted_hankel_map(beta, k).data, k, 1, 1);
        CHECK((round_trip - beta).norm() <= 1e-10 * (1.0 + beta.norm()));

        // standard basis vectors map back to themselves
        for (Index j : {Index(0), n - 1, 2 * n - 2}) {
            ImpulseResponse e(n, 1, 1);
            e.flat()[j] = 1.0;
            const ImpulseResponse back =
                weighted_hankel_adjoint(weighted_hankel_map(e, k).data, k, 1, 1);
            CHECK((back - e).norm() <= 1e-12);
        }
    }
    // zero matrix maps to the zero vector
    const ShapingWeights k = shaping_weights(3);
    CHECK(weighted_hankel_adjoint(Eigen::MatrixXd::Zero(3, 3), k, 1, 1).norm() == 0.0);
}

TEST_CASE("exact impulse responses have Hankel rank equal to the order") {
    std::uint64_t seed = 40;
    int checked = 0;
    for (Index R = 1; R <= 5; ++R) {
        for (int rep = 0; rep < 10; ++rep) {
            const StateSpace sys = random_system(R, 1, 1, 0.85, ++seed);
            const ImpulseResponse h = impulse_response(sys, 4 * R);
            CHECK(numerical_rank(hankel_map(h).data, 1e-8) == R);
            ++checked;
        }
    }
    CHECK(checked == 50);
}

TEST_CASE("block vector storage is row-major by (block, row, col)") {
    ImpulseResponse h(2, 3, 2);
    h.at(1, 1, 2) = 5.0;
    CHECK(h.flat()[(1 * 2 + 1) * 3 + 2] == 5.0);
    CHECK(h.block(1)(1, 2) == 5.0);
}
