#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "crisp/kernel.hpp"
#include "helpers.hpp"

using namespace crisp;
using namespace crisp::testing;

namespace {

Pose planar_pose(double px, double py, double heading) {
    Pose p;
    p.position = Eigen::Vector2d(px, py);
    p.orientation = Vector::Constant(1, wrap_two_pi(heading));
    return p;
}

Pose random_pose(std::mt19937& rng) {
    std::uniform_real_distribution<double> pos(-5.0, 5.0), ang(0.0, kTwoPi - 1e-9);
    return planar_pose(pos(rng), pos(rng), ang(rng));
}

} // namespace

TEST_CASE("kernel evaluation anchors", "[kernel]") {
    const Pose a = planar_pose(1.0, 2.0, 0.7);

    CHECK(kernel_eval({KernelFamily::gaussian, 1.3}, a, a) == 1.0);
    CHECK(kernel_eval({KernelFamily::laplacian, 0.8}, a, a) == 1.0);

    // embedded distance exactly 1 (positions one meter apart, same orientation)
    const Pose b = planar_pose(2.0, 2.0, 0.7);
    CHECK(kernel_eval({KernelFamily::gaussian, 1.0}, a, b) ==
          Catch::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(kernel_eval({KernelFamily::laplacian, 1.0}, a, b) ==
          Catch::Approx(std::exp(-1.0)).epsilon(1e-12));

    const Vector va = embed_pose(a), vb = embed_pose(b);
    CHECK(kernel_eval({KernelFamily::linear, 1.0}, a, b) ==
          Catch::Approx(va.dot(vb)).epsilon(1e-15));
}

TEST_CASE("kernel embedding is continuous across the angle seam", "[kernel]") {
    const Pose just_below = planar_pose(0.0, 0.0, kTwoPi - 1e-6);
    const Pose just_above = planar_pose(0.0, 0.0, 1e-6);
    CHECK(kernel_eval({KernelFamily::gaussian, 1.0}, just_below, just_above) > 0.999999);
}

TEST_CASE("kernel values stay in (0, 1] for gaussian and laplacian", "[kernel]") {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const Pose a = random_pose(rng), b = random_pose(rng);
        for (auto family : {KernelFamily::gaussian, KernelFamily::laplacian}) {
            const double v = kernel_eval({family, 2.0}, a, b);
            CHECK(v > 0.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("kernel spec validation and dimension checks", "[kernel]") {
    CHECK_THROWS_AS(kernel_eval({KernelFamily::gaussian, 0.0}, planar_pose(0, 0, 0),
                                planar_pose(0, 0, 0)),
                    DataError);
    Pose spatial;
    spatial.position = Eigen::Vector3d::Zero();
    spatial.orientation = Vector::Zero(3);
    CHECK_THROWS_AS(kernel_eval({KernelFamily::gaussian, 1.0}, planar_pose(0, 0, 0), spatial),
                    DataError);
}

TEST_CASE("gram matrix is exactly symmetric with unit diagonal", "[kernel]") {
    std::mt19937 rng(17);

    SECTION("single pose") {
        const Matrix k = gram({KernelFamily::gaussian, 1.0}, {random_pose(rng)});
        CHECK(k.rows() == 1);
        CHECK(k(0, 0) == 1.0);
    }

    SECTION("symmetry and duplicates") {
        std::vector<Pose> poses;
        for (int i = 0; i < 30; ++i) poses.push_back(random_pose(rng));
        poses.push_back(poses[4]); // duplicated point
        const Matrix k = gram({KernelFamily::gaussian, 1.5}, poses);
        CHECK(k == k.transpose());
        for (Eigen::Index i = 0; i < k.rows(); ++i) CHECK(k(i, i) == 1.0);
        const Eigen::Index dup = k.rows() - 1;
        CHECK(k(4, dup) == 1.0);
        CHECK(k(4, dup) == k(4, 4));
        CHECK(k(4, dup) == k(dup, dup));
    }
}

TEST_CASE("factorize produces the Cholesky factor of K + n*lambda*I", "[kernel]") {
    SECTION("1x1 anchor") {
        Matrix k(1, 1);
        k << 1.0;
        const GramFactor f = factorize(k, 1.0);
        const Matrix l = f.matrix_l().triangularView<Eigen::Lower>();
        CHECK(l(0, 0) == Catch::Approx(std::sqrt(2.0)).epsilon(1e-15));
    }

    SECTION("identity anchor") {
        const GramFactor f = factorize(Matrix::Identity(2, 2), 0.5);
        const Matrix l = f.matrix_l().triangularView<Eigen::Lower>();
        CHECK((l * l.transpose() - 2.0 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    }

    SECTION("random PSD reconstruction") {
        std::mt19937 rng(23);
        std::normal_distribution<double> gauss;
        const Eigen::Index n = 40;
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
        const Matrix k = (a * a.transpose()) / static_cast<double>(n);
        const double lambda = 0.05;
        const GramFactor f = factorize(k, lambda);
        const Matrix l = f.matrix_l().triangularView<Eigen::Lower>();
        const Matrix reg = k + static_cast<double>(n) * lambda * Matrix::Identity(n, n);
        CHECK((l * l.transpose() - reg).cwiseAbs().maxCoeff() <= 1e-10);
        CHECK((l.diagonal().array() > 0.0).all());
    }

    SECTION("rejects bad inputs") {
        CHECK_THROWS_AS(factorize(Matrix::Identity(2, 2), 0.0), DataError);
        CHECK_THROWS_AS(factorize(Matrix::Zero(0, 0), 1.0), DataError);
    }
}

TEST_CASE("weights solve the regularized system", "[kernel]") {
    SECTION("1x1 anchor: alpha = 1/(1+1)") {
        Matrix k(1, 1);
        k << 1.0;
        const GramFactor f = factorize(k, 1.0);
        const Vector alpha = weights(f, Vector::Constant(1, 1.0));
        CHECK(alpha[0] == Catch::Approx(0.5).epsilon(1e-15));
    }

    SECTION("zero rhs gives zero weights") {
        const GramFactor f = factorize(Matrix::Identity(3, 3), 0.7);
        CHECK(weights(f, Vector::Zero(3)) == Vector::Zero(3));
    }

    SECTION("residual below 1e-9 on random instances") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const Eigen::Index n = 60;
        std::vector<Pose> poses;
        Pose p;
        for (Eigen::Index i = 0; i < n; ++i) {
            p.position = Eigen::Vector2d(unit(rng) * 4.0, unit(rng) * 4.0);
            p.orientation = Vector::Constant(1, unit(rng) * 6.0);
            poses.push_back(p);
        }
        const Matrix k = gram({KernelFamily::gaussian, 1.0}, poses);
        const double lambda = 0.01;
        const GramFactor f = factorize(k, lambda);
        const Matrix reg = k + static_cast<double>(n) * lambda * Matrix::Identity(n, n);
        for (int trial = 0; trial < 10; ++trial) {
            Vector kx(n);
            for (Eigen::Index i = 0; i < n; ++i) kx[i] = unit(rng);
            const Vector alpha = weights(f, kx);
            CHECK((reg * alpha - kx).norm() / kx.norm() <= 1e-9);
        }
    }

    SECTION("dimension mismatch") {
        const GramFactor f = factorize(Matrix::Identity(3, 3), 0.5);
        CHECK_THROWS_AS(weights(f, Vector::Zero(2)), DataError);
    }
}

TEST_CASE("weight norm strictly decreases in lambda for K = I", "[kernel]") {
    const Eigen::Index n = 4;
    const Vector kx = make_vec({0.9, 0.4, 0.2, 0.7});
    double previous = std::numeric_limits<double>::infinity();
    for (double lambda : {0.01, 0.1, 0.5, 1.0, 5.0}) {
        const Vector alpha = weights(factorize(Matrix::Identity(n, n), lambda), kx);
        CHECK(alpha.norm() < previous);
        previous = alpha.norm();
    }
}
