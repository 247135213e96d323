#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "crisp/boxopt.hpp"
#include "helpers.hpp"

using namespace crisp;
using namespace crisp::testing;

namespace {

JointBox cube(Eigen::Index n, double lo, double hi) {
    return JointBox(Vector::Constant(n, lo), Vector::Constant(n, hi));
}

auto quadratic(const Vector& target) {
    return [target](const Vector& y) {
        return std::pair<double, Vector>{(y - target).squaredNorm(), 2.0 * (y - target)};
    };
}

std::pair<double, Vector> rosenbrock(const Vector& y) {
    const double x = y[0], z = y[1];
    const double f = (1.0 - x) * (1.0 - x) + 100.0 * (z - x * x) * (z - x * x);
    Vector g(2);
    g[0] = -2.0 * (1.0 - x) - 400.0 * x * (z - x * x);
    g[1] = 200.0 * (z - x * x);
    return {f, g};
}

} // namespace

TEST_CASE("unconstrained quadratic reaches its minimum", "[boxopt]") {
    const JointBox box = cube(5, -1.0, 1.0);
    std::mt19937 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        const Vector start = random_in_box(box, rng);
        const OptResult res = minimize(quadratic(Vector::Zero(5)), box, start);
        CHECK(res.converged);
        CHECK(res.minimizer.cwiseAbs().maxCoeff() < 1e-7);
        CHECK(res.value < 1e-12);
    }
}

TEST_CASE("active constraints: projected optimum on the boundary", "[boxopt]") {
    const JointBox box = cube(4, -1.0, 1.0);
    const OptResult res = minimize(quadratic(Vector::Constant(4, 2.0)), box, Vector::Zero(4));
    CHECK(res.converged);
    CHECK((res.minimizer - Vector::Ones(4)).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(res.value == Catch::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("rosenbrock converges to (1, 1)", "[boxopt]") {
    const JointBox box = cube(2, -2.0, 2.0);
    OptimizerConfig cfg;
    cfg.max_iters = 500;
    const OptResult res = minimize(rosenbrock, box, make_vec({-1.2, 1.0}), cfg);
    CHECK(res.converged);
    CHECK(std::abs(res.minimizer[0] - 1.0) < 1e-6);
    CHECK(std::abs(res.minimizer[1] - 1.0) < 1e-6);
}

TEST_CASE("every evaluation point is feasible", "[boxopt]") {
    const JointBox box = cube(3, -0.5, 0.8);
    bool all_inside = true;
    const auto tracked = [&](const Vector& y) {
        if (!box.contains(y)) all_inside = false;
        return std::pair<double, Vector>{(y - Vector::Constant(3, 5.0)).squaredNorm(),
                                         2.0 * (y - Vector::Constant(3, 5.0))};
    };
    const OptResult res = minimize(tracked, box, Vector::Zero(3));
    CHECK(all_inside);
    CHECK(box.contains(res.minimizer));
}

TEST_CASE("accepted objective values never increase", "[boxopt]") {
    // deterministic reruns with growing iteration caps expose the accepted sequence
    const JointBox box = cube(2, -2.0, 2.0);
    double previous = std::numeric_limits<double>::infinity();
    for (int cap = 1; cap <= 40; ++cap) {
        OptimizerConfig cfg;
        cfg.max_iters = cap;
        const OptResult res = minimize(rosenbrock, box, make_vec({-1.2, 1.0}), cfg);
        CHECK(res.value <= previous + 1e-15);
        previous = res.value;
    }
}

TEST_CASE("random convex quadratics satisfy the projected KKT condition", "[boxopt]") {
    std::mt19937 rng(71);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(trial % 9);
        Matrix a(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
        const Matrix h = a * a.transpose() + Matrix::Identity(n, n);
        Vector b(n);
        for (Eigen::Index i = 0; i < n; ++i) b[i] = 3.0 * gauss(rng);

        const auto objective = [&](const Vector& y) {
            return std::pair<double, Vector>{0.5 * y.dot(h * y) - b.dot(y), h * y - b};
        };
        const JointBox box = cube(n, -1.0, 1.0);
        OptimizerConfig cfg;
        cfg.objective_tolerance = 1e-16; // let the gradient criterion drive termination
        const OptResult res = minimize(objective, box, random_in_box(box, rng), cfg);
        REQUIRE(res.converged);

        const Vector g = h * res.minimizer - b;
        double kkt = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool at_lower = res.minimizer[j] <= box.lower[j] && g[j] > 0.0;
            const bool at_upper = res.minimizer[j] >= box.upper[j] && g[j] < 0.0;
            if (!at_lower && !at_upper) kkt = std::max(kkt, std::abs(g[j]));
        }
        CHECK(kkt <= 1e-6);
    }
}

TEST_CASE("already-optimal start converges at iteration zero", "[boxopt]") {
    const JointBox box = cube(3, -1.0, 1.0);
    const OptResult res = minimize(quadratic(Vector::Zero(3)), box, Vector::Zero(3));
    CHECK(res.converged);
    CHECK(res.iterations == 0);
    CHECK(res.termination == Termination::gradient);
}

TEST_CASE("deterministic: identical inputs give identical outputs", "[boxopt]") {
    const JointBox box = cube(2, -2.0, 2.0);
    const OptResult a = minimize(rosenbrock, box, make_vec({-1.2, 1.0}));
    const OptResult b = minimize(rosenbrock, box, make_vec({-1.2, 1.0}));
    CHECK(a.minimizer == b.minimizer);
    CHECK(a.value == b.value);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("out-of-box start is clamped and noted", "[boxopt]") {
    const JointBox box = cube(2, -1.0, 1.0);
    const OptResult res = minimize(quadratic(Vector::Zero(2)), box, make_vec({4.0, -7.0}));
    CHECK(res.start_clamped);
    CHECK(res.converged);
}

TEST_CASE("non-finite objective at the start throws", "[boxopt]") {
    const JointBox box = cube(2, -1.0, 1.0);
    const auto bad = [](const Vector& y) {
        return std::pair<double, Vector>{std::numeric_limits<double>::quiet_NaN(),
                                         Vector::Zero(y.size())};
    };
    CHECK_THROWS_AS(minimize(bad, box, Vector::Zero(2)), NumericError);
}

TEST_CASE("non-finite region mid-run shrinks the step and survives", "[boxopt]") {
    // objective is +inf for y[0] > 0.5; the minimizer of the finite part sits at the wall
    const JointBox box = cube(1, -1.0, 1.0);
    const auto wall = [](const Vector& y) {
        if (y[0] > 0.5)
            return std::pair<double, Vector>{std::numeric_limits<double>::infinity(),
                                             Vector::Zero(1)};
        return std::pair<double, Vector>{(y[0] - 0.4) * (y[0] - 0.4),
                                         Vector::Constant(1, 2.0 * (y[0] - 0.4))};
    };
    const OptResult res = minimize(wall, box, Vector::Constant(1, -0.9));
    CHECK(std::abs(res.minimizer[0] - 0.4) < 1e-6);
}

TEST_CASE("config validation", "[boxopt]") {
    OptimizerConfig cfg;
    cfg.max_iters = 0;
    CHECK_THROWS_AS(minimize(quadratic(Vector::Zero(1)), cube(1, -1, 1), Vector::Zero(1), cfg),
                    DataError);
}
