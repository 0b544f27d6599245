#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lfvlab/bath.hpp"
#include "lfvlab/closed_system.hpp"
#include "lfvlab/oracle.hpp"

using namespace lfvlab;

TEST_CASE("bath spec validation") {
    CHECK_THROWS_AS(BathSpec(1.0, {}, {}, {}, 1.0), ValidationError);
    CHECK_THROWS_AS(BathSpec(1.0, {1.0}, {0.1, 0.2}, {1.0}, 1.0), ShapeError);
    CHECK_THROWS_AS(BathSpec(1.0, {0.0}, {0.1}, {1.0}, 1.0), ValidationError);  // omega = 0
    const BathSpec zero_t = BathSpec::from_temperature(1.0, {1.0}, {0.1}, 0.0, 1.0);
    CHECK(zero_t.zero_temperature(0));
    CHECK(zero_t.coth_half_ratio(0) == 1.0);
}

TEST_CASE("classical solution hits both endpoints") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    std::uniform_real_distribution<double> uw(0.3, 3.0);
    int accepted = 0;
    for (int k = 0; k < 1200 && accepted < 1000; ++k) {
        const double w = uw(rng), t = 0.3 + 2.0 * std::abs(uni(rng));
        if (std::abs(std::sin(w * t)) < 1e-3) continue;
        ++accepted;
        const double xs = uni(rng), xe = uni(rng);
        const ClassicalPath path = classical_solution(xs, xe, w, t);
        CHECK(path.B == xs);
        CHECK(path.value(0.0) == Catch::Approx(xs).margin(1e-12));
        CHECK(path.value(t) == Catch::Approx(xe).margin(1e-10 * (1.0 + std::abs(xe))));
    }
    CHECK(accepted == 1000);
}

TEST_CASE("classical solution solves the oscillator equation") {
    // omega t_final = pi/2 with unit endpoints gives sin(omega t')
    const double w = 1.0, t = M_PI / 2.0;
    const ClassicalPath path = classical_solution(0.0, 1.0, w, t);
    CHECK(path.A == Catch::Approx(1.0).margin(1e-12));
    CHECK(std::abs(path.B) < 1e-12);
    const double h = 1e-4;
    for (double tp : {0.3, 0.8, 1.2}) {
        const double ddx = (path.value(tp + h) - 2.0 * path.value(tp) + path.value(tp - h)) / (h * h);
        CHECK(std::abs(ddx + w * w * path.value(tp)) < 1e-6);
    }
    CHECK_THROWS_AS(classical_solution(0.0, 1.0, 1.0, M_PI), CausticError);
}

TEST_CASE("greens function boundary zeros and symmetry") {
    const double w = 1.3, t = 2.0, m = 1.0;
    CHECK(greens_function(w, t, 1.2, 0.0, m) == 0.0);
    CHECK(greens_function(w, t, t, 0.7, m) == Catch::Approx(0.0).margin(1e-15));
    CHECK(greens_function(w, t, 0.5, 1.4, m) == greens_function(w, t, 1.4, 0.5, m));
    CHECK_THROWS_AS(greens_function(w, t, 2.5, 0.5, m), DomainError);
}

TEST_CASE("greens function residual and jump") {
    const double w = 1.3, t = 2.0, m = 1.4, t2 = 0.9;
    const double h = 1e-3;
    for (double t1 : {1.2, 1.5, 1.8}) {
        const double g0 = greens_function(w, t, t1 - h, t2, m);
        const double g1 = greens_function(w, t, t1, t2, m);
        const double g2 = greens_function(w, t, t1 + h, t2, m);
        CHECK(std::abs(m * ((g2 - 2 * g1 + g0) / (h * h) + w * w * g1)) < 1e-4);
    }
    const double right = (greens_function(w, t, t2 + h, t2, m) - greens_function(w, t, t2, t2, m)) / h;
    const double left = (greens_function(w, t, t2, t2, m) - greens_function(w, t, t2 - h, t2, m)) / h;
    CHECK(m * (right - left) == Catch::Approx(-1.0).margin(1e-3));
}

TEST_CASE("greens function matches a dense boundary-value solve") {
    const double w = 0.9, t = 2.4, m = 1.0;
    const std::size_t n = 200;
    const double h = t / static_cast<double>(n);
    const auto interior = static_cast<Eigen::Index>(n - 1);
    const Eigen::Index j2 = 73;
    RealMatrix A = RealMatrix::Zero(interior, interior);
    for (Eigen::Index i = 0; i < interior; ++i) {
        A(i, i) = m * (-2.0 / (h * h) + w * w);
        if (i > 0) A(i, i - 1) = m / (h * h);
        if (i + 1 < interior) A(i, i + 1) = m / (h * h);
    }
    RealVector rhs = RealVector::Zero(interior);
    rhs(j2 - 1) = -1.0 / h;
    const RealVector g = A.partialPivLu().solve(rhs);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < interior; ++i) {
        const double t1 = static_cast<double>(i + 1) * h;
        const double want = greens_function(w, t, t1, static_cast<double>(j2) * h, m);
        worst = std::max(worst, std::abs(-g(i) - want));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("thermal density exchange symmetry and positivity") {
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0, 1.7}, {0.1, 0.2}, 1.5, 1.0);
    CHECK(thermal_density(bath, {0.3, -0.8}, {-0.5, 0.2}) ==
          thermal_density(bath, {-0.5, 0.2}, {0.3, -0.8}));
    for (double x : {-2.0, 0.0, 1.3}) {
        CHECK(thermal_density(bath, {x, x}, {x, x}) > 0.0);
    }
    CHECK_THROWS_AS(thermal_density(bath, {0.0}, {0.0, 0.0}), ShapeError);
}

TEST_CASE("thermal density diagonal integrates to one") {
    const BathSpec bath = BathSpec::from_temperature(1.2, {0.9}, {0.1}, 2.3, 1.0);
    const double width = std::sqrt(bath.hbar / (2.0 * bath.mass * bath.omegas[0]) *
                                   bath.coth_half_ratio(0));
    const PositionGrid grid(801, -6.0 * width, 6.0 * width);
    double acc = 0.0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double wq = (j == 0 || j + 1 == grid.n_points) ? 0.5 : 1.0;
        acc += wq * grid.spacing() * thermal_density(bath, {grid.point(j)}, {grid.point(j)});
    }
    CHECK(acc == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("thermal density matches the truncated gibbs state") {
    const double m = 1.0, w = 1.0, hb = 1.0, kT = 2.0;
    const BathSpec bath = BathSpec::from_temperature(m, {w}, {0.1}, kT, hb);
    const PositionGrid grid(64, -8.0, 8.0);
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const ComplexMatrix H = position_hamiltonian(grid, SystemSpec::harmonic(m, w, hb));
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
    Eigen::VectorXd boltz = (-es.eigenvalues().array() / kT).exp();
    ComplexMatrix gibbs = es.eigenvectors() * boltz.asDiagonal().toDenseMatrix().cast<Complex>() *
                          es.eigenvectors().adjoint();
    gibbs /= gibbs.trace().real() * grid.spacing();
    double worst = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            worst = std::max(worst, std::abs(gibbs(a, b) -
                                             thermal_density(bath,
                                                             {grid.point(static_cast<std::size_t>(a))},
                                                             {grid.point(static_cast<std::size_t>(b))})));
    CHECK(worst < 1e-3 * thermal_density(bath, {0.0}, {0.0}));
}

TEST_CASE("zero-temperature thermal density is the ground state") {
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0}, {0.1}, 0.0, 1.0);
    const double v = thermal_density(bath, {0.4}, {-0.3});
    const double want = std::sqrt(1.0 / M_PI) * std::exp(-0.5 * (0.4 * 0.4 + 0.3 * 0.3));
    CHECK(v == Catch::Approx(want).epsilon(1e-12));
}

TEST_CASE("noise kernel values and parity") {
    const BathSpec bath = BathSpec::from_temperature(1.0, {0.8, 1.9}, {0.3, 0.5}, 1.7, 1.0);
    double want0 = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        want0 += bath.couplings[i] * bath.couplings[i] /
                 (2.0 * bath.mass * bath.omegas[i]) * bath.coth_half_ratio(i);
    }
    CHECK(noise_kernel(bath, 0.0) == Catch::Approx(want0).epsilon(1e-14));
    for (double s : {0.2, 1.1, 2.7}) {
        CHECK(noise_kernel(bath, s) == noise_kernel(bath, -s));
        CHECK(dissipation_kernel(bath, -s) == Catch::Approx(-dissipation_kernel(bath, s)));
    }
    CHECK(dissipation_kernel(bath, 0.0) == 0.0);
}

TEST_CASE("dissipation kernel is temperature independent") {
    const BathSpec hot = BathSpec::from_temperature(1.0, {1.1}, {0.4}, 10.0, 1.0);
    const BathSpec cold = BathSpec::from_temperature(1.0, {1.1}, {0.4}, 0.1, 1.0);
    for (double s : {0.1, 0.9, 3.3}) {
        CHECK(dissipation_kernel(hot, s) == dissipation_kernel(cold, s));
    }
}

TEST_CASE("kernels are quadratic in the couplings") {
    BathSpec bath = BathSpec::from_temperature(1.0, {0.7, 1.3, 2.1}, {0.2, -0.4, 0.6}, 1.3, 1.0);
    BathSpec doubled = bath;
    for (auto& c : doubled.couplings) c *= 2.0;
    for (double s : {0.0, 0.5, 1.9}) {
        CHECK(noise_kernel(doubled, s) == Catch::Approx(4.0 * noise_kernel(bath, s)));
        CHECK(dissipation_kernel(doubled, s) ==
              Catch::Approx(4.0 * dissipation_kernel(bath, s)).margin(1e-15));
    }
}

TEST_CASE("kernels match the exact force correlator") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> uw(0.5, 2.5);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.5, 4.0);
    for (int b = 0; b < 5; ++b) {
        std::vector<double> ws(5), cs(5);
        for (auto& w : ws) w = uw(rng);
        for (auto& c : cs) c = uc(rng);
        const BathSpec bath = BathSpec::from_temperature(1.0, ws, cs, ut(rng), 1.0);
        for (int k = 0; k < 20; ++k) {
            const double s = 0.15 * k;
            const Complex c12 = bath_force_correlator(bath, s, 0.0);
            const Complex c21 = bath_force_correlator(bath, 0.0, s);
            CHECK(std::abs(0.5 * (c12 + c21).real() - bath.hbar * noise_kernel(bath, s)) < 1e-10);
            CHECK(std::abs(c12.imag() + bath.hbar * dissipation_kernel(bath, s)) < 1e-10);
        }
    }
}
