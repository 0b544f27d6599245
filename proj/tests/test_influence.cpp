#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lfvlab/influence.hpp"
#include "lfvlab/lgks.hpp"

using namespace lfvlab;

namespace {

DiscretePath constant_path(const TimeMesh& mesh, double value) {
    return DiscretePath(mesh, std::vector<double>(mesh.n_points(), value));
}

DiscretePath random_path(const TimeMesh& mesh, std::mt19937& rng) {
    std::uniform_real_distribution<double> uni(-1.5, 1.5);
    std::vector<double> v(mesh.n_points());
    for (auto& x : v) x = uni(rng);
    return DiscretePath(mesh, std::move(v));
}

}  // namespace

TEST_CASE("factorized initial state") {
    const PositionGrid grid(16, -4.0, 4.0);
    const auto rho_s = GridDensityMatrix::pure_state(
        grid, [](double x) { return Complex(std::exp(-x * x / 2.0), 0.0); });
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0, 2.0}, {0.1, 0.2}, 1.5, 1.0);
    const auto joint = factorized_initial(rho_s, bath);

    CHECK(joint.trace() == Catch::Approx(1.0).margin(1e-10));
    CHECK(joint.bath_value({0.2, -0.4}, {0.1, 0.3}) ==
          thermal_density(bath, {0.2, -0.4}, {0.1, 0.3}));
    CHECK(joint.system_value(3, 5) == rho_s.values(3, 5));
    CHECK(joint.joint_value(3, 5, {0.0, 0.0}, {0.0, 0.0}) ==
          rho_s.values(3, 5) * thermal_density(bath, {0.0, 0.0}, {0.0, 0.0}));

    GridDensityMatrix bad = rho_s;
    bad.values *= 2.0;
    CHECK_THROWS_AS(factorized_initial(bad, bath), ValidationError);
}

TEST_CASE("influence phase vanishes on identical paths") {
    const TimeMesh mesh(24, 1.2);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.3}, {0.7}, 2.0, 1.0);
    std::mt19937 rng(3);
    for (int k = 0; k < 10; ++k) {
        const DiscretePath p = random_path(mesh, rng);
        CHECK(std::abs(influence_phase_cl(p, p, bath)) == 0.0);
    }
}

TEST_CASE("influence phase on constant paths matches the closed form") {
    // x(t) = a, y(t) = b, one oscillator:
    //   noise term  i n_c (a-b)^2 iint cos(w(t'-t''))
    //   dissip term d_c (a-b)(a+b) iint sin(w(t'-t''))
    // with iint cos = (1 - cos(w t))/w^2 and iint sin = (w t - sin(w t))/w^2
    // over the ordered triangle.
    const double w = 1.1, t = 0.9, a = 0.8, b = -0.4;
    const BathSpec bath = BathSpec::from_temperature(1.0, {w}, {0.6}, 1.7, 1.0);
    const TimeMesh mesh(4000, t);
    const Complex got = influence_phase_cl(constant_path(mesh, a), constant_path(mesh, b), bath);
    const double c = bath.couplings[0];
    const double ncoef = c * c / (2.0 * bath.mass * w) * bath.coth_half_ratio(0);
    const double dcoef = c * c / (2.0 * bath.mass * w);
    const double iint_cos = (1.0 - std::cos(w * t)) / (w * w);
    const double iint_sin = (w * t - std::sin(w * t)) / (w * w);
    const Complex want = kI * ncoef * (a - b) * (a - b) * iint_cos +
                         dcoef * (a - b) * (a + b) * iint_sin;
    CHECK(std::abs(got - want) < 1e-6 * std::abs(want));
}

TEST_CASE("path swap flips the dissipation term only") {
    const TimeMesh mesh(20, 1.0);
    const BathSpec noisy = BathSpec::from_temperature(1.0, {1.2}, {0.5}, 2.0, 1.0);
    std::mt19937 rng(7);
    const DiscretePath px = random_path(mesh, rng);
    const DiscretePath py = random_path(mesh, rng);
    const Complex fwd = influence_phase_cl(px, py, noisy);
    const Complex swp = influence_phase_cl(py, px, noisy);
    // noise part (imaginary) invariant, dissipation part (real) flips sign
    CHECK(fwd.imag() == Catch::Approx(swp.imag()).margin(1e-12));
    CHECK(fwd.real() == Catch::Approx(-swp.real()).margin(1e-12));
}

TEST_CASE("mesh mismatch is rejected") {
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0}, {0.1}, 1.0, 1.0);
    CHECK_THROWS_AS(influence_phase_cl(constant_path(TimeMesh(4, 1.0), 0.0),
                                       constant_path(TimeMesh(5, 1.0), 0.0), bath),
                    ShapeError);
}

TEST_CASE("zero coupling reduces the path sum to the closed propagator") {
    const PositionGrid grid(4, -1.5, 1.5);
    const TimeMesh mesh(3, 0.9);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0, 1.5}, {0.0, 0.0}, 2.0, 1.0);
    const auto J_fv = j_fv_matrix(grid, mesh, spec, bath);
    const auto J_cl = j_closed(grid, mesh.t_total,
                               kernel_matrix_sliced(grid, spec, mesh.n_steps, mesh.t_total));
    double worst = 0.0, scale = 0.0;
    for (std::size_t ix = 0; ix < 4; ++ix)
        for (std::size_t iy = 0; iy < 4; ++iy)
            for (std::size_t jx = 0; jx < 4; ++jx)
                for (std::size_t jy = 0; jy < 4; ++jy) {
                    worst = std::max(worst, std::abs(J_fv.entry(ix, iy, jx, jy) -
                                                     J_cl.entry(ix, iy, jx, jy)));
                    scale = std::max(scale, std::abs(J_cl.entry(ix, iy, jx, jy)));
                }
    CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("hand enumeration of a two-point one-interior-slice sum") {
    // 2-point grid, 2 slices: one interior point per path, so each tensor
    // entry is a sum over 2 x 2 interior choices.
    const PositionGrid grid(2, -0.6, 0.6);
    const TimeMesh mesh(2, 0.8);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 0.9, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.4}, {0.5}, 1.8, 1.0);
    const auto J = j_fv_matrix(grid, mesh, spec, bath);
    const double measure = path_pair_measure(spec, grid, mesh);
    for (std::size_t ix = 0; ix < 2; ++ix)
        for (std::size_t iy = 0; iy < 2; ++iy)
            for (std::size_t jx = 0; jx < 2; ++jx)
                for (std::size_t jy = 0; jy < 2; ++jy) {
                    Complex acc{0.0, 0.0};
                    for (std::size_t mx = 0; mx < 2; ++mx) {
                        for (std::size_t my = 0; my < 2; ++my) {
                            const DiscretePath px(mesh, {grid.point(jx), grid.point(mx),
                                                         grid.point(ix)});
                            const DiscretePath py(mesh, {grid.point(jy), grid.point(my),
                                                         grid.point(iy)});
                            acc += std::exp(fv_path_pair_exponent(spec, bath, px, py));
                        }
                    }
                    CHECK(J.entry(ix, iy, jx, jy) == measure * acc);
                }
}

TEST_CASE("propagated states stay hermitian") {
    const PositionGrid grid(3, -1.0, 1.0);
    const TimeMesh mesh(3, 0.6);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.2}, {0.6}, 1.5, 1.0);
    const auto J = j_fv_matrix(grid, mesh, spec, bath);
    const auto rho0 = GridDensityMatrix::pure_state(
        grid, [](double x) { return Complex(std::exp(-x * x), 0.1 * x); });
    const auto rho_t = rho_propagate_fv(rho0, J);
    CHECK(rho_t.hermiticity_defect_relative() < 1e-10);
}

TEST_CASE("propagation through the identity tensor returns the state") {
    const PositionGrid grid(8, -2.0, 2.0);
    const auto rho0 = GridDensityMatrix::pure_state(
        grid, [](double x) { return Complex(std::exp(-x * x / 2.0), 0.0); });
    const auto rho_t = rho_propagate_fv(rho0, PropagatorTensor::identity(grid));
    CHECK((rho_t.values - rho0.values).cwiseAbs().maxCoeff() < 1e-12);

    const PositionGrid other(8, -1.0, 1.0);
    CHECK_THROWS_AS(rho_propagate_fv(rho0, PropagatorTensor::identity(other)), ShapeError);
}

TEST_CASE("closed-variant propagation matches operator evolution") {
    const PositionGrid grid(64, -8.0, 8.0);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const auto rho0 = GridDensityMatrix::pure_state(
        grid, [](double x) { return Complex(std::exp(-0.5 * (x - 0.8) * (x - 0.8)), 0.0); });
    const double t = 0.9;
    const auto J = j_closed(grid, t, kernel_matrix_harmonic(grid, spec, 1.0, t));
    const auto got = rho_propagate_fv(rho0, J);
    const ComplexMatrix want =
        evolve_closed(rho0.values, position_hamiltonian(grid, spec), t, 1.0);
    const double err = std::sqrt((got.values - want).cwiseAbs2().sum()) /
                       std::sqrt(want.cwiseAbs2().sum());
    CHECK(err < 1e-3);
}

TEST_CASE("weak-coupling propagation approximately preserves the trace") {
    const PositionGrid grid(6, -2.5, 2.5);
    const TimeMesh mesh(3, 0.45);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.1}, {0.05}, 2.0, 1.0);
    const auto rho0 = GridDensityMatrix::pure_state(
        grid, [](double x) { return Complex(std::exp(-x * x), 0.0); });
    const auto J = j_fv_matrix(grid, mesh, spec, bath);
    const auto rho_t = rho_propagate_fv(rho0, J);
    CHECK(std::abs(rho_t.trace() - 1.0) < 2e-3);
}

TEST_CASE("noise term only damps path-pair contributions") {
    // the real part of (i/hbar) * (noise part of the exponent) is <= 0
    const TimeMesh mesh(16, 1.0);
    BathSpec bath = BathSpec::from_temperature(1.0, {1.3}, {0.8}, 1.2, 1.0);
    std::mt19937 rng(53);
    for (int k = 0; k < 1000; ++k) {
        const DiscretePath px = random_path(mesh, rng);
        const DiscretePath py = random_path(mesh, rng);
        const Complex phi = influence_phase_cl(px, py, bath);
        // noise contribution is the imaginary part of phi; (i/hbar)*i*Im = -Im/hbar
        CHECK(phi.imag() >= -1e-12);
    }
}

TEST_CASE("doubling hbar halves the exponent") {
    const PositionGrid grid(2, -0.5, 0.5);
    const TimeMesh mesh(2, 0.4);
    const SystemSpec spec1(1.0, [](double) { return 0.0; }, 1.0);
    const SystemSpec spec2(1.0, [](double) { return 0.0; }, 2.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0}, {0.4}, 2.0, 1.0);
    const DiscretePath px(mesh, {0.5, -0.5, 0.5});
    const DiscretePath py(mesh, {-0.5, 0.5, -0.5});
    const Complex e1 = fv_path_pair_exponent(spec1, bath, px, py);
    const Complex e2 = fv_path_pair_exponent(spec2, bath, px, py);
    CHECK(std::abs(e2 - 0.5 * e1) < 1e-14 * std::abs(e1));
}

TEST_CASE("path-pair bound is enforced") {
    const PositionGrid grid(8, -2.0, 2.0);
    const TimeMesh mesh(8, 1.0);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.0}, {0.1}, 1.0, 1.0);
    CHECK_THROWS_AS(j_fv_matrix(grid, mesh, spec, bath), SizeError);
}
