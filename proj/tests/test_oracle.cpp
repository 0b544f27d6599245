#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lfvlab/oracle.hpp"

using namespace lfvlab;

namespace {

BathSpec three_mode_bath(double coupling) {
    return BathSpec::from_temperature(1.0, {0.9, 1.2, 1.6},
                                      std::vector<double>(3, coupling), 2.0, 1.0);
}

}  // namespace

TEST_CASE("decoupled gaussian evolution leaves the bath stationary") {
    const BathSpec bath = three_mode_bath(0.0);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.3, 1.0);
    RealMatrix cov0(2, 2);
    cov0 << 0.4, 0.0, 0.0, 0.7;
    GaussianState g = make_system_bath_state(1.0, 0.0, cov0, bath);
    const GaussianState gt = gaussian_evolve(g, spec, bath, 2.4);
    // bath blocks unchanged
    for (std::size_t i = 0; i < 3; ++i) {
        const auto k = static_cast<Eigen::Index>(2 + 2 * i);
        CHECK(gt.covariance(k, k) == Catch::Approx(g.covariance(k, k)).epsilon(1e-9));
        CHECK(gt.covariance(k + 1, k + 1) ==
              Catch::Approx(g.covariance(k + 1, k + 1)).epsilon(1e-9));
        CHECK(std::abs(gt.mean(k)) < 1e-12);
    }
    // system mean oscillates at its own frequency
    CHECK(gt.mean(0) == Catch::Approx(std::cos(1.3 * 2.4)).epsilon(1e-9));
}

TEST_CASE("gaussian propagation matrix is symplectic") {
    const BathSpec bath = three_mode_bath(0.3);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.1, 1.0);
    const RealMatrix A = detail::quadratic_hamiltonian(spec, 1.1, bath);
    const RealMatrix omega = GaussianState::symplectic_form(4);
    const RealMatrix S = (1.7 * omega * A).exp();
    CHECK(std::abs(S.determinant() - 1.0) < 1e-10);
    CHECK((S * omega * S.transpose() - omega).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("gaussian evolution composes and conserves energy") {
    const BathSpec bath = three_mode_bath(0.25);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.2, 1.0);
    RealMatrix cov0(2, 2);
    cov0 << 0.5, 0.0, 0.0, 0.5;
    GaussianState g0 = make_system_bath_state(0.7, -0.2, cov0, bath);
    g0.validate(bath.hbar);

    const GaussianState g_direct = gaussian_evolve(g0, spec, bath, 1.9);
    const GaussianState g_two = gaussian_evolve(gaussian_evolve(g0, spec, bath, 0.8), spec, bath,
                                                1.1);
    CHECK((g_direct.mean - g_two.mean).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((g_direct.covariance - g_two.covariance).cwiseAbs().maxCoeff() < 1e-9);

    const double e0 = gaussian_energy(g0, spec, bath);
    const double e1 = gaussian_energy(g_direct, spec, bath);
    CHECK(std::abs(e1 - e0) < 1e-9 * std::abs(e0));
}

TEST_CASE("non-quadratic potentials are rejected") {
    const BathSpec bath = three_mode_bath(0.1);
    const SystemSpec quartic(1.0, [](double x) { return x * x * x * x; }, 1.0);
    RealMatrix cov0 = RealMatrix::Identity(2, 2);
    GaussianState g = make_system_bath_state(0.0, 0.0, cov0, bath);
    CHECK_THROWS_AS(gaussian_evolve(g, quartic, bath, 1.0), ValidationError);
}

TEST_CASE("force correlator coincidence and state independence") {
    const BathSpec bath = three_mode_bath(0.4);
    double want = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        want += bath.couplings[i] * bath.couplings[i] * bath.hbar /
                (2.0 * bath.mass * bath.omegas[i]) * bath.coth_half_ratio(i);
    }
    CHECK(bath_force_correlator(bath, 0.7, 0.7).real() == Catch::Approx(want));
    CHECK(bath_force_correlator(bath, 0.7, 0.7).imag() == 0.0);

    // imaginary part carries no thermal factor
    const BathSpec cold = BathSpec::from_temperature(1.0, {0.9, 1.2, 1.6},
                                                     std::vector<double>(3, 0.4), 0.05, 1.0);
    for (double s : {0.3, 1.1}) {
        CHECK(bath_force_correlator(bath, s, 0.0).imag() ==
              Catch::Approx(bath_force_correlator(cold, s, 0.0).imag()));
    }
}

TEST_CASE("truncated oscillator validation and operators") {
    CHECK_THROWS_AS(TruncatedOscillator(4, 1.0, 0.5, 1.0, 1.0), ValidationError);  // leaky cutoff
    const TruncatedOscillator osc(12, 1.0, 1.5, 1.0, 1.0);
    CHECK(osc.leakage() < 1e-6);
    const ComplexMatrix rho = osc.thermal_state();
    CHECK(std::abs(rho.trace().real() - 1.0) < 1e-12);
    // <X^2> in the truncated thermal state approaches the exact value
    const ComplexMatrix X = osc.position_operator();
    const double got = (X * rho * X).trace().real();
    const double want = 0.5 * coth(0.75);
    CHECK(got == Catch::Approx(want).epsilon(1e-5));
}

TEST_CASE("repeated interactions with zero coupling reproduce closed snapshots") {
    const PositionGrid grid(4, -1.2, 1.2);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const CollisionSchedule schedule(0.5, 0.05, 4, 1.0);
    const TruncatedOscillator ancilla(8, 1.0, 2.0, 1.0, 1.0);
    ComplexMatrix rho0 = ComplexMatrix::Zero(4, 4);
    rho0(0, 0) = 0.4;
    rho0(1, 1) = 0.6;
    rho0(0, 1) = rho0(1, 0) = 0.2;
    const auto snaps = repeated_interaction_sim(rho0, grid, ancilla, 0.0, schedule, spec);
    REQUIRE(snaps.size() == 5);
    const ComplexMatrix H = position_hamiltonian(grid, spec);
    for (std::size_t i = 1; i < snaps.size(); ++i) {
        const ComplexMatrix want = evolve_closed(rho0, H, schedule.time(i), 1.0);
        CHECK((snaps[i] - want).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("repeated interactions preserve trace and positivity") {
    const PositionGrid grid(4, -1.2, 1.2);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const CollisionSchedule schedule(0.5, 0.05, 6, 1.3);
    const TruncatedOscillator ancilla(10, 1.3, 1.8, 1.0, 1.0);
    ComplexMatrix rho0 = ComplexMatrix::Zero(4, 4);
    rho0(1, 1) = 1.0;
    const auto snaps = repeated_interaction_sim(rho0, grid, ancilla, 0.4, schedule, spec);
    for (const auto& snap : snaps) {
        CHECK(std::abs(snap.trace().real() - 1.0) < 1e-10);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitize(snap));
        CHECK(es.eigenvalues().minCoeff() > -1e-8);
    }
}

TEST_CASE("brute force path sum counts path pairs under a zero exponent") {
    const PositionGrid grid(2, -1.0, 1.0);
    const auto zero_exponent = [](const DiscretePath&, const DiscretePath&) {
        return Complex(0.0, 0.0);
    };
    // one slice: endpoints only, a single path pair per entry
    const auto J1 = brute_force_path_sum(grid, TimeMesh(1, 0.5), zero_exponent);
    CHECK(J1.entry(0, 0, 0, 0) == Complex(1.0, 0.0));
    // two slices: one interior point per path, 4 pairs per entry
    const auto J2 = brute_force_path_sum(grid, TimeMesh(2, 0.5), zero_exponent);
    CHECK(J2.entry(1, 0, 0, 1) == Complex(4.0, 0.0));
    // three slices: two interior points per path, 16 pairs per entry
    const auto J3 = brute_force_path_sum(grid, TimeMesh(3, 0.5), zero_exponent);
    CHECK(J3.entry(0, 1, 1, 0) == Complex(16.0, 0.0));

    CHECK_THROWS_AS(brute_force_path_sum(PositionGrid(5, -1.0, 1.0), TimeMesh(1, 0.5),
                                         zero_exponent),
                    SizeError);
    CHECK_THROWS_AS(brute_force_path_sum(grid, TimeMesh(4, 0.5), zero_exponent), SizeError);
}

TEST_CASE("brute force equals the sliced closed propagator on the closed action") {
    const PositionGrid grid(3, -1.0, 1.0);
    const TimeMesh mesh(3, 0.7);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.1, 1.0);
    const auto exponent = [&spec](const DiscretePath& px, const DiscretePath& py) {
        return (kI / spec.hbar) * (path_action(spec, px) - path_action(spec, py));
    };
    const auto oracle = brute_force_path_sum(grid, mesh, exponent);
    const auto J_cl = j_closed(grid, mesh.t_total,
                               kernel_matrix_sliced(grid, spec, mesh.n_steps, mesh.t_total));
    const double measure = path_pair_measure(spec, grid, mesh);
    double worst = 0.0, scale = 0.0;
    for (std::size_t ix = 0; ix < 3; ++ix)
        for (std::size_t iy = 0; iy < 3; ++iy)
            for (std::size_t jx = 0; jx < 3; ++jx)
                for (std::size_t jy = 0; jy < 3; ++jy) {
                    worst = std::max(worst, std::abs(measure * oracle.entry(ix, iy, jx, jy) -
                                                     J_cl.entry(ix, iy, jx, jy)));
                    scale = std::max(scale, std::abs(J_cl.entry(ix, iy, jx, jy)));
                }
    CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("brute force matches the influence path sum bit for bit") {
    const PositionGrid grid(2, -0.7, 0.7);
    const TimeMesh mesh(3, 0.6);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 0.9, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.3}, {0.5}, 1.7, 1.0);
    const auto J_fv = j_fv_matrix(grid, mesh, spec, bath);
    const auto oracle = brute_force_path_sum(
        grid, mesh, [&](const DiscretePath& px, const DiscretePath& py) {
            return fv_path_pair_exponent(spec, bath, px, py);
        });
    const double measure = path_pair_measure(spec, grid, mesh);
    for (std::size_t ix = 0; ix < 2; ++ix)
        for (std::size_t iy = 0; iy < 2; ++iy)
            for (std::size_t jx = 0; jx < 2; ++jx)
                for (std::size_t jy = 0; jy < 2; ++jy) {
                    CHECK(J_fv.entry(ix, iy, jx, jy) == measure * oracle.entry(ix, iy, jx, jy));
                }
}

TEST_CASE("enumeration order changes the sum only at rounding level") {
    const PositionGrid grid(3, -1.0, 1.0);
    const TimeMesh mesh(3, 0.8);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {1.1}, {0.4}, 2.0, 1.0);
    const auto exponent = [&](const DiscretePath& px, const DiscretePath& py) {
        return fv_path_pair_exponent(spec, bath, px, py);
    };
    const auto a = brute_force_path_sum(grid, mesh, exponent, EnumerationOrder::Canonical);
    const auto b = brute_force_path_sum(grid, mesh, exponent, EnumerationOrder::Reversed);
    double worst = 0.0, scale = 0.0;
    for (std::size_t ix = 0; ix < 3; ++ix)
        for (std::size_t iy = 0; iy < 3; ++iy)
            for (std::size_t jx = 0; jx < 3; ++jx)
                for (std::size_t jy = 0; jy < 3; ++jy) {
                    worst = std::max(worst, std::abs(a.entry(ix, iy, jx, jy) -
                                                     b.entry(ix, iy, jx, jy)));
                    scale = std::max(scale, std::abs(a.entry(ix, iy, jx, jy)));
                }
    CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("gaussian oracle agrees with the influence path sum on the position variance") {
    const PositionGrid grid(12, -4.0, 4.0);
    const TimeMesh mesh(2, 0.2);
    const SystemSpec spec = SystemSpec::harmonic(1.0, 1.0, 1.0);
    const BathSpec bath = BathSpec::from_temperature(1.0, {0.8, 1.1, 1.4}, {0.1, 0.1, 0.1},
                                                     2.0, 1.0);
    const auto rho0 = GridDensityMatrix::pure_state(
        grid, [](double x) { return Complex(std::exp(-0.5 * x * x), 0.0); });
    const auto J = j_fv_matrix(grid, mesh, spec, bath);
    const auto rho_t = rho_propagate_fv(rho0, J);
    double var = 0.0, norm = 0.0;
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double p = rho_t.values(static_cast<Eigen::Index>(j),
                                      static_cast<Eigen::Index>(j)).real();
        var += grid.point(j) * grid.point(j) * p;
        norm += p;
    }
    var /= norm;

    RealMatrix cov0(2, 2);
    cov0 << 0.5, 0.0, 0.0, 0.5;
    const GaussianState g0 = make_system_bath_state(0.0, 0.0, cov0, bath);
    const GaussianState gt = gaussian_evolve(g0, spec, bath, mesh.t_total);
    CHECK(std::abs(var - gt.covariance(0, 0)) / gt.covariance(0, 0) < 0.02);
}
