// experiments.hpp — Named experiment runners behind the scenario CLI. Each
// runner executes one verification pipeline, fills a ResultManifest with
// tables and pass/fail checks, and records every convention choice that went
// into the run.

#pragma once

#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lfvlab/bath.hpp"
#include "lfvlab/closed_system.hpp"
#include "lfvlab/collision.hpp"
#include "lfvlab/errors.hpp"
#include "lfvlab/influence.hpp"
#include "lfvlab/lgks.hpp"
#include "lfvlab/manifest.hpp"
#include "lfvlab/numerics.hpp"
#include "lfvlab/oracle.hpp"
#include "lfvlab/scenario.hpp"

namespace lfvlab {

struct ExperimentError : std::runtime_error {
    explicit ExperimentError(const std::string& msg) : std::runtime_error(msg) {}
};

namespace detail {

template <class F>
auto stage(const std::string& name, F&& f) {
    try {
        return f();
    } catch (const ExperimentError&) {
        throw;
    } catch (const std::exception& e) {
        throw ExperimentError(name + ": " + e.what());
    }
}

inline double rel_l2(const ComplexMatrix& got, const ComplexMatrix& want) {
    return std::sqrt((got - want).cwiseAbs2().sum()) / std::sqrt(want.cwiseAbs2().sum());
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double tensor_max_rel_diff(const PropagatorTensor& a, const PropagatorTensor& b) {
    const std::size_t n = a.grid().n_points;
    double worst = 0.0;
    double scale = 0.0;
    for (std::size_t ix = 0; ix < n; ++ix)
        for (std::size_t iy = 0; iy < n; ++iy)
            for (std::size_t jx = 0; jx < n; ++jx)
                for (std::size_t jy = 0; jy < n; ++jy) {
                    const Complex va = a.entry(ix, iy, jx, jy);
                    const Complex vb = b.entry(ix, iy, jx, jy);
                    worst = std::max(worst, std::abs(va - vb));
                    scale = std::max(scale, std::abs(vb));
                }
    return scale > 0.0 ? worst / scale : worst;
}

inline GridDensityMatrix uniform_coherence_state(const PositionGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const double v = 1.0 / (static_cast<double>(grid.n_points) * grid.spacing());
    return GridDensityMatrix(grid, ComplexMatrix::Constant(n, n, Complex(v, 0.0)));
}

inline void record_conventions(ResultManifest& m, const Scenario& s) {
    m.settings["n_delta_choice"] = "adjoint (general), joint-product (bath kernels)";
    m.settings["delta_weight"] = to_string(DeltaWeight::UnitWeight);
    m.settings["plus_sign_convention"] = to_string(PlusSignConvention::FvMatched);
    m.settings["seed"] = std::to_string(s.seed);
    m.settings["ancilla_dim"] = std::to_string(s.ancilla_dim);
}

}  // namespace detail

// ------------------------------- closed_baseline ------------------------------

// Grid propagation with the analytic harmonic kernel over one period versus
// operator-basis evolution on the same grid. Kernel stepping is chosen inside
// the grid's Nyquist window; finer slicings alias (the kernel phase is
// unresolved between grid points) and are reported as a diagnostic table.
inline ResultManifest run_closed_baseline(const Scenario& s) {
    ResultManifest m;
    const SystemSpec spec = s.system_spec();
    const PositionGrid grid = s.grid();
    if (s.potential_kind != "harmonic") {
        throw ExperimentError("closed_baseline: needs the harmonic potential");
    }
    const double period = 2.0 * M_PI / s.omega0;
    const auto rho0 = detail::stage("initial state", [&] {
        return GridDensityMatrix::pure_state(
            grid, [](double x) { return Complex(std::exp(-0.5 * (x - 1.0) * (x - 1.0)), 0.0); });
    });
    const ComplexMatrix H = detail::stage("operator discretization",
                                          [&] { return position_hamiltonian(grid, spec); });
    const ComplexMatrix reference =
        detail::stage("operator evolution", [&] { return evolve_closed(rho0.values, H, period, s.hbar); });

    auto& table = m.add_table("closed_baseline_diff",
                              {{"kernel_steps", "1"}, {"l2_error", "1"}});
    double headline = 0.0;
    const auto steps_choice = static_cast<std::size_t>(s.tolerance("kernel_steps", 8));
    for (std::size_t steps : {steps_choice, 2 * steps_choice, 8 * steps_choice}) {
        const double err = detail::stage("kernel propagation", [&] {
            const double dt = period / static_cast<double>(steps);
            const auto J = j_closed(grid, dt, kernel_matrix_harmonic(grid, spec, s.omega0, dt));
            ComplexMatrix r = rho0.values;
            for (std::size_t k = 0; k < steps; ++k) r = J.apply(r);
            return detail::rel_l2(r, reference);
        });
        table.add_row({static_cast<double>(steps), err});
        if (steps == steps_choice) headline = err;
    }
    m.add_check("closed_fidelity_l2", headline, s.tolerance("l2_error", 1e-3), "<=",
                "one period, " + std::to_string(steps_choice) + " kernel steps vs evolve_closed");
    return m;
}

// -------------------------------- lgks_integrity ------------------------------

inline ResultManifest run_lgks_integrity(const Scenario& s) {
    ResultManifest m;
    std::mt19937 rng(s.seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const auto random_matrix = [&](Eigen::Index d) {
        ComplexMatrix a(d, d);
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j) a(i, j) = Complex(uni(rng), uni(rng));
        return a;
    };

    // random dim-4 generator, 1e4 RK4 steps
    const Eigen::Index d = 4;
    const ComplexMatrix H = hermitize(random_matrix(d));
    const std::vector<ComplexMatrix> Ls = {random_matrix(d), random_matrix(d)};
    LindbladOperatorSet ops(H, Ls, s.hbar);
    ComplexMatrix rho = ComplexMatrix::Zero(d, d);
    rho(0, 0) = 0.7;
    rho(1, 1) = 0.3;
    const TimeMesh mesh(10000, 5.0);
    auto& drift = m.add_table("lgks_drift", {{"t", "time"},
                                             {"trace_deviation", "1"},
                                             {"min_eigenvalue", "1"}});
    double worst_trace = 0.0;
    double worst_eig = 1.0;
    detail::stage("random-generator integration", [&] {
        const auto rhs = [&ops](const ComplexMatrix& x) { return lindblad_rhs(ops, x); };
        for (std::size_t k = 0; k < mesh.n_steps; ++k) {
            rho = rk4_step(rho, rhs, mesh.dt());
            if ((k + 1) % 1000 == 0 || k + 1 == mesh.n_steps) {
                const auto rep = check_positivity(rho, 1.0);
                worst_trace = std::max(worst_trace, std::abs(rep.trace - 1.0));
                worst_eig = std::min(worst_eig, rep.min_eigenvalue);
                drift.add_row({mesh.time(k + 1), std::abs(rep.trace - 1.0), rep.min_eigenvalue});
            }
        }
        return 0;
    });
    m.add_check("lgks_trace_drift", worst_trace, s.tolerance("trace_drift", 1e-9));
    m.add_check("lgks_min_eigenvalue", worst_eig, s.tolerance("eigenvalue_floor", -1e-8), ">=");

    // amplitude damping against the analytic exponential at gamma t = 5
    const double gamma = 1.0;
    ComplexMatrix lower = ComplexMatrix::Zero(2, 2);
    lower(1, 0) = std::sqrt(gamma);
    LindbladOperatorSet damping(ComplexMatrix::Zero(2, 2), {lower}, s.hbar);
    ComplexMatrix excited = ComplexMatrix::Zero(2, 2);
    excited(0, 0) = 1.0;
    const auto history = detail::stage("amplitude damping", [&] {
        return integrate_lindblad(damping, excited, TimeMesh(10000, 5.0));
    });
    auto& pops = m.add_table("damping_population", {{"t", "time"},
                                                    {"rho_ee", "1"},
                                                    {"exact", "1"}});
    double worst_pop = 0.0;
    for (std::size_t k = 0; k <= 10000; k += 1000) {
        const double t = history.mesh.time(k);
        const double got = history.states[k](0, 0).real();
        const double want = std::exp(-gamma * t);
        worst_pop = std::max(worst_pop, std::abs(got - want));
        pops.add_row({t, got, want});
    }
    m.add_check("damping_population_error", worst_pop, s.tolerance("damping_error", 1e-6));
    return m;
}

// --------------------------------- greens_audit -------------------------------

inline ResultManifest run_greens_audit(const Scenario& s) {
    ResultManifest m;
    const BathSpec bath = s.bath();
    const double omega = bath.omegas.front();
    const double t_final = s.t_total;
    const double mass = bath.mass;
    const std::size_t n = std::max<std::size_t>(s.mesh_steps, 1000);
    const double dt = t_final / static_cast<double>(n);

    double worst_residual = 0.0;
    const double t2 = 0.37 * t_final;
    detail::stage("finite-difference residual", [&] {
        for (std::size_t k = 2; k + 2 < n; ++k) {
            const double t1 = static_cast<double>(k) * dt;
            if (std::abs(t1 - t2) < 2.0 * dt) continue;  // skip the kink
            const double g0 = greens_function(omega, t_final, t1 - dt, t2, mass);
            const double g1 = greens_function(omega, t_final, t1, t2, mass);
            const double g2 = greens_function(omega, t_final, t1 + dt, t2, mass);
            const double residual = mass * ((g2 - 2.0 * g1 + g0) / (dt * dt) + omega * omega * g1);
            worst_residual = std::max(worst_residual, std::abs(residual));
        }
        return 0;
    });
    m.add_check("greens_ode_residual", worst_residual, s.tolerance("ode_residual", 1e-4));

    const double jump = detail::stage("derivative jump", [&] {
        const double h = dt;
        const double right = (greens_function(omega, t_final, t2 + h, t2, mass) -
                              greens_function(omega, t_final, t2, t2, mass)) / h;
        const double left = (greens_function(omega, t_final, t2, t2, mass) -
                             greens_function(omega, t_final, t2 - h, t2, mass)) / h;
        return mass * (right - left);
    });
    m.add_check("greens_derivative_jump", std::abs(jump + 1.0), s.tolerance("jump_error", 1e-3),
                "<=", "m dG/dt1 jump across t1 = t2 vs -1");

    // dense boundary-value solve on a 200-point mesh
    const double dense_diff = detail::stage("dense solve comparison", [&] {
        const std::size_t nn = 200;
        const double h = t_final / static_cast<double>(nn);
        const auto interior = static_cast<Eigen::Index>(nn - 1);
        RealMatrix A = RealMatrix::Zero(interior, interior);
        for (Eigen::Index i = 0; i < interior; ++i) {
            A(i, i) = mass * (-2.0 / (h * h) + omega * omega);
            if (i > 0) A(i, i - 1) = mass / (h * h);
            if (i + 1 < interior) A(i, i + 1) = mass / (h * h);
        }
        const auto j2 = static_cast<Eigen::Index>(std::llround(t2 / h));
        RealVector rhs = RealVector::Zero(interior);
        rhs(j2 - 1) = -1.0 / h;  // -delta(t - t2), row-scaled
        const RealVector g = A.partialPivLu().solve(rhs);
        double worst = 0.0;
        for (Eigen::Index i = 0; i < interior; ++i) {
            const double t1 = static_cast<double>(i + 1) * h;
            worst = std::max(worst, std::abs(-g(i) - greens_function(omega, t_final, t1,
                                                                     static_cast<double>(j2) * h,
                                                                     mass)));
        }
        return worst;
    });
    m.add_check("greens_dense_solve_diff", dense_diff, s.tolerance("dense_solve_diff", 1e-6));
    return m;
}

// --------------------------------- thermal_audit ------------------------------

inline ResultManifest run_thermal_audit(const Scenario& s) {
    ResultManifest m;
    const BathSpec bath = s.bath();
    BathSpec single(bath.mass, {bath.omegas.front()}, {bath.couplings.front()},
                    {bath.thermal_ratios.front()}, bath.hbar);

    const double width = detail::stage("thermal width", [&] {
        return std::sqrt(single.hbar / (2.0 * single.mass * single.omegas[0]) *
                         single.coth_half_ratio(0));
    });
    const double integral = detail::stage("diagonal quadrature", [&] {
        const PositionGrid qg(801, -6.0 * width, 6.0 * width);
        double acc = 0.0;
        for (std::size_t j = 0; j < qg.n_points; ++j) {
            const double w = (j == 0 || j + 1 == qg.n_points) ? 0.5 : 1.0;
            acc += w * qg.spacing() * thermal_density(single, {qg.point(j)}, {qg.point(j)});
        }
        return acc;
    });
    m.add_check("thermal_diagonal_normalization", std::abs(integral - 1.0),
                s.tolerance("normalization_error", 1e-6));

    // truncated-Gibbs oracle on the scenario grid
    const PositionGrid grid = s.grid();
    const auto n = static_cast<Eigen::Index>(grid.n_points);
    const auto [diff, pattern] = detail::stage("gibbs comparison", [&] {
        const SystemSpec osc = SystemSpec::harmonic(single.mass, single.omegas[0], single.hbar);
        const ComplexMatrix H = position_hamiltonian(grid, osc);
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(H);
        if (es.info() != Eigen::Success) throw NumericalError("gibbs eigensolver failed");
        const double u = single.thermal_ratios[0];
        Eigen::VectorXd boltz = (-es.eigenvalues().array() * (u / (single.hbar * single.omegas[0]))).exp();
        ComplexMatrix gibbs = es.eigenvectors() *
                              boltz.asDiagonal().toDenseMatrix().cast<Complex>() *
                              es.eigenvectors().adjoint();
        gibbs /= gibbs.trace().real() * grid.spacing();
        ComplexMatrix ref(n, n);
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b)
                ref(a, b) = thermal_density(single, {grid.point(static_cast<std::size_t>(a))},
                                            {grid.point(static_cast<std::size_t>(b))});
        std::vector<std::vector<double>> rows;
        const double scale = ref.cwiseAbs().maxCoeff();
        double worst = 0.0;
        for (Eigen::Index a = 0; a < n; ++a) {
            double row_worst = 0.0;
            for (Eigen::Index b = 0; b < n; ++b) {
                row_worst = std::max(row_worst, std::abs(gibbs(a, b) - ref(a, b)) / scale);
            }
            rows.push_back({grid.point(static_cast<std::size_t>(a)), row_worst});
            worst = std::max(worst, row_worst);
        }
        return std::make_pair(worst, rows);
    });
    auto& pat = m.add_table("thermal_gibbs_discrepancy", {{"x", "length"},
                                                          {"max_rel_diff_in_row", "1"}});
    for (const auto& row : pattern) pat.add_row(row);
    m.add_check("thermal_gibbs_entrywise", diff, s.tolerance("gibbs_entrywise", 1e-3), "<=",
                "as-written exponent vs truncated-Gibbs oracle, peak-scaled; the discrepancy "
                "pattern table records the comparison either way");
    return m;
}

// ---------------------------------- kernel_audit ------------------------------

inline ResultManifest run_kernel_audit(const Scenario& s) {
    ResultManifest m;
    std::mt19937 rng(s.seed);
    std::uniform_real_distribution<double> uw(0.5, 2.5);
    std::uniform_real_distribution<double> uc(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.5, 4.0);

    auto& kernel_table = m.add_table("kernel", {{"s", "time"},
                                                {"noise_kernel", "energy^2/length^2"},
                                                {"dissipation_kernel", "energy^2/length^2"}});
    const BathSpec shown = s.bath();
    const double t_max = s.has_mesh ? s.t_total : 5.0;
    const std::size_t n_s = 100;
    for (std::size_t k = 0; k < n_s; ++k) {
        const double sv = t_max * static_cast<double>(k) / static_cast<double>(n_s - 1);
        kernel_table.add_row({sv, noise_kernel(shown, sv), dissipation_kernel(shown, sv)});
    }

    double worst = 0.0;
    detail::stage("correlator comparison", [&] {
        for (int b = 0; b < 5; ++b) {
            std::vector<double> ws(5), cs(5);
            for (auto& w : ws) w = uw(rng);
            for (auto& c : cs) c = uc(rng);
            const BathSpec bath = BathSpec::from_temperature(1.0, ws, cs, ut(rng), s.hbar);
            for (std::size_t k = 0; k < n_s; ++k) {
                const double sv = t_max * static_cast<double>(k) / static_cast<double>(n_s - 1);
                const Complex c12 = bath_force_correlator(bath, sv, 0.0);
                const Complex c21 = bath_force_correlator(bath, 0.0, sv);
                const double sym_re = 0.5 * (c12 + c21).real();
                worst = std::max(worst, std::abs(sym_re - bath.hbar * noise_kernel(bath, sv)));
                worst = std::max(worst,
                                 std::abs(c12.imag() + bath.hbar * dissipation_kernel(bath, sv)));
            }
        }
        return 0;
    });
    m.add_check("kernel_correlator_max_diff", worst, s.tolerance("correlator_diff", 1e-8), "<=",
                "hbar * noise = symmetrized Re<FF>, -hbar * dissipation = Im<FF>");
    return m;
}

// ---------------------------- zero_coupling_reduction --------------------------

inline ResultManifest run_zero_coupling_reduction(const Scenario& s) {
    ResultManifest m;
    const PositionGrid grid = s.grid();
    const TimeMesh mesh = s.mesh();
    const SystemSpec spec = s.system_spec();
    BathSpec bath = s.bath();
    for (auto& c : bath.couplings) c = 0.0;

    const auto J_ref = detail::stage("sliced closed propagator", [&] {
        return j_closed(grid, mesh.t_total, kernel_matrix_sliced(grid, spec, mesh.n_steps,
                                                                 mesh.t_total));
    });
    const double fv_diff = detail::stage("feynman-vernon reduction", [&] {
        return detail::tensor_max_rel_diff(j_fv_matrix(grid, mesh, spec, bath), J_ref);
    });
    m.add_check("zero_coupling_fv", fv_diff, s.tolerance("reduction_error", 1e-12));

    const double me_diff = detail::stage("collision-model reduction", [&] {
        const CollisionSchedule schedule = s.schedule();
        return detail::tensor_max_rel_diff(assemble_j_me(grid, mesh, spec, bath, schedule), J_ref);
    });
    m.add_check("zero_coupling_me", me_diff, s.tolerance("reduction_error", 1e-12));
    return m;
}

// ----------------------------- brute_force_equality ----------------------------

inline ResultManifest run_brute_force_equality(const Scenario& s) {
    ResultManifest m;
    const PositionGrid grid = s.grid();
    const TimeMesh mesh = s.mesh();
    const SystemSpec spec = s.system_spec();
    const BathSpec bath = s.bath();
    const CollisionSchedule schedule = s.schedule();
    const double measure = path_pair_measure(spec, grid, mesh);

    const double fv_diff = detail::stage("feynman-vernon bit equality", [&] {
        const auto J = j_fv_matrix(grid, mesh, spec, bath);
        const auto oracle = brute_force_path_sum(
            grid, mesh, [&](const DiscretePath& px, const DiscretePath& py) {
                return fv_path_pair_exponent(spec, bath, px, py);
            });
        double worst = 0.0;
        const std::size_t n = grid.n_points;
        for (std::size_t ix = 0; ix < n; ++ix)
            for (std::size_t iy = 0; iy < n; ++iy)
                for (std::size_t jx = 0; jx < n; ++jx)
                    for (std::size_t jy = 0; jy < n; ++jy) {
                        const Complex want = measure * oracle.entry(ix, iy, jx, jy);
                        worst = std::max(worst, std::abs(J.entry(ix, iy, jx, jy) - want));
                    }
        return worst;
    });
    m.add_check("brute_force_fv_bit_equal", fv_diff, 0.0, "<=", "bit-for-bit");

    const double me_diff = detail::stage("collision-model bit equality", [&] {
        const auto J = assemble_j_me(grid, mesh, spec, bath, schedule);
        const auto oracle = brute_force_path_sum(
            grid, mesh, [&](const DiscretePath& px, const DiscretePath& py) {
                return me_path_pair_exponent(spec, bath, schedule, px, py);
            });
        double worst = 0.0;
        const std::size_t n = grid.n_points;
        for (std::size_t ix = 0; ix < n; ++ix)
            for (std::size_t iy = 0; iy < n; ++iy)
                for (std::size_t jx = 0; jx < n; ++jx)
                    for (std::size_t jy = 0; jy < n; ++jy) {
                        const Complex want = measure * oracle.entry(ix, iy, jx, jy);
                        worst = std::max(worst, std::abs(J.entry(ix, iy, jx, jy) - want));
                    }
        return worst;
    });
    m.add_check("brute_force_me_bit_equal", me_diff, 0.0, "<=", "bit-for-bit");
    return m;
}

// ----------------------------- collision_extraction ----------------------------

// Headline comparison: the per-collision decay coefficients against a
// collision-resolved repeated-interaction simulation, in the pure-dephasing
// configuration (heavy mass) where the oracle measurement is exact. The
// off-diagonal element rho(x_1, x_0) with x_0 = 0 is monitored, so the
// single-product and difference-squared quadratic forms coincide; the doubled
// block reading and the alternative delta weight are reported alongside.
inline ResultManifest run_collision_extraction(const Scenario& s) {
    ResultManifest m;
    const PositionGrid grid = s.grid();
    if (grid.n_points != 2 || grid.x_min != 0.0) {
        throw ExperimentError("collision_extraction: needs a 2-point grid {0, x0}");
    }
    const double x0 = grid.x_max;
    const SystemSpec spec = s.system_spec();
    const BathSpec bath = s.bath();
    const CollisionSchedule schedule = s.schedule();

    const LindbladExtraction extraction = detail::stage("extraction", [&] {
        return extract_lindblad(schedule, bath, schedule.t_total());
    });

    const auto measure_increments = [&](const CollisionSchedule& sched) {
        const TruncatedOscillator ancilla(s.ancilla_dim, sched.omega_at(1),
                                          bath.thermal_ratios.front() *
                                              (sched.omega_at(1) / bath.omegas.front()),
                                          bath.mass, s.hbar);
        ComplexMatrix rho0(2, 2);
        rho0 << 0.5, 0.5, 0.5, 0.5;
        const auto snaps = repeated_interaction_sim(rho0, grid, ancilla,
                                                    bath.couplings.front(), sched, spec);
        std::vector<double> increments;
        increments.reserve(sched.n_collisions);
        for (std::size_t i = 1; i < snaps.size(); ++i) {
            increments.push_back(std::log(std::abs(snaps[i - 1](1, 0))) -
                                 std::log(std::abs(snaps[i](1, 0))));
        }
        return increments;
    };

    const auto increments = detail::stage("repeated-interaction oracle",
                                          [&] { return measure_increments(schedule); });

    auto& table = m.add_table("gamma", {{"i", "1"},
                                        {"tau_i", "time"},
                                        {"phi_i", "energy*time"},
                                        {"gamma_i", "energy*time"},
                                        {"oracle_gamma_i", "energy*time"},
                                        {"rel_diff", "1"}});
    double worst = 0.0;
    double mean = 0.0;
    for (std::size_t i = 1; i <= schedule.n_collisions; ++i) {
        const double gamma_i = extraction.gamma[i - 1];
        const double oracle_gamma = increments[i - 1] * s.hbar / (x0 * x0);
        const double rel = std::abs(gamma_i - oracle_gamma) / std::abs(gamma_i);
        worst = std::max(worst, rel);
        mean += rel / static_cast<double>(schedule.n_collisions);
        table.add_row({static_cast<double>(i), schedule.time(i), extraction.phi[i - 1], gamma_i,
                       oracle_gamma, rel});
    }
    m.add_check("collision_gamma_rel_diff", worst, s.tolerance("gamma_rel_diff", 0.1), "<=",
                "max over collisions; oracle gamma = hbar * decay increment / x0^2");
    m.settings["any_negative_gamma"] = extraction.any_negative_gamma ? "true" : "false";

    // epsilon-scaling audit: halving epsilon should shrink the mismatch by
    // one power of epsilon per the impulsive-reading hypothesis.
    const double mean_half = detail::stage("epsilon-halving rerun", [&] {
        CollisionSchedule half = schedule;
        half.epsilon *= 0.5;
        const auto ext2 = extract_lindblad(half, bath, half.t_total());
        const auto inc2 = measure_increments(half);
        double acc = 0.0;
        for (std::size_t i = 1; i <= half.n_collisions; ++i) {
            const double oracle_gamma = inc2[i - 1] * s.hbar / (x0 * x0);
            acc += std::abs(ext2.gamma[i - 1] - oracle_gamma) / std::abs(ext2.gamma[i - 1]);
        }
        return acc / static_cast<double>(half.n_collisions);
    });
    const double exponent = std::log2(mean / mean_half);
    m.add_check("collision_epsilon_scaling", exponent, 0.0, "in[0.7,1.3]",
                "measured mismatch exponent under epsilon halving (mean rel diff " +
                    std::to_string(mean) + " -> " + std::to_string(mean_half) + ")");

    // Alternative readings reported alongside (not asserted): the doubled
    // block quadratic form and the epsilon-dt delta weight.
    auto& alt = m.add_table("gamma_alternative_readings",
                            {{"i", "1"},
                             {"rel_diff_doubled_blocks", "1"},
                             {"rel_diff_epsilon_dt_weight", "1"}});
    const double dt_over_eps = schedule.tau / schedule.epsilon;  // coarsest aligned mesh: dt = tau
    for (std::size_t i = 1; i <= schedule.n_collisions; ++i) {
        const double gamma_i = extraction.gamma[i - 1];
        const double oracle_gamma = increments[i - 1] * s.hbar / (x0 * x0);
        const double rel_doubled = std::abs(2.0 * gamma_i - oracle_gamma) / std::abs(gamma_i);
        const double rel_epsdt =
            std::abs(gamma_i * dt_over_eps - oracle_gamma) / std::abs(gamma_i * dt_over_eps);
        alt.add_row({static_cast<double>(i), rel_doubled, rel_epsdt});
    }
    return m;
}

// --------------------------- lindblad_plus_consistency -------------------------

// Dephasing-limit consistency of the memory-kernel master equation with the
// influence-functional propagator through second order in t. The frozen-path
// propagator is exact for a static system; a kinetic 2-point path sum has no
// controlled short-time limit (all real-time paths interfere with equal
// magnitude), so the comparison is made in the limit where the t^2 content is
// unambiguous.
inline ResultManifest run_lindblad_plus_consistency(const Scenario& s) {
    ResultManifest m;
    const PositionGrid grid = s.grid();
    if (grid.n_points != 2) {
        throw ExperimentError("lindblad_plus_consistency: needs a 2-point grid");
    }
    const BathSpec bath = s.bath();
    const TimeMesh mesh = s.mesh();
    const double dx = grid.spacing();

    // frozen-path influence propagator: diagonal in both indices
    const auto J_fv = detail::stage("frozen-path propagator", [&] {
        const std::size_t n = grid.n_points;
        std::vector<Complex> entries(n * n * n * n, Complex{0.0, 0.0});
        for (std::size_t ix = 0; ix < n; ++ix) {
            for (std::size_t iy = 0; iy < n; ++iy) {
                DiscretePath px(mesh, std::vector<double>(mesh.n_points(), grid.point(ix)));
                DiscretePath py(mesh, std::vector<double>(mesh.n_points(), grid.point(iy)));
                const Complex phi = influence_phase_cl(px, py, bath);
                entries[((ix * n + iy) * n + ix) * n + iy] =
                    std::exp(kI / s.hbar * phi) / (dx * dx);
            }
        }
        return PropagatorTensor::dense(grid, mesh.t_total, PropagatorVariant::FeynmanVernon,
                                       std::move(entries));
    });
    ComplexMatrix rho0v(2, 2);
    rho0v << 1.0 / (2.0 * dx), 1.0 / (2.0 * dx), 1.0 / (2.0 * dx), 1.0 / (2.0 * dx);
    const GridDensityMatrix rho0(grid, rho0v);
    const ComplexMatrix rho_fv = rho_propagate_fv(rho0, J_fv).values;

    ComplexMatrix x_op = ComplexMatrix::Zero(2, 2);
    x_op(0, 0) = grid.point(0);
    x_op(1, 1) = grid.point(1);
    const LindbladOperatorSet ops(ComplexMatrix::Zero(2, 2), {}, s.hbar);
    const TimeMesh fine(std::max<std::size_t>(mesh.n_steps, 400), mesh.t_total);

    const auto deviation = [&](PlusSignConvention sign) {
        const auto kernels = cl_memory_kernels(bath, s.hbar, x_op, sign);
        const ComplexMatrix rho_plus =
            integrate_lindblad_plus(ops, kernels, rho0v, fine).states.back();
        // both sides normalized by the (here trivial) closed evolution rho0
        double worst = 0.0;
        for (Eigen::Index a = 0; a < 2; ++a) {
            for (Eigen::Index b = 0; b < 2; ++b) {
                if (a == b) continue;
                const Complex d_fv = rho_fv(a, b) / rho0v(a, b) - 1.0;
                const Complex d_pl = rho_plus(a, b) / rho0v(a, b) - 1.0;
                worst = std::max(worst, std::abs(d_fv - d_pl) / std::abs(d_fv));
            }
        }
        return worst;
    };
    const double rel = detail::stage("memory-equation integration",
                                     [&] { return deviation(PlusSignConvention::FvMatched); });
    m.add_check("plus_consistency_rel_error", rel, s.tolerance("consistency_rel_error", 0.05),
                "<=", "relative error of the order-t^2 deviation from the closed state");
    const double rel_printed = detail::stage("as-printed sign rerun", [&] {
        return deviation(PlusSignConvention::AsPrinted);
    });
    m.settings["as_printed_sign_rel_error"] = std::to_string(rel_printed);
    return m;
}

// ----------------------------- multi_frequency_check ---------------------------

inline ResultManifest run_multi_frequency_check(const Scenario& s) {
    ResultManifest m;
    const BathSpec bath = s.bath();
    CollisionSchedule base(s.tau, s.epsilon, s.collisions,
                           s.schedule_omegas.empty() ? s.schedule_omega
                                                     : s.schedule_omegas.front());
    const auto ext_base = detail::stage("single-frequency extraction", [&] {
        return extract_lindblad(base, bath, base.t_total());
    });
    const auto degenerate =
        multi_frequency_schedule(std::vector<double>(s.collisions, base.omega_at(1)), base);
    const auto ext_deg = detail::stage("degenerate multi-frequency extraction", [&] {
        return extract_lindblad(degenerate, bath, degenerate.t_total());
    });
    double worst = 0.0;
    for (std::size_t i = 0; i < s.collisions; ++i) {
        worst = std::max(worst, std::abs(ext_base.phi[i] - ext_deg.phi[i]));
        worst = std::max(worst, std::abs(ext_base.gamma[i] - ext_deg.gamma[i]));
    }
    m.add_check("multi_frequency_degeneracy", worst, s.tolerance("degeneracy_error", 1e-12));
    m.settings["frequency_pairing_caveat"] = ext_deg.frequency_pairing_caveat ? "true" : "false";

    if (!s.schedule_omegas.empty()) {
        const auto mixed = multi_frequency_schedule(s.schedule_omegas, base);
        const auto ext_mixed = detail::stage("mixed-frequency extraction", [&] {
            return extract_lindblad(mixed, bath, mixed.t_total());
        });
        auto& table = m.add_table("multi_frequency_gamma", {{"i", "1"},
                                                            {"omega_i", "1/time"},
                                                            {"phi_i", "energy*time"},
                                                            {"gamma_i", "energy*time"}});
        for (std::size_t i = 1; i <= s.collisions; ++i) {
            table.add_row({static_cast<double>(i), mixed.omega_at(i), ext_mixed.phi[i - 1],
                           ext_mixed.gamma[i - 1]});
        }
        m.settings["frequency_pairing_caveat"] =
            ext_mixed.frequency_pairing_caveat ? "true" : "false";
    }
    return m;
}

// ------------------------------ gaussian_crosscheck ----------------------------

inline ResultManifest run_gaussian_crosscheck(const Scenario& s) {
    ResultManifest m;
    const PositionGrid grid = s.grid();
    const TimeMesh mesh = s.mesh();
    const SystemSpec spec = s.system_spec();
    const BathSpec bath = s.bath();

    const auto rho0 = detail::stage("initial state", [&] {
        const double w = spec.mass * s.omega0 / s.hbar;
        return GridDensityMatrix::pure_state(
            grid, [w](double x) { return Complex(std::exp(-0.5 * w * x * x), 0.0); });
    });
    const double var_fv = detail::stage("path-sum propagation", [&] {
        const auto J = j_fv_matrix(grid, mesh, spec, bath);
        const auto rho_t = rho_propagate_fv(rho0, J);
        double acc = 0.0;
        double norm = 0.0;
        for (std::size_t j = 0; j < grid.n_points; ++j) {
            const double x = grid.point(j);
            const double p = rho_t.values(static_cast<Eigen::Index>(j),
                                          static_cast<Eigen::Index>(j)).real();
            acc += x * x * p;
            norm += p;
        }
        return acc / norm;
    });
    const double var_exact = detail::stage("gaussian oracle", [&] {
        RealMatrix cov0(2, 2);
        const double vx = s.hbar / (2.0 * spec.mass * s.omega0);
        cov0 << vx, 0.0, 0.0, s.hbar * spec.mass * s.omega0 / 2.0;
        GaussianState g0 = make_system_bath_state(0.0, 0.0, cov0, bath);
        const GaussianState gt = gaussian_evolve(g0, spec, bath, mesh.t_total);
        return gt.covariance(0, 0);
    });
    const double rel = std::abs(var_fv - var_exact) / var_exact;
    auto& table = m.add_table("position_variance", {{"t", "time"},
                                                    {"var_fv", "length^2"},
                                                    {"var_exact", "length^2"}});
    table.add_row({mesh.t_total, var_fv, var_exact});
    m.add_check("gaussian_variance_rel_diff", rel, s.tolerance("variance_rel_diff", 0.02));
    return m;
}

// ---------------------------------- dispatcher --------------------------------

inline ResultManifest run_experiment(const Scenario& s) {
    const auto t0 = std::chrono::steady_clock::now();
    ResultManifest m;
    if (s.experiment == "closed_baseline") m = run_closed_baseline(s);
    else if (s.experiment == "lgks_integrity") m = run_lgks_integrity(s);
    else if (s.experiment == "greens_audit") m = run_greens_audit(s);
    else if (s.experiment == "thermal_audit") m = run_thermal_audit(s);
    else if (s.experiment == "kernel_audit") m = run_kernel_audit(s);
    else if (s.experiment == "zero_coupling_reduction") m = run_zero_coupling_reduction(s);
    else if (s.experiment == "brute_force_equality") m = run_brute_force_equality(s);
    else if (s.experiment == "collision_extraction") m = run_collision_extraction(s);
    else if (s.experiment == "lindblad_plus_consistency") m = run_lindblad_plus_consistency(s);
    else if (s.experiment == "multi_frequency_check") m = run_multi_frequency_check(s);
    else if (s.experiment == "gaussian_crosscheck") m = run_gaussian_crosscheck(s);
    else throw ExperimentError("unknown experiment '" + s.experiment + "'");
    m.scenario_name = s.name;
    m.experiment = s.experiment;
    m.scenario_echo = s.raw_text;
    detail::record_conventions(m, s);
    const auto t1 = std::chrono::steady_clock::now();
    m.runtime_seconds = std::chrono::duration<double>(t1 - t0).count();
    return m;
}

}  // namespace lfvlab
