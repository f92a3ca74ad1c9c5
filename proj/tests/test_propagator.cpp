// test_propagator.cpp: RK4 propagation, filtering and activation

#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "heom/errors.hpp"
#include "heom/propagator.hpp"
#include "heom/worker_pool.hpp"
#include "support.hpp"

namespace heom {
namespace {

using test::max_abs_diff;
using test::pauli_x;
using test::pauli_z;
using test::random_hermitian;

Matrix plus_state() {
    Matrix rho = Matrix::Constant(2, 2, 0.5);
    return rho;
}

Matrix up_state() {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = 1.0;
    return rho;
}

PropagationConfig config(double dt, double t_final, double tol, int max_tier) {
    PropagationConfig c;
    c.dt = dt;
    c.t_final = t_final;
    c.filter_tol = tol;
    c.max_tier = max_tier;
    c.workers = 1;
    return c;
}

// 2-level system, one bath with K = 3 modes.
HierarchySpec small_spec(int max_tier, double tol, std::uint32_t seed = 21) {
    std::mt19937 rng(seed);
    const auto ex = expand(DrudeBath(0.4, 1.3, 0.9), compute_psd(2));
    return test::single_bath(ex, random_hermitian(2, rng), max_tier, tol);
}

TEST(Propagate, ClosedSystemPrecession) {
    const double eps = 1.3;
    Matrix h = eps * pauli_z();
    auto spec = test::single_bath(expand(DrudeBath(1, 1, 1), compute_psd(1)), Matrix::Zero(2, 2), 4);
    auto cfg = config(1e-3, 10.0 / eps, 1e-10, 4);
    cfg.record_stride = 100;
    const auto res = propagate(spec, plus_state(), cfg, h);
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        const Complex expected = 0.5 * std::exp(Complex(0.0, -2.0 * eps * res.times[i]));
        EXPECT_NEAR(std::abs(res.rho[i](0, 1) - expected), 0.0, 1e-8) << "t=" << res.times[i];
    }
    EXPECT_EQ(res.stats.peak_active, 1u);
}

TEST(Propagate, ZeroToleranceEqualsStaticHierarchy) {
    for (int tier : {1, 3, 6}) {
        const auto spec = small_spec(tier, 0.0);
        std::mt19937 rng(4);
        const Matrix h = random_hermitian(2, rng);
        auto cfg = config(0.01, 2.0, 0.0, tier);
        cfg.record_stride = 10;
        const auto filtered = propagate(spec, test::random_density(2, rng), cfg, h);
        rng.seed(4);
        random_hermitian(2, rng);
        cfg.static_hierarchy = true;
        const auto dense = propagate(spec, test::random_density(2, rng), cfg, h);
        ASSERT_EQ(filtered.rho.size(), dense.rho.size());
        for (std::size_t i = 0; i < dense.rho.size(); ++i)
            EXPECT_LT(max_abs_diff(filtered.rho[i], dense.rho[i]), 1e-12) << "L=" << tier << " i=" << i;
        EXPECT_EQ(filtered.stats.peak_active, hierarchy_size(3, tier));
    }
}

TEST(Propagate, TraceAndHermiticity) {
    const auto spec = small_spec(6, 1e-8);
    std::mt19937 rng(8);
    auto cfg = config(0.005, 5.0, 1e-8, 6);
    cfg.record_stride = 20;
    const auto res = propagate(spec, test::random_density(2, rng), cfg, random_hermitian(2, rng));
    for (const auto& rho : res.rho) {
        EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-8);
        EXPECT_LT(max_abs_diff(rho, rho.adjoint()), 1e-8);
    }
}

TEST(Propagate, FourthOrderStepHalving) {
    const auto spec = small_spec(4, 0.0);
    std::mt19937 rng(2);
    const Matrix h = 2.0 * random_hermitian(2, rng);
    const Matrix rho0 = test::random_density(2, rng);
    const auto final_rho = [&](double dt) {
        auto cfg = config(dt, 2.0, 0.0, 4);
        cfg.static_hierarchy = true;
        cfg.record_stride = 1'000'000;
        return propagate(spec, rho0, cfg, h).rho.back();
    };
    const Matrix ref = final_rho(0.02 / 8);
    const double e1 = max_abs_diff(final_rho(0.02), ref);
    const double e2 = max_abs_diff(final_rho(0.01), ref);
    // Richardson: the dt/8 reference carries 1/4096 of the dt error
    const double ratio = e1 / e2;
    EXPECT_GT(ratio, 16.0 * 0.7);
    EXPECT_LT(ratio, 16.0 * 1.3);
}

TEST(Propagate, TimeDependentHamiltonianUsesStageTimes) {
    // closed system, H(t) = w(t) sz: phase = 2 * integral of w
    auto spec = test::single_bath(expand(DrudeBath(1, 1, 1), compute_psd(0)), Matrix::Zero(2, 2), 1);
    auto cfg = config(1e-3, 3.0, 0.0, 1);
    cfg.record_stride = 3000;
    const auto res = propagate(spec, plus_state(), cfg, [](double t) -> Matrix { return (1.0 + t) * pauli_z(); });
    const double phase = 2.0 * (3.0 + 4.5);
    EXPECT_NEAR(std::abs(res.rho.back()(0, 1) - 0.5 * std::exp(Complex(0.0, -phase))), 0.0, 1e-10);
}

TEST(Propagate, RecordsStrideAndFinalStep) {
    const auto spec = small_spec(2, 0.0);
    auto cfg = config(0.1, 1.05, 0.0, 2);
    cfg.record_stride = 4;
    const auto res = propagate(spec, up_state(), cfg, pauli_x());
    ASSERT_EQ(res.times.size(), 4u);  // 0, 0.4, 0.8, 1.05
    EXPECT_DOUBLE_EQ(res.times.back(), 1.05);
    EXPECT_EQ(res.stats.steps, 11u);
    EXPECT_EQ(res.stats.active_counts.size(), res.times.size());
}

TEST(Propagate, ObservableTraces) {
    const auto spec = small_spec(2, 1e-9);
    auto cfg = config(0.01, 1.0, 1e-9, 2);
    cfg.record_stride = 10;
    cfg.observables = {{"sz", pauli_z()}, {"sx", pauli_x()}};
    const auto res = propagate(spec, up_state(), cfg, pauli_x());
    ASSERT_EQ(res.traces.size(), 2u);
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        EXPECT_NEAR(res.traces[0][i], (res.rho[i](0, 0) - res.rho[i](1, 1)).real(), 1e-14);
        EXPECT_NEAR(res.traces[1][i], 2.0 * res.rho[i](0, 1).real(), 1e-14);
    }
    EXPECT_EQ(res.observable_names, (std::vector<std::string>{"sz", "sx"}));
}

TEST(Propagate, WorkerCountDoesNotChangeResults) {
    const auto spec = small_spec(5, 1e-9);
    auto cfg = config(0.01, 1.0, 1e-9, 5);
    cfg.record_stride = 25;
    const auto one = propagate(spec, up_state(), cfg, pauli_x());
    cfg.workers = 3;
    const auto three = propagate(spec, up_state(), cfg, pauli_x());
    EXPECT_EQ(three.stats.workers, 3u);
    for (std::size_t i = 0; i < one.rho.size(); ++i) EXPECT_EQ(one.rho[i], three.rho[i]);
}

TEST(Propagate, SplitModeInvariance) {
    // a mode split into two copies with half the coefficient leaves rho_0 unchanged
    const auto ex = expand(DrudeBath(0.3, 1.1, 1.4), compute_psd(1));
    BathExpansion split = ex;
    split.modes = {{0.5 * ex.modes[0].coefficient, ex.modes[0].rate}, {0.5 * ex.modes[0].coefficient, ex.modes[0].rate}};
    const auto a = test::single_bath(ex, pauli_z(), 4);
    const auto b = test::single_bath(split, pauli_z(), 4);
    auto cfg = config(0.01, 3.0, 0.0, 4);
    cfg.static_hierarchy = true;
    cfg.record_stride = 50;
    const auto ra = propagate(a, up_state(), cfg, pauli_x());
    const auto rb = propagate(b, up_state(), cfg, pauli_x());
    for (std::size_t i = 0; i < ra.rho.size(); ++i) EXPECT_LT(max_abs_diff(ra.rho[i], rb.rho[i]), 1e-12);
}

TEST(Propagate, InitialStateValidation) {
    const auto spec = small_spec(2, 0.0);
    const auto cfg = config(0.01, 0.1, 0.0, 2);
    Matrix rho = up_state();
    rho(0, 0) = 0.9;
    EXPECT_THROW(propagate(spec, rho, cfg, pauli_x()), ArgumentError);
    rho = plus_state();
    rho(0, 1) = Complex(0.5, 0.1);
    EXPECT_THROW(propagate(spec, rho, cfg, pauli_x()), ArgumentError);
    rho = Matrix::Zero(2, 2);
    rho(0, 0) = 1.5;
    rho(1, 1) = -0.5;
    EXPECT_THROW(propagate(spec, rho, cfg, pauli_x()), ArgumentError);
    EXPECT_THROW(propagate(spec, Matrix::Identity(3, 3) / 3.0, cfg, pauli_x()), ArgumentError);
}

TEST(Propagate, ConfigValidation) {
    const auto spec = small_spec(2, 0.0);
    for (auto bad : {config(0.0, 1.0, 0.0, 2), config(0.1, -1.0, 0.0, 2), config(0.1, 1.0, -1.0, 2),
                     config(0.1, 1.0, 0.0, 300)})
        EXPECT_THROW(propagate(spec, up_state(), bad, pauli_x()), ArgumentError);
}

TEST(Propagate, CoarseStepWarns) {
    const auto spec = small_spec(1, 0.0);
    const auto res = propagate(spec, up_state(), config(0.2, 0.4, 0.0, 1), pauli_x());
    EXPECT_FALSE(res.stats.warnings.empty());
    const auto fine = propagate(spec, up_state(), config(0.001, 0.002, 0.0, 1), pauli_x());
    EXPECT_TRUE(fine.stats.warnings.empty());
}

TEST(Propagate, DivergenceIsReported) {
    const auto spec = small_spec(3, 0.0);
    try {
        propagate(spec, up_state(), config(5.0, 500.0, 0.0, 3), Matrix(10.0 * pauli_x()));
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_NE(std::string(e.what()).find("step"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("active"), std::string::npos);
    }
}

TEST(Propagate, BudgetIsEnforced) {
    const auto spec = small_spec(6, 0.0);
    auto cfg = config(0.01, 1.0, 0.0, 6);
    cfg.ado_budget = 10;
    EXPECT_THROW(propagate(spec, up_state(), cfg, pauli_x()), ResourceError);
}

TEST(Propagate, TighterFilterConverges) {
    const auto ex = expand(DrudeBath(0.25, 5.0, 50.0), compute_psd(4));
    const auto run = [&](double tol) {
        auto cfg = config(0.001, 2.0, tol, 40);
        cfg.record_stride = 100;
        return propagate(test::single_bath(ex, pauli_z(), 40, tol), up_state(), cfg, Matrix(pauli_z() + pauli_x()));
    };
    const auto coarse = run(5e-7);
    const auto fine = run(5e-9);
    double worst = 0.0;
    for (std::size_t i = 0; i < fine.rho.size(); ++i) worst = std::max(worst, max_abs_diff(coarse.rho[i], fine.rho[i]));
    EXPECT_LT(worst, 1e-5);
    EXPECT_GT(fine.stats.peak_active, coarse.stats.peak_active);
}

TEST(FilterStep, Extremes) {
    const auto spec = small_spec(3, 0.0);
    AdoStore store(2, spec.mode_count(), 3);
    std::mt19937 rng(1);
    for (const auto& idx : enumerate_indices(spec)) store.set(idx, 1e-3 * test::random_matrix(2, rng));
    const AdoStore same = filter_step(store, 0.0);
    EXPECT_EQ(same.size(), store.size());
    const AdoStore only_root = filter_step(store, std::numeric_limits<double>::infinity());
    EXPECT_EQ(only_root.size(), 1u);
    EXPECT_EQ(only_root.rho(), store.rho());
    EXPECT_THROW(filter_step(store, -1.0), ArgumentError);
}

TEST(FilterStep, DropsByMaxElement) {
    AdoStore store(2, 2, 2);
    Matrix small = Matrix::Zero(2, 2);
    small(1, 0) = 0.9e-6;
    Matrix big = Matrix::Zero(2, 2);
    big(0, 1) = Complex(0.0, 1.1e-6);
    store.set(AdoIndex{1, 0}, small);
    store.set(AdoIndex{0, 1}, big);
    const AdoStore out = filter_step(store, 1e-6);
    EXPECT_FALSE(out.contains(AdoIndex{1, 0}));
    EXPECT_TRUE(out.contains(AdoIndex{0, 1}));
}

TEST(Activation, ZeroToleranceFillsHierarchy) {
    const auto spec = small_spec(4, 0.0);
    AdoStore store(2, spec.mode_count(), 4);
    store.set_rho(up_state());
    const auto created = activate_neighbors(store, spec, 0.0, 0.01);
    EXPECT_EQ(created, hierarchy_size(3, 4) - 1);
    EXPECT_EQ(store.size(), hierarchy_size(3, 4));
}

TEST(Activation, ThresholdControlsCreation) {
    const auto ex = expand(DrudeBath(0.25, 5.0, 50.0), compute_psd(1));
    const auto spec = test::single_bath(ex, pauli_z(), 10);
    AdoStore store(2, spec.mode_count(), 10);
    store.set_rho(plus_state());  // [sz, rho] != 0
    EXPECT_EQ(activate_neighbors(store, spec, 1.0, 1e-3), 0u);
    EXPECT_GT(activate_neighbors(store, spec, 1e-6, 1e-3), 0u);
    for (std::size_t s = 1; s < store.size(); ++s) EXPECT_EQ(store.index(s).tier(), 1);

    // [sz, rho] = 0, but the complex Drude coefficient still feeds its raised neighbour
    AdoStore diag(2, spec.mode_count(), 10);
    diag.set_rho(up_state());
    EXPECT_EQ(activate_neighbors(diag, spec, 1e-6, 1e-3), 1u);
    EXPECT_EQ(diag.index(1)[0], 1);
}

TEST(SteadyState, Probe) {
    PropagationResult r;
    r.observable_names = {"a", "b"};
    r.times = {0, 1, 2, 3, 4};
    r.traces = {{5, 5, 5, 5, 5}, {0, 1, 0.5, 0.25, 0.75}};
    auto rep = steady_state_probe(r, 2.0);
    EXPECT_DOUBLE_EQ(rep.variation[0], 0.0);
    EXPECT_DOUBLE_EQ(rep.variation[1], 0.5);
    EXPECT_DOUBLE_EQ(rep.max_variation, 0.5);
    EXPECT_TRUE(rep.converged(0.6));
    EXPECT_FALSE(rep.converged(0.4));
    EXPECT_THROW(steady_state_probe(r, 4.0), ArgumentError);
    EXPECT_THROW(steady_state_probe(r, -1.0), ArgumentError);
}

TEST(SteadyState, PrecessionNeverSettles) {
    auto spec = test::single_bath(expand(DrudeBath(1, 1, 1), compute_psd(0)), Matrix::Zero(2, 2), 1);
    auto cfg = config(0.01, 20.0, 0.0, 1);
    cfg.observables = {{"sx", pauli_x()}};
    const auto res = propagate(spec, plus_state(), cfg, pauli_z());
    EXPECT_NEAR(steady_state_probe(res, 5.0).max_variation, 2.0, 1e-3);
}

TEST(SteadyState, DampedSpinBosonSettles) {
    // high temperature, strong damping: Accurate at N = 1
    const auto ex = expand(DrudeBath(0.5, 5.0, 0.2), compute_psd(1));
    auto cfg = config(0.005, 50.0, 1e-9, 40);
    cfg.record_stride = 20;
    cfg.observables = {{"sz", pauli_z()}, {"sx", pauli_x()}};
    const auto res = propagate(test::single_bath(ex, pauli_z(), 40, 1e-9), up_state(), cfg, Matrix(pauli_z() + pauli_x()));
    EXPECT_LT(steady_state_probe(res, 10.0).max_variation, 1e-6);
}

TEST(WorkerPool, EnvironmentOverride) {
    ::setenv("HEOM_THREADS", "3", 1);
    EXPECT_EQ(WorkerPool::default_threads(), 3u);
    ::unsetenv("HEOM_THREADS");
    EXPECT_GE(WorkerPool::default_threads(), 1u);
}

TEST(WorkerPool, RunsEveryTask) {
    WorkerPool pool(4);
    std::vector<int> hits(1000, 0);
    pool.run(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    pool.run(hits.size(), [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 2);
}

}  // namespace
}  // namespace heom
