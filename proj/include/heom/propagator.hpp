// propagator.hpp: fixed-step RK4 propagation of the hierarchy with on-the-fly filtering

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "heom/hierarchy.hpp"

namespace heom {

using HamiltonianProvider = std::function<Matrix(double)>;

struct NamedObservable {
    std::string name;
    Matrix op;  // hermitian, d x d
};

inline constexpr int kDefaultMaxTier = 40;
inline constexpr double kDefaultActivationFactor = 0.1;

struct PropagationConfig {
    double dt{0.0};
    double t_final{0.0};
    double filter_tol{0.0};
    int max_tier{kDefaultMaxTier};
    int record_stride{1};
    std::vector<NamedObservable> observables;

    // Every index with tier <= max_tier is kept active; filtering is off.
    bool static_hierarchy{false};
    std::size_t ado_budget{4'000'000};
    std::size_t enumeration_budget{kDefaultEnumerationBudget};
    // A missing neighbour is created when dt * |drive| >= activation_factor * filter_tol.
    double activation_factor{kDefaultActivationFactor};
    // 0 selects WorkerPool::default_threads().
    unsigned workers{0};

    void validate() const;
};

struct PropagationStats {
    std::vector<std::size_t> active_counts;  // one per recorded step
    std::size_t peak_active{0};
    int peak_tier{0};
    std::size_t peak_memory_bytes{0};
    std::uint64_t steps{0};
    std::uint64_t created{0};
    std::uint64_t dropped{0};
    double wall_seconds{0.0};
    unsigned workers{1};
    std::vector<std::string> warnings;
};

struct PropagationResult {
    std::vector<double> times;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> traces;  // traces[o][i] = tr(O_o rho_0(t_i))
    std::vector<Matrix> rho;                  // rho_0 at each recorded time
    PropagationStats stats;
};

// Factorized start: rho_0(0) = initial, every other ADO zero. Throws
// ArgumentError for an invalid initial state or config, DivergenceError when
// the trace drifts by more than 1e-6 or values become non-finite, and
// ResourceError when the active set exceeds config.ado_budget.
PropagationResult propagate(const HierarchySpec& spec, const Matrix& initial, const PropagationConfig& config,
                            const HamiltonianProvider& hamiltonian);

PropagationResult propagate(const HierarchySpec& spec, const Matrix& initial, const PropagationConfig& config,
                            const Matrix& hamiltonian);

// Drops every non-zero-index ADO whose largest |element| is below tol.
AdoStore filter_step(const AdoStore& store, double tol);

// Creates absent neighbours n_k^+ (and n_k^-) of stored ADOs whose one-step
// drive estimate dt * |coupling term| reaches activation_factor * tol.
// Repeats on freshly created entries, so tol = 0 fills the hierarchy up to
// max_tier. Returns the number of ADOs created.
std::size_t activate_neighbors(AdoStore& store, const HierarchySpec& spec, double tol, double dt,
                               double activation_factor = kDefaultActivationFactor);

struct ConvergenceReport {
    std::vector<std::string> names;
    std::vector<double> variation;  // max - min over the trailing window
    double max_variation{0.0};

    bool converged(double threshold) const noexcept { return max_variation < threshold; }
};

ConvergenceReport steady_state_probe(const PropagationResult& result, double window);

}  // namespace heom
