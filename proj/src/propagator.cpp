// propagator.cpp: RK4 time stepping over a filtered ADO store

#include "heom/propagator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <string>

#include <Eigen/Eigenvalues>

#include "heom/errors.hpp"
#include "heom/worker_pool.hpp"

namespace heom {

namespace {

constexpr double kTraceDriftLimit = 1e-6;
constexpr double kInitialStateTol = 1e-10;

// Largest |element|, without a hypot per entry.
template <typename M>
double peak(const M& m) {
    return std::sqrt(m.cwiseAbs2().maxCoeff());
}

double max_abs(std::span<const Complex> block) {
    double m = 0.0;
    for (const Complex& z : block) m = std::max(m, std::norm(z));
    m = std::sqrt(m);
    return m;
}

void check_initial_state(const Matrix& rho, int dim) {
    if (rho.rows() != dim || rho.cols() != dim)
        throw ArgumentError("propagate: initial state must be " + std::to_string(dim) + "x" + std::to_string(dim));
    if (std::abs(rho.trace() - Complex(1.0, 0.0)) > kInitialStateTol)
        throw ArgumentError("propagate: initial state must have unit trace");
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > kInitialStateTol)
        throw ArgumentError("propagate: initial state must be hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kInitialStateTol)
        throw ArgumentError("propagate: initial state must be positive semidefinite");
}

double operator_norm(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::size_t memory_estimate(const AdoStore& store, std::size_t buffers) {
    const std::size_t n = store.size();
    const std::size_t k = store.mode_count();
    const std::size_t per_slot = store.block_size() * sizeof(Complex) * (1 + buffers)  // values + RK stages
                                 + k * (2 * sizeof(std::int32_t) + 2)                    // adjacency, occupations
                                 + 64;                                                   // lookup node
    return n * per_slot;
}

}  // namespace

void PropagationConfig::validate() const {
    if (!(dt > 0) || !std::isfinite(dt)) throw ArgumentError("propagation dt must be > 0");
    if (!(t_final >= 0) || !std::isfinite(t_final)) throw ArgumentError("propagation t_final must be >= 0");
    if (!(filter_tol >= 0)) throw ArgumentError("filter_tol must be >= 0");
    if (max_tier < 0 || max_tier > AdoIndex::kMaxOccupation) throw ArgumentError("max_tier must lie in [0, 255]");
    if (record_stride < 1) throw ArgumentError("record_stride must be >= 1");
    if (!(activation_factor >= 0)) throw ArgumentError("activation_factor must be >= 0");
}

AdoStore filter_step(const AdoStore& store, double tol) {
    if (!(tol >= 0)) throw ArgumentError("filter_step: tol must be >= 0");
    AdoStore out = store;
    const std::size_t bs = out.block_size();
    const auto data = out.data();
    out.retain([&](std::size_t s) { return max_abs(data.subspan(s * bs, bs)) >= tol; });
    return out;
}

namespace {

// Single-step coupling estimates between neighbouring ADOs.
class NeighbourDrive {
public:
    // Q_b rho and rho Q_b for every bath; reused between calls.
    struct Products {
        std::vector<Matrix> q_rho;
        std::vector<Matrix> rho_q;
    };

    NeighbourDrive(const HierarchySpec& spec, const AdoStore& store, double threshold, double dt)
        : modes_(flatten_modes(spec)), threshold_(threshold), dt_(dt) {
        if (store.mode_count() != modes_.size()) throw StructuralError("activate_neighbors: store/hierarchy mismatch");
        const int d = store.dimension();
        for (const auto& b : spec.baths) q_.push_back(b.coupling);
        // |(a Q rho + b rho Q)_ij| <= 2 d max|Q| max|rho| for |a|, |b| <= 1
        bound_.resize(modes_.size());
        weight_.resize(modes_.size());
        phase_.resize(modes_.size());
        for (std::size_t k = 0; k < modes_.size(); ++k) {
            const double abs_c = std::abs(modes_[k].coefficient);
            bound_[k] = std::sqrt(abs_c) * 2.0 * d * q_[modes_[k].bath].cwiseAbs().maxCoeff();
            weight_[k] = dt_ * std::sqrt(abs_c);
            phase_[k] = abs_c > 0 ? modes_[k].coefficient / abs_c : Complex(0.0, 0.0);
        }
    }

    std::size_t modes() const noexcept { return modes_.size(); }
    double threshold() const noexcept { return threshold_; }

    Products scratch(int d) const {
        return {std::vector<Matrix>(q_.size(), Matrix(d, d)), std::vector<Matrix>(q_.size(), Matrix(d, d))};
    }

    void multiply(const Eigen::Ref<const Matrix>& rho, Products& p) const {
        for (std::size_t b = 0; b < q_.size(); ++b) {
            p.q_rho[b].noalias() = q_[b] * rho;
            p.rho_q[b].noalias() = rho * q_[b];
        }
    }

    // False when the drive along mode k from an ADO of this size provably stays below threshold.
    bool may_reach(std::size_t k, double scale, int n) const {
        if (modes_[k].coefficient == Complex(0.0, 0.0)) return false;
        return !(threshold_ > 0 && dt_ * scale * std::sqrt(n + 1.0) * bound_[k] < threshold_);
    }

    // Drive from an ADO (occupation n_k) into its raised neighbour along k.
    double upward(std::size_t k, int n, const Products& p) const {
        const std::size_t b = modes_[k].bath;
        const Complex ph = phase_[k];
        return weight_[k] * std::sqrt(n + 1.0) * peak(ph * p.q_rho[b] - std::conj(ph) * p.rho_q[b]);
    }

    // Drive from an ADO (occupation n_k >= 1) into its lowered neighbour along k.
    double downward(std::size_t k, int n, const Products& p) const {
        const std::size_t b = modes_[k].bath;
        return weight_[k] * std::sqrt(static_cast<double>(n)) * peak(p.q_rho[b] - p.rho_q[b]);
    }

    // True when some present neighbour drives slot s at or above threshold.
    bool driven(const AdoStore& store, std::size_t s, Products& p) const {
        const AdoIndex& idx = store.index(s);
        for (std::size_t k = 0; k < modes_.size(); ++k) {
            if (idx[k] > 0) {
                const auto lo = store.down(s, k);
                if (lo != AdoStore::kAbsent) {
                    const auto rho = store.at(static_cast<std::size_t>(lo));
                    if (may_reach(k, peak(rho), idx[k])) {
                        multiply(rho, p);
                        if (upward(k, idx[k] - 1, p) >= threshold_) return true;
                    }
                }
            }
            const auto hi = store.up(s, k);
            if (hi != AdoStore::kAbsent) {
                const auto rho = store.at(static_cast<std::size_t>(hi));
                if (may_reach(k, peak(rho), idx[k] + 1)) {
                    multiply(rho, p);
                    if (downward(k, idx[k] + 1, p) >= threshold_) return true;
                }
            }
        }
        return false;
    }

private:
    std::vector<HierarchyMode> modes_;
    std::vector<Matrix> q_;
    std::vector<double> bound_;
    std::vector<double> weight_;
    std::vector<Complex> phase_;
    double threshold_;
    double dt_;
};

}  // namespace

std::size_t activate_neighbors(AdoStore& store, const HierarchySpec& spec, double tol, double dt,
                               double activation_factor) {
    const NeighbourDrive drive(spec, store, activation_factor * tol, dt);
    const double threshold = drive.threshold();
    const int d = store.dimension();

    std::size_t created = 0;
    Matrix rho(d, d);
    auto products = drive.scratch(d);
    // store.size() grows inside the loop, so new entries are themselves visited
    for (std::size_t s = 0; s < store.size(); ++s) {
        rho = store.at(s);
        const AdoIndex idx = store.index(s);
        const double scale = peak(rho);
        bool multiplied = false;

        for (std::size_t k = 0; k < drive.modes(); ++k) {
            if (!drive.may_reach(k, scale, idx.tier())) continue;
            if (!multiplied && threshold > 0) {
                drive.multiply(rho, products);
                multiplied = true;
            }
            if (idx.tier() < store.max_tier() && idx[k] < AdoIndex::kMaxOccupation &&
                store.up(s, k) == AdoStore::kAbsent) {
                if (threshold == 0 || drive.upward(k, idx[k], products) >= threshold) {
                    store.insert(idx.raised(k));
                    ++created;
                }
            }
            if (idx[k] > 0 && store.down(s, k) == AdoStore::kAbsent) {
                if (threshold == 0 || drive.downward(k, idx[k], products) >= threshold) {
                    store.insert(idx.lowered(k));
                    ++created;
                }
            }
        }
    }
    return created;
}

PropagationResult propagate(const HierarchySpec& spec, const Matrix& initial, const PropagationConfig& config,
                            const HamiltonianProvider& hamiltonian) {
    spec.validate();
    config.validate();
    const int dim = spec.dimension();
    check_initial_state(initial, dim);
    for (const auto& o : config.observables) {
        if (o.op.rows() != dim || o.op.cols() != dim)
            throw ArgumentError("observable '" + o.name + "' has the wrong shape");
    }

    const auto wall_start = std::chrono::steady_clock::now();
    PropagationResult result;
    for (const auto& o : config.observables) result.observable_names.push_back(o.name);
    result.traces.resize(config.observables.size());

    const auto modes = flatten_modes(spec);
    const std::size_t nmodes = modes.size();
    const bool filtering = !config.static_hierarchy;

    AdoStore store(dim, nmodes, config.max_tier);
    if (!filtering) {
        for (const auto& idx : enumerate_indices(HierarchySpec{spec.baths, config.max_tier, 0.0},
                                                 config.enumeration_budget))
            store.insert(idx);
    }
    store.set_rho(initial);

    {
        double fastest = operator_norm(hamiltonian(0.0));
        for (const auto& m : modes) fastest = std::max(fastest, m.rate);
        if (config.dt * fastest >= 0.1) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "dt * max(|H|, gamma_max) = %.3g exceeds the recommended 0.1",
                          config.dt * fastest);
            result.stats.warnings.emplace_back(buf);
        }
    }

    const unsigned threads = config.workers == 0 ? WorkerPool::default_threads() : config.workers;
    std::unique_ptr<WorkerPool> pool;
    if (threads > 1) pool = std::make_unique<WorkerPool>(threads);
    result.stats.workers = threads;

    HierarchyOperator op(spec);
    bool layout_dirty = true;
    std::vector<Complex> k1, k2, k3, k4, tmp;

    const auto record = [&](double t) {
        const Matrix rho = store.rho();
        result.times.push_back(t);
        result.rho.push_back(rho);
        for (std::size_t o = 0; o < config.observables.size(); ++o)
            result.traces[o].push_back((config.observables[o].op * rho).trace().real());
        result.stats.active_counts.push_back(store.size());
    };
    const auto note_peaks = [&] {
        result.stats.peak_active = std::max(result.stats.peak_active, store.size());
        result.stats.peak_tier = std::max(result.stats.peak_tier, store.highest_tier());
        result.stats.peak_memory_bytes = std::max(result.stats.peak_memory_bytes, memory_estimate(store, 5));
    };

    note_peaks();
    record(0.0);

    const std::uint64_t nsteps =
        config.t_final > 0 ? static_cast<std::uint64_t>(std::ceil(config.t_final / config.dt - 1e-9)) : 0;
    double t = 0.0;
    for (std::uint64_t step = 1; step <= nsteps; ++step) {
        const double h = (step == nsteps) ? config.t_final - t : config.dt;

        if (filtering) {
            const std::size_t created = activate_neighbors(store, spec, config.filter_tol, h, config.activation_factor);
            result.stats.created += created;
            if (created > 0) layout_dirty = true;
            if (store.size() > config.ado_budget)
                throw ResourceError("active ADO count " + std::to_string(store.size()) + " exceeds the budget " +
                                    std::to_string(config.ado_budget) + " at step " + std::to_string(step));
        }
        if (layout_dirty) {
            op.bind(store);
            layout_dirty = false;
            note_peaks();
        }

        // classic RK4 on the fixed active set
        const std::size_t n = store.data().size();
        k1.resize(n);
        k2.resize(n);
        k3.resize(n);
        k4.resize(n);
        tmp.resize(n);
        const auto y = store.data();
        const Matrix h0 = hamiltonian(t);
        const Matrix hm = hamiltonian(t + 0.5 * h);
        const Matrix h1 = hamiltonian(t + h);

        op.apply(y, k1, h0, pool.get());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
        op.apply(tmp, k2, hm, pool.get());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
        op.apply(tmp, k3, hm, pool.get());
        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
        op.apply(tmp, k4, h1, pool.get());
        const double w = h / 6.0;
        for (std::size_t i = 0; i < n; ++i) y[i] += w * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        t = (step == nsteps) ? config.t_final : static_cast<double>(step) * config.dt;

        if (filtering && config.filter_tol > 0) {
            const std::size_t bs = store.block_size();
            const std::size_t before = store.size();
            bool finite = true;
            const NeighbourDrive drive(spec, store, config.activation_factor * config.filter_tol, h);
            // an ADO that would be recreated next step keeps its value instead
            std::vector<char> keep(before);
            auto products = drive.scratch(dim);
            for (std::size_t s = 0; s < before; ++s) {
                const double m = max_abs(y.subspan(s * bs, bs));
                if (!std::isfinite(m)) finite = false;
                keep[s] = m >= config.filter_tol || drive.driven(store, s, products);
            }
            store.retain([&](std::size_t s) { return keep[s] != 0; });
            if (!finite)
                throw DivergenceError("non-finite ADO values at step " + std::to_string(step) + " (t=" +
                                      std::to_string(t) + ", active=" + std::to_string(before) + ")");
            if (store.size() != before) {
                result.stats.dropped += before - store.size();
                layout_dirty = true;
            }
        }

        const Matrix rho = store.rho();
        const double drift = std::abs(rho.trace() - Complex(1.0, 0.0));
        if (!rho.allFinite() || !(drift <= kTraceDriftLimit))
            throw DivergenceError("trace drift " + std::to_string(drift) + " at step " + std::to_string(step) +
                                  " (t=" + std::to_string(t) + ", active=" + std::to_string(store.size()) + ")");

        result.stats.steps = step;
        if (step % static_cast<std::uint64_t>(config.record_stride) == 0 || step == nsteps) record(t);
    }
    note_peaks();

    result.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return result;
}

PropagationResult propagate(const HierarchySpec& spec, const Matrix& initial, const PropagationConfig& config,
                            const Matrix& hamiltonian) {
    return propagate(spec, initial, config, [hamiltonian](double) { return hamiltonian; });
}

ConvergenceReport steady_state_probe(const PropagationResult& result, double window) {
    if (!(window >= 0)) throw ArgumentError("steady_state_probe: window must be >= 0");
    if (!result.times.empty() && window >= result.times.back() - result.times.front())
        throw ArgumentError("steady_state_probe: window must be shorter than the trajectory");
    ConvergenceReport rep;
    rep.names = result.observable_names;
    const double t_end = result.times.empty() ? 0.0 : result.times.back();
    for (const auto& trace : result.traces) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < trace.size(); ++i) {
            if (result.times[i] < t_end - window) continue;
            lo = std::min(lo, trace[i]);
            hi = std::max(hi, trace[i]);
        }
        const double v = trace.empty() ? 0.0 : hi - lo;
        rep.variation.push_back(v);
        rep.max_variation = std::max(rep.max_variation, v);
    }
    return rep;
}

}  // namespace heom
