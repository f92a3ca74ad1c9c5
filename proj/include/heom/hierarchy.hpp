// hierarchy.hpp: auxiliary density operator bookkeeping and the HEOM right-hand side
//
// For every active multi-index n the scaled ADOs obey
//
//   d/dt rho_n = -(i L + gamma_n + dR) rho_n
//                - i sum_k sqrt((n_k + 1)|c_k|) [Q, rho_{n_k^+}]
//                - i sum_k sqrt(n_k / |c_k|) (c_k Q rho_{n_k^-} - c_k^* rho_{n_k^-} Q)
//
// with dR rho = Delta_N [Q, [Q, rho]]. Several independent baths are handled by
// concatenating their mode blocks in the multi-index.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "heom/bath.hpp"

namespace heom {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMajorMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMajorMatrix>;

// Per-mode occupation vector. Equality and hashing use the full content.
class AdoIndex {
public:
    static constexpr int kMaxOccupation = 255;
    static constexpr std::size_t kMaxModes = 64;

    AdoIndex() = default;
    explicit AdoIndex(std::size_t mode_count);
    AdoIndex(std::initializer_list<int> occupations);
    explicit AdoIndex(std::span<const int> occupations);

    std::size_t size() const noexcept { return size_; }
    int tier() const noexcept { return tier_; }
    int operator[](std::size_t k) const noexcept { return occ_[k]; }
    std::span<const std::uint8_t> occupations() const noexcept { return {occ_.data(), size_}; }

    AdoIndex raised(std::size_t k) const;
    AdoIndex lowered(std::size_t k) const;  // StructuralError if n_k == 0

    std::size_t hash() const noexcept;
    bool operator==(const AdoIndex& other) const noexcept {
        return size_ == other.size_ && occ_ == other.occ_;
    }

private:
    std::array<std::uint8_t, kMaxModes> occ_{};
    std::uint32_t size_{0};
    int tier_{0};
};

struct AdoIndexHash {
    std::size_t operator()(const AdoIndex& idx) const noexcept { return idx.hash(); }
};

// Sparse map AdoIndex -> d x d scaled ADO. Entries live in one contiguous
// buffer (row-major, d*d per slot); the zero index always occupies slot 0.
// The store also keeps the slots of each entry's n_k^+ / n_k^- neighbours
// current across insert() and retain(), so no lookups are needed to walk it.
class AdoStore {
public:
    AdoStore(int dimension, std::size_t mode_count, int max_tier);

    int dimension() const noexcept { return dim_; }
    std::size_t mode_count() const noexcept { return modes_; }
    int max_tier() const noexcept { return max_tier_; }
    std::size_t size() const noexcept { return indices_.size(); }
    std::size_t block_size() const noexcept { return static_cast<std::size_t>(dim_) * dim_; }

    std::optional<std::size_t> find(const AdoIndex& index) const;
    bool contains(const AdoIndex& index) const { return find(index).has_value(); }

    // Adds a zero entry if absent; returns its slot. StructuralError on a
    // shape mismatch, CapabilityError if the tier exceeds max_tier.
    std::size_t insert(const AdoIndex& index);

    const AdoIndex& index(std::size_t slot) const { return indices_[slot]; }
    const std::vector<AdoIndex>& indices() const noexcept { return indices_; }

    MatrixMap at(std::size_t slot);
    ConstMatrixMap at(std::size_t slot) const;

    // Zero matrix for absent indices.
    Matrix get(const AdoIndex& index) const;
    void set(const AdoIndex& index, const Matrix& value);

    Matrix rho() const { return Matrix(at(0)); }
    void set_rho(const Matrix& value);

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    // Keeps slot s when keep(s) is true; slot 0 is always kept. Order is preserved.
    void retain(const std::function<bool(std::size_t)>& keep);

    int highest_tier() const noexcept;

    static constexpr std::int32_t kAbsent = -1;
    // Slot of n_k^+ / n_k^- for the entry in `slot`, or kAbsent.
    std::int32_t up(std::size_t slot, std::size_t k) const noexcept { return up_[slot * modes_ + k]; }
    std::int32_t down(std::size_t slot, std::size_t k) const noexcept { return down_[slot * modes_ + k]; }

private:
    int dim_;
    std::size_t modes_;
    int max_tier_;
    std::vector<AdoIndex> indices_;
    std::vector<Complex> data_;
    std::unordered_map<AdoIndex, std::size_t, AdoIndexHash> lookup_;
    std::vector<std::int32_t> up_;
    std::vector<std::int32_t> down_;
};

struct BathCoupling {
    BathExpansion expansion;
    Matrix coupling;  // Q_b, hermitian
};

struct HierarchySpec {
    std::vector<BathCoupling> baths;
    int max_tier{1};
    double filter_tol{0.0};

    int dimension() const;
    std::size_t mode_count() const;
    // Hermitian couplings of equal shape, 0 <= max_tier <= 255, filter_tol >= 0.
    void validate() const;
};

// Flattened view of one exponential mode of one bath.
struct HierarchyMode {
    Complex coefficient;
    double rate;
    std::size_t bath;
};

std::vector<HierarchyMode> flatten_modes(const HierarchySpec& spec);

// gamma_n = sum n_k gamma_k
Complex damping(const AdoIndex& index, const HierarchySpec& spec);

// sum_b Delta_b [Q_b, [Q_b, rho]]
Matrix wnr_apply(const Matrix& rho, const HierarchySpec& spec);

// Derivative of every stored ADO; neighbours missing from the store count as zero.
AdoStore heom_rhs(const AdoStore& store, const HierarchySpec& spec, const Matrix& hamiltonian);

inline constexpr std::size_t kDefaultEnumerationBudget = 10'000'000;

// All indices with tier <= max_tier in graded order, highest first occupation
// first within a tier. CapabilityError if binomial(L+K, K) exceeds budget.
std::vector<AdoIndex> enumerate_indices(const HierarchySpec& spec,
                                        std::size_t budget = kDefaultEnumerationBudget);

// binomial(L + K, K), saturating at SIZE_MAX.
std::size_t hierarchy_size(std::size_t mode_count, int max_tier);

class WorkerPool;

// Evaluates the right-hand side on flat buffers laid out like an AdoStore.
// bind() captures the neighbour structure of a store; apply() may then be
// called any number of times on data with that layout.
class HierarchyOperator {
public:
    explicit HierarchyOperator(const HierarchySpec& spec);

    void bind(const AdoStore& store);
    std::size_t bound_size() const noexcept { return slots_; }

    void apply(std::span<const Complex> in, std::span<Complex> out, const Matrix& hamiltonian,
               WorkerPool* pool = nullptr) const;

    const std::vector<HierarchyMode>& modes() const noexcept { return modes_; }

private:
    template <int D>
    void apply_range(std::size_t begin, std::size_t end, const Complex* in, Complex* out, const Matrix& geff) const;

    int dim_;
    std::size_t nbath_;
    std::vector<HierarchyMode> modes_;
    std::vector<double> sqrt_abs_c_;
    std::vector<Complex> phase_;       // c_k / |c_k|
    std::vector<Matrix> q_;            // per bath
    std::vector<double> delta_;        // per bath
    Matrix q2_sum_;                    // sum_b Delta_b Q_b^2

    std::size_t slots_{0};
    std::vector<std::int32_t> up_;     // slot of n_k^+ or -1, slots_ x K
    std::vector<std::int32_t> down_;   // slot of n_k^- or -1
    std::vector<std::uint8_t> occ_;    // n_k, slots_ x K
    std::vector<double> gamma_n_;
};

}  // namespace heom
