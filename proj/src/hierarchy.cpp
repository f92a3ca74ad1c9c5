// hierarchy.cpp: ADO store, multi-index enumeration and the HEOM right-hand side

#include "heom/hierarchy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "heom/errors.hpp"
#include "heom/worker_pool.hpp"

namespace heom {

namespace {

const std::array<double, AdoIndex::kMaxOccupation + 2>& sqrt_table() {
    static const auto table = [] {
        std::array<double, AdoIndex::kMaxOccupation + 2> t{};
        for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::sqrt(static_cast<double>(i));
        return t;
    }();
    return table;
}

double max_abs_deviation_from_hermitian(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

// ---------------------------------------------------------------------------
// AdoIndex

AdoIndex::AdoIndex(std::size_t mode_count) {
    if (mode_count > kMaxModes)
        throw CapabilityError("AdoIndex: " + std::to_string(mode_count) + " modes exceed the supported " +
                              std::to_string(kMaxModes));
    size_ = static_cast<std::uint32_t>(mode_count);
}

AdoIndex::AdoIndex(std::initializer_list<int> occupations)
    : AdoIndex(std::span<const int>(occupations.begin(), occupations.size())) {}

AdoIndex::AdoIndex(std::span<const int> occupations) : AdoIndex(occupations.size()) {
    for (std::size_t k = 0; k < occupations.size(); ++k) {
        const int n = occupations[k];
        if (n < 0 || n > kMaxOccupation)
            throw ArgumentError("ADO occupation out of range [0, 255]: " + std::to_string(n));
        occ_[k] = static_cast<std::uint8_t>(n);
        tier_ += n;
    }
}

AdoIndex AdoIndex::raised(std::size_t k) const {
    if (k >= size_) throw StructuralError("AdoIndex::raised: mode out of range");
    if (occ_[k] == kMaxOccupation) throw CapabilityError("AdoIndex::raised: occupation limit 255 reached");
    AdoIndex out = *this;
    ++out.occ_[k];
    ++out.tier_;
    return out;
}

AdoIndex AdoIndex::lowered(std::size_t k) const {
    if (k >= size_) throw StructuralError("AdoIndex::lowered: mode out of range");
    if (occ_[k] == 0) throw StructuralError("AdoIndex::lowered: occupation already zero");
    AdoIndex out = *this;
    --out.occ_[k];
    --out.tier_;
    return out;
}

std::size_t AdoIndex::hash() const noexcept {
    // FNV-1a over the occupations
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t k = 0; k < size_; ++k) {
        h ^= occ_[k];
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
}

// ---------------------------------------------------------------------------
// AdoStore

AdoStore::AdoStore(int dimension, std::size_t mode_count, int max_tier)
    : dim_(dimension), modes_(mode_count), max_tier_(max_tier) {
    if (dimension < 1) throw ArgumentError("AdoStore: dimension must be >= 1");
    if (max_tier < 0 || max_tier > AdoIndex::kMaxOccupation)
        throw ArgumentError("AdoStore: max_tier must lie in [0, 255]");
    insert(AdoIndex(mode_count));
}

std::optional<std::size_t> AdoStore::find(const AdoIndex& index) const {
    auto it = lookup_.find(index);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::size_t AdoStore::insert(const AdoIndex& index) {
    if (index.size() != modes_)
        throw StructuralError("AdoStore: index has " + std::to_string(index.size()) + " modes, store expects " +
                              std::to_string(modes_));
    if (index.tier() > max_tier_)
        throw CapabilityError("AdoStore: index tier " + std::to_string(index.tier()) + " exceeds max_tier " +
                              std::to_string(max_tier_));
    auto [it, inserted] = lookup_.try_emplace(index, indices_.size());
    if (!inserted) return it->second;

    const std::size_t slot = it->second;
    const auto self = static_cast<std::int32_t>(slot);
    indices_.push_back(index);
    data_.resize(data_.size() + block_size(), Complex(0.0, 0.0));
    up_.resize(up_.size() + modes_, kAbsent);
    down_.resize(down_.size() + modes_, kAbsent);
    for (std::size_t k = 0; k < modes_; ++k) {
        if (index[k] < AdoIndex::kMaxOccupation) {
            if (auto u = find(index.raised(k))) {
                up_[slot * modes_ + k] = static_cast<std::int32_t>(*u);
                down_[*u * modes_ + k] = self;
            }
        }
        if (index[k] > 0) {
            if (auto dn = find(index.lowered(k))) {
                down_[slot * modes_ + k] = static_cast<std::int32_t>(*dn);
                up_[*dn * modes_ + k] = self;
            }
        }
    }
    return slot;
}

MatrixMap AdoStore::at(std::size_t slot) { return MatrixMap(data_.data() + slot * block_size(), dim_, dim_); }

ConstMatrixMap AdoStore::at(std::size_t slot) const {
    return ConstMatrixMap(data_.data() + slot * block_size(), dim_, dim_);
}

Matrix AdoStore::get(const AdoIndex& index) const {
    if (auto slot = find(index)) return Matrix(at(*slot));
    return Matrix::Zero(dim_, dim_);
}

void AdoStore::set(const AdoIndex& index, const Matrix& value) {
    if (value.rows() != dim_ || value.cols() != dim_) throw StructuralError("AdoStore::set: matrix shape mismatch");
    at(insert(index)) = value;
}

void AdoStore::set_rho(const Matrix& value) { set(AdoIndex(modes_), value); }

void AdoStore::retain(const std::function<bool(std::size_t)>& keep) {
    const std::size_t bs = block_size();
    const std::size_t n = indices_.size();
    std::vector<std::int32_t> remap(n, kAbsent);
    std::size_t out = 0;
    for (std::size_t s = 0; s < n; ++s) {
        if (s != 0 && !keep(s)) {
            lookup_.erase(indices_[s]);
            continue;
        }
        remap[s] = static_cast<std::int32_t>(out);
        if (out != s) {
            std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(s * bs), bs,
                        data_.begin() + static_cast<std::ptrdiff_t>(out * bs));
            std::copy_n(up_.begin() + static_cast<std::ptrdiff_t>(s * modes_), modes_,
                        up_.begin() + static_cast<std::ptrdiff_t>(out * modes_));
            std::copy_n(down_.begin() + static_cast<std::ptrdiff_t>(s * modes_), modes_,
                        down_.begin() + static_cast<std::ptrdiff_t>(out * modes_));
            indices_[out] = indices_[s];
            lookup_[indices_[out]] = out;
        }
        ++out;
    }
    if (out == n) return;
    indices_.resize(out);
    data_.resize(out * bs);
    up_.resize(out * modes_);
    down_.resize(out * modes_);
    for (auto& v : up_) v = v == kAbsent ? kAbsent : remap[static_cast<std::size_t>(v)];
    for (auto& v : down_) v = v == kAbsent ? kAbsent : remap[static_cast<std::size_t>(v)];
}

int AdoStore::highest_tier() const noexcept {
    int t = 0;
    for (const auto& idx : indices_) t = std::max(t, idx.tier());
    return t;
}

// ---------------------------------------------------------------------------
// HierarchySpec

int HierarchySpec::dimension() const {
    if (baths.empty()) throw StructuralError("HierarchySpec: no baths");
    return static_cast<int>(baths.front().coupling.rows());
}

std::size_t HierarchySpec::mode_count() const {
    std::size_t k = 0;
    for (const auto& b : baths) k += 1 + b.expansion.modes.size();
    return k;
}

void HierarchySpec::validate() const {
    if (baths.empty()) throw StructuralError("HierarchySpec: at least one bath is required");
    const auto d = baths.front().coupling.rows();
    for (std::size_t b = 0; b < baths.size(); ++b) {
        const Matrix& q = baths[b].coupling;
        if (q.rows() != q.cols() || q.rows() != d || d < 1)
            throw StructuralError("HierarchySpec: coupling operator " + std::to_string(b) + " has a mismatched shape");
        if (max_abs_deviation_from_hermitian(q) > 1e-12)
            throw ArgumentError("HierarchySpec: coupling operator " + std::to_string(b) + " is not hermitian");
    }
    if (max_tier < 0 || max_tier > AdoIndex::kMaxOccupation)
        throw ArgumentError("HierarchySpec: max_tier must lie in [0, 255]");
    if (!(filter_tol >= 0)) throw ArgumentError("HierarchySpec: filter_tol must be >= 0");
}

std::vector<HierarchyMode> flatten_modes(const HierarchySpec& spec) {
    std::vector<HierarchyMode> out;
    for (std::size_t b = 0; b < spec.baths.size(); ++b) {
        for (const auto& m : spec.baths[b].expansion.all_modes()) out.push_back({m.coefficient, m.rate, b});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Free operations

Complex damping(const AdoIndex& index, const HierarchySpec& spec) {
    const auto modes = flatten_modes(spec);
    if (index.size() != modes.size())
        throw StructuralError("damping: index has " + std::to_string(index.size()) + " modes, hierarchy has " +
                              std::to_string(modes.size()));
    Complex g = 0.0;
    for (std::size_t k = 0; k < modes.size(); ++k) g += static_cast<double>(index[k]) * modes[k].rate;
    return g;
}

Matrix wnr_apply(const Matrix& rho, const HierarchySpec& spec) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& b : spec.baths) {
        if (b.coupling.rows() != rho.rows() || rho.rows() != rho.cols())
            throw StructuralError("wnr_apply: operator shape mismatch");
        const Matrix& q = b.coupling;
        const Matrix inner = q * rho - rho * q;
        out += b.expansion.wnr_strength * (q * inner - inner * q);
    }
    return out;
}

AdoStore heom_rhs(const AdoStore& store, const HierarchySpec& spec, const Matrix& hamiltonian) {
    HierarchyOperator op(spec);
    op.bind(store);
    AdoStore out = store;
    op.apply(store.data(), out.data(), hamiltonian);
    return out;
}

std::size_t hierarchy_size(std::size_t mode_count, int max_tier) {
    // binomial(L + K, min(L, K)), multiplicative form stays integral at each step
    const std::size_t l = static_cast<std::size_t>(std::max(max_tier, 0));
    const std::size_t r = std::min(l, mode_count);
    unsigned __int128 c = 1;
    for (std::size_t i = 1; i <= r; ++i) {
        c = c * (l + mode_count - r + i) / i;
        if (c > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
    }
    return static_cast<std::size_t>(c);
}

std::vector<AdoIndex> enumerate_indices(const HierarchySpec& spec, std::size_t budget) {
    const std::size_t k = spec.mode_count();
    const std::size_t count = hierarchy_size(k, spec.max_tier);
    if (count > budget)
        throw CapabilityError("enumerate_indices: " + std::to_string(count) + " indices exceed the budget of " +
                              std::to_string(budget) + "; use the filtered dynamic store instead");

    std::vector<AdoIndex> out;
    out.reserve(count);
    std::vector<int> occ(k, 0);
    // distribute `left` quanta over modes [pos, k), first mode taking the most first
    std::function<void(std::size_t, int)> fill = [&](std::size_t pos, int left) {
        if (pos + 1 >= k) {
            if (k > 0) occ[k - 1] = left;
            out.emplace_back(std::span<const int>(occ));
            return;
        }
        for (int n = left; n >= 0; --n) {
            occ[pos] = n;
            fill(pos + 1, left - n);
        }
        occ[pos] = 0;
    };
    for (int tier = 0; tier <= spec.max_tier; ++tier) {
        if (k == 0) {
            if (tier == 0) out.emplace_back(std::span<const int>(occ));
            continue;
        }
        fill(0, tier);
    }
    return out;
}

// ---------------------------------------------------------------------------
// HierarchyOperator

HierarchyOperator::HierarchyOperator(const HierarchySpec& spec) {
    spec.validate();
    dim_ = spec.dimension();
    nbath_ = spec.baths.size();
    modes_ = flatten_modes(spec);
    for (const auto& m : modes_) {
        const double a = std::abs(m.coefficient);
        sqrt_abs_c_.push_back(std::sqrt(a));
        phase_.push_back(a > 0 ? m.coefficient / a : Complex(0.0, 0.0));
    }
    q2_sum_ = Matrix::Zero(dim_, dim_);
    for (const auto& b : spec.baths) {
        q_.push_back(b.coupling);
        delta_.push_back(b.expansion.wnr_strength);
        q2_sum_ += b.expansion.wnr_strength * b.coupling * b.coupling;
    }
}

void HierarchyOperator::bind(const AdoStore& store) {
    const std::size_t k = modes_.size();
    if (store.dimension() != dim_ || store.mode_count() != k)
        throw StructuralError("HierarchyOperator::bind: store layout does not match the hierarchy (dimension " +
                              std::to_string(store.dimension()) + " vs " + std::to_string(dim_) + ", modes " +
                              std::to_string(store.mode_count()) + " vs " + std::to_string(k) + ")");
    slots_ = store.size();
    up_.resize(slots_ * k);
    down_.resize(slots_ * k);
    occ_.resize(slots_ * k);
    gamma_n_.resize(slots_);

    for (std::size_t s = 0; s < slots_; ++s) {
        const AdoIndex& idx = store.index(s);
        double g = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            const int n = idx[m];
            if (n > 0 && sqrt_abs_c_[m] == 0.0)
                throw DegeneracyError("heom_rhs: mode " + std::to_string(m) +
                                      " has a zero coefficient but is occupied; its scaling is undefined");
            occ_[s * k + m] = static_cast<std::uint8_t>(n);
            up_[s * k + m] = store.up(s, m);
            down_[s * k + m] = store.down(s, m);
            g += n * modes_[m].rate;
        }
        gamma_n_[s] = g;
    }
}

template <int D>
void HierarchyOperator::apply_range(std::size_t begin, std::size_t end, const Complex* in, Complex* out,
                                    const Matrix& geff_dyn) const {
    using Mat = Eigen::Matrix<Complex, D, D, Eigen::RowMajor>;
    using CMap = Eigen::Map<const Mat>;
    using Map = Eigen::Map<Mat>;

    const int d = dim_;
    const std::size_t bs = static_cast<std::size_t>(d) * d;
    const std::size_t k = modes_.size();
    const Complex minus_i(0.0, -1.0);
    const auto& sq = sqrt_table();

    const Mat geff = geff_dyn;
    const Mat geff_adj = geff.adjoint();
    // comm[b] collects everything entering as a commutator with Q_b: tier-up terms and
    // tier-down terms of real-coefficient modes. Complex modes also need left/right parts.
    std::vector<Mat> q(nbath_), comm(nbath_), left(nbath_), right(nbath_);
    std::vector<char> has_comm(nbath_), has_lr(nbath_);
    for (std::size_t b = 0; b < nbath_; ++b) q[b] = q_[b];

    for (std::size_t s = begin; s < end; ++s) {
        CMap rho(in + s * bs, d, d);
        Map acc(out + s * bs, d, d);

        // -i (Geff rho - rho Geff^dag) - gamma_n rho + 2 sum_b Delta_b Q_b rho Q_b,
        // Geff = H - i sum_b Delta_b Q_b^2
        acc.noalias() = minus_i * (geff * rho);
        acc.noalias() -= minus_i * (rho * geff_adj);
        acc -= gamma_n_[s] * rho;
        for (std::size_t b = 0; b < nbath_; ++b) {
            if (delta_[b] != 0.0) acc.noalias() += (2.0 * delta_[b]) * (q[b] * rho * q[b]);
            comm[b].setZero(d, d);
            has_comm[b] = 0;
            has_lr[b] = 0;
        }

        const std::int32_t* ups = up_.data() + s * k;
        const std::int32_t* downs = down_.data() + s * k;
        const std::uint8_t* occ = occ_.data() + s * k;
        for (std::size_t m = 0; m < k; ++m) {
            const std::size_t b = modes_[m].bath;
            if (ups[m] >= 0) {
                const double w = sq[occ[m] + 1] * sqrt_abs_c_[m];
                comm[b].noalias() += w * CMap(in + static_cast<std::size_t>(ups[m]) * bs, d, d);
                has_comm[b] = 1;
            }
            if (downs[m] >= 0) {
                CMap lower(in + static_cast<std::size_t>(downs[m]) * bs, d, d);
                const double scale = sq[occ[m]] * sqrt_abs_c_[m];
                if (phase_[m].imag() == 0.0) {
                    comm[b].noalias() += (scale * phase_[m].real()) * lower;
                    has_comm[b] = 1;
                } else {
                    const Complex w = scale * phase_[m];
                    if (!has_lr[b]) {
                        left[b].setZero(d, d);
                        right[b].setZero(d, d);
                        has_lr[b] = 1;
                    }
                    left[b].noalias() += w * lower;
                    right[b].noalias() += std::conj(w) * lower;
                }
            }
        }
        for (std::size_t b = 0; b < nbath_; ++b) {
            if (has_comm[b]) {
                acc.noalias() += minus_i * (q[b] * comm[b]);
                acc.noalias() -= minus_i * (comm[b] * q[b]);
            }
            if (has_lr[b]) {
                acc.noalias() += minus_i * (q[b] * left[b]);
                acc.noalias() -= minus_i * (right[b] * q[b]);
            }
        }
    }
}

void HierarchyOperator::apply(std::span<const Complex> in, std::span<Complex> out, const Matrix& hamiltonian,
                              WorkerPool* pool) const {
    const std::size_t bs = static_cast<std::size_t>(dim_) * dim_;
    if (in.size() != slots_ * bs || out.size() != slots_ * bs)
        throw StructuralError("HierarchyOperator::apply: buffer size does not match the bound store");
    if (hamiltonian.rows() != dim_ || hamiltonian.cols() != dim_)
        throw StructuralError("HierarchyOperator::apply: Hamiltonian shape mismatch");

    const Matrix geff = hamiltonian - Complex(0.0, 1.0) * q2_sum_;
    const auto run = [&](std::size_t begin, std::size_t end) {
        switch (dim_) {
            case 2: apply_range<2>(begin, end, in.data(), out.data(), geff); break;
            case 3: apply_range<3>(begin, end, in.data(), out.data(), geff); break;
            case 4: apply_range<4>(begin, end, in.data(), out.data(), geff); break;
            default: apply_range<Eigen::Dynamic>(begin, end, in.data(), out.data(), geff); break;
        }
    };

    constexpr std::size_t kMinChunk = 256;
    if (pool == nullptr || pool->size() <= 1 || slots_ < 2 * kMinChunk) {
        run(0, slots_);
        return;
    }
    const std::size_t chunks = std::min<std::size_t>(pool->size() * 4, slots_ / kMinChunk);
    const std::size_t per = (slots_ + chunks - 1) / chunks;
    pool->run(chunks, [&](std::size_t c) {
        const std::size_t begin = c * per;
        run(begin, std::min(slots_, begin + per));
    });
}

}  // namespace heom
