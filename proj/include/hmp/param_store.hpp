#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hmp/errors.hpp"
#include "hmp/linalg.hpp"

namespace hmp {

// Flat 64-bit parameter storage with named matrix views. The flat vector is
// what the optimizer and the finite-difference oracle operate on; the views
// are what the network forward passes read. Offsets are assigned in
// registration order, which also fixes the checkpoint tensor order.
class ParamStore {
public:
    struct TensorInfo {
        std::string name;
        Index rows = 0;
        Index cols = 0;
        Index offset = 0;
    };

    Index add(std::string name, Index rows, Index cols) {
        TensorInfo info{std::move(name), rows, cols, data_.size()};
        data_.conservativeResize(data_.size() + rows * cols);
        data_.tail(rows * cols).setZero();
        tensors_.push_back(std::move(info));
        return static_cast<Index>(tensors_.size()) - 1;
    }

    Index tensor_count() const { return static_cast<Index>(tensors_.size()); }
    const TensorInfo& info(Index i) const { return tensors_.at(i); }

    Eigen::Map<Matrix> view(Index i) {
        const TensorInfo& t = tensors_.at(i);
        return {data_.data() + t.offset, t.rows, t.cols};
    }
    Eigen::Map<const Matrix> view(Index i) const {
        const TensorInfo& t = tensors_.at(i);
        return {data_.data() + t.offset, t.rows, t.cols};
    }

    Index find(std::string_view name) const {
        for (size_t i = 0; i < tensors_.size(); ++i) {
            if (tensors_[i].name == name) return static_cast<Index>(i);
        }
        throw ContractError("param store: no tensor named '" + std::string(name) + "'");
    }

    Vector& flat() { return data_; }
    const Vector& flat() const { return data_; }
    Index size() const { return data_.size(); }

    bool all_finite() const { return data_.allFinite(); }

    // Name of the first tensor containing a non-finite entry, empty if none.
    std::string first_non_finite() const {
        for (const TensorInfo& t : tensors_) {
            if (!data_.segment(t.offset, t.rows * t.cols).allFinite()) return t.name;
        }
        return {};
    }

    // FNV-1a over the raw bytes; used to assert that read-only passes such as
    // the latency benchmark leave the weights untouched.
    uint64_t checksum() const {
        const auto* bytes = reinterpret_cast<const unsigned char*>(data_.data());
        const size_t n = sizeof(double) * static_cast<size_t>(data_.size());
        uint64_t h = 1469598103934665603ull;
        for (size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    std::vector<TensorInfo> tensors_;
    Vector data_;
};

}  // namespace hmp
