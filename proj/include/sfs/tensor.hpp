#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "sfs/common.hpp"

namespace sfs {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_size(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << ")";
    return os.str();
}

// Dense row-major real tensor. Rank 0 (scalar), 1 (vector) and 2 (matrix)
// are the only ranks the library produces.
class Tensor {
public:
    Tensor() : shape_{0}, data_() {}

    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}

    Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != shape_size(shape_)) {
            throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                             " does not match shape " + shape_str(shape_));
        }
    }

    static Tensor scalar(double v) { return Tensor(Shape{}, {v}); }

    static Tensor vector(std::vector<double> v) {
        const std::size_t n = v.size();
        return Tensor(Shape{n}, std::move(v));
    }

    static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> v) {
        return Tensor(Shape{rows, cols}, std::move(v));
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }

    static Tensor full(Shape shape, double v) {
        Tensor t(std::move(shape));
        std::fill(t.data_.begin(), t.data_.end(), v);
        return t;
    }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::size_t rows() const { return rank() == 2 ? shape_[0] : 1; }
    std::size_t cols() const { return rank() == 2 ? shape_[1] : (rank() == 1 ? shape_[0] : 1); }

    double value() const {
        if (size() != 1) throw ShapeError("value() on non-scalar tensor " + shape_str(shape_));
        return data_[0];
    }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_).subspan(r * cols(), cols());
    }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Tensor& o) const { return shape_ == o.shape_ && data_ == o.data_; }

private:
    Shape shape_;
    std::vector<double> data_;
};

}  // namespace sfs
