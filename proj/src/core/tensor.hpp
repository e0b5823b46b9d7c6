#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/error.hpp"

namespace umic {

// Dense fp64 tensor, contiguous row-major, value semantics.
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
        data.assign(size_t(numel_of(shape)), 0.0);
    }
    Tensor(std::vector<int64_t> s, double fill) : shape(std::move(s)) {
        data.assign(size_t(numel_of(shape)), fill);
    }

    static int64_t numel_of(const std::vector<int64_t>& s) {
        int64_t n = 1;
        for (int64_t d : s) {
            require(d >= 0, ErrKind::invalid_argument, "negative tensor dim");
            n *= d;
        }
        return n;
    }

    static Tensor zeros(std::vector<int64_t> s) { return Tensor(std::move(s)); }
    static Tensor full(std::vector<int64_t> s, double v) { return Tensor(std::move(s), v); }
    static Tensor scalar(double v) { return Tensor({1}, v); }
    static Tensor from_vec(std::vector<int64_t> s, std::vector<double> v) {
        Tensor t;
        t.shape = std::move(s);
        require(int64_t(v.size()) == numel_of(t.shape), ErrKind::invalid_argument,
                "from_vec: size mismatch");
        t.data = std::move(v);
        return t;
    }

    int64_t numel() const { return int64_t(data.size()); }
    int rank() const { return int(shape.size()); }
    int64_t dim(int i) const { return shape[size_t(i)]; }
    double* ptr() { return data.data(); }
    const double* ptr() const { return data.data(); }
    double item() const {
        require(numel() == 1, ErrKind::internal, "item() on non-scalar");
        return data[0];
    }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;

    Tensor reshaped(std::vector<int64_t> s) const {
        require(numel_of(s) == numel(), ErrKind::invalid_argument, "reshape size mismatch");
        Tensor t = *this;
        t.shape = std::move(s);
        return t;
    }

    void add_(const Tensor& o) {
        require(same_shape(o), ErrKind::internal, "add_: shape mismatch");
        for (size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
    }
    void scale_(double s) {
        for (double& v : data) v *= s;
    }
    bool all_finite() const;
};

std::vector<int64_t> strides_of(const std::vector<int64_t>& shape);

}  // namespace umic
