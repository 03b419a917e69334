// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "bitkv/errors.hpp"
#include "bitkv/fp16.hpp"

namespace bitkv {

// Dense row-major tensor whose elements are binary16-representable, kept in
// f32 for arithmetic. All mutation goes through set(), which rounds to the
// nearest half value; arithmetic on top of Tensor accumulates in f32.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<size_t> shape) : shape_(std::move(shape)) {
        data_.assign(count(shape_), 0.0f);
    }

    static Tensor from_values(std::vector<size_t> shape, const std::vector<float>& values) {
        Tensor t(std::move(shape));
        if (values.size() != t.data_.size()) {
            throw ShapeError("from_values: element count does not match shape");
        }
        for (size_t i = 0; i < values.size(); ++i) {
            t.data_[i] = round_f16(values[i]);
        }
        return t;
    }

    const std::vector<size_t>& shape() const { return shape_; }
    size_t ndim() const { return shape_.size(); }
    size_t dim(size_t i) const { return shape_.at(i); }
    size_t numel() const { return data_.size(); }

    float at(size_t flat) const { return data_[flat]; }
    float operator()(size_t i, size_t j) const { return data_[flat2(i, j)]; }
    float operator()(size_t i, size_t j, size_t k) const { return data_[flat3(i, j, k)]; }

    void set(size_t flat, float v) { data_[flat] = round_f16(v); }
    void set(size_t i, size_t j, float v) { data_[flat2(i, j)] = round_f16(v); }
    void set(size_t i, size_t j, size_t k, float v) { data_[flat3(i, j, k)] = round_f16(v); }

    const float* data() const { return data_.data(); }
    const std::vector<float>& values() const { return data_; }

    // Same elements, new shape; element count must match.
    Tensor reshaped(std::vector<size_t> new_shape) const {
        if (count(new_shape) != data_.size()) {
            throw ShapeError("reshaped: element count mismatch");
        }
        Tensor t;
        t.shape_ = std::move(new_shape);
        t.data_ = data_;
        return t;
    }

    bool same_elements(const Tensor& other) const { return data_ == other.data_; }

private:
    static size_t count(const std::vector<size_t>& shape) {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return n;
    }
    size_t flat2(size_t i, size_t j) const {
        if (shape_.size() != 2) throw ShapeError("2-d index into non-2-d tensor");
        return i * shape_[1] + j;
    }
    size_t flat3(size_t i, size_t j, size_t k) const {
        if (shape_.size() != 3) throw ShapeError("3-d index into non-3-d tensor");
        return (i * shape_[1] + j) * shape_[2] + k;
    }

    std::vector<size_t> shape_;
    std::vector<float> data_;
};

}  // namespace bitkv
