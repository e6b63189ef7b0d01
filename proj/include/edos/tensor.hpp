#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace edos {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

inline std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

// Dense row-major tensor. No views or strides; every tensor owns its data.
template <typename T>
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), T(0)) {
        check_dims();
    }

    Tensor(Shape shape, std::vector<T> data) : shape_(std::move(shape)), data_(std::move(data)) {
        check_dims();
        if (data_.size() != shape_numel(shape_))
            throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                        " does not match shape " + shape_to_string(shape_));
    }

    static Tensor full(Shape shape, T v) {
        Tensor t(std::move(shape));
        for (T& x : t.data_) x = v;
        return t;
    }

    static Tensor scalar(T v) { return Tensor({1}, {v}); }

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t numel() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }
    std::vector<T>& vec() { return data_; }
    const std::vector<T>& vec() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    T& at2(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
    const T& at2(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    T& at3(std::size_t i, std::size_t j, std::size_t k) {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }
    const T& at3(std::size_t i, std::size_t j, std::size_t k) const {
        return data_[(i * shape_[1] + j) * shape_[2] + k];
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

private:
    void check_dims() const {
        for (std::size_t d : shape_)
            if (d == 0) throw std::invalid_argument("Tensor: zero dimension in " + shape_to_string(shape_));
    }

    Shape shape_;
    std::vector<T> data_;
};

} // namespace edos
