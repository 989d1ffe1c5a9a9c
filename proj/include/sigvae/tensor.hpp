// Dense 64-bit real tensors (rank <= 2) used by the reverse-mode tape.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sigvae::ad {

// Thrown when operand shapes do not conform to a primitive's rule.
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

struct Tensor {
    std::vector<std::size_t> shape;  // {rows, cols}; scalars are {1, 1}
    std::vector<double> data;        // row-major, size == rows * cols

    Tensor() : shape{0, 0} {}
    Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : shape{rows, cols}, data(rows * cols, fill) {}

    static Tensor scalar(double v) {
        Tensor t(1, 1);
        t.data[0] = v;
        return t;
    }
    static Tensor zeros(std::size_t rows, std::size_t cols) { return Tensor(rows, cols, 0.0); }
    static Tensor row(std::vector<double> v) {
        Tensor t;
        t.shape = {1, v.size()};
        t.data = std::move(v);
        return t;
    }
    static Tensor column(std::vector<double> v) {
        Tensor t;
        t.shape = {v.size(), 1};
        t.data = std::move(v);
        return t;
    }
    static Tensor from_rows(std::size_t rows, std::size_t cols, std::vector<double> v) {
        if (v.size() != rows * cols)
            throw ShapeError("from_rows: data length " + std::to_string(v.size()) +
                             " != " + std::to_string(rows) + "x" + std::to_string(cols));
        Tensor t;
        t.shape = {rows, cols};
        t.data = std::move(v);
        return t;
    }

    std::size_t rows() const { return shape[0]; }
    std::size_t cols() const { return shape[1]; }
    std::size_t numel() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool is_scalar() const { return numel() == 1; }

    double& at(std::size_t r, std::size_t c) { return data[r * shape[1] + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * shape[1] + c]; }

    double scalar_value() const {
        if (!is_scalar()) throw ShapeError("scalar_value: tensor has " + std::to_string(numel()) + " elements");
        return data[0];
    }

    bool all_finite() const;

    std::string shape_str() const {
        return "[" + std::to_string(rows()) + "," + std::to_string(cols()) + "]";
    }
};

}  // namespace sigvae::ad
