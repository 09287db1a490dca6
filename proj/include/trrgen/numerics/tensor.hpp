#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace trrgen::num {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. Rank 1 tensors behave as a single row
// wherever a matrix is expected.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
    static Tensor row(std::initializer_list<double> values);
    static Tensor scalar(double value);

    const Shape& shape() const noexcept { return shape_; }
    std::size_t rank() const noexcept { return shape_.size(); }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::size_t rows() const noexcept;
    std::size_t cols() const noexcept;

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    double* data() noexcept { return values_.data(); }
    const double* data() const noexcept { return values_.data(); }

    double& operator[](std::size_t i) noexcept { return values_[i]; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    double& at(std::size_t r, std::size_t c) noexcept { return values_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const noexcept { return values_[r * cols() + c]; }

    std::span<double> row_span(std::size_t r) noexcept {
        return std::span<double>(values_).subspan(r * cols(), cols());
    }
    std::span<const double> row_span(std::size_t r) const noexcept {
        return std::span<const double>(values_).subspan(r * cols(), cols());
    }

    void fill(double value) noexcept;
    bool all_finite() const noexcept;
    double item() const;

    // Throws NumericError naming `where` if any value is NaN or infinite.
    void check_finite(const char* where) const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_;
    std::vector<double> values_;
};

// Elementwise maximum of |a - b|; shapes must match.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace trrgen::num
