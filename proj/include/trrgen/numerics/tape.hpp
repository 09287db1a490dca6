#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "trrgen/numerics/tensor.hpp"

namespace trrgen::num {

class Tape;

// Handle to a value recorded on a Tape. Cheap to copy; only valid while the
// owning tape is alive.
class Var {
public:
    Var() = default;

    Tape* tape() const noexcept { return tape_; }
    std::size_t id() const noexcept { return id_; }
    bool valid() const noexcept { return tape_ != nullptr; }

    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Linear record of primitive applications. Operands are always recorded before
// their consumers, so a single reverse sweep over the entries is a valid
// topological traversal. Single-owner: build, differentiate and read
// gradients from one thread.
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    explicit Tape(bool record_gradients = true) : record_gradients_(record_gradients) {}

    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;
    Tape(Tape&&) = delete;
    Tape& operator=(Tape&&) = delete;

    bool records_gradients() const noexcept { return record_gradients_; }

    // Leaf owning its value; no gradient is tracked.
    Var constant(Tensor value);
    // Leaf owning its value with gradient tracking.
    Var variable(Tensor value);
    // Leaf referencing external storage, which must outlive the tape and stay
    // unchanged while it is in use. Used to bind model parameters.
    Var bind(const Tensor& storage, bool requires_grad);

    // Entry point for ops: `backward` reads the output gradient of entry
    // `self` and accumulates into its operands.
    Var record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward);
    Var record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn backward);

    const Tensor& value(std::size_t id) const;
    const Tensor& value(Var v) const { return value(v.id()); }
    bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }
    bool requires_grad(Var v) const { return requires_grad(v.id()); }

    // Gradient of the last backward() with respect to `v`; zeros if `v` did
    // not influence the loss.
    Tensor grad(Var v) const;
    // Mutable gradient slot, allocated as zeros on first access.
    Tensor& grad_slot(std::size_t id);
    bool has_grad(std::size_t id) const { return !nodes_.at(id).grad.empty(); }
    const Tensor& output_grad(std::size_t id) const { return nodes_.at(id).grad; }

    // Reverse sweep from a scalar loss. Each entry is visited once.
    void backward(Var loss);

    std::size_t size() const noexcept { return nodes_.size(); }
    const char* op_name(std::size_t id) const { return nodes_.at(id).op; }

    // Test hook for negative controls: the backward rule of every entry whose
    // op name equals `op` receives an upstream gradient scaled by 1.5, which
    // yields analytic gradients that disagree with finite differences.
    void corrupt_backward(std::string op) { corrupted_op_ = std::move(op); }

private:
    struct Node {
        const char* op = "leaf";
        Tensor owned;
        const Tensor* external = nullptr;
        Tensor grad;
        bool requires_grad = false;
        BackwardFn backward;
    };

    Var push(Node node);

    bool record_gradients_;
    std::string corrupted_op_;
    std::vector<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(id_); }

}  // namespace trrgen::num
