#include "trrgen/numerics/tape.hpp"

#include "trrgen/error.hpp"

namespace trrgen::num {

Var Tape::push(Node node) {
    nodes_.push_back(std::move(node));
    return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
    Node node;
    node.owned = std::move(value);
    return push(std::move(node));
}

Var Tape::variable(Tensor value) {
    Node node;
    node.owned = std::move(value);
    node.requires_grad = record_gradients_;
    return push(std::move(node));
}

Var Tape::bind(const Tensor& storage, bool requires_grad) {
    Node node;
    node.external = &storage;
    node.requires_grad = requires_grad && record_gradients_;
    return push(std::move(node));
}

Var Tape::record(const char* op, Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return record(op, std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::record(const char* op, Tensor value, const std::vector<Var>& inputs, BackwardFn backward) {
    Node node;
    node.op = op;
    node.owned = std::move(value);
    if (record_gradients_) {
        for (const Var& in : inputs) {
            if (in.tape() != this) throw Error("tape", std::string(op) + ": operand belongs to another tape");
            if (nodes_[in.id()].requires_grad) node.requires_grad = true;
        }
        if (node.requires_grad) node.backward = std::move(backward);
    }
    return push(std::move(node));
}

const Tensor& Tape::value(std::size_t id) const {
    const Node& node = nodes_.at(id);
    return node.external ? *node.external : node.owned;
}

Tensor Tape::grad(Var v) const {
    const Node& node = nodes_.at(v.id());
    if (!node.grad.empty()) return node.grad;
    return Tensor(value(v.id()).shape(), 0.0);
}

Tensor& Tape::grad_slot(std::size_t id) {
    Node& node = nodes_.at(id);
    if (node.grad.empty()) node.grad = Tensor(value(id).shape(), 0.0);
    return node.grad;
}

void Tape::backward(Var loss) {
    if (loss.tape() != this) throw Error("tape", "backward: loss belongs to another tape");
    if (!record_gradients_) throw Error("tape", "backward on a tape that does not record gradients");
    if (value(loss.id()).size() != 1)
        throw ShapeError("backward needs a scalar loss, got " + shape_string(value(loss.id()).shape()));
    for (Node& node : nodes_) node.grad = Tensor();
    grad_slot(loss.id()).fill(1.0);
    for (std::size_t id = loss.id() + 1; id-- > 0;) {
        Node& node = nodes_[id];
        if (!node.backward || node.grad.empty()) continue;
        if (!corrupted_op_.empty() && corrupted_op_ == node.op)
            for (double& g : node.grad.values()) g *= 1.5;
        node.backward(*this, id);
    }
}

}  // namespace trrgen::num
