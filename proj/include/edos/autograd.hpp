#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "edos/tensor.hpp"

namespace edos {

template <typename T>
struct GraphNode {
    Tensor<T> value;
    Tensor<T> grad; // empty until first accumulation
    bool requires_grad = false;
    const char* op = "leaf";
    std::vector<std::shared_ptr<GraphNode>> parents;
    // Reads this node's grad and accumulates into the parents' grads.
    std::function<void(GraphNode&)> backprop;

    Tensor<T>& ensure_grad() {
        if (grad.empty()) grad = Tensor<T>(value.shape());
        return grad;
    }
};

// Shared handle to a node of the computation graph. Copies alias the node.
template <typename T>
class Var {
public:
    Var() = default;

    static Var leaf(Tensor<T> value, bool requires_grad = false) {
        Var v;
        v.node_ = std::make_shared<GraphNode<T>>();
        v.node_->value = std::move(value);
        v.node_->requires_grad = requires_grad;
        return v;
    }

    static Var op(const char* name, Tensor<T> value, std::vector<Var> parents,
                  std::function<void(GraphNode<T>&)> backprop) {
        Var v;
        v.node_ = std::make_shared<GraphNode<T>>();
        v.node_->value = std::move(value);
        v.node_->op = name;
        bool needs = false;
        v.node_->parents.reserve(parents.size());
        for (const Var& p : parents) {
            if (!p.node_) throw std::invalid_argument(std::string(name) + ": null operand");
            needs = needs || p.node_->requires_grad;
            v.node_->parents.push_back(p.node_);
        }
        v.node_->requires_grad = needs;
        if (needs) v.node_->backprop = std::move(backprop);
        return v;
    }

    bool defined() const { return node_ != nullptr; }
    const Tensor<T>& value() const { return node_->value; }
    Tensor<T>& value() { return node_->value; }
    const Tensor<T>& grad() const { return node_->grad; }
    bool has_grad() const { return !node_->grad.empty(); }
    bool requires_grad() const { return node_->requires_grad; }
    void zero_grad() { node_->grad = Tensor<T>(); }

    const Shape& shape() const { return node_->value.shape(); }
    std::size_t numel() const { return node_->value.numel(); }

    std::shared_ptr<GraphNode<T>> node() const { return node_; }

private:
    std::shared_ptr<GraphNode<T>> node_;
};

// Reverse-mode accumulation in reverse topological order. Grads add into
// whatever is already stored, so callers zero leaves between steps.
template <typename T>
void backward(const Var<T>& loss) {
    if (!loss.defined()) throw std::invalid_argument("backward: undefined loss");
    if (loss.numel() != 1) throw std::invalid_argument("backward: loss must be scalar, got shape " +
                                                       shape_to_string(loss.shape()));

    using NodeP = GraphNode<T>*;
    std::vector<NodeP> order; // postorder: parents before dependents
    std::unordered_set<NodeP> seen;
    std::vector<std::pair<NodeP, std::size_t>> stack;
    stack.emplace_back(loss.node().get(), 0);
    seen.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            NodeP parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    {
        Tensor<T>& g = loss.node()->ensure_grad();
        g[0] += T(1);
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        GraphNode<T>* node = *it;
        if (node->backprop && !node->grad.empty()) node->backprop(*node);
    }
}

// Ordered map name -> trainable leaf; iteration follows insertion order.
template <typename T>
class ParamStore {
public:
    Var<T>& add(const std::string& name, Tensor<T> init) {
        if (index_.count(name)) throw std::invalid_argument("ParamStore: duplicate name " + name);
        index_.emplace(name, items_.size());
        items_.emplace_back(name, Var<T>::leaf(std::move(init), /*requires_grad=*/true));
        return items_.back().second;
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    Var<T>& at(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter " + name);
        return items_[it->second].second;
    }

    const Var<T>& at(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter " + name);
        return items_[it->second].second;
    }

    std::size_t size() const { return items_.size(); }
    auto begin() { return items_.begin(); }
    auto end() { return items_.end(); }
    auto begin() const { return items_.begin(); }
    auto end() const { return items_.end(); }

    void zero_grad() {
        for (auto& [name, v] : items_) v.zero_grad();
    }

    std::size_t coordinate_count() const {
        std::size_t n = 0;
        for (const auto& [name, v] : items_) n += v.numel();
        return n;
    }

    std::vector<Tensor<T>> snapshot() const {
        std::vector<Tensor<T>> out;
        out.reserve(items_.size());
        for (const auto& [name, v] : items_) out.push_back(v.value());
        return out;
    }

    void restore(const std::vector<Tensor<T>>& values) {
        if (values.size() != items_.size())
            throw std::invalid_argument("ParamStore::restore: size mismatch");
        for (std::size_t i = 0; i < items_.size(); ++i) {
            if (!values[i].same_shape(items_[i].second.value()))
                throw std::invalid_argument("ParamStore::restore: shape mismatch at " + items_[i].first);
            items_[i].second.value() = values[i];
        }
    }

private:
    std::vector<std::pair<std::string, Var<T>>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace edos
