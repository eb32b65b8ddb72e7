#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "lieaug/tape.hpp"
#include "lieaug/tensor.hpp"

namespace lieaug {

// Named parameter tensors plus a flat view in registration order for the
// optimizer. Mutation only between forward/backward passes.
class ParamStore {
 public:
  void add(const std::string& name, Tensor value, bool trainable = true);
  bool has(const std::string& name) const;
  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  bool trainable(const std::string& name) const;

  const std::vector<std::string>& names() const { return order_; }
  std::size_t flat_size() const;  // trainable elements only

  std::vector<double> flat() const;
  void set_flat(const std::vector<double>& values);

  // Creates one leaf node per parameter (requires_grad for trainable ones)
  // and returns the node ids keyed by name.
  std::unordered_map<std::string, NodeId> inject(Tape& tape) const;

  // Gathers gradients for trainable parameters from injected leaves, in the
  // same order as flat().
  std::vector<double> gather_grads(
      Tape& tape,
      const std::unordered_map<std::string, NodeId>& leaves) const;

 private:
  struct Entry {
    Tensor value;
    bool trainable;
  };
  std::vector<std::string> order_;
  std::unordered_map<std::string, Entry> entries_;
};

}  // namespace lieaug
