#include "lieaug/param_store.hpp"

#include <stdexcept>

namespace lieaug {

void ParamStore::add(const std::string& name, Tensor value, bool trainable) {
  if (entries_.count(name))
    throw ContractError("ParamStore: duplicate parameter " + name);
  order_.push_back(name);
  entries_.emplace(name, Entry{std::move(value), trainable});
}

bool ParamStore::has(const std::string& name) const {
  return entries_.count(name) != 0;
}

Tensor& ParamStore::at(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw ContractError("ParamStore: unknown parameter " + name);
  return it->second.value;
}

const Tensor& ParamStore::at(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end())
    throw ContractError("ParamStore: unknown parameter " + name);
  return it->second.value;
}

bool ParamStore::trainable(const std::string& name) const {
  return entries_.at(name).trainable;
}

std::size_t ParamStore::flat_size() const {
  std::size_t n = 0;
  for (const auto& name : order_) {
    const Entry& e = entries_.at(name);
    if (e.trainable) n += e.value.numel();
  }
  return n;
}

std::vector<double> ParamStore::flat() const {
  std::vector<double> out;
  out.reserve(flat_size());
  for (const auto& name : order_) {
    const Entry& e = entries_.at(name);
    if (!e.trainable) continue;
    out.insert(out.end(), e.value.data.begin(), e.value.data.end());
  }
  return out;
}

void ParamStore::set_flat(const std::vector<double>& values) {
  if (values.size() != flat_size())
    throw ContractError("ParamStore: flat size mismatch");
  std::size_t pos = 0;
  for (const auto& name : order_) {
    Entry& e = entries_.at(name);
    if (!e.trainable) continue;
    for (double& v : e.value.data) v = values[pos++];
  }
}

std::unordered_map<std::string, NodeId> ParamStore::inject(Tape& tape) const {
  std::unordered_map<std::string, NodeId> ids;
  for (const auto& name : order_) {
    const Entry& e = entries_.at(name);
    ids.emplace(name, tape.leaf(e.value, e.trainable));
  }
  return ids;
}

std::vector<double> ParamStore::gather_grads(
    Tape& tape,
    const std::unordered_map<std::string, NodeId>& leaves) const {
  std::vector<double> out;
  out.reserve(flat_size());
  for (const auto& name : order_) {
    const Entry& e = entries_.at(name);
    if (!e.trainable) continue;
    const Tensor& g = tape.grad(leaves.at(name));
    out.insert(out.end(), g.data.begin(), g.data.end());
  }
  return out;
}

}  // namespace lieaug
