#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "bnsl/error.hpp"

namespace bnsl {

// Ordered table of named discrete variables with finite value domains.
// Variable and value indices are stable; datasets and networks reference
// variables by index into one shared table.
class VariableTable {
 public:
  struct Variable {
    std::string name;
    std::vector<std::string> values;
    bool operator==(const Variable&) const = default;
  };

  VariableTable() = default;

  explicit VariableTable(std::vector<Variable> vars) : vars_(std::move(vars)) {
    value_index_.reserve(vars_.size());
    for (int i = 0; i < size(); ++i) {
      const Variable& v = vars_[i];
      if (v.name.empty()) throw ValidationError("variable with empty name");
      if (!name_index_.emplace(v.name, i).second)
        throw ValidationError("duplicate variable name: " + v.name);
      if (v.values.size() < 2)
        throw ValidationError("variable " + v.name +
                              " must have at least 2 values");
      if (v.values.size() > 256)
        throw ValidationError("variable " + v.name +
                              " exceeds 256 values");
      std::unordered_map<std::string, int> idx;
      for (std::size_t j = 0; j < v.values.size(); ++j) {
        if (v.values[j].empty())
          throw ValidationError("variable " + v.name + " has an empty value");
        if (!idx.emplace(v.values[j], static_cast<int>(j)).second)
          throw ValidationError("variable " + v.name + " repeats value " +
                                v.values[j]);
      }
      value_index_.push_back(std::move(idx));
    }
  }

  int size() const { return static_cast<int>(vars_.size()); }
  const Variable& var(int i) const { return vars_[i]; }
  const std::string& name(int i) const { return vars_[i].name; }
  int cardinality(int i) const {
    return static_cast<int>(vars_[i].values.size());
  }
  const std::string& value_name(int var, int value) const {
    return vars_[var].values[value];
  }

  // -1 when the name is not present.
  int index_of(const std::string& name) const {
    auto it = name_index_.find(name);
    return it == name_index_.end() ? -1 : it->second;
  }

  // -1 when the value name is not in the variable's domain.
  int value_index(int var, const std::string& value) const {
    const auto& m = value_index_[var];
    auto it = m.find(value);
    return it == m.end() ? -1 : it->second;
  }

  bool operator==(const VariableTable& other) const {
    return vars_ == other.vars_;
  }

 private:
  std::vector<Variable> vars_;
  std::unordered_map<std::string, int> name_index_;
  std::vector<std::unordered_map<std::string, int>> value_index_;
};

}  // namespace bnsl
