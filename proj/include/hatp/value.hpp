#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace hatp {

/// Index into the world state's entity table.
using EntityId = uint32_t;

/// The absent atom value.
struct NullT {
  auto operator<=>(const NullT &) const = default;
};

struct EntityRef {
  EntityId id{};
  auto operator<=>(const EntityRef &) const = default;
};

/// A runtime value: Null, a scalar, or an entity reference. Ordered first by
/// alternative, then by content, which gives sets and table keys a stable
/// canonical order.
using Value = std::variant<NullT, bool, int64_t, std::string, EntityRef>;

/// Variable environment with lexical shadowing: lookups scan innermost first.
class Bindings {
public:
  void push(std::string name, Value v) {
    entries_.emplace_back(std::move(name), std::move(v));
  }
  void pop() { entries_.pop_back(); }
  size_t size() const { return entries_.size(); }
  void truncate(size_t n) { entries_.resize(n); }
  const Value *find(const std::string &name) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

private:
  std::vector<std::pair<std::string, Value>> entries_;
};

}  // namespace hatp
