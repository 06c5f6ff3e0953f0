#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

namespace spacer::ir {

// Interned identifier. Id 0 is reserved for the empty name.
class Symbol {
 public:
  Symbol() = default;

  static Symbol intern(std::string_view name);
  // A symbol whose name starts with `prefix` and was never interned before.
  static Symbol fresh(std::string_view prefix);

  const std::string& name() const;
  uint32_t id() const { return id_; }
  bool valid() const { return id_ != 0; }

  auto operator<=>(const Symbol&) const = default;

 private:
  explicit Symbol(uint32_t id) : id_(id) {}
  uint32_t id_ = 0;
};

// A current-state (x) or next-state (x') occurrence of a variable.
struct VarRef {
  Symbol sym;
  bool primed = false;

  auto operator<=>(const VarRef&) const = default;
};

std::string to_string(const VarRef& v);

}  // namespace spacer::ir

template <>
struct std::hash<spacer::ir::Symbol> {
  size_t operator()(const spacer::ir::Symbol& s) const noexcept { return s.id(); }
};

template <>
struct std::hash<spacer::ir::VarRef> {
  size_t operator()(const spacer::ir::VarRef& v) const noexcept {
    return (static_cast<size_t>(v.sym.id()) << 1) | (v.primed ? 1u : 0u);
  }
};
