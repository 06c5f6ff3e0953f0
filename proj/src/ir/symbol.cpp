#include "spacer/ir/symbol.hpp"

#include <deque>
#include <mutex>
#include <unordered_map>

namespace spacer::ir {

namespace {

struct Table {
  std::mutex mu;
  std::deque<std::string> names{""};
  std::unordered_map<std::string, uint32_t> ids{{"", 0}};
  uint64_t fresh_counter = 0;
};

Table& table() {
  static Table t;
  return t;
}

}  // namespace

Symbol Symbol::intern(std::string_view name) {
  Table& t = table();
  std::lock_guard lock(t.mu);
  auto [it, inserted] = t.ids.try_emplace(std::string(name), static_cast<uint32_t>(t.names.size()));
  if (inserted) t.names.emplace_back(name);
  return Symbol(it->second);
}

Symbol Symbol::fresh(std::string_view prefix) {
  Table& t = table();
  std::lock_guard lock(t.mu);
  for (;;) {
    std::string name = std::string(prefix) + std::to_string(t.fresh_counter++);
    if (t.ids.count(name)) continue;
    uint32_t id = static_cast<uint32_t>(t.names.size());
    t.ids.emplace(name, id);
    t.names.push_back(std::move(name));
    return Symbol(id);
  }
}

const std::string& Symbol::name() const {
  Table& t = table();
  std::lock_guard lock(t.mu);
  return t.names[id_];
}

std::string to_string(const VarRef& v) { return v.primed ? v.sym.name() + "'" : v.sym.name(); }

}  // namespace spacer::ir
