#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace hodgefrob {

struct CheckItem {
  std::string name;
  bool pass = true;
  std::string detail;
};

// Named pass/fail items; a report passes iff every item passes.
class Report {
 public:
  Report() = default;

  Report& add(std::string name, bool pass, std::string detail = {}) {
    items_.push_back({std::move(name), pass, std::move(detail)});
    return *this;
  }
  Report& fail(std::string name, std::string detail) { return add(std::move(name), false, std::move(detail)); }

  Report& merge(const Report& o, const std::string& prefix = {}) {
    for (const auto& it : o.items_)
      items_.push_back({prefix.empty() ? it.name : prefix + "." + it.name, it.pass, it.detail});
    return *this;
  }

  bool ok() const {
    for (const auto& it : items_)
      if (!it.pass) return false;
    return true;
  }
  explicit operator bool() const { return ok(); }

  const std::vector<CheckItem>& items() const { return items_; }

  const CheckItem* first_failure() const {
    for (const auto& it : items_)
      if (!it.pass) return &it;
    return nullptr;
  }

  bool has_failure(const std::string& name_prefix) const {
    for (const auto& it : items_)
      if (!it.pass && it.name.rfind(name_prefix, 0) == 0) return true;
    return false;
  }

  std::string text() const {
    std::ostringstream os;
    for (const auto& it : items_) {
      os << (it.pass ? "PASS " : "FAIL ") << it.name;
      if (!it.detail.empty()) os << ": " << it.detail;
      os << "\n";
    }
    return os.str();
  }

 private:
  std::vector<CheckItem> items_;
};

}  // namespace hodgefrob
