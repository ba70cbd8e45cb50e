#pragma once

// Frames: the attacker's knowledge, an insertion-ordered map from handles to
// messages in normal form.

#include <optional>
#include <string>
#include <vector>

#include "evsec/term.hpp"

namespace evsec {

class frame {
 public:
  struct entry {
    int handle;  // atom id
    term value;
  };

  void add(int handle_id, term value);
  void add(const std::string& handle, term value);
  const term* lookup(int handle_id) const;
  const std::vector<entry>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }
  bool same_domain(const frame& other) const;

  std::size_t hash() const;
  bool operator==(const frame& other) const;

 private:
  std::vector<entry> entries_;
};

std::string to_string(const signature& sig, const frame& f);

}  // namespace evsec
