#include "evsec/frame.hpp"

#include <sstream>
#include <stdexcept>

namespace evsec {

void frame::add(int handle_id, term value) {
  if (lookup(handle_id))
    throw std::invalid_argument("frame handle rebound: " +
                                atoms::display(term_kind::handle, handle_id));
  entries_.push_back({handle_id, std::move(value)});
}

void frame::add(const std::string& handle, term value) {
  add(atoms::handle(handle), std::move(value));
}

const term* frame::lookup(int handle_id) const {
  for (const auto& e : entries_)
    if (e.handle == handle_id) return &e.value;
  return nullptr;
}

bool frame::same_domain(const frame& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].handle != other.entries_[i].handle) return false;
  return true;
}

std::size_t frame::hash() const {
  std::size_t h = 0x5bd1e995;
  for (const auto& e : entries_) {
    h = h * 1000003u ^ static_cast<std::size_t>(e.handle);
    h = h * 1000003u ^ e.value->hash;
  }
  return h;
}

bool frame::operator==(const frame& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].handle != other.entries_[i].handle ||
        !equal(entries_[i].value, other.entries_[i].value))
      return false;
  return true;
}

std::string to_string(const signature& sig, const frame& f) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& e : f.entries()) {
    if (!first) os << ", ";
    first = false;
    os << atoms::display(term_kind::handle, e.handle) << " -> " << to_string(sig, e.value);
  }
  os << "}";
  return os.str();
}

}  // namespace evsec
