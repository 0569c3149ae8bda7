#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <stdexcept>
#include <string>

namespace csid {

// Variable sets are bitmasks over dense variable ids. Everything in the
// engine (graphs, separation queries, terms) is built on these, which keeps
// canonical forms cheap to hash and compare.
using VarSet = std::uint64_t;

inline constexpr int kMaxVars = 64;

constexpr VarSet var_bit(int v) { return VarSet{1} << v; }
constexpr bool has_var(VarSet s, int v) { return (s >> v) & VarSet{1}; }
constexpr int set_size(VarSet s) { return std::popcount(s); }
constexpr int lowest_var(VarSet s) { return std::countr_zero(s); }
constexpr VarSet full_set(int n) {
  return n >= kMaxVars ? ~VarSet{0} : (VarSet{1} << n) - 1;
}

// Range adapter: for (int v : vars_of(mask)) iterates set bits ascending.
class VarRange {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = int;
    using difference_type = std::ptrdiff_t;
    using pointer = const int*;
    using reference = int;

    iterator() : rest_(0) {}
    explicit iterator(VarSet s) : rest_(s) {}
    int operator*() const { return std::countr_zero(rest_); }
    iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    iterator operator++(int) {
      iterator tmp = *this;
      ++*this;
      return tmp;
    }
    bool operator==(const iterator& o) const { return rest_ == o.rest_; }
    bool operator!=(const iterator& o) const { return rest_ != o.rest_; }

   private:
    VarSet rest_;
  };
  explicit VarRange(VarSet s) : set_(s) {}
  iterator begin() const { return iterator(set_); }
  iterator end() const { return iterator(0); }

 private:
  VarSet set_;
};

inline VarRange vars_of(VarSet s) { return VarRange(s); }

// Partial binary assignment: `mask` holds the assigned variables, `values`
// the assigned values (values ⊆ mask always).
struct Context {
  VarSet mask = 0;
  VarSet values = 0;

  Context() = default;
  Context(VarSet m, VarSet v) : mask(m), values(v & m) { assert((v & ~m) == 0); }

  bool empty() const { return mask == 0; }
  int size() const { return set_size(mask); }
  bool assigns(int v) const { return has_var(mask, v); }
  int value(int v) const {
    assert(assigns(v));
    return has_var(values, v) ? 1 : 0;
  }
  void set(int v, int val) {
    mask |= var_bit(v);
    if (val)
      values |= var_bit(v);
    else
      values &= ~var_bit(v);
  }
  void erase(int v) {
    mask &= ~var_bit(v);
    values &= ~var_bit(v);
  }
  Context restricted(VarSet keep) const { return Context(mask & keep, values & keep); }
  // Union of two assignments; they must agree on shared variables.
  Context merged(const Context& o) const {
    assert(((values ^ o.values) & mask & o.mask) == 0);
    return Context(mask | o.mask, values | o.values);
  }
  bool agrees_with(const Context& o) const {
    return ((values ^ o.values) & mask & o.mask) == 0;
  }

  friend bool operator==(const Context&, const Context&) = default;
};

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ (v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2)));
}

// Base error type for user-facing failures (parsing, validation, limits).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace csid
