#pragma once

#include <cassert>
#include <utility>
#include <variant>

namespace feh {

// Minimal success-or-error carrier used by the checkers. `T` and `E` must be
// distinct types.
template <class T, class E>
class Result {
 public:
  Result(T value) : data_(std::in_place_index<0>, std::move(value)) {}

  static Result failure(E error) {
    return Result(std::in_place_index<1>, std::move(error));
  }

  bool ok() const { return data_.index() == 0; }
  explicit operator bool() const { return ok(); }

  const T& value() const {
    assert(ok());
    return std::get<0>(data_);
  }
  T& value() {
    assert(ok());
    return std::get<0>(data_);
  }
  const E& error() const {
    assert(!ok());
    return std::get<1>(data_);
  }

 private:
  template <std::size_t I, class X>
  Result(std::in_place_index_t<I> tag, X x) : data_(tag, std::move(x)) {}

  std::variant<T, E> data_;
};

}  // namespace feh
