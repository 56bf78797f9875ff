#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace tubesynth::plants {

/// Arithmetic expression over named variables: + - * / ^, unary minus,
/// parentheses, the constant pi and the functions sin cos tan exp log sqrt
/// abs tanh pow(a, b).
class Expression {
 public:
  /// Maps a symbol to its slot in the variable vector; nullopt rejects it.
  using Resolver = std::function<std::optional<std::size_t>(std::string_view)>;

  static Expression parse(std::string_view text, const Resolver& resolve);

  double eval(std::span<const double> vars) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace tubesynth::plants
