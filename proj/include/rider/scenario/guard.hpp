#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rider/scenario/context.hpp"

namespace rider::scenario {

class GuardSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Boolean/arithmetic predicate over context paths.
///
///   expr    := or
///   or      := and (("||" | "or") and)*
///   and     := not (("&&" | "and") not)*
///   not     := ("!" | "not") not | compare
///   compare := sum (("<" | "<=" | ">" | ">=" | "==" | "!=") sum)?
///   sum     := product (("+" | "-") product)*
///   product := unary (("*" | "/") unary)*
///   unary   := "-" unary | atom
///   atom    := number | "true" | "false" | path | "(" expr ")"
///
/// Paths start with a letter and may contain letters, digits, '_', '.', '-',
/// so subtraction needs surrounding spaces. A guard holds when it evaluates to
/// a present, non-zero value; a missing input makes it absent, except that
/// `false && x` and `true || x` short-circuit.
class Guard {
 public:
  struct Node;

  Guard() = default;
  static Guard parse(std::string_view text);

  std::optional<double> evaluate(const EngineContext& ctx) const;
  bool holds(const EngineContext& ctx) const {
    auto v = evaluate(ctx);
    return v && *v != 0.0;
  }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& paths() const { return paths_; }

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
  std::vector<std::string> paths_;
};

}  // namespace rider::scenario
