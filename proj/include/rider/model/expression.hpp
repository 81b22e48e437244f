#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace rider::model {

/// Expression tree for virtual sensors.
struct Expression {
  enum class Op { sensor_ref, constant, add, sub, mul, div, avg, min, max };

  Op op = Op::constant;
  std::string ref;     // sensor_ref only
  double value = 0.0;  // constant only
  std::vector<Expression> args;

  static Expression sensor(std::string id) {
    Expression e;
    e.op = Op::sensor_ref;
    e.ref = std::move(id);
    return e;
  }
  static Expression constant(double v) {
    Expression e;
    e.op = Op::constant;
    e.value = v;
    return e;
  }
  static Expression apply(Op op, std::vector<Expression> args) {
    Expression e;
    e.op = op;
    e.args = std::move(args);
    return e;
  }

  friend bool operator==(const Expression&, const Expression&) = default;
};

std::string_view to_string(Expression::Op op);
std::optional<Expression::Op> parse_op(std::string_view text);

/// Empty when arity is acceptable, otherwise a description of the problem.
std::optional<std::string> check_arity(const Expression& e);

/// All sensor ids referenced anywhere in the tree, in first-seen order, deduplicated.
std::vector<std::string> referenced_sensors(const Expression& e);

struct MissingInput {
  std::string sensor_id;
};
struct DivisionByZero {};

using EvalOutcome = std::variant<double, MissingInput, DivisionByZero>;
using SensorLookup = std::function<std::optional<double>(const std::string&)>;

/// Evaluates bottom-up. The first missing input aborts evaluation: no partial results.
EvalOutcome evaluate(const Expression& e, const SensorLookup& lookup);

}  // namespace rider::model
