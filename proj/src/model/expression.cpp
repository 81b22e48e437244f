#include "rider/model/expression.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace rider::model {
namespace {

constexpr std::array<std::pair<Expression::Op, std::string_view>, 9> kOps = {{
    {Expression::Op::sensor_ref, "ref"},
    {Expression::Op::constant, "const"},
    {Expression::Op::add, "+"},
    {Expression::Op::sub, "-"},
    {Expression::Op::mul, "*"},
    {Expression::Op::div, "/"},
    {Expression::Op::avg, "avg"},
    {Expression::Op::min, "min"},
    {Expression::Op::max, "max"},
}};

void collect(const Expression& e, std::vector<std::string>& out) {
  if (e.op == Expression::Op::sensor_ref) {
    if (std::find(out.begin(), out.end(), e.ref) == out.end()) out.push_back(e.ref);
    return;
  }
  for (const auto& a : e.args) collect(a, out);
}

}  // namespace

std::string_view to_string(Expression::Op op) {
  for (const auto& [o, name] : kOps)
    if (o == op) return name;
  return "?";
}

std::optional<Expression::Op> parse_op(std::string_view text) {
  for (const auto& [o, name] : kOps)
    if (name == text) return o;
  if (text == "add") return Expression::Op::add;
  if (text == "sub") return Expression::Op::sub;
  if (text == "mul") return Expression::Op::mul;
  if (text == "div") return Expression::Op::div;
  return std::nullopt;
}

std::optional<std::string> check_arity(const Expression& e) {
  using Op = Expression::Op;
  const auto n = e.args.size();
  switch (e.op) {
    case Op::sensor_ref:
      if (e.ref.empty()) return "sensor reference without an id";
      if (n != 0) return "sensor reference takes no arguments";
      return std::nullopt;
    case Op::constant:
      if (n != 0) return "constant takes no arguments";
      return std::nullopt;
    case Op::sub:
    case Op::div:
      if (n != 2) return std::string(to_string(e.op)) + " takes exactly 2 arguments";
      break;
    case Op::add:
    case Op::mul:
      if (n < 2) return std::string(to_string(e.op)) + " takes at least 2 arguments";
      break;
    case Op::avg:
    case Op::min:
    case Op::max:
      if (n < 1) return std::string(to_string(e.op)) + " takes at least 1 argument";
      break;
  }
  for (const auto& a : e.args)
    if (auto err = check_arity(a)) return err;
  return std::nullopt;
}

std::vector<std::string> referenced_sensors(const Expression& e) {
  std::vector<std::string> out;
  collect(e, out);
  return out;
}

EvalOutcome evaluate(const Expression& e, const SensorLookup& lookup) {
  using Op = Expression::Op;
  if (e.op == Op::constant) return e.value;
  if (e.op == Op::sensor_ref) {
    if (auto v = lookup(e.ref)) return *v;
    return MissingInput{e.ref};
  }

  std::vector<double> values;
  values.reserve(e.args.size());
  for (const auto& a : e.args) {
    auto r = evaluate(a, lookup);
    if (!std::holds_alternative<double>(r)) return r;
    values.push_back(std::get<double>(r));
  }

  switch (e.op) {
    case Op::add: {
      double s = 0.0;
      for (double v : values) s += v;
      return s;
    }
    case Op::sub:
      return values[0] - values[1];
    case Op::mul: {
      double p = 1.0;
      for (double v : values) p *= v;
      return p;
    }
    case Op::div:
      if (values[1] == 0.0) return DivisionByZero{};
      return values[0] / values[1];
    case Op::avg: {
      double s = 0.0;
      for (double v : values) s += v;
      return s / static_cast<double>(values.size());
    }
    case Op::min:
      return *std::min_element(values.begin(), values.end());
    case Op::max:
      return *std::max_element(values.begin(), values.end());
    default:
      return 0.0;
  }
}

}  // namespace rider::model
