#include "cabm/json_io.hpp"

#include <json.hpp>

#include <stdexcept>

namespace cabm {

namespace {

using nlohmann::json;

json parseOrThrow(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw std::invalid_argument(std::string(what) + ": malformed JSON");
  return j;
}

std::uint64_t weightFrom(const json& j, const char* key) {
  if (!j.contains(key)) return 1;
  const json& w = j.at(key);
  if (w.is_string()) {
    if (w.get<std::string>() == "inf") return kInfiniteWeight;
    throw std::invalid_argument("initial data: weight string must be \"inf\"");
  }
  if (!w.is_number_unsigned() && !w.is_number_integer())
    throw std::invalid_argument("initial data: weight must be a positive integer");
  const auto v = w.get<std::int64_t>();
  if (v < 1) throw std::invalid_argument("initial data: weight must be >= 1");
  return static_cast<std::uint64_t>(v);
}

json weightTo(std::uint64_t w) {
  if (w == kInfiniteWeight) return "inf";
  return w;
}

StepFunction stepFromJson(const json& j) {
  if (!j.is_object() || !j.contains("breakpoints") || !j.contains("values"))
    throw std::invalid_argument("step function: need breakpoints and values arrays");
  StepFunction f;
  f.breakpoints = j.at("breakpoints").get<std::vector<double>>();
  f.values = j.at("values").get<std::vector<double>>();
  return f;
}

json stepToJson(const StepFunction& f) {
  return json{{"breakpoints", f.breakpoints}, {"values", f.values}};
}

}  // namespace

InitialData initialDataFromJsonText(const std::string& text) {
  json j = parseOrThrow(text, "initial data");
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "maximal") return MaximalData{};
    if (s == "empty") return FiniteSpinData{};
    throw std::invalid_argument("initial data: unknown shorthand \"" + s + "\"");
  }
  if (!j.is_object() || !j.contains("variant"))
    throw std::invalid_argument("initial data: need an object with a variant field");
  const std::string variant = j.at("variant").get<std::string>();

  if (variant == "maximal") return MaximalData{};

  if (variant == "finite_spin") {
    FiniteSpinData f;
    for (const json& a : j.value("atoms", json::array())) {
      if (!a.is_object() || !a.contains("position"))
        throw std::invalid_argument("finite_spin: each atom needs a position");
      f.measure.atoms.push_back(
          {a.at("position").get<double>(), weightFrom(a, "multiplicity")});
    }
    f.measure.validate();
    return f;
  }

  if (variant == "product") {
    ProductData p;
    if (j.contains("constant"))
      p.factor = StepFunction::constant(j.at("constant").get<double>());
    else if (j.contains("factor"))
      p.factor = stepFromJson(j.at("factor"));
    else
      throw std::invalid_argument("product: need a factor or a constant");
    p.factor.validate(-1.0, 1.0);
    return p;
  }

  if (variant == "closed_set_avoid") {
    ClosedSetAvoidData c;
    for (const json& iv : j.value("intervals", json::array())) {
      if (!iv.is_object() || !iv.contains("lo") || !iv.contains("hi"))
        throw std::invalid_argument("closed_set_avoid: each interval needs lo and hi");
      c.intervals.push_back({iv.at("lo").get<double>(), iv.at("hi").get<double>()});
    }
    for (const json& p : j.value("isolated", json::array())) {
      if (!p.is_object() || !p.contains("position"))
        throw std::invalid_argument("closed_set_avoid: each isolated point needs a position");
      c.isolated.push_back({p.at("position").get<double>(), weightFrom(p, "weight")});
    }
    return c;
  }

  throw std::invalid_argument("initial data: unknown variant \"" + variant + "\"");
}

std::string initialDataToJsonText(const InitialData& f) {
  json j;
  if (std::holds_alternative<MaximalData>(f)) {
    j = json{{"variant", "maximal"}};
  } else if (const auto* fs = std::get_if<FiniteSpinData>(&f)) {
    json atoms = json::array();
    for (const auto& a : fs->measure.atoms)
      atoms.push_back({{"position", a.position},
                       {"multiplicity", weightTo(a.multiplicity)}});
    j = json{{"variant", "finite_spin"}, {"atoms", atoms}};
  } else if (const auto* p = std::get_if<ProductData>(&f)) {
    j = json{{"variant", "product"}, {"factor", stepToJson(p->factor)}};
  } else {
    const auto& c = std::get<ClosedSetAvoidData>(f);
    json intervals = json::array();
    for (const auto& iv : c.intervals)
      intervals.push_back({{"lo", iv.lo}, {"hi", iv.hi}});
    json isolated = json::array();
    for (const auto& p : c.isolated)
      isolated.push_back({{"position", p.position}, {"weight", weightTo(p.weight)}});
    j = json{{"variant", "closed_set_avoid"},
             {"intervals", intervals},
             {"isolated", isolated}};
  }
  return j.dump();
}

StepFunction stepFunctionFromJsonText(const std::string& text) {
  return stepFromJson(parseOrThrow(text, "step function"));
}

std::string stepFunctionToJsonText(const StepFunction& f) {
  return stepToJson(f).dump();
}

}  // namespace cabm
