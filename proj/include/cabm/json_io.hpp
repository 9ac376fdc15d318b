#pragma once

#include "cabm/initial_data.hpp"

#include <string>

namespace cabm {

/// Parses an initial-data descriptor. Accepted shapes (whitespace free-form):
///   {"variant":"maximal"}
///   {"variant":"finite_spin","atoms":[{"position":-0.3,"multiplicity":2},...]}
///   {"variant":"product","factor":{"breakpoints":[...],"values":[...]}}
///   {"variant":"product","constant":0.6}
///   {"variant":"closed_set_avoid","intervals":[{"lo":-0.5,"hi":0.2}],
///    "isolated":[{"position":1.0,"weight":2}]}
/// A multiplicity/weight may be the string "inf" for the infinite sentinel.
/// The shorthand strings "maximal" and "empty" (no atoms) are also accepted
/// in place of a JSON object. Throws std::invalid_argument on malformed
/// input; structural validation against theta stays with the caller.
InitialData initialDataFromJsonText(const std::string& text);

/// Inverse of the above; emits the canonical object form.
std::string initialDataToJsonText(const InitialData& f);

/// {"breakpoints":[...],"values":[...]}
StepFunction stepFunctionFromJsonText(const std::string& text);
std::string stepFunctionToJsonText(const StepFunction& f);

}  // namespace cabm
