#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "prepost/analysis.hpp"
#include "prepost/simulation.hpp"
#include "prepost/variance_theory.hpp"

namespace prepost {

using Json = nlohmann::ordered_json;

/// Shortest decimal that parses back to the same double; "inf", "-inf", "nan" otherwise.
std::string format_number(double x);

/// Finite values become JSON numbers, others the strings above.
Json json_number(double x);
/// Inverse of json_number. Throws DataError for anything else.
double number_from_json(const Json& j);

Json to_json(const ComparisonReport& report);
/// Throws DataError on a malformed document.
ComparisonReport comparison_report_from_json(const Json& j);
Json residuals_json(const ComparisonReport& report);
/// One row per method, columns named as the JSON row fields; ci95 is "low;high".
void write_rows_csv(std::ostream& out, const ComparisonReport& report);

Json to_json(const MCReport& report);
/// Flat table, one row per method.
void write_mc_csv(std::ostream& out, const MCReport& report);

Json to_json(const TheoryTable& table);
void write_theory_csv(std::ostream& out, const TheoryTable& table);

}  // namespace prepost
