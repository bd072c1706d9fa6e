#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "lossylearn/bounds.hpp"
#include "lossylearn/dispersion.hpp"
#include "lossylearn/oracle.hpp"
#include "lossylearn/rd.hpp"

namespace lossylearn {

using Json = nlohmann::ordered_json;

/// Finite values as numbers, anything else as "inf", "-inf" or "nan".
Json number(double v);

Json to_json(const Endpoints& e);
Json to_json(const RDSolution& s, bool with_kernel = true);
Json to_json(const LambdaReport& r);
Json to_json(const TiltedTable& t);
/// Per-world sub-terms are keyed by world label.
Json to_json(const DispersionReport& r, const Labels& worlds);
Json to_json(const BoundReport& r);
Json to_json(const ExcessResult& r, const LearningProblem& problem);
Json to_json(const OracleReport& r, const LearningProblem& problem);
Json to_json(const MonteCarloEstimate& m);
Json to_json(const VerifyPoint& p);
Json to_json(const VerifyReport& r);
Json to_json(const StabilityReport& r, const Labels& worlds);
Json to_json(const MiChainReport& r);

/// Pretty JSON text with a trailing newline.
std::string dump(const Json& j);

/// Comma-separated line; fields containing ',', '"' or newlines are quoted.
std::string csv_line(const std::vector<std::string>& fields);

/// decimal() for finite values, "inf"/"-inf"/"nan" otherwise.
std::string cell(double v);

}  // namespace lossylearn
