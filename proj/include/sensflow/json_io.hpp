#pragma once

#include <json.hpp>

#include "sensflow/books.hpp"
#include "sensflow/discretize.hpp"
#include "sensflow/fpcs.hpp"
#include "sensflow/inclusion.hpp"
#include "sensflow/linear.hpp"
#include "sensflow/spread.hpp"

namespace sensflow {

using Json = nlohmann::json;

Json to_json(const SensitivityReport& report);
Json to_json(const GrowthReport& report);
Json to_json(const SofReport& report);           // eigenvalues as {re, im}
Json to_json(const SensitivityConstant& c);
Json to_json(const QuasiconvexityReport& report);
Json to_json(const SpiralCertificate& cert);
Json to_json(const MatchReport& report);
Json to_json(const GradientErrorReport& report);
Json to_json(const SpreadBoundCheck& check);
Json to_json(const DiscreteBoundCheck& check);

// {"dimension": n, "pieces": [{"mu": [...], "b": ...}, ...]}
PwlConvexFunction pwl_from_json(const Json& j);
Json pwl_to_json(const PwlConvexFunction& phi);

Mat matrix_from_json(const Json& j);  // list of rows
Vec vector_from_json(const Json& j);

}  // namespace sensflow
