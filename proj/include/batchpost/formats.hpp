#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "batchpost/backtest.hpp"
#include "batchpost/dp_offline.hpp"
#include "batchpost/ingest.hpp"
#include "batchpost/policies.hpp"
#include "batchpost/price_model.hpp"
#include "batchpost/qsolver.hpp"
#include "batchpost/sweep.hpp"

namespace batchpost {

using Json = nlohmann::json;

/// Pretty-printed JSON with sorted keys and every non-integral number
/// written with 6 significant digits. Non-finite numbers become null.
std::string canonical_dump(const Json& value);

// {"factors":[...],"probs":[...]}
void to_json(Json& j, const FactorDistribution& dist);
void from_json(const Json& j, FactorDistribution& dist);

// {"numPoints":n,"pMin":x,"pMax":y,"spacing":"linear"}
void to_json(Json& j, const PriceGrid& grid);
void from_json(const Json& j, PriceGrid& grid);

// {"rows":[[[index,prob],...],...]}
void to_json(Json& j, const TransitionKernel& kernel);
void from_json(const Json& j, TransitionKernel& kernel);

// {"numPrices":P,"maxQueue":Q,"values":[q][p][a]}
void to_json(Json& j, const ValueTable& table);
void from_json(const Json& j, ValueTable& table);

// {"numPrices":P,"maxQueue":Q,"actions":[q][p]}
void to_json(Json& j, const PolicyTable& table);
void from_json(const Json& j, PolicyTable& table);

void to_json(Json& j, const SolverConfig& config);
void to_json(Json& j, const ThresholdSummary& summary);
void to_json(Json& j, const BacktestReport& report);
void to_json(Json& j, const Schedule& schedule);
void to_json(Json& j, const Histogram& histogram);

/// Policy documents, e.g. {"kind":"arbStep","ap":96,"e":2,"ut":120}.
///   trivial:              {"kind":"trivial"}
///   priceMin:             {"kind":"priceMin","T":80}
///   qThreshold:           {"kind":"qThreshold","Tp":60,"d":2,"variant":"literal"|"toThreshold"}
///   arbStep / arbSmooth:  {"kind":"arbStep","ap":96,"e":2,"ut":120}
///   learned:              {"kind":"learned","grid":{...},"policy":{...}}
/// Unknown kinds and missing or extra fields are rejected.
PolicySpec parse_policy(const Json& j);
Json policy_to_json(const PolicySpec& spec);

std::string variant_name(QThresholdVariant variant);
QThresholdVariant parse_variant(const std::string& name);

/// Rows are queue lengths, columns price indices.
void write_policy_csv(std::ostream& out, const PolicyTable& table);
/// binStart,binEnd,count
void write_histogram_csv(std::ostream& out, const Histogram& histogram);
/// One line per grid point: parameters, every report field, error text and
/// frontier membership.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, const ParetoFrontier& frontier);
/// round,price,queueBefore,nPost,postingCost,delayCost
void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& trace);

/// %.6g rendering used by every machine-readable output.
std::string format_number(double value);

}  // namespace batchpost
