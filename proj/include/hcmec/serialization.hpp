#pragma once

// JSON persistence of scenarios, solver states and run reports, plus CSV
// export of objective traces.

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "hcmec/convex.hpp"
#include "hcmec/model.hpp"
#include "hcmec/protocols.hpp"
#include "hcmec/scenario.hpp"

namespace hcmec {

using Json = nlohmann::json;

void to_json (Json &j, const Position &p);
void from_json (const Json &j, Position &p);
void to_json (Json &j, const TopologyParams &tp);
void from_json (const Json &j, TopologyParams &tp);
void to_json (Json &j, const ChannelParams &cp);
void from_json (const Json &j, ChannelParams &cp);
void to_json (Json &j, const TaskParams &t);
void from_json (const Json &j, TaskParams &t);
void to_json (Json &j, const BudgetParams &b);
void from_json (const Json &j, BudgetParams &b);

/// Channels are stored as flat [re, im, re, im, ...] arrays.
void to_json (Json &j, const NetworkScenario &sc);
void from_json (const Json &j, NetworkScenario &sc);

void to_json (Json &j, const VariableState &s);
void from_json (const Json &j, VariableState &s);

void to_json (Json &j, const MetricsReport &m);
void to_json (Json &j, const FeasibilityReport &f);
void to_json (Json &j, const RunResult &r);

/// Debug dump of a subproblem: blocks and per-constraint kind, label and value at x0.
Json describe (const ConvexSubproblem &p);

/// iteration,objective,wallclock_s
void write_objective_csv (const RunResult &r, std::ostream &out);

/// Scenario plus state in one document, as read back by the audit command.
Json solution_document (const NetworkScenario &sc, const RunResult &r);

Json read_json_file (const std::string &path);
void write_json_file (const std::string &path, const Json &j);

}  // namespace hcmec
