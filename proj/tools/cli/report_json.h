// Copyright 2026 The imblens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IMBLENS_TOOLS_CLI_REPORT_JSON_H_
#define IMBLENS_TOOLS_CLI_REPORT_JSON_H_

#include <optional>
#include <span>
#include <string>

#include "imblens/class_stats.h"
#include "imblens/decomposition.h"
#include "imblens/divergence.h"
#include "imblens/probe_trainer.h"
#include "imblens/topk.h"
#include "json.hpp"

namespace imblens::cli {

using nlohmann::json;

json OptionalJson(const std::optional<double>& value);

json ToJson(const AccuracyReport& report);
json ToJson(const ConsistencyReport& report);
json ToJson(const CoverageReport& report);
json ToJson(const InstanceTopK& topk);
json ToJson(const ContributionReport& report);
json ToJson(const FrobeniusReport& report);
json ToJson(const OverlapReport& report);
json ToJson(std::span<const OutcomePartition> partitions);
json ToJson(const TrainTrace& trace);
json ToJson(const MeanCeRatio& ratio);

// Profile with its full vectors plus the top_m ranked views of mean_fe and
// mean_ce as [identity, value] pairs.
json ToJson(const ClassProfile& profile, std::size_t top_m);
json ToJson(const WeightSummary& summary, std::size_t top_m);

std::string SpaceName(Space space);
std::string GroupByName(GroupBy group_by);
std::string FeModeName(FeMode mode);

}  // namespace imblens::cli

#endif  // IMBLENS_TOOLS_CLI_REPORT_JSON_H_
