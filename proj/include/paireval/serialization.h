// Copyright 2026 The Paireval Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// JSON forms of the domain types and the scheduler state. Every FromJson
// throws Error{"parse"} on a missing or mistyped field.

#ifndef PAIREVAL_SERIALIZATION_H_
#define PAIREVAL_SERIALIZATION_H_

#include "json.hpp"
#include "paireval/domain.h"
#include "paireval/scheduler.h"

namespace paireval {

nlohmann::json ToJson(const Method& m);
nlohmann::json ToJson(const ImageRef& image);
nlohmann::json ToJson(const Stimulus& s);
nlohmann::json ToJson(const Question& q);
nlohmann::json ToJson(const Answer& a);
nlohmann::json ToJson(const RaterState& r);
nlohmann::json ToJson(const EloEstimate& e);
nlohmann::json ToJson(const EloFit& fit);
nlohmann::json ToJson(const Judgment& j);
nlohmann::json ToJson(const SchedulerState& state);

Method MethodFromJson(const nlohmann::json& doc);
ImageRef ImageRefFromJson(const nlohmann::json& doc);
Stimulus StimulusFromJson(const nlohmann::json& doc);
Question QuestionFromJson(const nlohmann::json& doc);
Answer AnswerFromJson(const nlohmann::json& doc);
RaterState RaterStateFromJson(const nlohmann::json& doc);
EloEstimate EloEstimateFromJson(const nlohmann::json& doc);
EloFit EloFitFromJson(const nlohmann::json& doc);
Judgment JudgmentFromJson(const nlohmann::json& doc);
SchedulerState SchedulerStateFromJson(const nlohmann::json& doc);

}  // namespace paireval

#endif  // PAIREVAL_SERIALIZATION_H_
